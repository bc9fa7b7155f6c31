//! Experiment configuration: defaults, `key = value` config files, and the
//! metadata echoed into every output CSV.
//!
//! Precedence is defaults < config file < explicit flags; the file format
//! is one `key = value` per line with `#` comments. Recognized keys match
//! the field names: `n`, `dims`, `num_pairs`, `starts_per_pair`, `epsilon`,
//! `max_iter`, `alpha`, `betas`, `seed`, `output_dir`, `min_free_angle`,
//! `traces`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::fileio::format_float;

/// Stopping tolerance of the reference experiments.
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;

/// How `(p, q, s)` are chosen for each random pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimsPolicy {
    /// `p`, `q` uniform in `[1, max_dim]` (default `n/3`), reordered to
    /// `p ≤ q`, redrawn until `p ≥ 2` and `p + q < n`; `s` uniform in
    /// `[1, p−1]`.
    Random { max_dim: Option<usize> },
    /// Fixed dimensions for every pair.
    Fixed { p: usize, q: usize, s: usize },
}

impl DimsPolicy {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let text = text.trim();
        if text == "random" {
            return Ok(DimsPolicy::Random { max_dim: None });
        }
        if let Some(rest) = text.strip_prefix("random:") {
            let max_dim = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad dims '{text}'")))?;
            return Ok(DimsPolicy::Random {
                max_dim: Some(max_dim),
            });
        }
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "dims must be 'random', 'random:<max>' or 'p,q,s', got '{text}'"
            )));
        }
        let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.parse::<usize>()).collect();
        match nums {
            Ok(v) => Ok(DimsPolicy::Fixed {
                p: v[0],
                q: v[1],
                s: v[2],
            }),
            Err(_) => Err(CliError::Usage(format!("bad dims '{text}'"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DimsPolicy::Random { max_dim: None } => "random".to_string(),
            DimsPolicy::Random { max_dim: Some(m) } => format!("random:{m}"),
            DimsPolicy::Fixed { p, q, s } => format!("{p},{q},{s}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Ambient dimension.
    pub n: usize,
    pub dims: DimsPolicy,
    pub num_pairs: usize,
    pub starts_per_pair: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Relaxation parameter of the rate experiment.
    pub alpha: f64,
    /// β values swept by the rate experiment.
    pub betas: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Floor for randomly drawn free principal angles.
    pub min_free_angle: f64,
    /// Dump per-run trace CSVs (rates experiment).
    pub traces: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 50,
            dims: DimsPolicy::Random { max_dim: None },
            num_pairs: 20,
            starts_per_pair: 3,
            epsilon: DEFAULT_EPSILON,
            max_iter: DEFAULT_MAX_ITER,
            alpha: 0.8,
            betas: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("out"),
            min_free_angle: aamr_core::subspace::DEFAULT_MIN_FREE_ANGLE,
            traces: false,
        }
    }
}

impl ExperimentConfig {
    /// Apply `key = value` lines from a config file on top of the current
    /// values. Unknown keys are usage errors.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                CliError::Usage(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad value for {key}: '{value}'")))
        }
        match key {
            "n" => self.n = parse(key, value)?,
            "dims" => self.dims = DimsPolicy::parse(value)?,
            "num_pairs" => self.num_pairs = parse(key, value)?,
            "starts_per_pair" => self.starts_per_pair = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "betas" => {
                let betas: Result<Vec<f64>, _> =
                    value.split(',').map(|b| b.trim().parse::<f64>()).collect();
                self.betas = betas
                    .map_err(|_| CliError::Usage(format!("bad value for betas: '{value}'")))?;
            }
            "seed" => self.seed = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "min_free_angle" => self.min_free_angle = parse(key, value)?,
            "traces" => self.traces = parse(key, value)?,
            _ => return Err(CliError::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.num_pairs < 1 || self.starts_per_pair < 1 {
            return Err(CliError::Usage(
                "num_pairs and starts_per_pair must be at least 1".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Usage("epsilon must lie in ]0, 1[".into()));
        }
        if self.max_iter < 1 {
            return Err(CliError::Usage("max_iter must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CliError::Usage("alpha must lie in ]0, 1]".into()));
        }
        if self.betas.is_empty() || self.betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(CliError::Usage("betas must be a nonempty list in ]0, 1[".into()));
        }
        if let DimsPolicy::Fixed { p, q, s } = self.dims {
            if !(1 <= s && s < p && p <= q && p + q < self.n) {
                return Err(CliError::Usage(format!(
                    "fixed dims must satisfy 1 ≤ s < p ≤ q and p + q < n, got p={p}, q={q}, s={s}, n={}",
                    self.n
                )));
            }
        }
        if self.n < 4 {
            return Err(CliError::Usage("n must be at least 4".into()));
        }
        Ok(())
    }

    /// Key/value metadata echoed as `#`-prefixed header lines.
    pub fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("seed".into(), self.seed.to_string()),
            ("n".into(), self.n.to_string()),
            ("dims".into(), self.dims.describe()),
            ("num_pairs".into(), self.num_pairs.to_string()),
            ("starts_per_pair".into(), self.starts_per_pair.to_string()),
            ("epsilon".into(), format_float(self.epsilon)),
            ("max_iter".into(), self.max_iter.to_string()),
            ("alpha".into(), format_float(self.alpha)),
            (
                "betas".into(),
                self.betas
                    .iter()
                    .map(|b| format_float(*b))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("min_free_angle".into(), format_float(self.min_free_angle)),
        ]
    }
}
