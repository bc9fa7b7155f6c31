//! The two reference experiments.
//!
//! `rates`: random pairs and unit starts, AAMR anchored at the start
//! (`z = x₀`), swept over β; each run is compared against the iteration
//! estimate `log ε / log γ(T_{α,β})`.
//!
//! `compare`: AP, RAP, DR and AAMR at their optimal parameters on the same
//! pairs and starts, summarized per pair by median, max − median, and the
//! coefficient of variation of the iteration counts.
//!
//! Runs are farmed out per pair with rayon; every random draw is keyed by
//! (seed, stream, index) so outputs are byte-identical regardless of the
//! thread schedule.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use aamr_core::methods::{iterate, MethodSpec};
use aamr_core::rates::{gamma_aamr, iteration_bound, method_rate, MethodKind};
use aamr_core::subspace::{random_unit_vector, SubspacePair};

use crate::config::{DimsPolicy, ExperimentConfig};
use crate::error::CliError;
use crate::fileio::{format_float, trace_file_name, write_metadata, write_trace_csv};

/// Methods of the comparison experiment, in output order.
pub const COMPARISON_METHODS: [MethodKind; 4] = [
    MethodKind::Ap,
    MethodKind::Rap,
    MethodKind::Dr,
    MethodKind::Aamr,
];

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-unit seed: independent of thread scheduling.
fn derive_seed(root: u64, stream: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(stream.wrapping_add(splitmix64(index))))
}

/// Draw the pair for `pair_id` under the configured dimension policy.
pub fn draw_pair(cfg: &ExperimentConfig, pair_id: usize) -> Result<SubspacePair, CliError> {
    let pair_seed = derive_seed(cfg.seed, 1, pair_id as u64);
    let (p, q, s) = match cfg.dims {
        DimsPolicy::Fixed { p, q, s } => (p, q, s),
        DimsPolicy::Random { max_dim } => {
            let hi = max_dim.unwrap_or(cfg.n / 3).min(cfg.n - 2).max(2);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2, pair_id as u64));
            loop {
                let a = rng.random_range(1..=hi);
                let b = rng.random_range(1..=hi);
                let (p, q) = (a.min(b), a.max(b));
                if p >= 2 && p + q < cfg.n {
                    let s = rng.random_range(1..p);
                    break (p, q, s);
                }
            }
        }
    };
    Ok(SubspacePair::random_with_floor(
        cfg.n,
        p,
        q,
        s,
        cfg.min_free_angle,
        pair_seed,
    )?)
}

fn start_vector(cfg: &ExperimentConfig, pair_id: usize, start_id: usize) -> nalgebra::DVector<f64> {
    let seed = derive_seed(
        cfg.seed,
        3,
        ((pair_id as u64) << 32) | start_id as u64,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unit_vector(cfg.n, &mut rng)
}

/// One row of `rates.csv`.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub pair_id: usize,
    pub start_id: usize,
    pub theta_f: f64,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub bound: f64,
    pub converged: bool,
}

#[derive(Debug)]
pub struct RateExperiment {
    pub rows: Vec<RateRow>,
    pub pairs: Vec<SubspacePair>,
}

/// Run the rate experiment and write `rates.csv` into the output directory.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateExperiment, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let trace_dir = cfg.output_dir.join("traces");
    if cfg.traces {
        fs::create_dir_all(&trace_dir)?;
    }

    let per_pair: Vec<(SubspacePair, Vec<RateRow>)> = (0..cfg.num_pairs)
        .into_par_iter()
        .map(|pair_id| -> Result<(SubspacePair, Vec<RateRow>), CliError> {
            let pair = draw_pair(cfg, pair_id)?;
            let theta_f = pair.friedrichs();
            let mut rows = Vec::with_capacity(cfg.starts_per_pair * cfg.betas.len());
            for start_id in 0..cfg.starts_per_pair {
                let x0 = start_vector(cfg, pair_id, start_id);
                for &beta in &cfg.betas {
                    let spec = MethodSpec::aamr(cfg.alpha, beta)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    // Anchor at the starting point: z = x0.
                    let trace = iterate(&spec, &pair, &x0, &x0, cfg.epsilon, cfg.max_iter)?;
                    let gamma = gamma_aamr(cfg.alpha, beta, theta_f)?.gamma;
                    let bound = if gamma >= 1.0 {
                        f64::INFINITY
                    } else {
                        iteration_bound(cfg.epsilon, gamma)?
                    };
                    if cfg.traces {
                        let name = trace_file_name(
                            cfg.seed,
                            "aamr",
                            &[("a", cfg.alpha), ("b", beta)],
                            pair_id,
                            start_id,
                        );
                        write_trace_csv(&trace_dir.join(name), &trace, &[])?;
                    }
                    rows.push(RateRow {
                        pair_id,
                        start_id,
                        theta_f,
                        alpha: cfg.alpha,
                        beta,
                        iterations: trace.iterations,
                        bound,
                        converged: trace.converged,
                    });
                }
            }
            Ok((pair, rows))
        })
        .collect::<Result<_, _>>()?;

    let mut pairs = Vec::with_capacity(cfg.num_pairs);
    let mut rows = Vec::new();
    for (pair, mut pair_rows) in per_pair {
        pairs.push(pair);
        rows.append(&mut pair_rows);
    }

    let path = cfg.output_dir.join("rates.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    write_metadata(&mut w, "rates", &cfg.metadata())?;
    writeln!(w, "pair_id,start_id,theta_F,alpha,beta,iterations,bound,converged")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.pair_id,
            r.start_id,
            format_float(r.theta_f),
            format_float(r.alpha),
            format_float(r.beta),
            r.iterations,
            format_float(r.bound),
            r.converged
        )?;
    }
    drop(w);

    Ok(RateExperiment { rows, pairs })
}

/// Per-pair summary row of `comparison.csv`.
#[derive(Debug, Clone)]
pub struct ComparisonSummary {
    pub pair_id: usize,
    pub theta_f: f64,
    pub method: MethodKind,
    pub median_iters: f64,
    pub max_minus_median: f64,
    pub coeff_variation: f64,
}

/// One raw run of `comparison_runs.csv`.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub pair_id: usize,
    pub start_id: usize,
    pub method: MethodKind,
    pub theta_f: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug)]
pub struct ComparisonExperiment {
    pub summaries: Vec<ComparisonSummary>,
    pub runs: Vec<ComparisonRun>,
    pub pairs: Vec<SubspacePair>,
}

/// Median of (implicitly unsorted) samples; even counts average the two
/// central values.
pub fn median(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Population standard deviation over mean; zero for a zero mean.
pub fn coefficient_of_variation(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Run the comparison experiment and write `comparison.csv` plus the raw
/// per-run file `comparison_runs.csv`.
pub fn run_comparison_experiment(cfg: &ExperimentConfig) -> Result<ComparisonExperiment, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;

    type PairOutput = (SubspacePair, Vec<ComparisonSummary>, Vec<ComparisonRun>);
    let per_pair: Vec<PairOutput> = (0..cfg.num_pairs)
        .into_par_iter()
        .map(|pair_id| -> Result<PairOutput, CliError> {
            let pair = draw_pair(cfg, pair_id)?;
            let theta_f = pair.friedrichs();
            let mut runs = Vec::new();
            let mut counts: Vec<Vec<f64>> = vec![Vec::new(); COMPARISON_METHODS.len()];
            for start_id in 0..cfg.starts_per_pair {
                let x0 = start_vector(cfg, pair_id, start_id);
                for (m, &kind) in COMPARISON_METHODS.iter().enumerate() {
                    let (spec, _) = method_rate(kind, theta_f)?;
                    // All methods monitor the shadow against P_{U∩V}(x0);
                    // AAMR additionally anchors at x0.
                    let trace = iterate(&spec, &pair, &x0, &x0, cfg.epsilon, cfg.max_iter)?;
                    counts[m].push(trace.iterations as f64);
                    runs.push(ComparisonRun {
                        pair_id,
                        start_id,
                        method: kind,
                        theta_f,
                        iterations: trace.iterations,
                        converged: trace.converged,
                    });
                }
            }
            let mut summaries = Vec::with_capacity(COMPARISON_METHODS.len());
            for (m, &kind) in COMPARISON_METHODS.iter().enumerate() {
                let med = median(&counts[m]);
                let max = counts[m].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                summaries.push(ComparisonSummary {
                    pair_id,
                    theta_f,
                    method: kind,
                    median_iters: med,
                    max_minus_median: max - med,
                    coeff_variation: coefficient_of_variation(&counts[m]),
                });
            }
            Ok((pair, summaries, runs))
        })
        .collect::<Result<_, _>>()?;

    let mut pairs = Vec::new();
    let mut summaries = Vec::new();
    let mut runs = Vec::new();
    for (pair, mut s, mut r) in per_pair {
        pairs.push(pair);
        summaries.append(&mut s);
        runs.append(&mut r);
    }

    let path = cfg.output_dir.join("comparison.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    write_metadata(&mut w, "compare", &cfg.metadata())?;
    writeln!(
        w,
        "pair_id,theta_F,method,median_iters,max_minus_median,coeff_variation"
    )?;
    for s in &summaries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.pair_id,
            format_float(s.theta_f),
            s.method,
            format_float(s.median_iters),
            format_float(s.max_minus_median),
            format_float(s.coeff_variation)
        )?;
    }
    drop(w);

    let path = cfg.output_dir.join("comparison_runs.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    write_metadata(&mut w, "compare", &cfg.metadata())?;
    writeln!(w, "pair_id,start_id,method,theta_F,iterations,converged")?;
    for r in &runs {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.pair_id,
            r.start_id,
            r.method,
            format_float(r.theta_f),
            r.iterations,
            r.converged
        )?;
    }
    drop(w);

    Ok(ComparisonExperiment {
        summaries,
        runs,
        pairs,
    })
}

/// Desk-scale config used when flags are absent: 20 pairs, 3 starts for
/// `rates`, 10 for `compare`.
pub fn desk_scale(command: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    if command == "compare" {
        cfg.starts_per_pair = 10;
    }
    cfg
}
