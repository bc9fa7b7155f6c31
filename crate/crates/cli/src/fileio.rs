//! Plain-text file formats: subspace pairs, trace CSVs, spectrum dumps.
//!
//! All floats are written with 17 significant digits (`{:.16e}`), enough to
//! round-trip f64 exactly, and all CSVs start with `#`-prefixed metadata
//! lines so a file is self-describing.
//!
//! # Pair file format
//!
//! ```text
//! n p q s
//! frame | bases
//! ...
//! ```
//!
//! With the `frame` variant the header is followed by one line of `p`
//! principal angles (the first `s` must be zero) and `n` rows of the `n`
//! columns of the orthogonal frame `D`; `U` and `V` are reconstructed from
//! `D` and the angles. With the `bases` variant the header is followed by
//! `n` rows × `p` columns spanning `U`, then `n` rows × `q` columns
//! spanning `V`; angles are recomputed on load. Tokens are whitespace
//! separated; lines starting with `#` are comments.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use aamr_core::methods::IterationTrace;
use aamr_core::nalgebra::DMatrix;
use aamr_core::spectrum::Spectrum;
use aamr_core::subspace::{Subspace, SubspacePair, DEFAULT_RANK_TOL};

use crate::error::CliError;

/// 17 significant digits: exact round-trip for f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `# key = value` metadata lines, starting with the command name.
pub fn write_metadata<W: Write>(
    w: &mut W,
    command: &str,
    entries: &[(String, String)],
) -> std::io::Result<()> {
    writeln!(w, "# aamr {command}")?;
    for (key, value) in entries {
        writeln!(w, "# {key} = {value}")?;
    }
    Ok(())
}

fn write_matrix_rows<W: Write>(w: &mut W, m: &DMatrix<f64>) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_float(m[(i, j)])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Serialize a pair: the `frame` variant when the generator frame is
/// available, the `bases` variant otherwise.
pub fn write_pair(path: &Path, pair: &SubspacePair) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "{} {} {} {}",
        pair.ambient_dim(),
        pair.u().dim(),
        pair.v().dim(),
        pair.intersection_dim()
    )?;
    if let Some(frame) = pair.frame() {
        writeln!(w, "frame")?;
        let angles: Vec<String> = pair.angles().iter().map(|&t| format_float(t)).collect();
        writeln!(w, "{}", angles.join(" "))?;
        write_matrix_rows(&mut w, frame)?;
    } else {
        writeln!(w, "bases")?;
        write_matrix_rows(&mut w, pair.u().basis())?;
        write_matrix_rows(&mut w, pair.v().basis())?;
    }
    Ok(())
}

struct TokenReader<R: BufRead> {
    lines: std::io::Lines<R>,
    tokens: Vec<String>,
    cursor: usize,
}

impl<R: BufRead> TokenReader<R> {
    fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            tokens: Vec::new(),
            cursor: 0,
        }
    }

    fn next_line(&mut self) -> Result<Option<String>, CliError> {
        for line in self.lines.by_ref() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim().to_string();
            if !content.is_empty() {
                return Ok(Some(content));
            }
        }
        Ok(None)
    }

    fn next_token(&mut self) -> Result<String, CliError> {
        while self.cursor >= self.tokens.len() {
            match self.next_line()? {
                Some(line) => {
                    self.tokens = line.split_whitespace().map(str::to_string).collect();
                    self.cursor = 0;
                }
                None => return Err(CliError::Usage("unexpected end of pair file".into())),
            }
        }
        let tok = self.tokens[self.cursor].clone();
        self.cursor += 1;
        Ok(tok)
    }

    fn next_usize(&mut self) -> Result<usize, CliError> {
        let tok = self.next_token()?;
        tok.parse()
            .map_err(|_| CliError::Usage(format!("expected integer, got '{tok}'")))
    }

    fn next_f64(&mut self) -> Result<f64, CliError> {
        let tok = self.next_token()?;
        tok.parse()
            .map_err(|_| CliError::Usage(format!("expected float, got '{tok}'")))
    }

    fn read_matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>, CliError> {
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.next_f64()?;
            }
        }
        Ok(m)
    }
}

/// Load a pair file written by [`write_pair`] (or by hand).
pub fn read_pair(path: &Path) -> Result<SubspacePair, CliError> {
    let mut r = TokenReader::new(BufReader::new(File::open(path)?));
    let n = r.next_usize()?;
    let p = r.next_usize()?;
    let q = r.next_usize()?;
    let s = r.next_usize()?;
    let variant = r.next_token()?;
    let pair = match variant.as_str() {
        "frame" => {
            let mut angles = Vec::with_capacity(p);
            for _ in 0..p {
                angles.push(r.next_f64()?);
            }
            for (k, &theta) in angles.iter().take(s).enumerate() {
                if theta.abs() > 1e-12 {
                    return Err(CliError::Usage(format!(
                        "angle {k} should be zero for s = {s}, got {theta}"
                    )));
                }
            }
            let frame = r.read_matrix(n, n)?;
            SubspacePair::from_frame(frame, p, q, s, &angles[s..])
                .map_err(|e| CliError::Usage(e.to_string()))?
        }
        "bases" => {
            let u = Subspace::from_spanning(&r.read_matrix(n, p)?, DEFAULT_RANK_TOL)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let v = Subspace::from_spanning(&r.read_matrix(n, q)?, DEFAULT_RANK_TOL)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let pair = SubspacePair::from_subspaces(u, v)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if pair.intersection_dim() != s {
                return Err(CliError::Usage(format!(
                    "header says s = {s} but the bases intersect in dimension {}",
                    pair.intersection_dim()
                )));
            }
            pair
        }
        other => {
            return Err(CliError::Usage(format!(
                "expected 'frame' or 'bases', got '{other}'"
            )))
        }
    };
    if pair.ambient_dim() != n || pair.u().dim() != p.min(q) || pair.v().dim() != p.max(q) {
        return Err(CliError::Usage("pair dimensions do not match header".into()));
    }
    Ok(pair)
}

/// Per-run trace CSV: `k,residual,shadow_norm`.
pub fn write_trace_csv(
    path: &Path,
    trace: &IterationTrace,
    meta: &[(String, String)],
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_metadata(&mut w, "trace", meta)?;
    writeln!(w, "k,residual,shadow_norm")?;
    for (k, (r, s)) in trace
        .residuals
        .iter()
        .zip(trace.shadow_norms.iter())
        .enumerate()
    {
        writeln!(w, "{k},{},{}", format_float(*r), format_float(*s))?;
    }
    Ok(())
}

/// File name for one run's trace, keyed by seed, method and parameters.
pub fn trace_file_name(seed: u64, method: &str, params: &[(&str, f64)], pair_id: usize, start_id: usize) -> String {
    let mut name = format!("trace_s{seed}_{method}");
    for (key, value) in params {
        name.push_str(&format!("_{key}{value}"));
    }
    name.push_str(&format!("_p{pair_id}_r{start_id}.csv"));
    name
}

/// Spectrum dump CSV: `re,im,multiplicity`, bucketing eigenvalues at
/// the given tolerance.
pub fn write_spectrum_csv(
    path: &Path,
    spectrum: &Spectrum,
    bucket_tol: f64,
    meta: &[(String, String)],
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_metadata(&mut w, "spectrum", meta)?;
    writeln!(w, "re,im,multiplicity")?;
    for (value, count) in spectrum.multiplicities(bucket_tol) {
        writeln!(
            w,
            "{},{},{count}",
            format_float(value.re),
            format_float(value.im)
        )?;
    }
    Ok(())
}
