//! Rate-surface export: γ(α, β, θ_F) with branch, thresholds and the
//! parameter-region label (D1/D2/D3) used by the optimality analysis.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use aamr_core::rates::gamma_aamr;

use crate::error::CliError;
use crate::fileio::{format_float, write_metadata};

/// Region of the (α, β) square at a given Friedrichs angle, with
/// `s_F = sin θ_F`:
///
/// * `D1`: `β < 1/(1+s_F)` — angle-driven rate,
/// * `D3`: `β > 1/(1+s_F²)` and `α < (1−β(1+s_F²)) / (β(4(1−β)² − s_F²))`
///   — angle-independent rate,
/// * `D2`: everything else — the complex-pair regime.
pub fn region_label(alpha: f64, beta: f64, theta_f: f64) -> &'static str {
    let s = theta_f.sin();
    let s2 = s * s;
    if beta < 1.0 / (1.0 + s) {
        "D1"
    } else if beta <= 1.0 / (1.0 + s2) {
        "D2"
    } else {
        let threshold = (1.0 - beta * (1.0 + s2)) / (beta * (4.0 * (1.0 - beta) * (1.0 - beta) - s2));
        if alpha < threshold {
            "D3"
        } else {
            "D2"
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceRow {
    pub alpha: f64,
    pub beta: f64,
    pub theta_f: f64,
    pub gamma: f64,
    pub branch: &'static str,
    pub attained: bool,
    pub c_hat: f64,
    pub c_thresh: f64,
    pub region: &'static str,
}

/// Evaluate the surface on the β × θ grid at a fixed α.
pub fn rate_surface(
    alpha: f64,
    beta_grid: &[f64],
    theta_grid: &[f64],
) -> Result<Vec<SurfaceRow>, CliError> {
    if beta_grid.is_empty() || theta_grid.is_empty() {
        return Err(CliError::Usage("beta and theta grids must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(beta_grid.len() * theta_grid.len());
    for &theta_f in theta_grid {
        for &beta in beta_grid {
            let report =
                gamma_aamr(alpha, beta, theta_f).map_err(|e| CliError::Usage(e.to_string()))?;
            rows.push(SurfaceRow {
                alpha,
                beta,
                theta_f,
                gamma: report.gamma,
                branch: report.branch.name(),
                attained: report.attained,
                c_hat: report.c_hat,
                c_thresh: report.c_thresh,
                region: region_label(alpha, beta, theta_f),
            });
        }
    }
    Ok(rows)
}

/// Write `surface.csv` into `output_dir`.
pub fn emit_rate_surface(
    alpha: f64,
    beta_grid: &[f64],
    theta_grid: &[f64],
    output_dir: &Path,
    meta: &[(String, String)],
) -> Result<Vec<SurfaceRow>, CliError> {
    let rows = rate_surface(alpha, beta_grid, theta_grid)?;
    fs::create_dir_all(output_dir)?;
    let mut w = BufWriter::new(File::create(output_dir.join("surface.csv"))?);
    write_metadata(&mut w, "surface", meta)?;
    writeln!(
        w,
        "alpha,beta,theta_F,gamma,branch,attained,c_hat,c_thresh,region"
    )?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            format_float(r.alpha),
            format_float(r.beta),
            format_float(r.theta_f),
            format_float(r.gamma),
            r.branch,
            r.attained,
            format_float(r.c_hat),
            format_float(r.c_thresh),
            r.region
        )?;
    }
    Ok(rows)
}

/// Parse `start:stop:step` (inclusive endpoints, within rounding) or a
/// comma-separated list into a grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "grid must be start:stop:step, got '{text}'"
            )));
        }
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        let v = nums.map_err(|_| CliError::Usage(format!("bad grid '{text}'")))?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || stop < start {
            return Err(CliError::Usage(format!("bad grid range '{text}'")));
        }
        let count = ((stop - start) / step + 0.5).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    let nums: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    nums.map_err(|_| CliError::Usage(format!("bad grid '{text}'")))
}
