//! Independent spectral verification of the rate formulas.
//!
//! In a principal-vector frame the AAMR iteration matrix block-diagonalizes
//! into one 2×2 block per principal angle plus scalar tails, so its full
//! spectrum is available without a general eigensolver. Two routes compute
//! it:
//!
//! * [`closed_form_spectrum`] evaluates the eigenvalue formula
//!   `λ_{k,r} = 1 + 2αβ(βc_k² − 1 ± c_k √(β²c_k² − 2β + 1))`,
//! * [`block_spectrum`] assembles each 2×2 block and solves its
//!   characteristic quadratic from trace and determinant.
//!
//! The two must agree as multisets; `γ` extracted from either must match
//! the closed-form rate. [`power_iteration_gamma`] adds a third,
//! formula-free estimate.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::subspace::{intersection, random_unit_vector, SubspacePair, DEFAULT_ANGLE_TOL};

/// Eigenvalues with modulus within this distance of 1 are treated as the
/// fixed-point eigenvalue when extracting `γ`.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-9;

/// Eigenvalue multiset of an `n × n` iteration matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
    ambient_dim: usize,
}

fn sort_complex(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("eigenvalues are finite")
    });
}

impl Spectrum {
    /// Wrap an explicit eigenvalue list; the total multiplicity must equal
    /// the ambient dimension.
    pub fn new(mut eigenvalues: Vec<Complex64>, ambient_dim: usize) -> Result<Self> {
        if eigenvalues.len() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: eigenvalues.len(),
            });
        }
        sort_complex(&mut eigenvalues);
        Ok(Self {
            eigenvalues,
            ambient_dim,
        })
    }

    /// Eigenvalues sorted by (real, imaginary), repeated per multiplicity.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// Distinct eigenvalues with multiplicities, bucketing values whose real
    /// and imaginary parts agree within `tol`.
    pub fn multiplicities(&self, tol: f64) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for &l in &self.eigenvalues {
            match out.last_mut() {
                Some((rep, count))
                    if math::abs(l.re - rep.re) <= tol && math::abs(l.im - rep.im) <= tol =>
                {
                    *count += 1;
                }
                _ => out.push((l, 1)),
            }
        }
        out
    }
}

fn check_aamr_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            range: "]0, 1]",
        });
    }
    if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "beta",
            value: beta,
            range: "]0, 1[",
        });
    }
    Ok(())
}

/// Dense `T_{α,β} = (1−α)I + α(2βP_V − I)(2βP_U − I)` assembled from the
/// projector matrices. Agrees with the matrix-free map at `z = 0`.
pub fn aamr_matrix(pair: &SubspacePair, alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
    check_aamr_params(alpha, beta)?;
    let n = pair.ambient_dim();
    let id = DMatrix::<f64>::identity(n, n);
    let ru = pair.u().projector_matrix() * (2.0 * beta) - &id;
    let rv = pair.v().projector_matrix() * (2.0 * beta) - &id;
    Ok(&id * (1.0 - alpha) + (rv * ru) * alpha)
}

/// The oracle needs the principal frame to exist: generated pairs carry it,
/// ingested pairs must pass the rebuild gate, and `p + q < n` is required
/// (pad the ambient dimension otherwise).
fn oracle_guard(pair: &SubspacePair) -> Result<()> {
    let (n, p, q) = (pair.ambient_dim(), pair.u().dim(), pair.v().dim());
    if p + q >= n {
        return Err(Error::AmbientTooSmall { n, p, q });
    }
    if pair.frame().is_none() {
        pair.principal_frame()?;
    }
    Ok(())
}

/// Spectrum from the eigenvalue formula: for each principal angle cosine
/// `c_k`, the pair `λ_{k,r} = 1 + 2αβ(βc_k² − 1 + (−1)^r c_k √(β²c_k² − 2β + 1))`
/// (complex conjugates when the radicand is negative), plus `1 − 2αβ` with
/// multiplicity `q − p` and `1` with multiplicity `n − p − q`.
pub fn closed_form_spectrum(pair: &SubspacePair, alpha: f64, beta: f64) -> Result<Spectrum> {
    check_aamr_params(alpha, beta)?;
    oracle_guard(pair)?;
    let (n, p, q) = (pair.ambient_dim(), pair.u().dim(), pair.v().dim());
    let two_ab = 2.0 * alpha * beta;
    let mut eig = Vec::with_capacity(n);
    for &theta in pair.angles() {
        let c = math::cos(theta);
        let radicand = beta * beta * c * c - 2.0 * beta + 1.0;
        let base = 1.0 + two_ab * (beta * c * c - 1.0);
        if radicand >= 0.0 {
            let spread = two_ab * c * math::sqrt(radicand);
            eig.push(Complex64::new(base - spread, 0.0));
            eig.push(Complex64::new(base + spread, 0.0));
        } else {
            let spread = two_ab * c * math::sqrt(-radicand);
            eig.push(Complex64::new(base, -spread));
            eig.push(Complex64::new(base, spread));
        }
    }
    for _ in 0..q - p {
        eig.push(Complex64::new(1.0 - two_ab, 0.0));
    }
    for _ in 0..n - p - q {
        eig.push(Complex64::new(1.0, 0.0));
    }
    Spectrum::new(eig, n)
}

/// Spectrum from the 2×2 blocks of the iteration matrix in the principal
/// frame. For each angle the block
///
/// ```text
/// B_k = [ 2αβ(2β−1)c_k² + (1−2αβ)    −2αβ c_k s_k              ]
///       [ 2αβ(2β−1)c_k s_k            2αβ c_k² + (1−2αβ)       ]
/// ```
///
/// contributes the two roots of `λ² − tr(B_k) λ + det(B_k)`; the tails are
/// as in [`closed_form_spectrum`]. This route never evaluates the
/// eigenvalue formula, which makes it an independent oracle for it.
pub fn block_spectrum(pair: &SubspacePair, alpha: f64, beta: f64) -> Result<Spectrum> {
    check_aamr_params(alpha, beta)?;
    oracle_guard(pair)?;
    let (n, p, q) = (pair.ambient_dim(), pair.u().dim(), pair.v().dim());
    let two_ab = 2.0 * alpha * beta;
    let mut eig = Vec::with_capacity(n);
    for &theta in pair.angles() {
        let (c, s) = (math::cos(theta), math::sin(theta));
        let b11 = two_ab * (2.0 * beta - 1.0) * c * c + (1.0 - two_ab);
        let b12 = -two_ab * c * s;
        let b21 = two_ab * (2.0 * beta - 1.0) * c * s;
        let b22 = two_ab * c * c + (1.0 - two_ab);
        let half_trace = 0.5 * (b11 + b22);
        let det = b11 * b22 - b12 * b21;
        let disc = half_trace * half_trace - det;
        if disc >= 0.0 {
            let root = math::sqrt(disc);
            eig.push(Complex64::new(half_trace - root, 0.0));
            eig.push(Complex64::new(half_trace + root, 0.0));
        } else {
            let root = math::sqrt(-disc);
            eig.push(Complex64::new(half_trace, -root));
            eig.push(Complex64::new(half_trace, root));
        }
    }
    for _ in 0..q - p {
        eig.push(Complex64::new(1.0 - two_ab, 0.0));
    }
    for _ in 0..n - p - q {
        eig.push(Complex64::new(1.0, 0.0));
    }
    Spectrum::new(eig, n)
}

/// `γ(A)`: the largest modulus among eigenvalues away from 1, with 0 as the
/// floor. Eigenvalues with `|λ − 1| ≤ tol` count as the fixed-point
/// eigenvalue and are excluded.
pub fn gamma_numeric(spectrum: &Spectrum, tol: f64) -> f64 {
    spectrum
        .eigenvalues()
        .iter()
        .filter(|l| (*l - Complex64::new(1.0, 0.0)).norm() > tol)
        .map(|l| l.norm())
        .fold(0.0, f64::max)
}

/// Formula-free estimate of `γ(T)`: the asymptotic growth ratio of
/// `‖(T − P_fix)^k v‖` for a random start, where `P_fix` projects onto
/// `U⊥ ∩ V⊥`. Returns the geometric mean of the last 20 step ratios.
///
/// A smoke test, not a precision oracle: it is accurate only when the
/// subdominant eigenvalue is semisimple and real-dominant; complex
/// subdominant pairs make the ratios oscillate.
pub fn power_iteration_gamma(
    t: &DMatrix<f64>,
    pair: &SubspacePair,
    iters: usize,
    seed: u64,
) -> Result<f64> {
    let n = pair.ambient_dim();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.nrows(),
        });
    }
    if iters < 21 {
        return Err(Error::InvalidArgument("power iteration needs at least 21 steps"));
    }
    let fix = intersection(
        &pair.u().orthogonal_complement(),
        &pair.v().orthogonal_complement(),
        DEFAULT_ANGLE_TOL,
    )?;
    let a = t - fix.projector_matrix();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: DVector<f64> = random_unit_vector(n, &mut rng);
    let mut ratios = Vec::with_capacity(iters);
    for _ in 0..iters {
        let w = &a * &v;
        let norm = w.norm();
        if norm < 1e-150 {
            // The deflated operator annihilated the vector: γ = 0.
            return Ok(0.0);
        }
        ratios.push(norm);
        v = w / norm;
    }
    let tail = &ratios[ratios.len() - 20..];
    let log_mean = tail.iter().map(|&r| math::ln(r)).sum::<f64>() / tail.len() as f64;
    let estimate = math::exp(log_mean);
    if estimate >= 1.0 - 1e-12 {
        return Err(Error::NotConvergent { ratio: estimate });
    }
    Ok(estimate)
}

/// Convenience: `γ` of the AAMR operator on `pair` via the block oracle.
pub fn gamma_from_blocks(pair: &SubspacePair, alpha: f64, beta: f64) -> Result<f64> {
    Ok(gamma_numeric(&block_spectrum(pair, alpha, beta)?, DEFAULT_GAMMA_TOL))
}
