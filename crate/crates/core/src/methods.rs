//! Matrix-free iterations of the five projection methods.
//!
//! All methods solve the best approximation problem: given an anchor `z`,
//! find `P_{U∩V}(z)`. AP, RAP, GAP and DR iterate in the original space and
//! are conventionally started at `x_0 = z`; AAMR iterates the operator of
//! the shifted sets `U − z`, `V − z` and reads the solution off the shadow
//! `P_U(x_k + z)`. The stopping criterion compares the shadow to
//! `P_{U∩V}(z)`, computed once per run.

use alloc::vec::Vec;
use core::cmp::min;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::math;
use crate::subspace::{intersection, SubspacePair, DEFAULT_ANGLE_TOL};

fn check_param(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    hi_inclusive: bool,
    range: &'static str,
) -> Result<()> {
    let ok = value.is_finite()
        && value > lo
        && if hi_inclusive { value <= hi } else { value < hi };
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value, range })
    }
}

/// One of the five projection methods with its parameters.
///
/// Admissible ranges: `α ∈ ]0, 1]` for GAP, DR and AAMR, `α ∈ ]0, 2[` for
/// RAP (its optimal relaxation exceeds 1), `α₁, α₂ ∈ ]0, 2]`, `β ∈ ]0, 1[`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    Ap,
    Rap { alpha: f64 },
    Gap { alpha: f64, alpha1: f64, alpha2: f64 },
    Dr { alpha: f64 },
    Aamr { alpha: f64, beta: f64 },
}

impl MethodSpec {
    pub fn ap() -> Self {
        MethodSpec::Ap
    }

    pub fn rap(alpha: f64) -> Result<Self> {
        check_param("alpha", alpha, 0.0, 2.0, false, "]0, 2[")?;
        Ok(MethodSpec::Rap { alpha })
    }

    pub fn gap(alpha: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        check_param("alpha", alpha, 0.0, 1.0, true, "]0, 1]")?;
        check_param("alpha1", alpha1, 0.0, 2.0, true, "]0, 2]")?;
        check_param("alpha2", alpha2, 0.0, 2.0, true, "]0, 2]")?;
        Ok(MethodSpec::Gap {
            alpha,
            alpha1,
            alpha2,
        })
    }

    pub fn dr(alpha: f64) -> Result<Self> {
        check_param("alpha", alpha, 0.0, 1.0, true, "]0, 1]")?;
        Ok(MethodSpec::Dr { alpha })
    }

    pub fn aamr(alpha: f64, beta: f64) -> Result<Self> {
        check_param("alpha", alpha, 0.0, 1.0, true, "]0, 1]")?;
        check_param("beta", beta, 0.0, 1.0, false, "]0, 1[")?;
        Ok(MethodSpec::Aamr { alpha, beta })
    }

    /// Re-check the parameter ranges (guards values built by struct literal).
    pub fn validate(&self) -> Result<()> {
        match *self {
            MethodSpec::Ap => Ok(()),
            MethodSpec::Rap { alpha } => Self::rap(alpha).map(|_| ()),
            MethodSpec::Gap {
                alpha,
                alpha1,
                alpha2,
            } => Self::gap(alpha, alpha1, alpha2).map(|_| ()),
            MethodSpec::Dr { alpha } => Self::dr(alpha).map(|_| ()),
            MethodSpec::Aamr { alpha, beta } => Self::aamr(alpha, beta).map(|_| ()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Ap => "ap",
            MethodSpec::Rap { .. } => "rap",
            MethodSpec::Gap { .. } => "gap",
            MethodSpec::Dr { .. } => "dr",
            MethodSpec::Aamr { .. } => "aamr",
        }
    }

    /// AAMR is the only method whose step depends on the anchor `z`.
    pub fn uses_anchor(&self) -> bool {
        matches!(self, MethodSpec::Aamr { .. })
    }
}

/// One application of `T_{U−z, V−z, α, β}` in expanded matrix-free form:
///
/// `x + 2αβ (2β P_V P_U(x+z) + (1−2β) P_V z − P_V x − P_U(x+z))`
///
/// Exactly four subspace projections per call.
pub fn aamr_map(
    pair: &SubspacePair,
    alpha: f64,
    beta: f64,
    z: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_param("alpha", alpha, 0.0, 1.0, true, "]0, 1]")?;
    check_param("beta", beta, 0.0, 1.0, false, "]0, 1[")?;
    let pu = pair.u().project(&(x + z))?;
    let pv_pu = pair.v().project(&pu)?;
    let pv_z = pair.v().project(z)?;
    let pv_x = pair.v().project(x)?;
    let inner = pv_pu * (2.0 * beta) + pv_z * (1.0 - 2.0 * beta) - pv_x - pu;
    Ok(x + inner * (2.0 * alpha * beta))
}

/// One step of the selected method. Only AAMR reads the anchor `z`.
pub fn method_step(
    spec: &MethodSpec,
    pair: &SubspacePair,
    z: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    spec.validate()?;
    match *spec {
        MethodSpec::Ap => pair.v().project(&pair.u().project(x)?),
        MethodSpec::Rap { alpha } => {
            let ap = pair.v().project(&pair.u().project(x)?)?;
            Ok(x * (1.0 - alpha) + ap * alpha)
        }
        MethodSpec::Gap {
            alpha,
            alpha1,
            alpha2,
        } => {
            let inner = pair.u().project(x)? * alpha2 + x * (1.0 - alpha2);
            let outer = pair.v().project(&inner)? * alpha1 + inner * (1.0 - alpha1);
            Ok(x * (1.0 - alpha) + outer * alpha)
        }
        MethodSpec::Dr { alpha } => {
            let ru = pair.u().project(x)? * 2.0 - x;
            let rv = pair.v().project(&ru)? * 2.0 - ru;
            Ok(x * (1.0 - alpha) + rv * alpha)
        }
        MethodSpec::Aamr { alpha, beta } => aamr_map(pair, alpha, beta, z, x),
    }
}

/// The monitored point: `P_U(x_k + z)` for AAMR, `P_U(x_k)` for the methods
/// that iterate in the original space.
pub fn shadow(
    spec: &MethodSpec,
    pair: &SubspacePair,
    z: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    if spec.uses_anchor() {
        pair.u().project(&(x + z))
    } else {
        pair.u().project(x)
    }
}

/// Options for [`iterate_with_options`].
#[derive(Debug, Clone, Copy)]
pub struct IterateOptions {
    /// Stop when `‖shadow_k − P_{U∩V}(z)‖ < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Keep full iterate and shadow vectors (bounded by `store_cap`).
    pub store_vectors: bool,
    pub store_cap: usize,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            max_iter: 100_000,
            store_vectors: false,
            store_cap: 10_000,
        }
    }
}

/// Record of one run. Residuals are recorded at step 0 (before any step) and
/// after every step, so `residuals.len() == iterations + 1`.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// `‖shadow_k − P_{U∩V}(z)‖` for `k = 0, …, iterations`.
    pub residuals: Vec<f64>,
    /// `‖shadow_k‖` alongside each residual.
    pub shadow_norms: Vec<f64>,
    /// Full iterates, kept only when requested (and capped).
    pub iterates: Option<Vec<DVector<f64>>>,
    /// Full shadow points, kept only when requested (and capped).
    pub shadows: Option<Vec<DVector<f64>>>,
    /// Number of steps taken.
    pub iterations: usize,
    /// Whether the final residual is below epsilon.
    pub converged: bool,
    /// The last iterate `x_k`.
    pub final_iterate: DVector<f64>,
    /// Geometric-mean ratio of the tail residuals (default rate estimate).
    pub empirical_rate: Option<f64>,
    /// Least-squares slope of `log residual` over the same tail.
    pub empirical_rate_lsq: Option<f64>,
}

/// Run `spec` from `x0` until the shadow is within `epsilon` of
/// `P_{U∩V}(z)` or `max_iter` steps were taken. Exhausting `max_iter` is not
/// an error: the trace comes back with `converged = false`.
pub fn iterate(
    spec: &MethodSpec,
    pair: &SubspacePair,
    z: &DVector<f64>,
    x0: &DVector<f64>,
    epsilon: f64,
    max_iter: usize,
) -> Result<IterationTrace> {
    iterate_with_options(
        spec,
        pair,
        z,
        x0,
        &IterateOptions {
            epsilon,
            max_iter,
            ..IterateOptions::default()
        },
    )
}

pub fn iterate_with_options(
    spec: &MethodSpec,
    pair: &SubspacePair,
    z: &DVector<f64>,
    x0: &DVector<f64>,
    opts: &IterateOptions,
) -> Result<IterationTrace> {
    spec.validate()?;
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(Error::ParameterOutOfRange {
            name: "epsilon",
            value: opts.epsilon,
            range: "]0, ∞[",
        });
    }
    if opts.max_iter < 1 {
        return Err(Error::InvalidArgument("max_iter must be at least 1"));
    }
    let target = intersection(pair.u(), pair.v(), DEFAULT_ANGLE_TOL)?.project(z)?;

    let mut residuals = Vec::new();
    let mut shadow_norms = Vec::new();
    let mut iterates = opts.store_vectors.then(Vec::new);
    let mut shadows = opts.store_vectors.then(Vec::new);

    let mut x = x0.clone();
    let record = |x: &DVector<f64>,
                      residuals: &mut Vec<f64>,
                      shadow_norms: &mut Vec<f64>,
                      iterates: &mut Option<Vec<DVector<f64>>>,
                      shadows: &mut Option<Vec<DVector<f64>>>|
     -> Result<f64> {
        let sh = shadow(spec, pair, z, x)?;
        let r = (&sh - &target).norm();
        residuals.push(r);
        shadow_norms.push(sh.norm());
        if let (Some(xs), Some(shs)) = (iterates.as_mut(), shadows.as_mut()) {
            if xs.len() < opts.store_cap {
                xs.push(x.clone());
                shs.push(sh);
            }
        }
        Ok(r)
    };

    let mut r = record(&x, &mut residuals, &mut shadow_norms, &mut iterates, &mut shadows)?;
    let mut iterations = 0;
    while r >= opts.epsilon && iterations < opts.max_iter {
        x = method_step(spec, pair, z, &x)?;
        iterations += 1;
        r = record(&x, &mut residuals, &mut shadow_norms, &mut iterates, &mut shadows)?;
    }

    let empirical_rate = tail_geometric_rate(&residuals, iterations);
    let empirical_rate_lsq = tail_lsq_rate(&residuals, iterations);
    Ok(IterationTrace {
        residuals,
        shadow_norms,
        iterates,
        shadows,
        iterations,
        converged: r < opts.epsilon,
        final_iterate: x,
        empirical_rate,
        empirical_rate_lsq,
    })
}

/// Geometric-mean ratio over the last `min(50, iterations/2)` residual
/// steps. Robust to a single stagnant step; `None` when the tail is empty or
/// starts at zero.
pub fn tail_geometric_rate(residuals: &[f64], iterations: usize) -> Option<f64> {
    let m = min(50, iterations / 2);
    if m < 1 || residuals.len() < m + 1 {
        return None;
    }
    let last = residuals.len() - 1;
    let (a, b) = (residuals[last - m], residuals[last]);
    if !(a > 0.0) {
        return None;
    }
    if b == 0.0 {
        return Some(0.0);
    }
    Some(math::powf(b / a, 1.0 / m as f64))
}

/// Least-squares slope of `log residual` over the same tail window as
/// [`tail_geometric_rate`].
pub fn tail_lsq_rate(residuals: &[f64], iterations: usize) -> Option<f64> {
    let m = min(50, iterations / 2);
    if m < 1 || residuals.len() < m + 1 {
        return None;
    }
    let last = residuals.len() - 1;
    let pts: Vec<(f64, f64)> = (last - m..=last)
        .filter(|&k| residuals[k] > 0.0)
        .map(|k| (k as f64, math::ln(residuals[k])))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean_k = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_l = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_l)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mean_k) * (p.0 - mean_k)).sum();
    if var == 0.0 {
        return None;
    }
    Some(math::exp(cov / var))
}

/// Residuals certifying that `x_inf` is the limit of the AAMR iteration
/// started at `x0` with anchor `z`.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointDiagnostics {
    /// `‖T_{U−z,V−z,α,β}(x_inf) − x_inf‖`.
    pub fixed_point_residual: f64,
    /// `max_w |⟨x_inf − x0, w⟩|` over an orthonormal basis of `U⊥ ∩ V⊥`;
    /// zero exactly when `x_inf` is the projection of `x0` onto the fixed
    /// point set (a translate of `U⊥ ∩ V⊥`).
    pub normal_component: f64,
    /// `‖P_U(x_inf + z) − P_{U∩V}(z)‖`.
    pub shadow_gap: f64,
}

pub fn fixed_point_diagnostics(
    pair: &SubspacePair,
    alpha: f64,
    beta: f64,
    z: &DVector<f64>,
    x0: &DVector<f64>,
    x_inf: &DVector<f64>,
) -> Result<FixedPointDiagnostics> {
    let mapped = aamr_map(pair, alpha, beta, z, x_inf)?;
    let fixed_point_residual = (&mapped - x_inf).norm();

    let fix_directions = intersection(
        &pair.u().orthogonal_complement(),
        &pair.v().orthogonal_complement(),
        DEFAULT_ANGLE_TOL,
    )?;
    let normal_component = if fix_directions.dim() == 0 {
        0.0
    } else {
        fix_directions.basis().tr_mul(&(x_inf - x0)).amax()
    };

    let meet = intersection(pair.u(), pair.v(), DEFAULT_ANGLE_TOL)?;
    let shadow_gap = (pair.u().project(&(x_inf + z))? - meet.project(z)?).norm();

    Ok(FixedPointDiagnostics {
        fixed_point_residual,
        normal_component,
        shadow_gap,
    })
}

/// Maximal deviations over `steps` iterations between the AAMR run (started
/// at `x_0 = 0`, anchor `z`) and the GAP run with `α₁ = α₂ = 2β` started at
/// `z_0 = z`:
///
/// `dev_u = max_k ‖P_U(x_k + z) − P_U(z_k)‖`,
/// `dev_v = max_k ‖P_V(x_k) − (2β−1) P_V(z_k − z)‖`.
///
/// Both vanish in exact arithmetic; the shadow sequences coincide.
#[derive(Debug, Clone, Copy)]
pub struct GapAamrDeviation {
    pub dev_u: f64,
    pub dev_v: f64,
}

pub fn gap_aamr_equivalence(
    pair: &SubspacePair,
    z: &DVector<f64>,
    alpha: f64,
    beta: f64,
    steps: usize,
) -> Result<GapAamrDeviation> {
    let aamr = MethodSpec::aamr(alpha, beta)?;
    let gap = MethodSpec::gap(alpha, 2.0 * beta, 2.0 * beta)?;
    let mut x = DVector::zeros(z.len());
    let mut zk = z.clone();
    let mut dev = GapAamrDeviation {
        dev_u: 0.0,
        dev_v: 0.0,
    };
    for k in 0..=steps {
        let du = (pair.u().project(&(&x + z))? - pair.u().project(&zk)?).norm();
        let dv = (pair.v().project(&x)?
            - pair.v().project(&(&zk - z))? * (2.0 * beta - 1.0))
            .norm();
        dev.dev_u = dev.dev_u.max(du);
        dev.dev_v = dev.dev_v.max(dv);
        if k < steps {
            x = method_step(&aamr, pair, z, &x)?;
            zk = method_step(&gap, pair, z, &zk)?;
        }
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::{intersection, Subspace, SubspacePair, DEFAULT_RANK_TOL};
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_3};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthogonal_lines() -> SubspacePair {
        let u = Subspace::from_spanning(
            &DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        let v = Subspace::from_spanning(
            &DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        SubspacePair::from_subspaces(u, v).unwrap()
    }

    fn random_vec(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        crate::subspace::random_unit_vector(n, &mut rng)
    }

    #[test]
    fn spec_constructors_validate_ranges() {
        assert!(MethodSpec::rap(1.99).is_ok());
        assert!(MethodSpec::rap(2.0).is_err());
        assert!(MethodSpec::gap(1.0, 2.0, 2.0).is_ok());
        assert!(MethodSpec::gap(1.1, 1.0, 1.0).is_err());
        assert!(MethodSpec::dr(0.0).is_err());
        assert!(MethodSpec::aamr(1.0, 0.5).is_ok());
        assert!(MethodSpec::aamr(1.0, 1.0).is_err());
        assert!(MethodSpec::aamr(1.0, f64::NAN).is_err());
    }

    #[test]
    fn aamr_fixes_joint_orthogonal_complement() {
        let pair = SubspacePair::random(10, 2, 3, 1, 5).unwrap();
        let fix = intersection(
            &pair.u().orthogonal_complement(),
            &pair.v().orthogonal_complement(),
            1e-10,
        )
        .unwrap();
        assert!(fix.dim() > 0);
        let z = DVector::zeros(10);
        for j in 0..fix.dim() {
            let w = fix.basis().column(j).clone_owned();
            let mapped = aamr_map(&pair, 0.9, 0.7, &z, &w).unwrap();
            assert!((mapped - &w).norm() <= 1e-12);
        }
    }

    #[test]
    fn aamr_orthogonal_lines_one_step_kill() {
        // α = 1, β = 1/2 on perpendicular lines sends (1, 1) to the origin.
        let pair = orthogonal_lines();
        let z = DVector::zeros(2);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let out = aamr_map(&pair, 1.0, 0.5, &z, &x).unwrap();
        assert!(out.norm() <= 1e-15);
    }

    #[test]
    fn gap_with_unit_relaxations_is_ap() {
        let pair = SubspacePair::random(12, 3, 4, 1, 8).unwrap();
        let z = DVector::zeros(12);
        let gap = MethodSpec::gap(1.0, 1.0, 1.0).unwrap();
        for seed in 0..5 {
            let x = random_vec(12, seed);
            let a = method_step(&gap, &pair, &z, &x).unwrap();
            let b = method_step(&MethodSpec::Ap, &pair, &z, &x).unwrap();
            assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn dr_half_is_averaged_alternating_reflections() {
        let pair = SubspacePair::random(9, 2, 3, 1, 4).unwrap();
        let z = DVector::zeros(9);
        let dr = MethodSpec::dr(0.5).unwrap();
        let x = random_vec(9, 3);
        let step = method_step(&dr, &pair, &z, &x).unwrap();
        let ru = pair.u().project(&x).unwrap() * 2.0 - &x;
        let rv = pair.v().project(&ru).unwrap() * 2.0 - &ru;
        let expect = (&x + rv) * 0.5;
        assert!((step - expect).norm() <= 1e-15);
    }

    #[test]
    fn shadow_conventions() {
        let pair = SubspacePair::random(8, 2, 3, 1, 6).unwrap();
        let z = random_vec(8, 10);
        let x0 = DVector::zeros(8);
        let aamr = MethodSpec::aamr(0.8, 0.6).unwrap();
        let sh = shadow(&aamr, &pair, &z, &x0).unwrap();
        assert!((sh - pair.u().project(&z).unwrap()).norm() <= 1e-15);

        // For AP an iterate already in U is its own shadow.
        let xu = pair.u().project(&random_vec(8, 11)).unwrap();
        let sh = shadow(&MethodSpec::Ap, &pair, &z, &xu).unwrap();
        assert!((sh - &xu).norm() <= 1e-14);
    }

    #[test]
    fn iterate_orthogonal_pair_converges_immediately() {
        // θ_F = π/2 with α = 1, β = 1/2 gives rate 0.
        let pair = SubspacePair::with_prescribed_angles(5, 2, 2, 1, &[FRAC_PI_2], 3).unwrap();
        let spec = MethodSpec::aamr(1.0, 0.5).unwrap();
        let z = random_vec(5, 1);
        let trace = iterate(&spec, &pair, &z, &z, 1e-8, 100).unwrap();
        assert!(trace.converged);
        assert!(trace.iterations <= 3, "took {}", trace.iterations);
    }

    #[test]
    fn iterate_anchor_in_intersection_converges_at_start() {
        let pair = SubspacePair::random(10, 3, 4, 2, 9).unwrap();
        let meet = intersection(pair.u(), pair.v(), 1e-10).unwrap();
        let z = meet.basis().column(0).clone_owned();
        let spec = MethodSpec::aamr(0.8, 0.6).unwrap();
        let trace = iterate(&spec, &pair, &z, &DVector::zeros(10), 1e-8, 100).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 0);
        assert!(trace.residuals[0] < 1e-12);
    }

    #[test]
    fn iterate_matches_rate_bound_at_pi_third() {
        let pair = SubspacePair::with_prescribed_angles(6, 2, 2, 1, &[FRAC_PI_3], 17).unwrap();
        let spec = MethodSpec::aamr(1.0, 1.0 / (1.0 + FRAC_PI_3.sin())).unwrap();
        let z = random_vec(6, 2);
        let trace = iterate(&spec, &pair, &z, &z, 1e-8, 1000).unwrap();
        assert!(trace.converged);
        // ceil(log ε / log 0.0717968) + 5 = 7 + 5
        assert!(trace.iterations <= 12, "took {}", trace.iterations);
    }

    #[test]
    fn iterate_exhaustion_is_not_an_error() {
        let pair = SubspacePair::with_prescribed_angles(6, 2, 2, 1, &[0.05], 1).unwrap();
        let spec = MethodSpec::ap();
        let z = random_vec(6, 5);
        let trace = iterate(&spec, &pair, &z, &z, 1e-14, 3).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.iterations, 3);
        assert_eq!(trace.residuals.len(), 4);
    }

    #[test]
    fn diagnostics_zero_at_fixed_start() {
        // z = 0, x0 = 0: the origin is already fixed (Fix T = U⊥ ∩ V⊥ ∋ 0).
        let pair = SubspacePair::random(9, 2, 3, 1, 12).unwrap();
        let zero = DVector::zeros(9);
        let d = fixed_point_diagnostics(&pair, 0.9, 0.6, &zero, &zero, &zero).unwrap();
        assert!(d.fixed_point_residual <= 1e-14);
        assert!(d.normal_component <= 1e-14);
        assert!(d.shadow_gap <= 1e-14);
    }

    #[test]
    fn diagnostics_after_long_run() {
        let pair = SubspacePair::with_prescribed_angles(12, 3, 4, 1, &[FRAC_PI_3, 1.3], 7).unwrap();
        let beta = 1.0 / (1.0 + FRAC_PI_3.sin());
        let spec = MethodSpec::aamr(1.0, beta).unwrap();
        let z = random_vec(12, 20);
        let x0 = random_vec(12, 21);
        let trace = iterate(&spec, &pair, &z, &x0, 1e-13, 500).unwrap();
        let d =
            fixed_point_diagnostics(&pair, 1.0, beta, &z, &x0, &trace.final_iterate).unwrap();
        assert!(d.fixed_point_residual <= 1e-8);
        assert!(d.normal_component <= 1e-8);
        assert!(d.shadow_gap <= 1e-8);
    }

    #[test]
    fn gap_aamr_shadows_coincide() {
        let pair = SubspacePair::random(14, 3, 5, 1, 30).unwrap();
        let z = random_vec(14, 31);
        let dev = gap_aamr_equivalence(&pair, &z, 0.8, 0.7, 100).unwrap();
        assert!(dev.dev_u <= 1e-10, "dev_u = {:.3e}", dev.dev_u);
        assert!(dev.dev_v <= 1e-10, "dev_v = {:.3e}", dev.dev_v);
    }

    #[test]
    fn gap_aamr_half_beta_keeps_aamr_v_component_zero() {
        // β = 1/2 makes the V-relation collapse to P_V(x_k) ≈ 0.
        let pair = SubspacePair::random(10, 2, 4, 1, 33).unwrap();
        let z = random_vec(10, 34);
        let spec = MethodSpec::aamr(0.9, 0.5).unwrap();
        let mut x = DVector::zeros(10);
        let mut max_pv = 0.0f64;
        for _ in 0..50 {
            x = method_step(&spec, &pair, &z, &x).unwrap();
            max_pv = max_pv.max(pair.v().project(&x).unwrap().norm());
        }
        assert!(max_pv <= 1e-10, "max ‖P_V x_k‖ = {max_pv:.3e}");
    }

    #[test]
    fn tail_rates_on_synthetic_decay() {
        let residuals: Vec<f64> = (0..100).map(|k| 0.5f64.powi(k)).collect();
        let g = tail_geometric_rate(&residuals, 99).unwrap();
        assert!((g - 0.5).abs() < 1e-12);
        let l = tail_lsq_rate(&residuals, 99).unwrap();
        assert!((l - 0.5).abs() < 1e-12);
    }
}
