//! Cross-module property tests: generator round-trips, operator identities,
//! rate-vs-spectrum agreement, and the characteristic-polynomial check.

use core::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aamr_core::methods::{
    aamr_map, iterate, method_step, IterateOptions, MethodSpec,
};
use aamr_core::rates::{gamma_aamr, optimal_aamr, RateBranch};
use aamr_core::spectrum::{
    aamr_matrix, block_spectrum, closed_form_spectrum, gamma_numeric, DEFAULT_GAMMA_TOL,
};
use aamr_core::subspace::{
    intersection, principal_angles, random_unit_vector, SubspacePair, DEFAULT_ANGLE_TOL,
};

fn unit(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unit_vector(n, &mut rng)
}

/// Limit of the AAMR run, accurate to roughly the final shadow residual.
fn aamr_limit(
    pair: &SubspacePair,
    alpha: f64,
    beta: f64,
    z: &DVector<f64>,
    x0: &DVector<f64>,
) -> DVector<f64> {
    let spec = MethodSpec::aamr(alpha, beta).unwrap();
    let trace = iterate_with(pair, &spec, z, x0, 1e-13, 20_000);
    trace.final_iterate
}

fn iterate_with(
    pair: &SubspacePair,
    spec: &MethodSpec,
    z: &DVector<f64>,
    x0: &DVector<f64>,
    epsilon: f64,
    max_iter: usize,
) -> aamr_core::methods::IterationTrace {
    iterate(spec, pair, z, x0, epsilon, max_iter).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Generated pairs satisfy their own invariants: ascending angles, the
    /// prescribed intersection dimension, θ_F equal to the smallest free
    /// angle, and angle recovery within 1e-10.
    #[test]
    fn random_pair_invariants(seed in any::<u64>()) {
        let pair = SubspacePair::random(20, 4, 6, 2, seed).unwrap();
        let angles = pair.angles();
        prop_assert!(angles.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(pair.intersection_dim(), 2);
        prop_assert!(pair.friedrichs() > 0.0 && pair.friedrichs() <= FRAC_PI_2);
        prop_assert!((pair.friedrichs() - angles[2]).abs() == 0.0);

        let recovered = principal_angles(pair.u(), pair.v()).unwrap();
        for (r, e) in recovered.iter().zip(angles) {
            prop_assert!((r - e).abs() <= 1e-10, "recovered {} vs {}", r, e);
        }

        let meet = intersection(pair.u(), pair.v(), DEFAULT_ANGLE_TOL).unwrap();
        prop_assert_eq!(meet.dim(), 2);
    }

    /// Projector algebra: idempotence, symmetry, inclusion of the
    /// intersection, and complement summing to the identity.
    #[test]
    fn projector_identities(seed in any::<u64>()) {
        let pair = SubspacePair::random(15, 3, 5, 1, seed).unwrap();
        let meet = intersection(pair.u(), pair.v(), DEFAULT_ANGLE_TOL).unwrap();
        let p_u = pair.u().projector_matrix();
        let p_v = pair.v().projector_matrix();
        let p_m = meet.projector_matrix();
        for p in [&p_u, &p_v, &p_m] {
            prop_assert!(((p * p) - p).abs().max() <= 1e-12);
            prop_assert!((p - p.transpose()).abs().max() <= 1e-12);
        }
        prop_assert!(((&p_m * &p_u) - &p_m).abs().max() <= 1e-12);
        prop_assert!(((&p_m * &p_v) - &p_m).abs().max() <= 1e-12);

        let comp = pair.u().orthogonal_complement().projector_matrix();
        let dev = (&p_u + comp - DMatrix::<f64>::identity(15, 15)).abs().max();
        prop_assert!(dev <= 1e-12);
    }

    /// The AAMR operator is nonexpansive for every admissible (α, β).
    #[test]
    fn aamr_nonexpansive(
        alpha in 0.05f64..=1.0,
        beta in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let pair = SubspacePair::random(12, 2, 4, 1, seed).unwrap();
        let z = unit(12, seed ^ 0x9e37);
        let x = unit(12, seed ^ 0x79b9) * 2.0;
        let y = unit(12, seed ^ 0x7c15) * 0.5;
        let tx = aamr_map(&pair, alpha, beta, &z, &x).unwrap();
        let ty = aamr_map(&pair, alpha, beta, &z, &y).unwrap();
        prop_assert!((tx - ty).norm() <= (&x - &y).norm() * (1.0 + 1e-12));
    }

    /// Every step map is affine-linear in the iterate:
    /// step(ax + by) = a·step(x) + b·step(y) − (a+b−1)·step(0).
    #[test]
    fn step_maps_are_affine_linear(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let pair = SubspacePair::random(10, 2, 3, 1, seed).unwrap();
        let z = unit(10, seed ^ 1);
        let x = unit(10, seed ^ 2);
        let y = unit(10, seed ^ 3);
        let specs = [
            MethodSpec::ap(),
            MethodSpec::rap(1.3).unwrap(),
            MethodSpec::gap(0.9, 1.5, 0.7).unwrap(),
            MethodSpec::dr(0.5).unwrap(),
            MethodSpec::aamr(0.8, 0.7).unwrap(),
        ];
        let combo = &x * a + &y * b;
        for spec in &specs {
            let lhs = method_step(spec, &pair, &z, &combo).unwrap();
            let sx = method_step(spec, &pair, &z, &x).unwrap();
            let sy = method_step(spec, &pair, &z, &y).unwrap();
            let s0 = method_step(spec, &pair, &z, &DVector::zeros(10)).unwrap();
            let rhs = sx * a + sy * b - s0 * (a + b - 1.0);
            prop_assert!((lhs - rhs).norm() <= 1e-12, "{} not affine", spec.name());
        }
    }

    /// Closed-form and block spectra agree as multisets, and the γ they
    /// induce matches the closed-form rate of the pair's Friedrichs angle.
    #[test]
    fn spectra_agree_and_match_rate(
        alpha in 0.05f64..=1.0,
        beta in 0.05f64..0.95,
        theta1 in 0.05f64..1.0,
        gap in 0.05f64..0.5,
        seed in any::<u64>(),
    ) {
        let theta2 = (theta1 + gap).min(FRAC_PI_2);
        let pair =
            SubspacePair::with_prescribed_angles(10, 3, 3, 1, &[theta1, theta2], seed).unwrap();
        let closed = closed_form_spectrum(&pair, alpha, beta).unwrap();
        let block = block_spectrum(&pair, alpha, beta).unwrap();
        let dist = closed
            .eigenvalues()
            .iter()
            .zip(block.eigenvalues())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max);
        prop_assert!(dist <= 1e-12, "multiset distance {:.3e}", dist);

        let gamma = gamma_numeric(&block, DEFAULT_GAMMA_TOL);
        let report = gamma_aamr(alpha, beta, pair.friedrichs()).unwrap();
        prop_assert!(
            (gamma - report.gamma).abs() <= 1e-10,
            "spectral {} vs closed form {}",
            gamma,
            report.gamma
        );
        prop_assert!(closed.spectral_radius() <= 1.0 + 1e-12);
    }
}

#[test]
fn translation_formula() {
    // T_{U−z,V−z}(x) = T_{U,V}(x − x*) + x* for a computed fixed point x*.
    let pair = SubspacePair::with_prescribed_angles(12, 3, 4, 1, &[0.5, 1.1], 77).unwrap();
    let (alpha, beta) = (0.9, 0.7);
    let z = unit(12, 5);
    let x_star = aamr_limit(&pair, alpha, beta, &z, &unit(12, 6));
    let zero = DVector::zeros(12);
    for seed in 0..10 {
        let x = unit(12, 100 + seed) * 3.0;
        let lhs = aamr_map(&pair, alpha, beta, &z, &x).unwrap();
        let rhs = aamr_map(&pair, alpha, beta, &zero, &(&x - &x_star)).unwrap() + &x_star;
        let err = (lhs - rhs).norm();
        assert!(err <= 1e-10, "translation deviation {err:.3e}");
    }
}

#[test]
fn fixed_points_move_only_outside_complement() {
    let pair = SubspacePair::with_prescribed_angles(10, 2, 3, 1, &[0.8], 3).unwrap();
    let zero = DVector::zeros(10);
    // A vector inside U has a nonzero U+V component, so it must move.
    let x = pair.u().basis().column(1).clone_owned();
    let moved = (aamr_map(&pair, 0.9, 0.6, &zero, &x).unwrap() - &x).norm();
    assert!(moved > 1e-9, "interior vector should not be fixed");
}

#[test]
fn shadow_residuals_match_attained_rate() {
    // Tail rate within γ + 0.02 and eventually monotone residuals. The
    // parameters keep γ ≥ 0.94 so a 300-step run stays well above the
    // ~1e-16 noise floor of the residual computation.
    for (i, theta) in [0.3, 0.7, 1.2].into_iter().enumerate() {
        let pair =
            SubspacePair::with_prescribed_angles(9, 2, 2, 1, &[theta], 40 + i as u64).unwrap();
        let (alpha, beta) = (0.08, 0.45);
        let report = gamma_aamr(alpha, beta, pair.friedrichs()).unwrap();
        assert!(report.attained);
        let spec = MethodSpec::aamr(alpha, beta).unwrap();
        let z = unit(9, 50 + i as u64);
        let trace = iterate_with(&pair, &spec, &z, &z, 1e-300, 300);
        assert_eq!(trace.iterations, 300);
        let rate = trace.empirical_rate.expect("tail rate");
        assert!(
            rate <= report.gamma + 0.02,
            "θ = {theta}: empirical {rate} vs γ = {}",
            report.gamma
        );
        let tail = &trace.residuals[trace.residuals.len() - 60..];
        assert!(
            tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)),
            "tail not monotone at θ = {theta}"
        );
    }
}

#[test]
fn non_attained_rate_has_polynomial_envelope() {
    // At β = β* the subdominant eigenvalue is defective and γ is only an
    // infimum: residuals carry a linear-in-k transient on top of γ^k. A
    // clean μ^k bound with μ = γ + 0.01 is not observable in f64 (the
    // transient outlasts the range where μ^k stays above residual rounding
    // noise), so the check asserts the defective envelope C·(k+1)·γ^k
    // down to the noise floor instead.
    for (i, theta) in [0.6, 1.0, 1.4].into_iter().enumerate() {
        let pair =
            SubspacePair::with_prescribed_angles(9, 2, 2, 1, &[theta], 60 + i as u64).unwrap();
        let opt = optimal_aamr(pair.friedrichs()).unwrap();
        let report = gamma_aamr(opt.alpha, opt.beta, pair.friedrichs()).unwrap();
        assert!(!report.attained);
        let z = unit(9, 70 + i as u64);
        let x0 = unit(9, 80 + i as u64);
        let x_star = aamr_limit(&pair, opt.alpha, opt.beta, &z, &x0);
        // Rescale the start to unit distance from its limit; the projection
        // onto the fixed-point set is unchanged.
        let dir = &x0 - &x_star;
        let x0 = &x_star + &dir / dir.norm();
        let spec = MethodSpec::aamr(opt.alpha, opt.beta).unwrap();
        let trace = iterate_with(&pair, &spec, &z, &x0, 1e-300, 200);
        let gamma = report.gamma;
        for (k, r) in trace.residuals.iter().enumerate() {
            if *r < 1e-12 {
                break;
            }
            let envelope = 50.0 * (k as f64 + 1.0) * gamma.powi(k as i32);
            assert!(
                *r <= envelope,
                "θ = {theta}, k = {k}: residual {r:.3e} above {envelope:.3e}"
            );
        }
        // The run still converges to the noise floor.
        assert!(trace.residuals.last().unwrap() < &1e-10);
    }
}

#[test]
fn global_optimality_on_grid() {
    // γ(α, β, θ) ≥ γ* − 1e-12 on a 0.01 grid, with the minimum located at
    // (1, β*) up to the grid resolution.
    for theta in [0.4, FRAC_PI_2 - 0.3, FRAC_PI_2] {
        let opt = optimal_aamr(theta).unwrap();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let mut alpha: f64 = 0.01;
        while alpha <= 1.0 + 1e-12 {
            let mut beta: f64 = 0.01;
            while beta < 1.0 - 1e-12 {
                let g = gamma_aamr(alpha.min(1.0), beta, theta).unwrap().gamma;
                assert!(
                    g >= opt.gamma - 1e-12,
                    "γ({alpha}, {beta}, {theta}) = {g} below optimum {}",
                    opt.gamma
                );
                if g < best.0 {
                    best = (g, alpha, beta);
                }
                beta += 0.01;
            }
            alpha += 0.01;
        }
        assert!((best.1 - 1.0).abs() <= 0.011, "argmin α = {}", best.1);
        assert!((best.2 - opt.beta).abs() <= 0.011, "argmin β = {}", best.2);
    }
}

#[test]
fn branch_matches_subdominant_argmax() {
    // γ = max{|λ_{s+1,2}|, |λ_{1,1}|}: the flat branch is active exactly
    // when the angle-independent eigenvalue dominates.
    let thetas = [0.2, 0.6, 1.0, 1.4];
    let params = [(0.3, 0.3), (0.6, 0.55), (0.8, 0.9), (0.95, 0.7), (1.0, 0.85)];
    for &theta in &thetas {
        for &(alpha, beta) in &params {
            let report = gamma_aamr(alpha, beta, theta).unwrap();
            let c = theta.cos();
            let lambda_flat = 1.0 - 4.0 * alpha * beta * (1.0 - beta);
            let rad = beta * beta * c * c - 2.0 * beta + 1.0;
            let lambda_angle = if rad >= 0.0 {
                Complex64::new(
                    1.0 + 2.0 * alpha * beta * (beta * c * c - 1.0 + c * rad.sqrt()),
                    0.0,
                )
            } else {
                Complex64::new(
                    1.0 + 2.0 * alpha * beta * (beta * c * c - 1.0),
                    2.0 * alpha * beta * c * (-rad).sqrt(),
                )
            };
            let expected = lambda_flat.abs().max(lambda_angle.norm());
            assert!(
                (report.gamma - expected).abs() <= 1e-12,
                "γ mismatch at α={alpha}, β={beta}, θ={theta}"
            );
            // Skip near-ties where the argmax is ambiguous at rounding level.
            if (lambda_flat.abs() - lambda_angle.norm()).abs() > 1e-9 {
                let flat_dominates = lambda_flat.abs() > lambda_angle.norm();
                assert_eq!(
                    report.branch == RateBranch::Flat,
                    flat_dominates,
                    "branch {:?} vs argmax at α={alpha}, β={beta}, θ={theta}",
                    report.branch
                );
            }
        }
    }
}

#[test]
fn eigenvalue_one_has_expected_multiplicity() {
    let pair = SubspacePair::with_prescribed_angles(11, 3, 4, 2, &[0.9], 8).unwrap();
    let spectrum = closed_form_spectrum(&pair, 0.7, 0.6).unwrap();
    assert!((spectrum.spectral_radius() - 1.0).abs() <= 1e-12);
    let ones = spectrum
        .eigenvalues()
        .iter()
        .filter(|l| (*l - Complex64::new(1.0, 0.0)).norm() <= 1e-12)
        .count();
    // s + (n − p − q) = 2 + (11 − 3 − 4)
    assert_eq!(ones, 2 + 4);
}

/// Complex determinant by Gaussian elimination with partial pivoting;
/// test-local so the characteristic-polynomial check does not share code
/// with the spectrum implementation.
fn complex_det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap())
            .unwrap();
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        let inv = m[col][col].inv();
        for row in col + 1..n {
            let factor = m[row][col] * inv;
            for k in col..n {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
        }
    }
    det
}

#[test]
fn characteristic_polynomial_vanishes_at_claimed_eigenvalues() {
    let pair = SubspacePair::with_prescribed_angles(6, 2, 2, 1, &[0.85], 14).unwrap();
    for &(alpha, beta) in &[(0.8, 0.75), (1.0, 0.4), (0.5, 0.9)] {
        let t = aamr_matrix(&pair, alpha, beta).unwrap();
        let spectrum = closed_form_spectrum(&pair, alpha, beta).unwrap();
        for lambda in spectrum.eigenvalues() {
            let shifted: Vec<Vec<Complex64>> = (0..6)
                .map(|i| {
                    (0..6)
                        .map(|j| {
                            let diag = if i == j { *lambda } else { Complex64::new(0.0, 0.0) };
                            Complex64::new(t[(i, j)], 0.0) - diag
                        })
                        .collect()
                })
                .collect();
            let det = complex_det(shifted);
            assert!(
                det.norm() <= 1e-8,
                "det(T − λI) = {:.3e} at λ = {lambda}",
                det.norm()
            );
        }
    }
}

#[test]
fn hundred_random_pairs_satisfy_invariants() {
    for seed in 0..100u64 {
        let pair = SubspacePair::random(30, 5, 8, 2, 1000 + seed).unwrap();
        let angles = pair.angles();
        assert!(angles.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(pair.intersection_dim(), 2);
        assert!(angles[..2].iter().all(|&t| t == 0.0));
        assert!(pair.friedrichs() > 0.01 && pair.friedrichs() <= FRAC_PI_2);
        let recovered = principal_angles(pair.u(), pair.v()).unwrap();
        let err = recovered
            .iter()
            .zip(angles)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-10, "seed {seed}: recovery error {err:.3e}");
    }
}

#[test]
fn iterate_options_store_vectors() {
    let pair = SubspacePair::with_prescribed_angles(8, 2, 3, 1, &[0.9], 91).unwrap();
    let spec = MethodSpec::aamr(0.9, 0.6).unwrap();
    let z = unit(8, 92);
    let opts = IterateOptions {
        epsilon: 1e-10,
        max_iter: 500,
        store_vectors: true,
        store_cap: 64,
    };
    let trace =
        aamr_core::methods::iterate_with_options(&spec, &pair, &z, &z, &opts).unwrap();
    let stored = trace.iterates.as_ref().unwrap().len();
    assert_eq!(stored, trace.shadows.as_ref().unwrap().len());
    assert!(stored <= 64);
    assert_eq!(trace.residuals.len(), trace.iterations + 1);
}
