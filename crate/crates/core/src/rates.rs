//! Closed-form linear convergence rates.
//!
//! For the AAMR operator `T_{α,β} = (1−α)I + α(2βP_V − I)(2βP_U − I)` on two
//! subspaces with Friedrichs angle `θ_F`, the rate `γ(T_{α,β})` is piecewise
//! in `c_F = cos θ_F` with two thresholds:
//!
//! * `ĉ_β = √((2β−1)⁺) / β` separates real from complex subdominant
//!   eigenvalues,
//! * `c(α,β)` marks where the angle-independent value `1 − 4αβ(1−β)` takes
//!   over.
//!
//! The minimum over all parameters is attained at `α* = 1`,
//! `β* = 1/(1+sin θ_F)` with value `(1−sin θ_F)/(1+sin θ_F)`, which ties GAP
//! and beats AP, RAP and DR for every angle. `γ` is an optimal rate (not
//! just an infimum) exactly when `β ≠ β*` or `θ_F = π/2`; the `attained`
//! flag records this.

use core::f64::consts::FRAC_PI_2;
use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;

use crate::error::{Error, Result};
use crate::math;
use crate::methods::MethodSpec;

/// Tolerance used by the stopping criterion of the reference experiments;
/// `RateReport::bound_iters` is evaluated at this value.
pub const DEFAULT_BOUND_EPSILON: f64 = 1e-8;

/// Tolerance for deciding `β = 1/(1+sin θ_F)` and `θ_F = π/2` in the
/// `attained` flag.
const ATTAINED_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            range: "]0, 1]",
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "beta",
            value: beta,
            range: "]0, 1[",
        })
    }
}

fn check_theta(theta_f: f64) -> Result<()> {
    if theta_f.is_finite() && theta_f > 0.0 && theta_f <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "theta_f",
            value: theta_f,
            range: "]0, π/2]",
        })
    }
}

/// Which piece of the rate function is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBranch {
    /// `c_F < c(α,β)`: rate `1 − 4αβ(1−β)`, independent of the angle.
    Flat,
    /// `c(α,β) ≤ c_F < ĉ_β`: complex subdominant pair.
    Middle,
    /// `ĉ_β ≤ c_F < 1`: real subdominant eigenvalue driven by the angle.
    Angle,
}

impl RateBranch {
    pub fn name(&self) -> &'static str {
        match self {
            RateBranch::Flat => "flat",
            RateBranch::Middle => "middle",
            RateBranch::Angle => "angle",
        }
    }
}

impl fmt::Display for RateBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rate of the AAMR operator at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct RateReport {
    pub gamma: f64,
    pub branch: RateBranch,
    pub c_hat: f64,
    pub c_thresh: f64,
    /// True when `γ` is an optimal rate (all subdominant eigenvalues
    /// semisimple): `β ≠ 1/(1+sin θ_F)` or `θ_F = π/2`.
    pub attained: bool,
    /// `log ε / log γ` at `ε =` [`DEFAULT_BOUND_EPSILON`]; zero when
    /// `γ = 0`, infinite when `γ` rounds to 1.
    pub bound_iters: f64,
}

/// `ĉ_β = √((2β−1)⁺) / β`.
pub fn c_hat(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(math::sqrt((2.0 * beta - 1.0).max(0.0)) / beta)
}

/// The threshold `c(α,β)` below which the rate stops depending on the angle:
/// zero at `α = 1`, otherwise
/// `√( ((1−4αβ(1−β))² − (1−2αβ)²)⁺ / (4(1−α)αβ²) )`.
pub fn c_threshold(alpha: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    if alpha == 1.0 {
        return Ok(0.0);
    }
    let flat = 1.0 - 4.0 * alpha * beta * (1.0 - beta);
    let mid = 1.0 - 2.0 * alpha * beta;
    let numerator = (flat * flat - mid * mid).max(0.0);
    Ok(math::sqrt(numerator / (4.0 * (1.0 - alpha) * alpha * beta * beta)))
}

/// Raw flat-branch value `1 − 4αβ(1−β)`.
pub fn gamma_flat_branch(alpha: f64, beta: f64) -> f64 {
    1.0 - 4.0 * alpha * beta * (1.0 - beta)
}

/// Raw middle-branch value `√(4(1−α)αβ²c_F² + (1−2αβ)²)`.
pub fn gamma_middle_branch(alpha: f64, beta: f64, c_f: f64) -> f64 {
    math::sqrt(4.0 * (1.0 - alpha) * alpha * beta * beta * c_f * c_f
        + (1.0 - 2.0 * alpha * beta) * (1.0 - 2.0 * alpha * beta))
}

/// Raw angle-branch value `1 + 2αβ(βc_F² − 1 + c_F √(β²c_F² − 2β + 1))`.
/// The radicand is clamped at zero: it vanishes exactly on the boundary
/// `c_F = ĉ_β` and rounding may push it marginally negative there.
pub fn gamma_angle_branch(alpha: f64, beta: f64, c_f: f64) -> f64 {
    let radicand = (beta * beta * c_f * c_f - 2.0 * beta + 1.0).max(0.0);
    1.0 + 2.0 * alpha * beta * (beta * c_f * c_f - 1.0 + c_f * math::sqrt(radicand))
}

/// The piecewise rate `γ(T_{α,β})` for a pair with Friedrichs angle
/// `θ_F ∈ ]0, π/2]`. Branch selection follows the half-open intervals
/// `c_F < c(α,β)`, `c(α,β) ≤ c_F < ĉ_β`, `ĉ_β ≤ c_F < 1`.
pub fn gamma_aamr(alpha: f64, beta: f64, theta_f: f64) -> Result<RateReport> {
    check_alpha(alpha)?;
    check_beta(beta)?;
    check_theta(theta_f)?;
    let c_f = math::cos(theta_f);
    let c_hat = c_hat(beta)?;
    let c_thresh = c_threshold(alpha, beta)?;

    let (gamma, branch) = if c_f < c_thresh {
        (gamma_flat_branch(alpha, beta), RateBranch::Flat)
    } else if c_f < c_hat {
        (gamma_middle_branch(alpha, beta, c_f), RateBranch::Middle)
    } else {
        (gamma_angle_branch(alpha, beta, c_f), RateBranch::Angle)
    };

    let beta_star = 1.0 / (1.0 + math::sin(theta_f));
    let attained = math::abs(beta - beta_star) > ATTAINED_TOL
        || math::abs(theta_f - FRAC_PI_2) <= ATTAINED_TOL;

    let bound_iters = if gamma >= 1.0 {
        f64::INFINITY
    } else {
        iteration_bound(DEFAULT_BOUND_EPSILON, gamma)?
    };

    Ok(RateReport {
        gamma,
        branch,
        c_hat,
        c_thresh,
        attained,
        bound_iters,
    })
}

/// The parameter point minimizing `γ(T_{α,β})` and its value.
#[derive(Debug, Clone, Copy)]
pub struct OptimalAamr {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `α* = 1`, `β* = 1/(1+sin θ_F)`, `γ* = (1−sin θ_F)/(1+sin θ_F)`.
/// The optimum is attained as an optimal rate only at `θ_F = π/2`.
pub fn optimal_aamr(theta_f: f64) -> Result<OptimalAamr> {
    check_theta(theta_f)?;
    let s = math::sin(theta_f);
    Ok(OptimalAamr {
        alpha: 1.0,
        beta: 1.0 / (1.0 + s),
        gamma: (1.0 - s) / (1.0 + s),
    })
}

/// Name of one of the five methods, for rate lookups and CLI parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Ap,
    Rap,
    Gap,
    Dr,
    Aamr,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Ap,
        MethodKind::Rap,
        MethodKind::Gap,
        MethodKind::Dr,
        MethodKind::Aamr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Ap => "ap",
            MethodKind::Rap => "rap",
            MethodKind::Gap => "gap",
            MethodKind::Dr => "dr",
            MethodKind::Aamr => "aamr",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ap" => Ok(MethodKind::Ap),
            "rap" => Ok(MethodKind::Rap),
            "gap" => Ok(MethodKind::Gap),
            "dr" => Ok(MethodKind::Dr),
            "aamr" => Ok(MethodKind::Aamr),
            _ => Err(Error::UnknownMethod {
                name: s.to_string(),
            }),
        }
    }
}

/// Optimal parameters and the resulting rate for each method:
///
/// | method | optimal parameters                     | rate                        |
/// |--------|----------------------------------------|-----------------------------|
/// | AP     | —                                      | `cos²θ_F`                   |
/// | RAP    | `α* = 2/(1+sin²θ_F)`                   | `(1−sin²θ_F)/(1+sin²θ_F)`   |
/// | GAP    | `α* = 1`, `α₁* = α₂* = 2/(1+sin θ_F)`  | `(1−sin θ_F)/(1+sin θ_F)`   |
/// | DR     | `α* = 1/2`                             | `cos θ_F`                   |
/// | AAMR   | `α* = 1`, `β* = 1/(1+sin θ_F)`         | `(1−sin θ_F)/(1+sin θ_F)`   |
pub fn method_rate(kind: MethodKind, theta_f: f64) -> Result<(MethodSpec, f64)> {
    check_theta(theta_f)?;
    let s = math::sin(theta_f);
    let c = math::cos(theta_f);
    match kind {
        MethodKind::Ap => Ok((MethodSpec::Ap, c * c)),
        MethodKind::Rap => Ok((
            MethodSpec::rap(2.0 / (1.0 + s * s))?,
            (1.0 - s * s) / (1.0 + s * s),
        )),
        MethodKind::Gap => {
            let relax = 2.0 / (1.0 + s);
            Ok((MethodSpec::gap(1.0, relax, relax)?, (1.0 - s) / (1.0 + s)))
        }
        MethodKind::Dr => Ok((MethodSpec::dr(0.5)?, c)),
        MethodKind::Aamr => {
            let opt = optimal_aamr(theta_f)?;
            Ok((MethodSpec::aamr(opt.alpha, opt.beta)?, opt.gamma))
        }
    }
}

/// The optimal GAP and AAMR parameters at one angle, together with the
/// largest deviation from the identities `α₁* = α₂* = 2β*` and
/// `α*_AAMR = α*_GAP = 1`.
#[derive(Debug, Clone, Copy)]
pub struct GapParamCorrespondence {
    pub theta_f: f64,
    pub aamr_alpha: f64,
    pub aamr_beta: f64,
    pub gap_alpha: f64,
    pub gap_alpha1: f64,
    pub gap_alpha2: f64,
    pub deviation: f64,
}

pub fn gap_param_correspondence(theta_f: f64) -> Result<GapParamCorrespondence> {
    let opt = optimal_aamr(theta_f)?;
    let (gap_spec, _) = method_rate(MethodKind::Gap, theta_f)?;
    let (gap_alpha, gap_alpha1, gap_alpha2) = match gap_spec {
        MethodSpec::Gap {
            alpha,
            alpha1,
            alpha2,
        } => (alpha, alpha1, alpha2),
        _ => unreachable!("method_rate(Gap, ·) returns a GAP spec"),
    };
    let deviation = math::abs(gap_alpha1 - 2.0 * opt.beta)
        .max(math::abs(gap_alpha2 - 2.0 * opt.beta))
        .max(math::abs(gap_alpha - 1.0))
        .max(math::abs(opt.alpha - 1.0));
    Ok(GapParamCorrespondence {
        theta_f,
        aamr_alpha: opt.alpha,
        aamr_beta: opt.beta,
        gap_alpha,
        gap_alpha1,
        gap_alpha2,
        deviation,
    })
}

/// Estimated iteration count `log ε / log γ` for driving the shadow
/// residual below `ε` at linear rate `γ`. By convention the bound is zero
/// when `γ = 0`; `γ ≥ 1` is rejected.
pub fn iteration_bound(epsilon: f64, gamma: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "]0, 1[",
        });
    }
    if !(gamma >= 0.0 && gamma < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1[",
        });
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    Ok(math::ln(epsilon) / math::ln(gamma))
}
