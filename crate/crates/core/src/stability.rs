//! Local stability of the positive periodic solution.
//!
//! Linearizing the post-harvest recurrence at its positive equilibrium `x*`
//! gives `u_{n+1} = p0 u_n - pk u_{n-k}` with
//! `p0 = e^{-rT} / (1-E)^2` and `pk = E p0`. Stability is decided by explicit
//! inequalities in `(rT, E, k)`; characteristic roots are never computed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require, HarvestError, Result};
use crate::model::{grow, InitialData, ModelParams};
use crate::orbit::PostHarvestSeries;

/// Absolute tolerance on inequality residuals below which a verdict is `Marginal`.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

/// Default bracket width at which the `theta*` bisection stops.
pub const DEFAULT_THETA_TOL: f64 = 1e-14;

const THETA_BRACKET_EPS: f64 = 1e-12;
const THETA_MAX_ITERATIONS: usize = 200;

/// Coefficients of the linearized recurrence `u_{n+1} = p0 u_n - pk u_{n-k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationCoefficients {
    pub p0: f64,
    pub pk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    /// `rT <= -ln(1-E)`: only the zero solution exists and every orbit decays.
    NoPositiveEquilibrium,
    Stable,
    Unstable,
    /// Within tolerance of a stability boundary.
    Marginal,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StabilityClass::NoPositiveEquilibrium => "no_positive_equilibrium",
            StabilityClass::Stable => "stable",
            StabilityClass::Unstable => "unstable",
            StabilityClass::Marginal => "marginal",
        };
        f.write_str(s)
    }
}

/// Analytic classification of the positive periodic solution.
///
/// `margin` is the signed residual of the binding inequality: positive on the
/// stable side, negative on the unstable side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "VerdictRecord", into = "VerdictRecord")]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub equilibrium: Option<f64>,
    pub coefficients: Option<LinearizationCoefficients>,
    pub theta_star: Option<f64>,
    pub margin: f64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct VerdictRecord {
    class: StabilityClass,
    x_star: Option<f64>,
    p0: Option<f64>,
    pk: Option<f64>,
    theta_star: Option<f64>,
    margin: f64,
}

impl From<StabilityVerdict> for VerdictRecord {
    fn from(v: StabilityVerdict) -> Self {
        VerdictRecord {
            class: v.class,
            x_star: v.equilibrium,
            p0: v.coefficients.map(|c| c.p0),
            pk: v.coefficients.map(|c| c.pk),
            theta_star: v.theta_star,
            margin: v.margin,
        }
    }
}

impl From<VerdictRecord> for StabilityVerdict {
    fn from(r: VerdictRecord) -> Self {
        StabilityVerdict {
            class: r.class,
            equilibrium: r.x_star,
            coefficients: match (r.p0, r.pk) {
                (Some(p0), Some(pk)) => Some(LinearizationCoefficients { p0, pk }),
                _ => None,
            },
            theta_star: r.theta_star,
            margin: r.margin,
        }
    }
}

/// `rT + ln(1 - E)`; the positive equilibrium exists iff this is positive.
fn existence_margin(p: &ModelParams) -> f64 {
    p.rt() + (-p.effort()).ln_1p()
}

/// The positive fixed point `x* = ((1-E)e^{rT} - 1) K_c / (e^{rT} - 1)`, if any.
pub fn positive_equilibrium(p: &ModelParams) -> Option<f64> {
    let e = p.effort();
    let growth_m1 = p.rt().exp_m1();
    let numerator = (1.0 - e) * growth_m1 - e;
    (numerator > 0.0).then(|| numerator * p.capacity() / growth_m1)
}

pub fn linearization(p: &ModelParams) -> Result<LinearizationCoefficients> {
    if positive_equilibrium(p).is_none() {
        return Err(no_equilibrium(p));
    }
    let q = 1.0 - p.effort();
    let p0 = (-p.rt()).exp() / (q * q);
    Ok(LinearizationCoefficients {
        p0,
        pk: p.effort() * p0,
    })
}

pub(crate) fn no_equilibrium(p: &ModelParams) -> HarvestError {
    HarvestError::NoEquilibrium {
        rt: p.rt(),
        threshold: -(-p.effort()).ln_1p(),
    }
}

/// Solves `sin(k t) / sin((k+1) t) = 1/p0` for `t` in `(0, pi/(k+1))`.
///
/// The left side increases strictly from `k/(k+1)` to `+inf` on that
/// interval, so a root exists iff `p0 < (k+1)/k` and is then unique.
pub fn solve_theta_star(p0: f64, k: usize, tol: f64) -> Result<f64> {
    require(k >= 1, "k", k as f64, "theta* is defined for k >= 1")?;
    require(p0.is_finite() && p0 > 0.0, "p0", p0, "must be positive")?;
    require(tol > 0.0, "tol", tol, "must be positive")?;

    let kf = k as f64;
    let target = 1.0 / p0;
    let residual = |theta: f64| (kf * theta).sin() / ((kf + 1.0) * theta).sin() - target;

    let mut lo = THETA_BRACKET_EPS;
    let mut hi = PI / (kf + 1.0) - THETA_BRACKET_EPS;
    if !(residual(lo) < 0.0 && residual(hi) > 0.0) {
        return Err(HarvestError::NoRoot { p0, k });
    }
    for _ in 0..THETA_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(HarvestError::ConvergenceFailure {
        tol,
        iterations: THETA_MAX_ITERATIONS,
    })
}

/// Right-hand side `(1+E) e^{-rT} / (2(1-E)) + (1-E)^2 e^{rT} / 2` of the
/// sharp cosine condition.
pub fn cosine_bound(rt: f64, effort: f64) -> f64 {
    let q = 1.0 - effort;
    (1.0 + effort) * (-rt).exp() / (2.0 * q) + q * q * rt.exp() / 2.0
}

fn class_from_margin(margin: f64, tol: f64) -> StabilityClass {
    if margin > tol {
        StabilityClass::Stable
    } else if margin < -tol {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    }
}

fn extinction_verdict(p: &ModelParams) -> StabilityVerdict {
    StabilityVerdict {
        class: StabilityClass::NoPositiveEquilibrium,
        equilibrium: None,
        coefficients: None,
        theta_star: None,
        margin: existence_margin(p),
    }
}

/// Classifies the positive periodic solution for any delay.
///
/// `k = 0` is stable whenever the equilibrium exists, `k = 1` uses the
/// explicit threshold `rT > -ln((1-E)^2 / E)`, and `k >= 2` uses the sharp
/// pair `p0 < (k+1)/k`, `cos(theta*) < cosine_bound(rT, E)`.
pub fn classify(p: &ModelParams, tol: f64) -> StabilityVerdict {
    match p.delay() {
        0 => classify_undelayed(p),
        1 => classify_k1(p, tol),
        _ => classify_sharp(p, tol),
    }
}

fn classify_undelayed(p: &ModelParams) -> StabilityVerdict {
    let Some(x_star) = positive_equilibrium(p) else {
        return extinction_verdict(p);
    };
    let coefficients = linearization(p).ok();
    // multiplier of x_{n+1} = (1-E) F(x_n) at x*
    let multiplier = (-p.rt()).exp() / (1.0 - p.effort());
    StabilityVerdict {
        class: StabilityClass::Stable,
        equilibrium: Some(x_star),
        coefficients,
        theta_star: None,
        margin: 1.0 - multiplier,
    }
}

/// The explicit one-period-delay test: stable iff `rT > -ln((1-E)^2 / E)`.
pub fn classify_k1(p: &ModelParams, tol: f64) -> StabilityVerdict {
    let Some(x_star) = positive_equilibrium(p) else {
        return extinction_verdict(p);
    };
    let e = p.effort();
    let q = 1.0 - e;
    let margin = p.rt() + (q * q / e).ln();
    let coefficients = linearization(p).ok();
    let theta_star = coefficients.and_then(|c| solve_theta_star(c.p0, 1, DEFAULT_THETA_TOL).ok());
    StabilityVerdict {
        class: class_from_margin(margin, tol),
        equilibrium: Some(x_star),
        coefficients,
        theta_star,
        margin,
    }
}

/// The sharp test for `k >= 1`, routed through `theta*`.
///
/// For `k = 0` this falls back to [`classify`].
pub fn classify_sharp(p: &ModelParams, tol: f64) -> StabilityVerdict {
    let k = p.delay();
    if k == 0 {
        return classify_undelayed(p);
    }
    let Some(x_star) = positive_equilibrium(p) else {
        return extinction_verdict(p);
    };
    let c = match linearization(p) {
        Ok(c) => c,
        Err(_) => return extinction_verdict(p),
    };
    let kf = k as f64;
    let first = (kf + 1.0) / kf - c.p0;
    let mut verdict = StabilityVerdict {
        class: class_from_margin(first, tol),
        equilibrium: Some(x_star),
        coefficients: Some(c),
        theta_star: None,
        margin: first,
    };
    if verdict.class != StabilityClass::Stable {
        return verdict;
    }
    match solve_theta_star(c.p0, k, DEFAULT_THETA_TOL) {
        Ok(theta) => {
            let second = cosine_bound(p.rt(), p.effort()) - theta.cos();
            verdict.theta_star = Some(theta);
            verdict.margin = first.min(second);
            verdict.class = class_from_margin(second, tol);
        }
        // p0 sits so close to (k+1)/k that the root is unresolvable
        Err(_) => verdict.class = StabilityClass::Marginal,
    }
    verdict
}

/// Delay-independent sufficient test `|p0| + |pk| < 1`, i.e.
/// `rT > ln(1+E) - 2 ln(1-E)`.
pub fn sufficient_stable(p: &ModelParams) -> bool {
    let e = p.effort();
    let q = 1.0 - e;
    (1.0 + e) * (-p.rt()).exp() / (q * q) < 1.0
}

/// Result of probing stability by simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalVerdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Relative half-width of the band around `x*` whose exit counts as unstable.
pub const ORACLE_ESCAPE_BAND: f64 = 0.2;
/// Fraction of the initial deviation an orbit must shrink below to count as settled.
pub const ORACLE_SHRINK_FACTOR: f64 = 1e-3;

/// Simulates a small perturbation of the periodic solution.
///
/// Every state entry is scaled by `1 + rel_perturbation`: `x_0 = x*(1+d)` and
/// the pre-harvest records `N(-jT) = F(x*)(1+d)`. The orbit is `Unstable` if
/// it goes extinct or leaves `x* (1 +- 0.2)`, `Stable` once its deviation stays
/// below `1e-3` of the initial one for `10(k+1) + 50` consecutive periods,
/// and `Inconclusive` if neither happens within `horizon` periods.
pub fn oracle_stability(p: &ModelParams, rel_perturbation: f64, horizon: usize) -> Result<EmpiricalVerdict> {
    let x_star = positive_equilibrium(p).ok_or_else(|| no_equilibrium(p))?;
    require(
        rel_perturbation > 0.0 && rel_perturbation <= 0.05,
        "rel_perturbation",
        rel_perturbation,
        "must lie in (0, 0.05]",
    )?;
    let k = p.delay();
    let scale = 1.0 + rel_perturbation;
    let pre_harvest = grow(x_star, p.growth_factor(), p.capacity());
    let init = InitialData::constant(x_star * scale, pre_harvest * scale, k)?;

    let escape = ORACLE_ESCAPE_BAND * x_star;
    let settled = ORACLE_SHRINK_FACTOR * rel_perturbation * x_star;
    let window = 10 * (k + 1) + 50;
    let mut calm = 0usize;
    for x in PostHarvestSeries::new(p, &init)?.take(horizon + 1) {
        let deviation = (x - x_star).abs();
        if x == 0.0 || deviation > escape {
            return Ok(EmpiricalVerdict::Unstable);
        }
        if deviation < settled {
            calm += 1;
            if calm >= window {
                return Ok(EmpiricalVerdict::Stable);
            }
        } else {
            calm = 0;
        }
    }
    Ok(EmpiricalVerdict::Inconclusive)
}
