//! Yield per unit time, the optimal effort, and sustainability thresholds.
//!
//! The yield of the periodic solution at effort `E` is
//! `Y(E) = K_c E / ((1-E) T) * ((1-E) e^{rT} - 1) / (e^{rT} - 1)`, maximized at
//! `E_opt = 1 - e^{-rT/2}` independently of the delay. Whether that maximum is
//! sustainable (the periodic solution is locally asymptotically stable)
//! depends on `k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require, HarvestError, Result};
use crate::model::{ModelParams, StockParams};
use crate::stability::{classify, classify_sharp, cosine_bound, solve_theta_star, StabilityClass, DEFAULT_THETA_TOL};

/// Default effort tolerance for [`sustainability_frontier`].
pub const DEFAULT_FRONTIER_TOL: f64 = 1e-12;

const FRONTIER_MAX_ITERATIONS: usize = 200;

/// Yield per unit time of the periodic solution at effort `effort`.
///
/// Fails with `NoEquilibrium` when `rT < -ln(1-E)`; exactly on that boundary
/// the equilibrium collapses to zero and so does the yield.
pub fn yield_at(stock: &StockParams, effort: f64) -> Result<f64> {
    let p = stock.with_effort(effort)?;
    let growth_m1 = stock.rt().exp_m1();
    let surplus = (1.0 - effort) * growth_m1 - effort;
    if surplus < 0.0 {
        return Err(crate::stability::no_equilibrium(&p));
    }
    Ok(stock.capacity * effort / ((1.0 - effort) * stock.period) * (surplus / growth_m1))
}

/// `E_opt = 1 - e^{-rT/2}`.
pub fn optimal_effort(r: f64, period: f64) -> f64 {
    -(-r * period / 2.0).exp_m1()
}

/// `MY = K_c (e^{rT/2} - 1) / (T (e^{rT/2} + 1))`, the yield at `E_opt`.
pub fn max_yield(r: f64, period: f64, capacity: f64) -> f64 {
    let half_m1 = (r * period / 2.0).exp_m1();
    capacity * half_m1 / (period * (half_m1 + 2.0))
}

/// Post-harvest level `K_c / (e^{rT/2} + 1)` of the optimal periodic solution.
pub fn optimal_post_harvest_level(r: f64, period: f64, capacity: f64) -> f64 {
    capacity / ((r * period / 2.0).exp() + 1.0)
}

/// `E* = (2 + e^{-rT} - sqrt(e^{-rT} (e^{-rT} + 8))) / 2`.
///
/// Every effort below `E*` passes the delay-independent sufficient test.
pub fn guaranteed_sustainable_effort(r: f64, period: f64) -> f64 {
    let q = (-r * period).exp();
    (2.0 + q - (q * (q + 8.0)).sqrt()) / 2.0
}

/// `f(k) = -2 ln(1 - 2 cos(k pi / (2k + 1)))`: the maximum yield is sustainable
/// iff `rT < f(k)`. Infinite for `k <= 1`.
pub fn msy_rt_bound(k: usize) -> f64 {
    if k <= 1 {
        return f64::INFINITY;
    }
    // cos(k pi / (2k+1)) = sin(pi / (4k+2))
    let s = (PI / (4.0 * k as f64 + 2.0)).sin();
    -2.0 * (-2.0 * s).ln_1p()
}

/// Whether the periodic solution at this effort is locally asymptotically stable.
pub fn is_sustainable(p: &ModelParams) -> bool {
    classify(p, crate::stability::DEFAULT_BOUNDARY_TOL).class == StabilityClass::Stable
}

/// The sharp sustainability frontier `E**` together with its `theta*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    #[serde(rename = "E_star_star")]
    pub effort: f64,
    pub theta_star: f64,
    /// Largest absolute residual of the two frontier equations at the result.
    pub residual: f64,
}

/// Residual of the frontier system at `(effort, theta)`:
/// `cos(theta) = cosine_bound(rT, E)` and
/// `sin(k theta) / sin((k+1) theta) = (1-E)^2 e^{rT}`.
pub fn frontier_residual(rt: f64, k: usize, effort: f64, theta: f64) -> f64 {
    let kf = k as f64;
    let q = 1.0 - effort;
    let cos_eq = theta.cos() - cosine_bound(rt, effort);
    let ratio_eq = (kf * theta).sin() / ((kf + 1.0) * theta).sin() - q * q * rt.exp();
    cos_eq.abs().max(ratio_eq.abs())
}

/// Largest effort below which yields stay sustainable, when it is below `E_opt`.
///
/// Returns `None` when every effort in `(0, E_opt]` is sustainable: always for
/// `k <= 1`, and for `k >= 2` when `rT < f(k)`. Otherwise bisects on the
/// effort axis with the sharp test; sustainability is monotone in `E` up to
/// `E_opt`, so the Stable set is an interval.
pub fn sustainability_frontier(stock: &StockParams, tol: f64) -> Result<Option<FrontierPoint>> {
    stock.validate()?;
    require(tol > 0.0, "tol", tol, "must be positive")?;
    let k = stock.delay;
    let rt = stock.rt();
    if k <= 1 || rt < msy_rt_bound(k) {
        return Ok(None);
    }
    let stable =
        |e: f64| -> Result<bool> { Ok(classify_sharp(&stock.with_effort(e)?, 0.0).class == StabilityClass::Stable) };

    let mut lo = 0.5 * guaranteed_sustainable_effort(stock.r, stock.period);
    let mut hi = optimal_effort(stock.r, stock.period);
    if !stable(lo)? {
        return Err(HarvestError::NonBracketing {
            reason: format!("effort {lo} below E* is not stable"),
        });
    }
    if stable(hi)? {
        return Err(HarvestError::NonBracketing {
            reason: format!("E_opt = {hi} is stable although rT >= f(k)"),
        });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        if iterations == FRONTIER_MAX_ITERATIONS {
            return Err(HarvestError::ConvergenceFailure { tol, iterations });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let effort = 0.5 * (lo + hi);
    let q = 1.0 - effort;
    let p0 = (-rt).exp() / (q * q);
    let theta_star = solve_theta_star(p0, k, DEFAULT_THETA_TOL)?;
    Ok(Some(FrontierPoint {
        effort,
        theta_star,
        residual: frontier_residual(rt, k, effort, theta_star),
    }))
}

/// Yield figures for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldReport {
    #[serde(rename = "E")]
    pub effort: f64,
    /// `None` when no positive periodic solution exists at this effort.
    #[serde(rename = "yield")]
    pub yield_value: Option<f64>,
    /// Whether the yield at `E` is sustainable.
    pub sustainable: bool,
    #[serde(rename = "E_opt")]
    pub optimal_effort: f64,
    pub max_yield: f64,
    #[serde(rename = "E_star")]
    pub guaranteed_effort: f64,
    #[serde(rename = "E_star_star")]
    pub frontier: Option<f64>,
    pub msy_sustainable: bool,
    /// `f(k)` for `k >= 2`.
    #[serde(rename = "rT_bound")]
    pub rt_bound: Option<f64>,
}

pub fn yield_report(p: &ModelParams, frontier_tol: f64) -> Result<YieldReport> {
    let stock = p.stock();
    let k = p.delay();
    let yield_value = match yield_at(&stock, p.effort()) {
        Ok(y) => Some(y),
        Err(HarvestError::NoEquilibrium { .. }) => None,
        Err(e) => return Err(e),
    };
    let bound = msy_rt_bound(k);
    Ok(YieldReport {
        effort: p.effort(),
        yield_value,
        sustainable: is_sustainable(p),
        optimal_effort: optimal_effort(p.r(), p.period()),
        max_yield: max_yield(p.r(), p.period(), p.capacity()),
        guaranteed_effort: guaranteed_sustainable_effort(p.r(), p.period()),
        frontier: sustainability_frontier(&stock, frontier_tol)?.map(|f| f.effort),
        msy_sustainable: p.rt() < bound,
        rt_bound: (k >= 2).then_some(bound),
    })
}

/// One row of a frontier sweep over `(rT, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    #[serde(rename = "rT")]
    pub rt: f64,
    pub k: usize,
    #[serde(rename = "E_star")]
    pub guaranteed_effort: f64,
    #[serde(rename = "E_star_star")]
    pub frontier: Option<f64>,
    #[serde(rename = "E_opt")]
    pub optimal_effort: f64,
    #[serde(rename = "MSY")]
    pub max_yield: f64,
}

/// Frontier quantities on a `(rT, k)` grid with `T = 1`, `r = rT`.
pub fn frontier_table(rt_grid: &[f64], k_list: &[usize], capacity: f64, tol: f64) -> Result<Vec<FrontierRow>> {
    let mut rows = Vec::with_capacity(rt_grid.len() * k_list.len());
    for &k in k_list {
        for &rt in rt_grid {
            let stock = StockParams::new(rt, capacity, 1.0, k)?;
            rows.push(FrontierRow {
                rt,
                k,
                guaranteed_effort: guaranteed_sustainable_effort(rt, 1.0),
                frontier: sustainability_frontier(&stock, tol)?.map(|f| f.effort),
                optimal_effort: optimal_effort(rt, 1.0),
                max_yield: max_yield(rt, 1.0, capacity),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::sufficient_stable;

    #[test]
    fn frontier_table_rows() {
        let rows = frontier_table(&[0.5, 2.0], &[2, 3], 1.0, DEFAULT_FRONTIER_TOL).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].k, rows[0].rt), (2, 0.5));
        for r in &rows {
            assert!(r.guaranteed_effort < r.optimal_effort);
            if let Some(e) = r.frontier {
                assert!(r.guaranteed_effort <= e && e <= r.optimal_effort);
            }
        }
    }
    use approx::assert_relative_eq;

    fn stock(r: f64, k_c: f64, t: f64, k: usize) -> StockParams {
        StockParams::new(r, k_c, t, k).unwrap()
    }

    /// Golden-section maximization, independent of the closed form for E_opt.
    fn golden_argmax(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-10 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn yield_reference_and_limits() {
        let s = stock(1.0, 500.0, 1.0, 2);
        let e_opt = optimal_effort(1.0, 1.0);
        assert_relative_eq!(
            yield_at(&s, e_opt).unwrap(),
            122.459_331_201_854_6,
            max_relative = 1e-12
        );
        assert!(yield_at(&s, 1e-9).unwrap() < 1e-6);
        // (1-E) e^{rT} = 1 exactly at E = 1 - e^{-1}
        let collapse = -(-1.0f64).exp_m1();
        assert!(yield_at(&s, collapse).map_or(true, |y| y.abs() < 1e-9));
        assert!(matches!(yield_at(&s, 0.7), Err(HarvestError::NoEquilibrium { .. })));
        assert!(yield_at(&s, 1.0).is_err());
    }

    #[test]
    fn yield_from_simulated_orbit() {
        // average harvest E N(nT) / T along a converged stable orbit
        let e = 0.3;
        let p = ModelParams::new(1.0, 500.0, 1.0, e, 1).unwrap();
        let init = crate::model::InitialData::new(150.0, vec![220.0]).unwrap();
        let values: Vec<f64> = crate::orbit::PostHarvestSeries::new(&p, &init)
            .unwrap()
            .take(3000)
            .collect();
        let tail = &values[2000..];
        let mean: f64 = tail
            .iter()
            .map(|&x| e * crate::model::logistic_flow(x, &p, 1.0).unwrap())
            .sum::<f64>()
            / tail.len() as f64;
        assert_relative_eq!(mean, yield_at(&p.stock(), e).unwrap(), max_relative = 1e-9);
    }

    #[test]
    fn optimal_effort_values() {
        assert!((optimal_effort(1.3747, 1.0) - 0.4971).abs() < 5e-5);
        assert_relative_eq!(optimal_effort(2.1, 1.0), 0.650_062_250_888_844_7, max_relative = 1e-12);
        assert!(optimal_effort(1e-9, 1.0) < 1e-9);
        let s = stock(2.1, 100.0, 1.0, 0);
        let argmax = golden_argmax(|e| yield_at(&s, e).unwrap_or(f64::NEG_INFINITY), 0.01, 0.8);
        assert!((argmax - optimal_effort(2.1, 1.0)).abs() < 1e-7);
    }

    #[test]
    fn max_yield_matches_yield_at_optimum() {
        for &(r, t, k_c) in &[(1.0, 1.0, 500.0), (0.3, 2.5, 80.0), (3.0, 0.7, 1e4)] {
            let my = max_yield(r, t, k_c);
            let y = yield_at(&stock(r, k_c, t, 0), optimal_effort(r, t)).unwrap();
            assert_relative_eq!(my, y, max_relative = 1e-12);
        }
        assert!(max_yield(1e-9, 1.0, 500.0) < 1e-6);
        assert_relative_eq!(
            optimal_post_harvest_level(1.3747, 1.0, 307.1609),
            102.783_052_075_660_5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn guaranteed_effort_values() {
        let e = guaranteed_sustainable_effort(4f64.ln(), 1.0);
        assert_relative_eq!(e, 0.406_929_669_182_746_4, max_relative = 1e-12);
        let e2 = guaranteed_sustainable_effort(2.0, 1.0);
        assert_relative_eq!(e2, 0.543_025_405_236_780_4, max_relative = 1e-12);
        // root of E^2 - (2 + q) E + 1 - q
        let q = (-2.0f64).exp();
        assert!((e2 * e2 - (2.0 + q) * e2 + 1.0 - q).abs() < 1e-14);
        for rt in [0.05, 0.5, 1.0, 2.0, 5.0] {
            assert!(guaranteed_sustainable_effort(rt, 1.0) < optimal_effort(rt, 1.0));
        }
        // the sufficient test flips at E*
        let below = ModelParams::new(4f64.ln(), 1.0, 1.0, e * (1.0 - 1e-9), 3).unwrap();
        let above = ModelParams::new(4f64.ln(), 1.0, 1.0, e * (1.0 + 1e-9), 3).unwrap();
        assert!(sufficient_stable(&below));
        assert!(!sufficient_stable(&above));
    }

    #[test]
    fn msy_bound_values() {
        assert!((msy_rt_bound(2) - 1.9248).abs() < 5e-4);
        assert_relative_eq!(msy_rt_bound(2), 1.924_847_300_238_414, max_relative = 1e-12);
        assert_relative_eq!(msy_rt_bound(3), 1.177_725_211_523_359_8, max_relative = 1e-12);
        assert_relative_eq!(msy_rt_bound(5), 0.669_909_870_940_425_4, max_relative = 1e-12);
        assert_eq!(msy_rt_bound(1), f64::INFINITY);
        assert_eq!(msy_rt_bound(0), f64::INFINITY);
    }

    #[test]
    fn frontier_absent_below_bound_and_for_short_delays() {
        assert_eq!(sustainability_frontier(&stock(1.5, 10.0, 1.0, 2), 1e-10).unwrap(), None);
        assert_eq!(sustainability_frontier(&stock(5.0, 10.0, 1.0, 1), 1e-10).unwrap(), None);
        assert_eq!(sustainability_frontier(&stock(5.0, 10.0, 1.0, 0), 1e-10).unwrap(), None);
    }

    #[test]
    fn frontier_brackets_between_thresholds() {
        let f = sustainability_frontier(&stock(2.0, 10.0, 1.0, 2), 1e-10)
            .unwrap()
            .unwrap();
        assert!(f.effort > 0.543_025_405 && f.effort < 0.632_120_558_8, "{}", f.effort);
        assert!(f.residual < 1e-8, "residual {}", f.residual);
    }

    #[test]
    fn frontier_meets_optimum_at_bound() {
        let rt = msy_rt_bound(2);
        let f = sustainability_frontier(&stock(rt, 10.0, 1.0, 2), 1e-12)
            .unwrap()
            .unwrap();
        assert!((f.effort - optimal_effort(rt, 1.0)).abs() < 1e-6, "{}", f.effort);
    }

    #[test]
    fn report_for_basin_example() {
        let p = ModelParams::new(1.3747, 307.1609, 1.0, 0.4971, 1).unwrap();
        let r = yield_report(&p, DEFAULT_FRONTIER_TOL).unwrap();
        assert!((r.optimal_effort - 0.4971).abs() < 5e-5);
        assert_eq!(r.frontier, None);
        assert!(r.msy_sustainable);
        assert!(r.sustainable);
        assert_eq!(r.rt_bound, None);
        assert!(r.guaranteed_effort < r.optimal_effort);
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "E",
            "yield",
            "E_opt",
            "max_yield",
            "E_star",
            "E_star_star",
            "msy_sustainable",
            "rT_bound",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn report_with_frontier() {
        let p = ModelParams::new(2.0, 10.0, 1.0, 0.3, 2).unwrap();
        let r = yield_report(&p, DEFAULT_FRONTIER_TOL).unwrap();
        let e2 = r.frontier.unwrap();
        assert!(!r.msy_sustainable);
        assert!(r.guaranteed_effort < e2 && e2 <= r.optimal_effort);
        let y = |e| yield_at(&p.stock(), e).unwrap();
        assert!(y(r.guaranteed_effort) < y(e2) && y(e2) <= r.max_yield);
    }
}
