//! Logistic population growth with delayed impulsive harvesting.
//!
//! Between harvests the population follows the logistic equation. At each
//! harvest time `nT` the catch is a fraction `E` of the population recorded
//! `k` periods earlier, so the post-harvest values obey
//!
//! ```text
//! x_{n+1} = max{ F(x_n) - E F(x_{n-k}), 0 },   F(x) = K a x / (K + x (a - 1)),  a = e^{rT}
//! ```
//!
//! The crate simulates these orbits, classifies the positive periodic
//! solution as stable or unstable, computes sustainable yields and runs batch
//! scans over initial data and parameter grids.

pub mod error;
pub mod export;
pub mod model;
pub mod orbit;
pub mod scan;
pub mod stability;
pub mod yields;

pub use error::{HarvestError, Result};
pub use model::{logistic_flow, InitialData, ModelParams, StockParams};
pub use orbit::{
    continuous_trajectory, iterate, seed_orbit, step, Orbit, Outcome, PostHarvestSeries, StoppingRule, TrajectoryPoint,
};
pub use scan::{
    basin_scan, grid, msy_bound_table, stability_region_sweep, transitions, BasinOutcome, BasinSample, BasinScan,
    BoundRow, EffortRule, SurvivalRule, SweepRow,
};
pub use stability::{
    classify, linearization, oracle_stability, positive_equilibrium, solve_theta_star, sufficient_stable,
    EmpiricalVerdict, LinearizationCoefficients, StabilityClass, StabilityVerdict,
};
pub use yields::{
    frontier_table, guaranteed_sustainable_effort, max_yield, msy_rt_bound, optimal_effort, sustainability_frontier,
    yield_at, yield_report, FrontierPoint, FrontierRow, YieldReport,
};
