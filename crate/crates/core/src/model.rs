//! Model parameters, initial data and the closed-form logistic flow.
//!
//! Between harvests the population obeys `dN/dt = r N (1 - N/K_c)`, whose
//! solution over an elapsed time `dt` is the map
//! `F(x, a) = K_c a x / (K_c + x (a - 1))` with `a = exp(r dt)`.

use serde::{Deserialize, Serialize};

use crate::error::{require, HarvestError, Result};

/// The quintuple `(r, K_c, T, E, k)` of the harvested system.
///
/// `k = 0` is the non-delayed model: every harvest removes `E` times the
/// current pre-harvest population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams", into = "RawModelParams")]
pub struct ModelParams {
    r: f64,
    capacity: f64,
    period: f64,
    effort: f64,
    delay: usize,
}

#[derive(Serialize, Deserialize)]
struct RawModelParams {
    r: f64,
    #[serde(rename = "K_c")]
    capacity: f64,
    #[serde(rename = "T")]
    period: f64,
    #[serde(rename = "E")]
    effort: f64,
    #[serde(rename = "k")]
    delay: usize,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = HarvestError;

    fn try_from(raw: RawModelParams) -> Result<Self> {
        ModelParams::new(raw.r, raw.capacity, raw.period, raw.effort, raw.delay)
    }
}

impl From<ModelParams> for RawModelParams {
    fn from(p: ModelParams) -> Self {
        RawModelParams {
            r: p.r,
            capacity: p.capacity,
            period: p.period,
            effort: p.effort,
            delay: p.delay,
        }
    }
}

impl ModelParams {
    /// Validates `r, K_c, T > 0` and `E` in `(0, 1)`.
    pub fn new(r: f64, capacity: f64, period: f64, effort: f64, delay: usize) -> Result<Self> {
        StockParams::new(r, capacity, period, delay)?.with_effort(effort)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Carrying capacity `K_c`.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Time `T` between harvests.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Harvesting effort `E`.
    pub fn effort(&self) -> f64 {
        self.effort
    }

    /// Impulse delay `k` in whole periods.
    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn rt(&self) -> f64 {
        self.r * self.period
    }

    /// `exp(rT)`, the growth factor of the flow over one full period.
    pub fn growth_factor(&self) -> f64 {
        (self.r * self.period).exp()
    }

    /// Everything except the effort.
    pub fn stock(&self) -> StockParams {
        StockParams {
            r: self.r,
            capacity: self.capacity,
            period: self.period,
            delay: self.delay,
        }
    }

    pub fn with_effort(&self, effort: f64) -> Result<Self> {
        self.stock().with_effort(effort)
    }

    pub fn with_delay(&self, delay: usize) -> Self {
        Self { delay, ..*self }
    }
}

/// Model parameters without the harvesting effort: `(r, K_c, T, k)`.
///
/// Yield and sustainability analyses scan the effort axis over a fixed stock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StockParams {
    pub r: f64,
    #[serde(rename = "K_c")]
    pub capacity: f64,
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "k")]
    pub delay: usize,
}

impl StockParams {
    pub fn new(r: f64, capacity: f64, period: f64, delay: usize) -> Result<Self> {
        let stock = Self {
            r,
            capacity,
            period,
            delay,
        };
        stock.validate()?;
        Ok(stock)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.r.is_finite() && self.r > 0.0, "r", self.r, "must be positive")?;
        require(
            self.capacity.is_finite() && self.capacity > 0.0,
            "K_c",
            self.capacity,
            "must be positive",
        )?;
        require(
            self.period.is_finite() && self.period > 0.0,
            "T",
            self.period,
            "must be positive",
        )
    }

    pub fn rt(&self) -> f64 {
        self.r * self.period
    }

    pub fn with_effort(&self, effort: f64) -> Result<ModelParams> {
        self.validate()?;
        require(
            effort > 0.0 && effort < 1.0,
            "E",
            effort,
            "must lie in the open interval (0, 1)",
        )?;
        Ok(ModelParams {
            r: self.r,
            capacity: self.capacity,
            period: self.period,
            effort,
            delay: self.delay,
        })
    }
}

/// Post-impulse start value plus the pre-harvest history.
///
/// `history[0] = N(0)`, `history[j] = N(-jT)`; its length equals the delay `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInitialData", into = "RawInitialData")]
pub struct InitialData {
    n0_plus: f64,
    history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawInitialData {
    n0_plus: f64,
    #[serde(default)]
    history: Vec<f64>,
}

impl TryFrom<RawInitialData> for InitialData {
    type Error = HarvestError;

    fn try_from(raw: RawInitialData) -> Result<Self> {
        InitialData::new(raw.n0_plus, raw.history)
    }
}

impl From<InitialData> for RawInitialData {
    fn from(init: InitialData) -> Self {
        RawInitialData {
            n0_plus: init.n0_plus,
            history: init.history,
        }
    }
}

impl InitialData {
    pub fn new(n0_plus: f64, history: Vec<f64>) -> Result<Self> {
        require(
            n0_plus.is_finite() && n0_plus >= 0.0,
            "n0_plus",
            n0_plus,
            "must be a non-negative population",
        )?;
        for &h in &history {
            require(
                h.is_finite() && h >= 0.0,
                "history",
                h,
                "entries must be non-negative populations",
            )?;
        }
        Ok(Self { n0_plus, history })
    }

    /// Start with every pre-harvest record equal to `pre_harvest`.
    pub fn constant(n0_plus: f64, pre_harvest: f64, delay: usize) -> Result<Self> {
        Self::new(n0_plus, vec![pre_harvest; delay])
    }

    pub fn n0_plus(&self) -> f64 {
        self.n0_plus
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }
}

/// `F(x, a) = K_c a x / (K_c + x (a - 1))`, unchecked.
#[inline]
pub(crate) fn grow(x: f64, a: f64, capacity: f64) -> f64 {
    capacity * a * x / (capacity + x * (a - 1.0))
}

/// Population after growing from `x` for `dt` time units without harvest.
///
/// `dt` must lie in `[0, T]`; values outside are rejected rather than clamped.
pub fn logistic_flow(x: f64, p: &ModelParams, dt: f64) -> Result<f64> {
    require(x.is_finite() && x >= 0.0, "x", x, "must be a non-negative population")?;
    require((0.0..=p.period).contains(&dt), "dt", dt, "must lie in [0, T]")?;
    Ok(grow(x, (p.r * dt).exp(), p.capacity))
}
