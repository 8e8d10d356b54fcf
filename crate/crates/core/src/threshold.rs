//! Threshold distributions for source activation.
//!
//! Each source draws an activation threshold on the cumulative infection
//! count. The mean-field source equation only sees the distribution through
//! its hazard `h(x) = f(x) / (1 - F(x))`; the stochastic simulator also
//! needs the quantile function and the cumulative hazard `-ln(1 - F(x))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Survival probabilities at or below this are treated as `F(x) = 1`.
const SURVIVAL_FLOOR: f64 = 1e-12;

/// Source activation threshold distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ThresholdDistribution {
    Exponential { mean: f64 },
    Uniform { lo: f64, hi: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl Default for ThresholdDistribution {
    /// Exponential thresholds with a mean of 1000 cumulative infections.
    fn default() -> Self {
        ThresholdDistribution::Exponential { mean: 1000.0 }
    }
}

impl ThresholdDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ThresholdDistribution::Exponential { mean } => mean.is_finite() && mean > 0.0,
            ThresholdDistribution::Uniform { lo, hi } => {
                lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo
            }
            ThresholdDistribution::Weibull { shape, scale } => {
                shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "invalid threshold distribution {self:?}"
            )))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 && !matches!(self, ThresholdDistribution::Uniform { .. }) {
            return 0.0;
        }
        match *self {
            ThresholdDistribution::Exponential { mean } => -(-x / mean).exp_m1(),
            ThresholdDistribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            ThresholdDistribution::Weibull { shape, scale } => -(-(x / scale).powf(shape)).exp_m1(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ThresholdDistribution::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            ThresholdDistribution::Uniform { lo, hi } => {
                if (lo..hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ThresholdDistribution::Weibull { shape, scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    let z = x / scale;
                    (shape / scale) * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
                }
            }
        }
    }

    /// Hazard `f(x) / (1 - F(x))`, or `None` where it is undefined
    /// (`F(x) = 1` within floating tolerance, or a non-finite value).
    ///
    /// Closed forms are used so that the exponential hazard is exactly
    /// `1 / mean` and the Weibull hazard stays finite far into the tail.
    pub fn hazard(&self, x: f64) -> Option<f64> {
        let h = match *self {
            ThresholdDistribution::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0 / mean
                }
            }
            ThresholdDistribution::Uniform { lo, hi } => {
                if x < lo {
                    0.0
                } else if 1.0 - self.cdf(x) <= SURVIVAL_FLOOR {
                    return None;
                } else {
                    1.0 / (hi - x)
                }
            }
            ThresholdDistribution::Weibull { shape, scale } => {
                if x < 0.0 {
                    0.0
                } else if 1.0 - self.cdf(x) <= SURVIVAL_FLOOR {
                    return None;
                } else {
                    (shape / scale) * (x / scale).powf(shape - 1.0)
                }
            }
        };
        h.is_finite().then_some(h)
    }

    /// Cumulative hazard `-ln(1 - F(x))`.
    pub fn cumulative_hazard(&self, x: f64) -> f64 {
        match *self {
            ThresholdDistribution::Exponential { mean } => x.max(0.0) / mean,
            ThresholdDistribution::Uniform { .. } => -(1.0 - self.cdf(x)).ln(),
            ThresholdDistribution::Weibull { shape, scale } => (x.max(0.0) / scale).powf(shape),
        }
    }

    /// Inverse c.d.f. for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            ThresholdDistribution::Exponential { mean } => -mean * (-u).ln_1p(),
            ThresholdDistribution::Uniform { lo, hi } => lo + u * (hi - lo),
            ThresholdDistribution::Weibull { shape, scale } => {
                scale * (-(-u).ln_1p()).powf(1.0 / shape)
            }
        }
    }
}
