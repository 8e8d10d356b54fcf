//! Model constants and integrator settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population sizes, contact and curing rates, costs and initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Total node population.
    pub n_nodes: usize,
    /// Size of the virus source pool.
    pub n_sources: usize,
    /// Node-to-node contact rate.
    pub beta: f64,
    /// Source-to-node contact rate.
    pub gamma: f64,
    /// Node curing rate.
    pub delta: f64,
    /// Source deactivation rate.
    pub delta_s: f64,
    /// Influence rate scaling the source activation hazard.
    pub lambda_influence: f64,
    /// Initial infected count.
    pub x0: f64,
    /// Initial active sources.
    pub s0: f64,
    pub infection_cost: f64,
    pub update_cost: f64,
}

impl SystemParams {
    /// Parameter set of the transient figures: 100 nodes, 50 sources,
    /// `beta = gamma = 1e-3`, `lambda = 5e-6`, five sources active at start.
    pub fn small_network() -> Self {
        Self {
            n_nodes: 100,
            n_sources: 50,
            beta: 1e-3,
            gamma: 1e-3,
            delta: 0.1,
            delta_s: 0.1,
            lambda_influence: 5e-6,
            x0: 0.0,
            s0: 5.0,
            infection_cost: 1.0,
            update_cost: 0.1,
        }
    }

    /// Default parameter set of the equilibrium studies: 500 nodes,
    /// `beta = 1e-4`, `lambda = 1e-4`, ten sources active at start.
    pub fn equilibrium_default() -> Self {
        Self {
            n_nodes: 500,
            n_sources: 50,
            beta: 1e-4,
            gamma: 1e-3,
            delta: 0.1,
            delta_s: 0.1,
            lambda_influence: 1e-4,
            x0: 0.0,
            s0: 10.0,
            infection_cost: 1.0,
            update_cost: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidParams(format!(
                "n_nodes must be at least 2, got {}",
                self.n_nodes
            )));
        }
        if self.n_sources == 0 {
            return Err(Error::InvalidParams("n_sources must be positive".into()));
        }
        let nonneg = [
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("delta_s", self.delta_s),
            ("lambda_influence", self.lambda_influence),
            ("x0", self.x0),
            ("s0", self.s0),
            ("infection_cost", self.infection_cost),
            ("update_cost", self.update_cost),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if self.x0 > self.n_nodes as f64 {
            return Err(Error::InvalidParams(format!(
                "x0 = {} exceeds n_nodes = {}",
                self.x0, self.n_nodes
            )));
        }
        if self.s0 > self.n_sources as f64 {
            return Err(Error::InvalidParams(format!(
                "s0 = {} exceeds n_sources = {}",
                self.s0, self.n_sources
            )));
        }
        Ok(())
    }

    /// Number of protected nodes when every node updates with probability `p`.
    pub fn protected_from_probability(&self, p: f64) -> f64 {
        p * self.n_nodes as f64
    }
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integration {
    pub dt: f64,
    pub horizon: f64,
    /// Infected count at or below which the epidemic counts as extinct.
    pub extinction_epsilon: f64,
}

impl Default for Integration {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 1000.0,
            extinction_epsilon: 1e-3,
        }
    }
}

impl Integration {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::InvalidParams(format!(
                "dt must lie in (0, horizon], got {}",
                self.dt
            )));
        }
        if !(self.extinction_epsilon.is_finite() && self.extinction_epsilon >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "extinction_epsilon must be nonnegative, got {}",
                self.extinction_epsilon
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SystemParams::small_network().validate().unwrap();
        SystemParams::equilibrium_default().validate().unwrap();
        Integration::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = SystemParams::small_network();
        p.n_nodes = 1;
        assert!(p.validate().is_err());

        let mut p = SystemParams::small_network();
        p.beta = -1.0;
        assert!(p.validate().is_err());

        let mut p = SystemParams::small_network();
        p.x0 = 101.0;
        assert!(p.validate().is_err());

        let mut p = SystemParams::small_network();
        p.s0 = 51.0;
        assert!(p.validate().is_err());

        let cfg = Integration {
            dt: 2.0,
            horizon: 1.0,
            extinction_epsilon: 1e-3,
        };
        assert!(cfg.validate().is_err());
    }
}
