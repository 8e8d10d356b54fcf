//! Flat JSON run configuration shared by the CLI subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Integration, SystemParams};
use crate::threshold::ThresholdDistribution;

fn default_dt() -> f64 {
    Integration::default().dt
}

fn default_horizon() -> f64 {
    Integration::default().horizon
}

fn default_epsilon() -> f64 {
    Integration::default().extinction_epsilon
}

/// Model parameters, threshold distribution and integrator settings.
///
/// Keys mirror [`SystemParams`]; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_nodes: usize,
    pub n_sources: usize,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub delta_s: f64,
    pub lambda_influence: f64,
    pub x0: f64,
    pub s0: f64,
    pub infection_cost: f64,
    pub update_cost: f64,
    #[serde(default)]
    pub threshold_dist: ThresholdDistribution,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_epsilon")]
    pub extinction_epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_parts(
        params: SystemParams,
        threshold_dist: ThresholdDistribution,
        integration: Integration,
    ) -> Self {
        Self {
            n_nodes: params.n_nodes,
            n_sources: params.n_sources,
            beta: params.beta,
            gamma: params.gamma,
            delta: params.delta,
            delta_s: params.delta_s,
            lambda_influence: params.lambda_influence,
            x0: params.x0,
            s0: params.s0,
            infection_cost: params.infection_cost,
            update_cost: params.update_cost,
            threshold_dist,
            dt: integration.dt,
            horizon: integration.horizon,
            extinction_epsilon: integration.extinction_epsilon,
            output_dir: None,
        }
    }

    pub fn params(&self) -> SystemParams {
        SystemParams {
            n_nodes: self.n_nodes,
            n_sources: self.n_sources,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
            delta_s: self.delta_s,
            lambda_influence: self.lambda_influence,
            x0: self.x0,
            s0: self.s0,
            infection_cost: self.infection_cost,
            update_cost: self.update_cost,
        }
    }

    pub fn integration(&self) -> Integration {
        Integration {
            dt: self.dt,
            horizon: self.horizon,
            extinction_epsilon: self.extinction_epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.threshold_dist.validate()?;
        self.integration().validate()
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
