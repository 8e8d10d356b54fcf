//! Shared fixtures for the benchmarks.

use virusgame::{risk_profile, Integration, RiskTable, SystemParams, ThresholdDistribution};

/// The equilibrium parameter set scaled down to `n` nodes.
pub fn network(n: usize) -> SystemParams {
    SystemParams {
        n_nodes: n,
        ..SystemParams::equilibrium_default()
    }
}

/// Risk table for `network(n)` under the default threshold distribution.
pub fn table(n: usize) -> RiskTable {
    risk_profile(&network(n), &ThresholdDistribution::default(), &Integration::default())
        .expect("fixture parameters are valid")
}
