//! Simulation and equilibrium toolkit for a network virus-protection game.
//!
//! Nodes on a complete graph decide whether to pay for an antivirus update.
//! Unprotected nodes follow SIS dynamics driven by infected peers and by a
//! population of virus sources whose activation follows a homogeneous
//! linear-threshold rule on the cumulative infection count. The crate
//! integrates the mean-field equations, turns trajectories into infection
//! probabilities, and solves the resulting population game for its pure,
//! fully mixed and mixer/non-mixer equilibria. A continuous-time Markov
//! chain simulator serves as an independent check of the mean-field layer.

pub mod config;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod format;
pub mod game;
pub mod oracle;
pub mod params;
pub mod risk;
pub mod threshold;

pub use config::RunConfig;
pub use dynamics::{derivatives, integrate, Derivatives, SystemState, Trajectory};
pub use equilibrium::{
    cost_gain, critical_update_cost, epidemic_threshold, mixed_ne, mixer_nonmixer_ne, pure_ne,
    Boundary, EquilibriumResult, MixerRejection,
};
pub use error::{Error, Result};
pub use experiments::{builtin_suite, ExperimentOutput, ExperimentSpec};
pub use game::{indifference_gap, payoff, Fitness, Strategy};
pub use oracle::{empirical_infection_probability, simulate_ctmc, CtmcRun, EmpiricalRisk};
pub use params::{Integration, SystemParams};
pub use risk::{infection_probability, risk_profile, InfectionRisk, RiskTable};
pub use threshold::ThresholdDistribution;
