//! Probability that a susceptible node is infected at least once before the
//! epidemic dies out.
//!
//! A susceptible node is hit at rate `beta X(t) + gamma S(t)`, so the chance
//! of escaping infection over `[0, t_f]` is the survival factor
//! `exp(-integral of that rate)`.

use rayon::prelude::*;

use crate::dynamics::{integrate, Trajectory};
use crate::error::{Error, Result};
use crate::params::{Integration, SystemParams};
use crate::threshold::ThresholdDistribution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectionRisk {
    pub p_infect: f64,
    pub hazard_integral: f64,
    /// End of the integration window.
    pub t_f: f64,
    /// No extinction inside the horizon; `t_f` is the horizon.
    pub truncated: bool,
}

fn hazard_rate(params: &SystemParams, x: f64, s: f64) -> f64 {
    params.beta * x + params.gamma * s
}

/// Trapezoidal quadrature of the infection hazard over `[0, t_f]`.
pub fn infection_probability(traj: &Trajectory, params: &SystemParams) -> Result<InfectionRisk> {
    if traj.samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if let Some(index) = traj
        .samples
        .iter()
        .position(|s| s.x < 0.0 || s.s < 0.0 || s.x_bar < 0.0)
    {
        return Err(Error::NegativeSample { index });
    }

    let (end, truncated) = match traj.extinction_index() {
        Some(i) => (i.min(traj.samples.len() - 1), false),
        None => (traj.samples.len() - 1, true),
    };
    let window = &traj.samples[..=end];
    let hazard_integral: f64 = window
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            0.5 * (b.t - a.t) * (hazard_rate(params, a.x, a.s) + hazard_rate(params, b.x, b.s))
        })
        .sum();
    Ok(InfectionRisk {
        p_infect: 0.0 - (-hazard_integral).exp_m1(),
        hazard_integral,
        t_f: window[end].t,
        truncated,
    })
}

/// Probability of being infected within the next unit of time, per sample:
/// `1 - exp(-(beta X(t) + gamma S(t)))`. This is the running value that
/// decays to zero as the epidemic dies out.
pub fn instantaneous_risk(traj: &Trajectory, params: &SystemParams) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| (s.t, 0.0 - (-hazard_rate(params, s.x, s.s)).exp_m1()))
        .collect()
}

/// Cumulative infection probability `1 - exp(-integral_0^t rate)` at every
/// sample time.
pub fn cumulative_risk(traj: &Trajectory, params: &SystemParams) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(traj.samples.len());
    let mut prev: Option<(f64, f64)> = None;
    for s in &traj.samples {
        let r = hazard_rate(params, s.x, s.s);
        if let Some((t0, r0)) = prev {
            acc += 0.5 * (s.t - t0) * (r + r0);
        }
        prev = Some((s.t, r));
        out.push((s.t, 0.0 - (-acc).exp_m1()));
    }
    out
}

/// `P_i(k)` for every integer number of protected nodes `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    entries: Vec<InfectionRisk>,
}

impl RiskTable {
    pub fn from_entries(entries: Vec<InfectionRisk>) -> Self {
        Self { entries }
    }

    /// Builds a table from bare probabilities (hand-made fixtures).
    pub fn from_probabilities(probs: &[f64]) -> Self {
        Self {
            entries: probs
                .iter()
                .map(|&p| InfectionRisk {
                    p_infect: p,
                    hazard_integral: -(-p).ln_1p(),
                    t_f: 0.0,
                    truncated: false,
                })
                .collect(),
        }
    }

    /// Population size covered, i.e. the largest `k`.
    pub fn n_nodes(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, k: usize) -> Result<&InfectionRisk> {
        self.entries.get(k).ok_or(Error::OutOfRange {
            k,
            n: self.n_nodes(),
        })
    }

    pub fn p(&self, k: usize) -> Result<f64> {
        Ok(self.get(k)?.p_infect)
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.p_infect)
    }

    pub fn entries(&self) -> &[InfectionRisk] {
        &self.entries
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].p_infect <= w[0].p_infect)
    }
}

/// Integrates the dynamics once per `k` in `0..=N` and tabulates `P_i(k)`.
/// Rows are computed in parallel.
pub fn risk_profile(
    params: &SystemParams,
    dist: &ThresholdDistribution,
    cfg: &Integration,
) -> Result<RiskTable> {
    params.validate()?;
    let entries = (0..=params.n_nodes)
        .into_par_iter()
        .map(|k| {
            let traj = integrate(params, k as f64, dist, cfg)?;
            infection_probability(&traj, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RiskTable { entries })
}
