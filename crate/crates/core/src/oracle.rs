//! Exact-event stochastic simulation of the node/source process.
//!
//! This is the independent check on the mean-field equations. Nodes follow
//! a continuous-time SIS chain on the complete graph:
//!
//! * a susceptible node is infected at rate `beta X + gamma S`;
//! * an infected node is cured at rate `delta`;
//! * an active source deactivates at rate `delta_s`.
//!
//! Source activation is threshold driven. When a source becomes inactive it
//! draws a threshold `theta ~ F` and an activation budget equal to the
//! cumulative hazard `-ln(1 - F(theta))`. While inactive it accumulates
//! exposure at rate `lambda h_F(Xbar)`, where `Xbar` counts every infection
//! event so far, and it activates the moment exposure reaches the budget.
//! Since the budget is a unit exponential, each inactive source activates
//! with intensity `lambda h_F(Xbar)`, which is the activation term of the
//! mean-field source equation. A zero threshold gives a zero budget and the
//! source fires immediately.
//!
//! Node reactions use the direct method; source activations are scheduled
//! deterministically from the exposure clocks (between events `Xbar` is
//! constant, so exposure grows linearly).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_sig9;
use crate::params::SystemParams;
use crate::threshold::ThresholdDistribution;

/// Default cap on recorded events per run.
pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Susceptible,
    Infected,
    Protected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSlot {
    pub active: bool,
    /// Threshold on cumulative infections drawn at the last deactivation.
    pub threshold: f64,
    budget: f64,
    exposure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Infect,
    Cure,
    SrcActivate,
    SrcDeactivate,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Infect => "infect",
            EventKind::Cure => "cure",
            EventKind::SrcActivate => "src_activate",
            EventKind::SrcDeactivate => "src_deactivate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub entity_id: usize,
}

/// Simulation state of one replication.
#[derive(Debug, Clone)]
pub struct AgentWorld {
    pub node_states: Vec<NodeState>,
    pub source_states: Vec<SourceSlot>,
    pub cumulative_infections: u64,
    pub rng_seed: u64,
    susceptible: IndexSet,
    infected: IndexSet,
    active: IndexSet,
}

/// Set of ids with O(1) insert, remove and uniform pick.
#[derive(Debug, Clone)]
struct IndexSet {
    items: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl IndexSet {
    fn new(capacity: usize) -> Self {
        Self {
            items: Vec::with_capacity(capacity),
            pos: vec![None; capacity],
        }
    }

    fn insert(&mut self, id: usize) {
        debug_assert!(self.pos[id].is_none());
        self.pos[id] = Some(self.items.len());
        self.items.push(id);
    }

    fn remove(&mut self, id: usize) {
        let i = self.pos[id].take().expect("id present");
        self.items.swap_remove(i);
        if let Some(&moved) = self.items.get(i) {
            self.pos[moved] = Some(i);
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> usize {
        self.items[rng.gen_range(0..self.items.len())]
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

impl AgentWorld {
    fn new(
        params: &SystemParams,
        dist: &ThresholdDistribution,
        k_protected: usize,
        seed: u64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let n = params.n_nodes;
        let x0 = (params.x0.round() as usize).min(n - k_protected);
        let s0 = (params.s0.round() as usize).min(params.n_sources);

        let mut susceptible = IndexSet::new(n);
        let mut infected = IndexSet::new(n);
        let node_states = (0..n)
            .map(|i| {
                if i < k_protected {
                    NodeState::Protected
                } else if i < k_protected + x0 {
                    infected.insert(i);
                    NodeState::Infected
                } else {
                    susceptible.insert(i);
                    NodeState::Susceptible
                }
            })
            .collect();

        let mut active = IndexSet::new(params.n_sources);
        let source_states = (0..params.n_sources)
            .map(|j| {
                let mut slot = SourceSlot {
                    active: j < s0,
                    threshold: 0.0,
                    budget: 0.0,
                    exposure: 0.0,
                };
                if slot.active {
                    active.insert(j);
                } else {
                    redraw(&mut slot, dist, rng);
                }
                slot
            })
            .collect();

        Self {
            node_states,
            source_states,
            cumulative_infections: 0,
            rng_seed: seed,
            susceptible,
            infected,
            active,
        }
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let protected = self.node_states.len() - self.susceptible.len() - self.infected.len();
        (self.susceptible.len(), self.infected.len(), protected)
    }
}

fn redraw(slot: &mut SourceSlot, dist: &ThresholdDistribution, rng: &mut ChaCha8Rng) {
    let u: f64 = rng.gen();
    slot.threshold = dist.quantile(u);
    slot.budget = -(-u).ln_1p();
    slot.exposure = 0.0;
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct CtmcRun {
    pub events: Vec<Event>,
    /// Per node: infected at least once after `t = 0`.
    pub ever_infected: Vec<bool>,
    /// Nodes susceptible at `t = 0`.
    pub initially_susceptible: Vec<bool>,
    pub initial_x: usize,
    pub initial_s: usize,
    pub horizon: f64,
    /// The event cap was hit before the horizon.
    pub truncated: bool,
}

impl CtmcRun {
    /// Step-function values `(x, s, x_bar)` at `t = i * grid_dt`, for
    /// `i = 0..=horizon / grid_dt`.
    pub fn sample(&self, grid_dt: f64) -> Vec<(f64, f64, f64)> {
        let points = (self.horizon / grid_dt).round() as usize;
        let mut out = Vec::with_capacity(points + 1);
        let (mut x, mut s, mut xb) = (self.initial_x as i64, self.initial_s as i64, 0i64);
        let mut events = self.events.iter().peekable();
        for i in 0..=points {
            let t = i as f64 * grid_dt;
            while let Some(e) = events.peek() {
                if e.t > t {
                    break;
                }
                match e.kind {
                    EventKind::Infect => {
                        x += 1;
                        xb += 1;
                    }
                    EventKind::Cure => x -= 1,
                    EventKind::SrcActivate => s += 1,
                    EventKind::SrcDeactivate => s -= 1,
                }
                events.next();
            }
            out.push((x as f64, s as f64, xb as f64));
        }
        out
    }

    /// Event log as CSV with header `t,event_type,entity_id`.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("t,event_type,entity_id\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{}", fmt_sig9(e.t), e.kind.as_str(), e.entity_id);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtmcOptions {
    pub max_events: usize,
}

impl Default for CtmcOptions {
    fn default() -> Self {
        Self {
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

/// One seeded replication, stream 0.
pub fn simulate_ctmc(
    params: &SystemParams,
    dist: &ThresholdDistribution,
    k_protected: usize,
    seed: u64,
    horizon: f64,
) -> Result<CtmcRun> {
    simulate_stream(params, dist, k_protected, seed, 0, horizon, CtmcOptions::default())
}

/// One replication on an independent stream of the seeded generator.
pub fn simulate_stream(
    params: &SystemParams,
    dist: &ThresholdDistribution,
    k_protected: usize,
    seed: u64,
    stream: u64,
    horizon: f64,
    opts: CtmcOptions,
) -> Result<CtmcRun> {
    params.validate()?;
    dist.validate()?;
    if k_protected > params.n_nodes {
        return Err(Error::InvalidParams(format!(
            "k_protected = {k_protected} exceeds n_nodes = {}",
            params.n_nodes
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParams(format!(
            "horizon must be positive, got {horizon}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut world = AgentWorld::new(params, dist, k_protected, seed, &mut rng);
    let initially_susceptible: Vec<bool> = world
        .node_states
        .iter()
        .map(|s| *s == NodeState::Susceptible)
        .collect();
    let initial_x = world.infected.len();
    let initial_s = world.active.len();
    let mut ever_infected = vec![false; params.n_nodes];
    let mut events = Vec::new();
    let mut truncated = false;
    let mut last_hazard = 0.0;
    let mut t = 0.0;

    loop {
        let x = world.infected.len() as f64;
        let s = world.active.len() as f64;
        let r_infect = (params.beta * x + params.gamma * s) * world.susceptible.len() as f64;
        let r_cure = params.delta * x;
        let r_deact = params.delta_s * s;
        let total = r_infect + r_cure + r_deact;

        let hazard = match dist.hazard(world.cumulative_infections as f64) {
            Some(h) => {
                last_hazard = h;
                h
            }
            None => last_hazard,
        };
        let a_rate = params.lambda_influence * hazard;
        let mut next_src = None;
        let mut dt_a = f64::INFINITY;
        for (j, slot) in world.source_states.iter().enumerate() {
            if slot.active {
                continue;
            }
            let remaining = (slot.budget - slot.exposure).max(0.0);
            let wait = if remaining == 0.0 {
                0.0
            } else if a_rate > 0.0 {
                remaining / a_rate
            } else {
                f64::INFINITY
            };
            if wait < dt_a {
                dt_a = wait;
                next_src = Some(j);
            }
        }
        let dt_r = if total > 0.0 {
            rng.sample::<f64, _>(Exp1) / total
        } else {
            f64::INFINITY
        };

        let dt = dt_a.min(dt_r);
        if !dt.is_finite() || t + dt > horizon {
            advance_exposure(&mut world, a_rate, horizon - t);
            break;
        }
        t += dt;
        advance_exposure(&mut world, a_rate, dt);

        let event = if dt_a <= dt_r {
            let j = next_src.expect("finite activation wait has a source");
            world.source_states[j].active = true;
            world.active.insert(j);
            Event {
                t,
                kind: EventKind::SrcActivate,
                entity_id: j,
            }
        } else {
            let u = rng.gen::<f64>() * total;
            if u < r_infect {
                let i = world.susceptible.pick(&mut rng);
                world.susceptible.remove(i);
                world.infected.insert(i);
                world.node_states[i] = NodeState::Infected;
                world.cumulative_infections += 1;
                ever_infected[i] = true;
                Event {
                    t,
                    kind: EventKind::Infect,
                    entity_id: i,
                }
            } else if u < r_infect + r_cure || world.active.len() == 0 {
                let i = world.infected.pick(&mut rng);
                world.infected.remove(i);
                world.susceptible.insert(i);
                world.node_states[i] = NodeState::Susceptible;
                Event {
                    t,
                    kind: EventKind::Cure,
                    entity_id: i,
                }
            } else {
                let j = world.active.pick(&mut rng);
                world.active.remove(j);
                let slot = &mut world.source_states[j];
                slot.active = false;
                redraw(slot, dist, &mut rng);
                Event {
                    t,
                    kind: EventKind::SrcDeactivate,
                    entity_id: j,
                }
            }
        };
        events.push(event);
        debug_assert_eq!(
            world.susceptible.len() + world.infected.len() + k_protected,
            params.n_nodes
        );
        if events.len() >= opts.max_events {
            truncated = true;
            break;
        }
    }

    Ok(CtmcRun {
        events,
        ever_infected,
        initially_susceptible,
        initial_x,
        initial_s,
        horizon,
        truncated,
    })
}

fn advance_exposure(world: &mut AgentWorld, a_rate: f64, dt: f64) {
    if a_rate <= 0.0 || dt <= 0.0 {
        return;
    }
    for slot in world.source_states.iter_mut().filter(|s| !s.active) {
        slot.exposure += a_rate * dt;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalRisk {
    /// Fraction of initially susceptible nodes infected at least once.
    pub estimate: f64,
    /// Binomial standard error over all node-replications.
    pub std_error: f64,
    /// Standard error of the per-replication fractions; accounts for the
    /// correlation between nodes of the same run.
    pub replicate_std_error: f64,
    pub n_reps: usize,
}

/// Monte-Carlo estimate of the infection probability of a susceptible node.
/// Replication `r` runs on stream `r` of the seeded generator.
pub fn empirical_infection_probability(
    params: &SystemParams,
    dist: &ThresholdDistribution,
    k_protected: usize,
    n_reps: usize,
    seed: u64,
    horizon: f64,
) -> Result<EmpiricalRisk> {
    if n_reps < 100 {
        return Err(Error::InvalidParams(format!(
            "need at least 100 replications, got {n_reps}"
        )));
    }
    let per_rep = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            let run =
                simulate_stream(params, dist, k_protected, seed, r, horizon, CtmcOptions::default())?;
            let pool = run.initially_susceptible.iter().filter(|&&b| b).count();
            let hit = run
                .ever_infected
                .iter()
                .zip(&run.initially_susceptible)
                .filter(|(&e, &s)| e && s)
                .count();
            Ok((hit, pool))
        })
        .collect::<Result<Vec<_>>>()?;

    let (hits, trials) = per_rep
        .iter()
        .fold((0usize, 0usize), |(h, n), &(a, b)| (h + a, n + b));
    if trials == 0 {
        return Ok(EmpiricalRisk {
            estimate: 0.0,
            std_error: 0.0,
            replicate_std_error: 0.0,
            n_reps,
        });
    }
    let estimate = hits as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    let fractions: Vec<f64> = per_rep
        .iter()
        .map(|&(h, n)| h as f64 / n as f64)
        .collect();
    let mean = fractions.iter().sum::<f64>() / n_reps as f64;
    let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n_reps - 1) as f64;
    Ok(EmpiricalRisk {
        estimate,
        std_error,
        replicate_std_error: (var / n_reps as f64).sqrt(),
        n_reps,
    })
}

/// Replication mean of `(x, s)` on the grid `t = i * grid_dt`.
pub fn mean_trajectory(
    params: &SystemParams,
    dist: &ThresholdDistribution,
    k_protected: usize,
    n_reps: usize,
    seed: u64,
    horizon: f64,
    grid_dt: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let points = (horizon / grid_dt).round() as usize + 1;
    // Pairwise reduction keeps few sampled runs alive; the summands are
    // integer counts, so the result is exact in any order.
    let sums = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            simulate_stream(params, dist, k_protected, seed, r, horizon, CtmcOptions::default())
                .map(|run| run.sample(grid_dt).into_iter().map(|(x, s, _)| (x, s)).collect())
        })
        .try_reduce(
            || vec![(0.0, 0.0); points],
            |mut a: Vec<(f64, f64)>, b| {
                for (acc, v) in a.iter_mut().zip(&b) {
                    acc.0 += v.0;
                    acc.1 += v.1;
                }
                Ok(a)
            },
        )?;
    let scale = 1.0 / n_reps as f64;
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, (x, s))| (i as f64 * grid_dt, x * scale, s * scale))
        .collect())
}
