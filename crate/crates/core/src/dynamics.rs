//! Mean-field dynamics of infected nodes, cumulative infections and active
//! sources.
//!
//! ```text
//! dX/dt    = -delta X + (beta X + gamma S) (N - k - X)
//! dS/dt    = -delta_s S + lambda h_F(Xbar) (N_s - S)
//! dXbar/dt =            (beta X + gamma S) (N - k - X)
//! ```
//!
//! `k` is the (possibly fractional) number of protected nodes. The
//! susceptible pool `N - k - X` is floored at zero, so a fully protected
//! network only cures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Integration, SystemParams};
use crate::threshold::ThresholdDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    /// Infected nodes.
    pub x: f64,
    /// Active sources.
    pub s: f64,
    /// Cumulative infections, ignoring cures.
    pub x_bar: f64,
}

impl SystemState {
    pub fn initial(params: &SystemParams) -> Self {
        Self {
            t: 0.0,
            x: params.x0,
            s: params.s0,
            x_bar: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.s.is_finite() && self.x_bar.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub dx: f64,
    pub ds: f64,
    pub dx_bar: f64,
}

/// Right-hand side with an explicit source hazard value.
pub fn derivatives_with_hazard(
    state: &SystemState,
    params: &SystemParams,
    k_protected: f64,
    hazard: f64,
) -> Derivatives {
    let pool = (params.n_nodes as f64 - k_protected - state.x).max(0.0);
    let infection = (params.beta * state.x + params.gamma * state.s) * pool;
    let activation = params.lambda_influence * hazard * (params.n_sources as f64 - state.s);
    Derivatives {
        dx: -params.delta * state.x + infection,
        ds: -params.delta_s * state.s + activation,
        dx_bar: infection,
    }
}

/// Right-hand side of the coupled system.
///
/// Fails with [`Error::HazardUndefined`] when `F(Xbar) = 1`; [`integrate`]
/// handles that case by freezing the hazard at its last finite value.
pub fn derivatives(
    state: &SystemState,
    params: &SystemParams,
    k_protected: f64,
    dist: &ThresholdDistribution,
) -> Result<Derivatives> {
    let hazard = dist
        .hazard(state.x_bar)
        .ok_or(Error::HazardUndefined { x_bar: state.x_bar })?;
    Ok(derivatives_with_hazard(state, params, k_protected, hazard))
}

/// Uniformly sampled solution of the mean-field system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<SystemState>,
    /// First time after the infection peak at which `x <= extinction_epsilon`.
    pub extinction_time: Option<f64>,
    pub k_protected: f64,
    pub dt: f64,
    /// Set when the hazard was frozen because `F(Xbar)` reached one.
    pub hazard_saturated: bool,
}

impl Trajectory {
    pub fn peak(&self) -> &SystemState {
        let mut best = &self.samples[0];
        for s in &self.samples[1..] {
            if s.x > best.x {
                best = s;
            }
        }
        best
    }

    pub fn peak_x(&self) -> f64 {
        self.peak().x
    }

    pub fn last(&self) -> &SystemState {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Index of the extinction sample, if any.
    pub fn extinction_index(&self) -> Option<usize> {
        let t_f = self.extinction_time?;
        Some(((t_f - self.samples[0].t) / self.dt).round() as usize)
    }

    /// At most `max_rows` evenly strided samples; always keeps the first
    /// and the last.
    pub fn downsampled(&self, max_rows: usize) -> impl Iterator<Item = &SystemState> {
        thin(&self.samples, max_rows)
    }
}

/// At most `max_rows` evenly strided items, first and last included.
pub fn thin<T>(items: &[T], max_rows: usize) -> impl Iterator<Item = &T> {
    let last = items.len().saturating_sub(1);
    let stride = last.div_ceil(max_rows.saturating_sub(1).max(1)).max(1);
    let tail = (!last.is_multiple_of(stride)).then(|| &items[last]);
    items.iter().step_by(stride).chain(tail)
}

/// Integrates the system with fixed-step classical Runge-Kutta.
///
/// After every step `x` is clamped to `[0, max(N - k, x_prev)]`, `s` to
/// `[0, N_s]` and `x_bar` is kept nondecreasing.
pub fn integrate(
    params: &SystemParams,
    k_protected: f64,
    dist: &ThresholdDistribution,
    cfg: &Integration,
) -> Result<Trajectory> {
    params.validate()?;
    dist.validate()?;
    cfg.validate()?;
    let n = params.n_nodes as f64;
    if !(0.0..=n).contains(&k_protected) {
        return Err(Error::InvalidParams(format!(
            "k_protected = {k_protected} outside [0, {n}]"
        )));
    }

    let dt = cfg.dt;
    let steps = cfg.steps();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut state = SystemState::initial(params);
    samples.push(state);

    let mut last_hazard: Option<f64> = None;
    let mut saturated = false;
    let mut rhs = |s: &SystemState| {
        let h = match dist.hazard(s.x_bar) {
            Some(h) => {
                last_hazard = Some(h);
                h
            }
            None => {
                saturated = true;
                last_hazard.unwrap_or(0.0)
            }
        };
        derivatives_with_hazard(s, params, k_protected, h)
    };

    let shift = |s: &SystemState, d: &Derivatives, h: f64| SystemState {
        t: s.t + h,
        x: s.x + h * d.dx,
        s: s.s + h * d.ds,
        x_bar: s.x_bar + h * d.dx_bar,
    };

    let x_cap = n - k_protected;
    let s_cap = params.n_sources as f64;
    for step in 1..=steps {
        let k1 = rhs(&state);
        let k2 = rhs(&shift(&state, &k1, dt / 2.0));
        let k3 = rhs(&shift(&state, &k2, dt / 2.0));
        let k4 = rhs(&shift(&state, &k3, dt));
        let combine = |a: f64, b: f64, c: f64, d: f64| dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        let next = SystemState {
            t: step as f64 * dt,
            x: state.x + combine(k1.dx, k2.dx, k3.dx, k4.dx),
            s: state.s + combine(k1.ds, k2.ds, k3.ds, k4.ds),
            x_bar: state.x_bar + combine(k1.dx_bar, k2.dx_bar, k3.dx_bar, k4.dx_bar),
        };
        if !next.is_finite() {
            return Err(Error::NonFiniteState {
                step,
                t: next.t,
                x: next.x,
                s: next.s,
                x_bar: next.x_bar,
            });
        }
        state = SystemState {
            t: next.t,
            x: next.x.clamp(0.0, x_cap.max(state.x)),
            s: next.s.clamp(0.0, s_cap),
            x_bar: next.x_bar.max(state.x_bar),
        };
        samples.push(state);
    }

    let extinction_time = find_extinction(&samples, cfg.extinction_epsilon);
    Ok(Trajectory {
        samples,
        extinction_time,
        k_protected,
        dt,
        hazard_saturated: saturated,
    })
}

fn find_extinction(samples: &[SystemState], epsilon: f64) -> Option<f64> {
    let mut peak = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.x > samples[peak].x {
            peak = i;
        }
    }
    samples[peak..]
        .iter()
        .find(|s| s.x <= epsilon)
        .map(|s| s.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn expo() -> ThresholdDistribution {
        ThresholdDistribution::default()
    }

    #[test]
    fn zero_state_has_no_motion() {
        let mut p = SystemParams::small_network();
        p.lambda_influence = 0.0;
        let d = derivatives(&SystemState::default(), &p, 0.0, &expo()).unwrap();
        assert_eq!((d.dx, d.ds, d.dx_bar), (0.0, 0.0, 0.0));
    }

    #[test]
    fn source_driven_infection_rate() {
        let p = SystemParams::small_network();
        let state = SystemState {
            s: 5.0,
            ..Default::default()
        };
        let d = derivatives(&state, &p, 0.0, &expo()).unwrap();
        assert_relative_eq!(d.dx, 0.5, max_relative = 1e-12);
        assert_relative_eq!(d.dx_bar, 0.5, max_relative = 1e-12);
        // -delta_s * 5 + lambda / mean * 45
        assert_relative_eq!(d.ds, -0.5 + 5e-6 * 1e-3 * 45.0, max_relative = 1e-12);
    }

    #[test]
    fn figure_parameters_at_start() {
        let p = SystemParams::small_network();
        let k = 10.0;
        let d = derivatives(&SystemState::initial(&p), &p, k, &expo()).unwrap();
        assert_relative_eq!(d.dx, p.gamma * p.s0 * (100.0 - k), max_relative = 1e-12);
    }

    #[test]
    fn hazard_undefined_is_reported() {
        let p = SystemParams::small_network();
        let dist = ThresholdDistribution::Uniform { lo: 0.0, hi: 1.0 };
        let state = SystemState {
            x_bar: 2.0,
            ..Default::default()
        };
        assert!(matches!(
            derivatives(&state, &p, 0.0, &dist),
            Err(Error::HazardUndefined { .. })
        ));
    }

    #[test]
    fn saturated_hazard_is_frozen_and_flagged() {
        let p = SystemParams::small_network();
        let dist = ThresholdDistribution::Uniform { lo: 0.0, hi: 5.0 };
        let traj = integrate(&p, 0.0, &dist, &Integration::default()).unwrap();
        assert!(traj.hazard_saturated);
        assert!(traj.samples.iter().all(|s| s.s.is_finite()));
    }

    #[test]
    fn quiescent_system_stays_zero() {
        let mut p = SystemParams::small_network();
        p.lambda_influence = 0.0;
        p.s0 = 0.0;
        p.x0 = 0.0;
        let traj = integrate(&p, 0.0, &expo(), &Integration::default()).unwrap();
        assert!(traj.samples.iter().all(|s| s.x == 0.0 && s.s == 0.0 && s.x_bar == 0.0));
        assert_eq!(traj.extinction_time, Some(0.0));
    }

    #[test]
    fn full_protection_only_cures() {
        let mut p = SystemParams::small_network();
        p.x0 = 5.0;
        let traj = integrate(&p, 100.0, &expo(), &Integration::default()).unwrap();
        for s in traj.samples.iter().step_by(50) {
            assert_relative_eq!(s.x, 5.0 * (-0.1 * s.t).exp(), max_relative = 1e-8);
            assert_eq!(s.x_bar, 0.0);
        }
        let t_f = traj.extinction_time.unwrap();
        // 5 e^{-0.1 t} <= 1e-3 first holds on the grid just past ln(5000) / 0.1
        assert!((t_f - (5000f64).ln() / 0.1).abs() <= 0.1);
    }

    #[test]
    fn higher_protection_lowers_and_shortens_the_outbreak() {
        let p = SystemParams::small_network();
        let dist = ThresholdDistribution::Weibull { shape: 3.0, scale: 5.0 };
        let peaks: Vec<f64> = [0.01, 0.1, 0.5]
            .iter()
            .map(|&q| {
                integrate(&p, q * 100.0, &dist, &Integration::default())
                    .unwrap()
                    .peak_x()
            })
            .collect();
        assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "{peaks:?}");
    }

    #[test]
    fn rejects_out_of_range_protection() {
        let p = SystemParams::small_network();
        assert!(integrate(&p, 101.0, &expo(), &Integration::default()).is_err());
        assert!(integrate(&p, -1.0, &expo(), &Integration::default()).is_err());
    }

    #[test]
    fn downsampling_caps_rows() {
        let p = SystemParams::small_network();
        let traj = integrate(&p, 0.0, &expo(), &Integration::default()).unwrap();
        assert_eq!(traj.samples.len(), 10_001);
        let rows: Vec<_> = traj.downsampled(2000).collect();
        assert!(rows.len() <= 2000 && rows.len() > 1000);
        assert_eq!(rows.last().unwrap().t, traj.last().t);
    }

    #[test]
    fn thinning_keeps_endpoints_and_bound() {
        for len in 0..60 {
            let items: Vec<usize> = (0..len).collect();
            for max in 1..12 {
                let got: Vec<usize> = thin(&items, max).copied().collect();
                assert!(got.len() <= max.max(2), "len {len} max {max}: {got:?}");
                assert_eq!(got.first(), items.first());
                assert_eq!(got.last(), items.last());
            }
        }
    }
}
