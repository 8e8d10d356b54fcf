//! Pure, fully mixed and mixer/non-mixer Nash equilibria, plus the derived
//! economic quantities.
//!
//! All solvers work on the indifference-gap table `Δ(k) = I_c P_i(k) - U_c`
//! for `k = 0..=N` (see [`crate::game::gap_table`]). A focal node that
//! mixes against `n` opponents who each update with probability `p` faces
//! the expected gap
//!
//! ```text
//! E[Δ] = sum_{k=0}^{n} C(n, k) p^k (1 - p)^(n - k) Δ(offset + k)
//! ```
//!
//! a polynomial in Bernstein form. With `Δ` decreasing it is strictly
//! decreasing in `p`, so bisection is safe.

use serde::Serialize;

use crate::dynamics::integrate;
use crate::error::{Error, Result};
use crate::game::gap_table;
use crate::params::{Integration, SystemParams};
use crate::risk::{infection_probability, RiskTable};
use crate::threshold::ThresholdDistribution;

/// Root residual target.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Smallest bisection bracket.
pub const WIDTH_TOL: f64 = 1e-12;
/// Points in the monotonicity pre-scan.
pub const PRESCAN_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The expected gap is nonpositive at `p = 0`: nobody updates.
    NobodyUpdates,
    /// The expected gap is nonnegative at `p = 1`: everyone updates.
    EveryoneUpdates,
}

impl Boundary {
    pub fn probability(self) -> f64 {
        match self {
            Boundary::NobodyUpdates => 0.0,
            Boundary::EveryoneUpdates => 1.0,
        }
    }
}

/// Why a mixer/non-mixer profile cannot be an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerRejection {
    /// `n_u >= psi`.
    TooManyUpdaters { n_u: usize, psi: usize },
    /// `n_u + n_nu > N - 2`: fewer than two mixers.
    TooFewMixers { n_u: usize, n_nu: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EquilibriumResult {
    Pure {
        psi: usize,
    },
    FullyMixed {
        p_star: f64,
        residual: f64,
    },
    MixerProfile {
        n_u: usize,
        n_nu: usize,
        p_star: f64,
        residual: f64,
        /// Set when a committed player could gain by switching at `p_star`.
        stability_violated: bool,
    },
    NoInteriorEquilibrium {
        boundary: Boundary,
    },
    Rejected {
        reason: MixerRejection,
    },
}

impl EquilibriumResult {
    /// Update probability of the mixing players, including boundaries.
    pub fn p_star(&self) -> Option<f64> {
        match *self {
            EquilibriumResult::FullyMixed { p_star, .. }
            | EquilibriumResult::MixerProfile { p_star, .. } => Some(p_star),
            EquilibriumResult::NoInteriorEquilibrium { boundary } => Some(boundary.probability()),
            _ => None,
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match *self {
            EquilibriumResult::FullyMixed { residual, .. }
            | EquilibriumResult::MixerProfile { residual, .. } => Some(residual),
            _ => None,
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(
            self,
            EquilibriumResult::FullyMixed { .. } | EquilibriumResult::MixerProfile { .. }
        )
    }
}

/// Expected gap of a focal node against `trials` independent opponents.
#[derive(Debug, Clone)]
pub struct ExpectedGap<'a> {
    gaps: &'a [f64],
    ln_binom: Vec<f64>,
}

impl<'a> ExpectedGap<'a> {
    /// `gaps[k]` is the gap when `k` of the `gaps.len() - 1` opponents update.
    pub fn new(gaps: &'a [f64]) -> Self {
        assert!(!gaps.is_empty(), "gap slice must be nonempty");
        let n = gaps.len() - 1;
        let mut ln_binom = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        ln_binom.push(acc);
        for k in 0..n {
            acc += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
            ln_binom.push(acc);
        }
        Self { gaps, ln_binom }
    }

    pub fn trials(&self) -> usize {
        self.gaps.len() - 1
    }

    pub fn eval(&self, p: f64) -> f64 {
        let n = self.trials();
        if p <= 0.0 {
            return self.gaps[0];
        }
        if p >= 1.0 {
            return self.gaps[n];
        }
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        self.gaps
            .iter()
            .zip(&self.ln_binom)
            .enumerate()
            .map(|(k, (&g, &lc))| g * (lc + k as f64 * lp + (n - k) as f64 * lq).exp())
            .sum()
    }

    /// Sign changes of the expected gap on an evenly spaced grid over `[0, 1]`.
    pub fn sign_changes(&self, points: usize) -> usize {
        let values: Vec<f64> = (0..points)
            .map(|i| self.eval(i as f64 / (points - 1) as f64))
            .collect();
        values
            .windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count()
    }

    /// Root in `(0, 1)` assuming `eval(0) > 0 > eval(1)`.
    fn solve(&self) -> Result<(f64, f64)> {
        let step = 1.0 / (PRESCAN_POINTS - 1) as f64;
        let mut bracket = None;
        let mut prev = (0.0, self.eval(0.0));
        for i in 1..PRESCAN_POINTS {
            let p = i as f64 * step;
            let v = self.eval(p);
            if prev.1 < 0.0 && v > 0.0 {
                return Err(Error::NonMonotoneGap { p });
            }
            if bracket.is_none() && prev.1 > 0.0 && v <= 0.0 {
                bracket = Some((prev.0, p));
            }
            prev = (p, v);
        }
        let (mut lo, mut hi) = bracket.expect("endpoint signs guarantee a bracket");
        let hi_val = self.eval(hi);
        if hi_val.abs() <= RESIDUAL_TOL {
            return Ok((hi, hi_val.abs()));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            let v = self.eval(mid);
            if v.abs() <= RESIDUAL_TOL || hi - lo <= WIDTH_TOL {
                return Ok((mid, v.abs()));
            }
            if v > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}

fn check_gaps(gaps: &[f64]) -> Result<usize> {
    if gaps.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "gap table needs at least 3 entries (N >= 2), got {}",
            gaps.len()
        )));
    }
    if let Some(k) = gaps.iter().position(|g| !g.is_finite()) {
        return Err(Error::InvalidParams(format!("non-finite gap at k = {k}")));
    }
    Ok(gaps.len() - 1)
}

/// Pure equilibrium from a gap table covering `k = 0..=N`.
///
/// `k` is an equilibrium when `Δ(k-1) >= 0` (the last updater does not
/// regret updating) and `Δ(k) <= 0` (no non-updater wants to switch).
pub fn pure_ne_from_gaps(gaps: &[f64]) -> Result<EquilibriumResult> {
    let n = check_gaps(gaps)?;
    let candidates: Vec<usize> = (0..=n)
        .filter(|&k| (k == 0 || gaps[k - 1] >= 0.0) && (k == n || gaps[k] <= 0.0))
        .collect();
    match candidates.as_slice() {
        [psi] => Ok(EquilibriumResult::Pure { psi: *psi }),
        _ => Err(Error::UniquenessViolated { candidates }),
    }
}

/// Symmetric fully mixed equilibrium from a gap table covering `k = 0..=N`.
pub fn mixed_ne_from_gaps(gaps: &[f64]) -> Result<EquilibriumResult> {
    let n = check_gaps(gaps)?;
    let f = ExpectedGap::new(&gaps[..n]);
    if f.eval(0.0) <= 0.0 {
        return Ok(EquilibriumResult::NoInteriorEquilibrium {
            boundary: Boundary::NobodyUpdates,
        });
    }
    if f.eval(1.0) >= 0.0 {
        return Ok(EquilibriumResult::NoInteriorEquilibrium {
            boundary: Boundary::EveryoneUpdates,
        });
    }
    let (p_star, residual) = f.solve()?;
    Ok(EquilibriumResult::FullyMixed { p_star, residual })
}

/// Equilibrium with `n_u` committed updaters, `n_nu` committed
/// non-updaters and `N - n_u - n_nu` mixers.
pub fn mixer_nonmixer_ne_from_gaps(
    n_u: usize,
    n_nu: usize,
    gaps: &[f64],
) -> Result<EquilibriumResult> {
    let n = check_gaps(gaps)?;
    if n_u + n_nu > n {
        return Err(Error::InvalidParams(format!(
            "n_u + n_nu = {} exceeds N = {n}",
            n_u + n_nu
        )));
    }
    let psi = match pure_ne_from_gaps(gaps)? {
        EquilibriumResult::Pure { psi } => psi,
        _ => unreachable!("pure solver returns Pure"),
    };
    if n_u >= psi {
        return Ok(EquilibriumResult::Rejected {
            reason: MixerRejection::TooManyUpdaters { n_u, psi },
        });
    }
    if n_u + n_nu + 2 > n {
        return Ok(EquilibriumResult::Rejected {
            reason: MixerRejection::TooFewMixers { n_u, n_nu, n },
        });
    }

    let mixers = n - n_u - n_nu;
    let g = ExpectedGap::new(&gaps[n_u..n_u + mixers]);
    if g.eval(0.0) <= 0.0 {
        return Ok(EquilibriumResult::NoInteriorEquilibrium {
            boundary: Boundary::NobodyUpdates,
        });
    }
    if g.eval(1.0) >= 0.0 {
        return Ok(EquilibriumResult::NoInteriorEquilibrium {
            boundary: Boundary::EveryoneUpdates,
        });
    }
    let (p_star, residual) = g.solve()?;

    // A committed updater sees n_u - 1 other updaters plus Bin(M, p*) mixers;
    // a committed non-updater sees n_u plus Bin(M, p*).
    let updaters_stable =
        n_u == 0 || ExpectedGap::new(&gaps[n_u - 1..n_u + mixers]).eval(p_star) >= -RESIDUAL_TOL;
    let non_updaters_stable =
        n_nu == 0 || ExpectedGap::new(&gaps[n_u..=n_u + mixers]).eval(p_star) <= RESIDUAL_TOL;

    Ok(EquilibriumResult::MixerProfile {
        n_u,
        n_nu,
        p_star,
        residual,
        stability_violated: !(updaters_stable && non_updaters_stable),
    })
}

pub fn pure_ne(risk: &RiskTable, params: &SystemParams) -> Result<EquilibriumResult> {
    pure_ne_from_gaps(&gap_table(risk, params)?)
}

pub fn mixed_ne(risk: &RiskTable, params: &SystemParams) -> Result<EquilibriumResult> {
    mixed_ne_from_gaps(&gap_table(risk, params)?)
}

pub fn mixer_nonmixer_ne(
    n_u: usize,
    n_nu: usize,
    risk: &RiskTable,
    params: &SystemParams,
) -> Result<EquilibriumResult> {
    mixer_nonmixer_ne_from_gaps(n_u, n_nu, &gap_table(risk, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpidemicThreshold {
    /// `1 / (N - 1)` on the complete graph.
    pub tau_c: f64,
    /// `beta / delta < tau_c`.
    pub dies_out: bool,
}

/// Relative slack under which `beta (N - 1)` and `delta` count as equal.
const THRESHOLD_RTOL: f64 = 1e-12;

/// Complete-graph epidemic threshold.
///
/// The comparison is done as `beta (N - 1) < delta` with a relative slack of
/// `1e-12`, so inputs that sit exactly on the threshold in decimal (such as
/// `N = 1001, beta = 1e-4, delta = 0.1`) are not declared to die out because
/// of binary rounding.
pub fn epidemic_threshold(params: &SystemParams) -> Result<EpidemicThreshold> {
    if params.n_nodes < 2 {
        return Err(Error::InvalidParams("n_nodes must be at least 2".into()));
    }
    let m = (params.n_nodes - 1) as f64;
    let tau_c = 1.0 / m;
    let dies_out = if params.beta == 0.0 {
        true
    } else {
        params.delta - params.beta * m > THRESHOLD_RTOL * params.delta
    };
    Ok(EpidemicThreshold { tau_c, dies_out })
}

/// Fraction of the all-update spending saved at equilibrium.
pub fn cost_gain(p_star: f64) -> f64 {
    1.0 - p_star
}

/// Smallest update cost at which nobody updates: `I_c P_i(0)`.
pub fn critical_update_cost(
    params: &SystemParams,
    dist: &ThresholdDistribution,
    cfg: &Integration,
) -> Result<f64> {
    let traj = integrate(params, 0.0, dist, cfg)?;
    Ok(params.infection_cost * infection_probability(&traj, params)?.p_infect)
}

pub fn critical_update_cost_from_table(risk: &RiskTable, params: &SystemParams) -> Result<f64> {
    Ok(params.infection_cost * risk.p(0)?)
}
