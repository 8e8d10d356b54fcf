//! Strategies and payoffs of the protection game.
//!
//! Counting convention: `k_updaters` includes the focal node when it
//! updates and excludes it when it does not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::risk::RiskTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Update,
    NotUpdate,
    /// Update with the given probability.
    Mixed(f64),
}

impl Strategy {
    /// Update probability.
    pub fn probability(&self) -> f64 {
        match *self {
            Strategy::Update => 1.0,
            Strategy::NotUpdate => 0.0,
            Strategy::Mixed(p) => p,
        }
    }
}

/// Long-term payoff of a node.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Fitness(pub f64);

/// Payoff of the focal node.
///
/// For `Mixed(p)`, `k_updaters` counts the other updaters and the payoff is
/// the lottery `p V(U) + (1 - p) V(NU, k)`.
pub fn payoff(
    strategy: Strategy,
    k_updaters: usize,
    risk: &RiskTable,
    params: &SystemParams,
) -> Result<Fitness> {
    let n = params.n_nodes;
    if k_updaters > n {
        return Err(Error::OutOfRange { k: k_updaters, n });
    }
    let p = strategy.probability();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!(
            "mixing probability {p} outside [0, 1]"
        )));
    }
    let update = -params.update_cost;
    if p == 1.0 {
        return Ok(Fitness(update));
    }
    let not_update = -risk.p(k_updaters)? * params.infection_cost;
    Ok(Fitness(p * update + (1.0 - p) * not_update))
}

/// `I_c P_i(k) - U_c`: positive when a non-updater facing `k` updaters would
/// rather update.
pub fn indifference_gap(k: usize, risk: &RiskTable, params: &SystemParams) -> Result<f64> {
    if k > params.n_nodes {
        return Err(Error::OutOfRange {
            k,
            n: params.n_nodes,
        });
    }
    Ok(params.infection_cost * risk.p(k)? - params.update_cost)
}

/// `Δ(k)` for every `k` in `0..=N`.
pub fn gap_table(risk: &RiskTable, params: &SystemParams) -> Result<Vec<f64>> {
    (0..=params.n_nodes)
        .map(|k| indifference_gap(k, risk, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn params(n: usize, ic: f64, uc: f64) -> SystemParams {
        SystemParams {
            n_nodes: n,
            infection_cost: ic,
            update_cost: uc,
            ..SystemParams::small_network()
        }
    }

    #[test]
    fn update_pays_the_price() {
        let p = params(4, 1.0, 0.1);
        let risk = RiskTable::from_probabilities(&[0.9, 0.5, 0.3, 0.1, 0.0]);
        for k in 0..=4 {
            assert_eq!(payoff(Strategy::Update, k, &risk, &p).unwrap(), Fitness(-0.1));
        }
    }

    #[test]
    fn not_update_pays_the_risk() {
        let p = params(2, 1.0, 0.1);
        let risk = RiskTable::from_probabilities(&[1.0, 0.0, 0.0]);
        assert_eq!(payoff(Strategy::NotUpdate, 0, &risk, &p).unwrap(), Fitness(-1.0));
        assert_eq!(payoff(Strategy::NotUpdate, 1, &risk, &p).unwrap(), Fitness(0.0));
        assert!(payoff(Strategy::NotUpdate, 3, &risk, &p).is_err());
    }

    #[test]
    fn mixed_endpoints_match_pure() {
        let p = params(4, 1.0, 0.1);
        let risk = RiskTable::from_probabilities(&[0.9, 0.5, 0.3, 0.1, 0.0]);
        for k in 0..=4 {
            assert_eq!(
                payoff(Strategy::Mixed(0.0), k, &risk, &p).unwrap(),
                payoff(Strategy::NotUpdate, k, &risk, &p).unwrap()
            );
            assert_eq!(
                payoff(Strategy::Mixed(1.0), k, &risk, &p).unwrap(),
                payoff(Strategy::Update, k, &risk, &p).unwrap()
            );
        }
        assert!(payoff(Strategy::Mixed(1.5), 0, &risk, &p).is_err());
    }

    #[test]
    fn gap_signs() {
        let risk = RiskTable::from_probabilities(&[0.9, 0.5, 0.3, 0.1, 0.0]);
        let costly = params(4, 1.0, 1.0);
        assert!(gap_table(&risk, &costly).unwrap().iter().all(|&d| d <= 0.0));
        let free = params(4, 0.0, 0.2);
        assert!(gap_table(&risk, &free).unwrap().iter().all(|&d| d == -0.2));
    }

    proptest! {
        #[test]
        fn payoff_monotone_when_risk_monotone(
            mut probs in proptest::collection::vec(0.0f64..=1.0, 2..30),
            ic in 0.0f64..5.0,
            uc in 0.0f64..5.0,
        ) {
            probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let n = probs.len() - 1;
            let p = params(n.max(2), ic, uc);
            let risk = RiskTable::from_probabilities(&probs);
            let mut prev_nu = f64::NEG_INFINITY;
            let mut prev_gap = f64::INFINITY;
            for k in 0..=n {
                let nu = payoff(Strategy::NotUpdate, k, &risk, &p).unwrap().0;
                let u = payoff(Strategy::Update, k, &risk, &p).unwrap().0;
                let gap = indifference_gap(k, &risk, &p).unwrap();
                prop_assert!(nu >= prev_nu);
                prop_assert!(gap <= prev_gap);
                prop_assert_eq!(u, -uc);
                prev_nu = nu;
                prev_gap = gap;
            }
        }
    }
}
