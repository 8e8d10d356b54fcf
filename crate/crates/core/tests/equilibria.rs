use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virusgame::equilibrium::{mixed_ne_from_gaps, mixer_nonmixer_ne_from_gaps, pure_ne_from_gaps};
use virusgame::game::gap_table;
use virusgame::{
    mixed_ne, pure_ne, risk_profile, EquilibriumResult, Integration, RiskTable, SystemParams,
    ThresholdDistribution,
};

fn psi_of(r: EquilibriumResult) -> usize {
    match r {
        EquilibriumResult::Pure { psi } => psi,
        other => panic!("expected pure result, got {other:?}"),
    }
}

/// Decreasing gap tables shaped like `I_c P(k) - U_c` for a convex risk.
fn random_gaps(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(5..300);
    let p0 = rng.gen_range(0.05..0.9);
    let decay = rng.gen_range(0.5..8.0) / n as f64;
    let uc = rng.gen_range(0.0..p0);
    (0..=n).map(|k| p0 * (-decay * k as f64).exp() - uc).collect()
}

#[test]
fn mixer_with_no_pure_players_is_the_mixed_game() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let gaps = random_gaps(&mut rng);
        let a = mixed_ne_from_gaps(&gaps).unwrap();
        let b = mixer_nonmixer_ne_from_gaps(0, 0, &gaps).unwrap();
        match (a.p_star(), b.p_star()) {
            (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-9, "{x} vs {y}"),
            _ => assert_eq!(format!("{a:?}").split('{').next(), format!("{b:?}").split('{').next()),
        }
    }
}

#[test]
fn interior_roots_meet_the_residual_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let gaps = random_gaps(&mut rng);
        if let EquilibriumResult::FullyMixed { residual, .. } = mixed_ne_from_gaps(&gaps).unwrap() {
            assert!(residual.abs() <= 1e-9);
        }
    }
}

#[test]
fn mixed_and_pure_equilibria_roughly_coincide() {
    let dist = ThresholdDistribution::default();
    let cfg = Integration::default();
    for n in [100, 300, 500] {
        let p = SystemParams {
            n_nodes: n,
            ..SystemParams::equilibrium_default()
        };
        let table = risk_profile(&p, &dist, &cfg).unwrap();
        let psi = psi_of(pure_ne(&table, &p).unwrap());
        let p_star = mixed_ne(&table, &p).unwrap().p_star().unwrap();
        let gap = (psi as f64 / n as f64 - p_star).abs();
        assert!(gap < 0.1, "N = {n}: psi/N = {} p* = {p_star}", psi as f64 / n as f64);
    }
}

#[test]
fn gap_table_drives_pure_equilibrium() {
    let table = RiskTable::from_probabilities(&[0.5, 0.4, 0.3, 0.2, 0.1]);
    let p = SystemParams {
        n_nodes: 4,
        infection_cost: 1.0,
        update_cost: 0.25,
        ..SystemParams::small_network()
    };
    let gaps = gap_table(&table, &p).unwrap();
    assert_eq!(psi_of(pure_ne_from_gaps(&gaps).unwrap()), 3);
}
