use approx::assert_relative_eq;
use proptest::prelude::*;
use virusgame::{infection_probability, integrate, Integration, SystemParams, ThresholdDistribution};

fn weibull() -> ThresholdDistribution {
    ThresholdDistribution::Weibull {
        shape: 3.0,
        scale: 5.0,
    }
}

#[test]
fn halving_the_step_barely_moves_the_peak() {
    let p = SystemParams::small_network();
    for k in [0.0, 10.0, 50.0] {
        let coarse = integrate(&p, k, &weibull(), &Integration::default()).unwrap();
        let fine = integrate(
            &p,
            k,
            &weibull(),
            &Integration {
                dt: 0.05,
                ..Integration::default()
            },
        )
        .unwrap();
        let rel = (coarse.peak_x() - fine.peak_x()).abs() / fine.peak_x();
        assert!(rel < 5e-3, "k = {k}: peak moved by {rel}");
    }
}

#[test]
fn halving_the_step_barely_moves_infection_probability() {
    for p in [SystemParams::small_network(), SystemParams::equilibrium_default()] {
        let dist = ThresholdDistribution::default();
        let a = integrate(&p, 0.0, &dist, &Integration::default()).unwrap();
        let b = integrate(
            &p,
            0.0,
            &dist,
            &Integration {
                dt: 0.05,
                ..Integration::default()
            },
        )
        .unwrap();
        let pa = infection_probability(&a, &p).unwrap().p_infect;
        let pb = infection_probability(&b, &p).unwrap().p_infect;
        assert!((pa - pb).abs() < 1e-3, "{pa} vs {pb}");
    }
}

/// With exponential thresholds the hazard is constant and the source
/// equation is linear with a closed-form solution.
#[test]
fn exponential_hazard_matches_closed_form_sources() {
    let p = SystemParams {
        lambda_influence: 0.02,
        ..SystemParams::small_network()
    };
    let mean = 4.0;
    let dist = ThresholdDistribution::Exponential { mean };
    let traj = integrate(&p, 0.0, &dist, &Integration::default()).unwrap();

    let a = p.lambda_influence / mean;
    let rate = p.delta_s + a;
    let s_inf = a * p.n_sources as f64 / rate;
    for st in traj.samples.iter().step_by(97) {
        let exact = s_inf + (p.s0 - s_inf) * (-rate * st.t).exp();
        assert_relative_eq!(st.s, exact, max_relative = 1e-7);
    }
}

#[test]
fn more_protection_means_lower_peak_and_risk() {
    let p = SystemParams::small_network();
    let mut prev_peak = f64::INFINITY;
    let mut prev_risk = f64::INFINITY;
    for k in (0..=100).step_by(10) {
        let traj = integrate(&p, k as f64, &weibull(), &Integration::default()).unwrap();
        let risk = infection_probability(&traj, &p).unwrap().p_infect;
        assert!(traj.peak_x() <= prev_peak + 1e-12, "k = {k}");
        assert!(risk <= prev_risk + 1e-12, "k = {k}");
        prev_peak = traj.peak_x();
        prev_risk = risk;
    }
}

#[test]
fn sub_threshold_run_goes_extinct() {
    // At 100 nodes these rates sit at beta (N - 1) / delta = 0.99 and decay
    // too slowly to finish within the horizon.
    let p = SystemParams {
        n_nodes: 50,
        ..SystemParams::small_network()
    };
    let traj = integrate(&p, 0.0, &ThresholdDistribution::default(), &Integration::default()).unwrap();
    let t_f = traj.extinction_time.expect("extinct within horizon");
    assert!(t_f > traj.peak().t && t_f < 1000.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn states_stay_in_bounds(
        n in 5usize..200,
        ns in 1usize..80,
        beta in 0.0f64..5e-3,
        gamma in 0.0f64..5e-3,
        delta in 0.01f64..1.0,
        delta_s in 0.0f64..1.0,
        lam in 0.0f64..1e-2,
        x_frac in 0.0f64..1.0,
        s_frac in 0.0f64..1.0,
        k_frac in 0.0f64..1.0,
        shape in 0.5f64..4.0,
    ) {
        let p = SystemParams {
            n_nodes: n, n_sources: ns, beta, gamma, delta, delta_s,
            lambda_influence: lam,
            x0: (x_frac * n as f64).floor(),
            s0: (s_frac * ns as f64).floor(),
            ..SystemParams::small_network()
        };
        let k = (k_frac * n as f64).floor();
        let cfg = Integration { horizon: 150.0, ..Integration::default() };
        let dist = ThresholdDistribution::Weibull { shape, scale: 20.0 };
        let traj = integrate(&p, k, &dist, &cfg).unwrap();
        let x_cap = (n as f64 - k).max(p.x0);
        let mut prev_bar = 0.0;
        for s in &traj.samples {
            prop_assert!(s.x >= 0.0 && s.x <= x_cap + 1e-9, "x = {} cap {}", s.x, x_cap);
            prop_assert!(s.s >= 0.0 && s.s <= ns as f64 + 1e-9);
            prop_assert!(s.x_bar >= prev_bar);
            prev_bar = s.x_bar;
        }
        let r = infection_probability(&traj, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_infect));
    }
}

#[test]
fn weibull_hazard_saturates_on_long_runs() {
    let p = SystemParams {
        n_nodes: 100,
        ..SystemParams::small_network()
    };
    let cfg = Integration {
        horizon: 20_000.0,
        ..Integration::default()
    };
    let traj = integrate(&p, 1.0, &weibull(), &cfg).unwrap();
    assert!(traj.hazard_saturated);
    assert!(traj.samples.iter().all(|s| s.is_finite()));
}
