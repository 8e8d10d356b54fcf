//! The stochastic simulator is the reference the mean-field layer is judged
//! against.

use virusgame::oracle::mean_trajectory;
use virusgame::{integrate, Integration, SystemParams, ThresholdDistribution};

/// Rates scaled with `N` so that densities `X/N`, `S/N` share one
/// mean-field limit. Close to the epidemic threshold (`beta (N-1) / delta =
/// 0.95`) the finite-size bias dominates the Monte-Carlo noise of 2000 runs.
fn scaled(n: usize) -> SystemParams {
    let s0 = (n / 5) as f64;
    SystemParams {
        n_nodes: n,
        n_sources: n,
        s0,
        beta: 0.095 / (n as f64 - 1.0),
        gamma: 5e-3 / s0,
        ..SystemParams::small_network()
    }
}

struct Errors {
    peak_relative: f64,
    sup_density: f64,
}

fn errors(p: &SystemParams, seed: u64) -> Errors {
    let dist = ThresholdDistribution::default();
    let ode = integrate(p, 0.0, &dist, &Integration::default()).unwrap();
    let peak = ode.peak();
    let mean = mean_trajectory(p, &dist, 0, 2000, seed, 200.0, 0.1).unwrap();
    let i = (peak.t / 0.1).round() as usize;
    let sup = mean
        .iter()
        .zip(&ode.samples)
        .map(|(m, o)| (m.1 - o.x).abs())
        .fold(0.0, f64::max);
    Errors {
        peak_relative: (mean[i].1 - peak.x).abs() / peak.x,
        sup_density: sup / p.n_nodes as f64,
    }
}

#[test]
fn mean_field_error_shrinks_with_size() {
    let errs: Vec<Errors> = [25, 50, 100].iter().map(|&n| errors(&scaled(n), 3)).collect();
    for w in errs.windows(2) {
        assert!(w[1].peak_relative < w[0].peak_relative);
        assert!(w[1].sup_density < w[0].sup_density);
    }
}

#[test]
fn small_network_peak_within_ten_percent() {
    let p = SystemParams {
        n_nodes: 50,
        ..SystemParams::small_network()
    };
    let err = errors(&p, 1);
    assert!(err.peak_relative < 0.1, "relative peak error {}", err.peak_relative);
    assert!(err.sup_density < 0.1);
}
