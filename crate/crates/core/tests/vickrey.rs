use balstag_core::vickrey::{
    expected_bottleneck_time, expected_linear_time, phi_for_rho, simulate_bottleneck,
    BottleneckConfig,
};
use proptest::prelude::*;

#[test]
fn simulation_agrees_with_closed_form_at_moderate_load() {
    let cfg = BottleneckConfig::from_rho(2.0, 0.5);
    let sim = simulate_bottleneck(&cfg, 200_000, 17).unwrap();
    let expected = expected_bottleneck_time(2.0, 0.5).unwrap();
    assert_eq!(expected, 3.0);
    assert!(
        (sim.mean_s - expected).abs() <= 3.0 * sim.std_error_s,
        "{sim:?}"
    );
}

#[test]
fn queue_length_obeys_littles_law() {
    // Time-average occupancy L = lambda * W.
    for rho in [0.3, 0.7] {
        let cfg = BottleneckConfig::from_rho(1.0, rho);
        let sim = simulate_bottleneck(&cfg, 200_000, 3).unwrap();
        let lw = cfg.rate * sim.mean_s;
        let tol = 3.0 * (sim.in_system_std_error + cfg.rate * sim.std_error_s);
        assert!(
            (sim.mean_in_system - lw).abs() <= tol,
            "rho {rho}: L {} vs lambda W {lw}",
            sim.mean_in_system
        );
    }
}

#[test]
fn simulation_is_reproducible() {
    let cfg = BottleneckConfig::from_rho(1.0, 0.8);
    assert_eq!(
        simulate_bottleneck(&cfg, 5_000, 9).unwrap(),
        simulate_bottleneck(&cfg, 5_000, 9).unwrap()
    );
}

proptest! {
    #[test]
    fn linear_estimator_matches_bottleneck(rho in 0.0f64..0.99, tau in 0.1f64..600.0) {
        let phi = phi_for_rho(rho.max(1e-9)).unwrap();
        let lin = expected_linear_time(tau, rho, phi).unwrap();
        let md1 = expected_bottleneck_time(tau, rho).unwrap();
        prop_assert!((lin - md1).abs() <= 1e-12 * md1);
    }
}
