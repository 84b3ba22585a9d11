use dampwave::exponents::regime_constants;
use dampwave::radial::{solve_damped, solve_transformed, DataProfile, SolverConfig};
use dampwave::transform::*;
use dampwave::ModelParams;
use proptest::prelude::*;

proptest! {
    #[test]
    fn round_trip(s in 0.01f64..1e4, ell in 0.0f64..5.0) {
        let t = time_inverse(s, ell).unwrap();
        prop_assert!(((time_forward(t, ell) - s) / s).abs() < 1e-12);
    }

    #[test]
    fn forward_increasing_and_convex(t in 0.0f64..50.0, ell in 0.01f64..4.0) {
        let h = 1e-3 * (1.0 + t);
        let (a, b, c) = (time_forward(t, ell), time_forward(t + h, ell), time_forward(t + 2.0 * h, ell));
        prop_assert!(b > a && c > b);
        prop_assert!(c - 2.0 * b + a > 0.0);
    }
}

#[test]
fn start_time_maps_to_original_zero() {
    for mu in [0.0, 0.3, 0.5, 0.8, 1.2, 1.5, 1.8] {
        let rc = regime_constants(mu).unwrap();
        assert!(original_time(rc.t0, rc.ell).abs() < 1e-12, "mu = {mu}");
    }
}

#[test]
fn source_minus_speed_exponent() {
    let prof = DataProfile::default();
    for (mu, p) in [(0.5, 2.0), (0.2, 1.5), (1.5, 2.0), (1.8, 1.7)] {
        let tp = build_transformed_profile(&ModelParams::new(2, mu, p, 1.0, 1.0).unwrap(), &prof).unwrap();
        let d = tp.source_exponent - tp.speed_exponent;
        if mu < 1.0 {
            assert_eq!(d, 0.0);
        } else {
            assert_eq!(d, -(p - 1.0));
        }
    }
}

#[test]
fn identity_case_is_bitwise_identical() {
    let params = ModelParams::new(3, 0.0, 2.0, 0.5, 1.0).unwrap();
    let prof = DataProfile::default();
    let cfg = SolverConfig { t_max: 3.0, count: 257, frame_interval: Some(0.5), ..Default::default() };
    let a = solve_damped(&params, &prof, &cfg).unwrap();
    let tp = build_transformed_profile(&params, &prof).unwrap();
    let b = solve_transformed(&tp, &cfg).unwrap();
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.t, y.t);
        assert_eq!(x.u, y.u);
    }
    let pulled = pullback_solution(&b, &tp, &[1.0, 2.0]).unwrap();
    assert_eq!(pulled[0].values, a.snapshots[2].u);
    let cr = cross_residual(&params, &prof, &SolverConfig { count: 257, ..Default::default() }, 1.0, 4).unwrap();
    assert!(cr.discrepancy <= 1e-12);
}

#[test]
fn pullback_outside_trajectory_is_a_range_error() {
    let params = ModelParams::new(2, 0.5, 2.0, 0.5, 1.0).unwrap();
    let tp = build_transformed_profile(&params, &DataProfile::default()).unwrap();
    let cfg = SolverConfig { t_max: 1.0, count: 129, frame_interval: Some(0.25), ..Default::default() };
    let w = solve_transformed(&tp, &cfg).unwrap();
    let tau_end = original_time(w.snapshots.last().unwrap().t, tp.ell);
    assert!(pullback_solution(&w, &tp, &[0.5 * tau_end]).is_ok());
    assert!(matches!(pullback_solution(&w, &tp, &[tau_end + 1.0]), Err(dampwave::Error::Range(_))));
}

#[test]
fn high_regime_pullback_divides_by_bracket() {
    let params = ModelParams::new(2, 1.5, 2.0, 0.5, 1.0).unwrap();
    let tp = build_transformed_profile(&params, &DataProfile::default()).unwrap();
    let cfg = SolverConfig { t_max: 1.0, count: 129, frame_interval: Some(0.5), ..Default::default() };
    let w = solve_transformed(&tp, &cfg).unwrap();
    let s = &w.snapshots[1];
    let tau = original_time(s.t, tp.ell);
    let u = pullback_solution(&w, &tp, &[tau]).unwrap();
    for (a, b) in u[0].values.iter().zip(&s.u) {
        assert!((a * (1.0 + s.t) - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn cross_residual_converges_at_second_order() {
    for mu in [0.5, 1.5] {
        let params = ModelParams::new(2, mu, 2.0, 1.0, 1.0).unwrap();
        let cfg = SolverConfig { count: 257, ..Default::default() };
        let c = cross_convergence(&params, &DataProfile::default(), &cfg, 1.0, 10, 3).unwrap();
        for r in &c.ratios {
            assert!((3.0..=5.0).contains(r), "mu = {mu}: ratios {:?}", c.ratios);
        }
        assert!(c.levels.iter().all(|l| l.growth <= WINDOW_GROWTH_LIMIT));
    }
}

#[test]
fn cross_residual_rejects_windows_reaching_blowup() {
    let params = ModelParams::new(2, 0.5, 2.0, 1.0, 1.0).unwrap();
    let cfg = SolverConfig { count: 129, ..Default::default() };
    assert!(cross_residual(&params, &DataProfile::default(), &cfg, 20.0, 10).is_err());
}
