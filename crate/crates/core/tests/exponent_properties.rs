use dampwave::exponents::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// textbook root of the quadratic
fn quadratic_root(k: f64) -> f64 {
    let (a, b, c) = (k - 1.0, -(k + 1.0), -2.0);
    (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
}

proptest! {
    #[test]
    fn strauss_root_residual(k in 1.0001f64..10.0) {
        let p = strauss_exponent(k).unwrap();
        let res = (k - 1.0) * p * p - (k + 1.0) * p - 2.0;
        prop_assert!(res.abs() < 1e-10, "residual {res}");
        prop_assert!((p - quadratic_root(k)).abs() < 1e-10 * p);
    }

    #[test]
    fn strauss_is_decreasing(k1 in 1.01f64..10.0, dk in 0.001f64..5.0) {
        prop_assert!(strauss_exponent(k1).unwrap() > strauss_exponent(k1 + dk).unwrap());
    }

    #[test]
    fn strauss_exceeds_fujita(n in 2u32..8, mu in 0.001f64..1.999) {
        prop_assert!(strauss_exponent(n as f64 + mu).unwrap() > fujita_exponent(n).unwrap());
    }

    #[test]
    fn lifespan_exponent_is_positive_below_critical(n in 2u32..6, mu in 0.0f64..2.0, frac in 0.01f64..0.99) {
        prop_assume!(mu != 1.0);
        let ps = strauss_exponent(n as f64 + mu).unwrap();
        let p = 1.0 + frac * (ps - 1.0);
        let params = ModelParams::new(n, mu, p, 1.0, 1.0).unwrap();
        prop_assert!(admissible(&params));
        let k = lifespan_exponent(&params).unwrap();
        prop_assert!(k >= 0.0 && k.is_finite());
    }
}

#[test]
fn lifespan_exponent_diverges_at_critical_power() {
    let ps = strauss_exponent(2.5).unwrap();
    let mut last = 0.0;
    for gap in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
        let k = lifespan_exponent(&ModelParams::new(2, 0.5, ps - gap, 1.0, 1.0).unwrap()).unwrap();
        assert!(k > last);
        last = k;
    }
    assert!(last > 1e5);
    // continuity in p
    let a = lifespan_exponent(&ModelParams::new(2, 0.5, 2.0, 1.0, 1.0).unwrap()).unwrap();
    let b = lifespan_exponent(&ModelParams::new(2, 0.5, 2.0 + 1e-9, 1.0, 1.0).unwrap()).unwrap();
    assert!((a - b).abs() < 1e-7);
}

#[test]
fn kato_hypothesis_matches_strauss_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut disagreements = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(2..=6u32);
        let mu = loop {
            let m: f64 = rng.random_range(0.0..2.0);
            if m != 1.0 {
                break m;
            }
        };
        let p = rng.random_range(1.0001..4.0);
        let (a, q) = kato_exponents(n, mu, p).unwrap();
        let k = n as f64 + mu;
        let lhs = a * (p - 1.0) > q - 2.0;
        let rhs = (k - 1.0) * p * p - (k + 1.0) * p - 2.0 < 0.0;
        if lhs != rhs {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn kato_exponent_identity_on_admissible_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.random_range(2..=6u32);
        let mu: f64 = rng.random_range(0.0..2.0);
        if mu == 1.0 {
            continue;
        }
        let ps = strauss_exponent(n as f64 + mu).unwrap();
        let p = rng.random_range(1.0001..ps);
        let params = ModelParams::new(n, mu, p, 1.0, 1.0).unwrap();
        if !admissible(&params) {
            continue;
        }
        let a = kato_lifespan_exponent(&params).unwrap();
        let b = lifespan_exponent(&params).unwrap();
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "({n}, {mu}, {p}): {a} vs {b}");
        let kp = kato_parameters(&params).unwrap();
        assert!(kp.a > 1.0 - 1e-12, "a = {} at ({n}, {mu}, {p})", kp.a);
        checked += 1;
    }
}

#[test]
fn regime_start_times_map_to_zero() {
    for mu in [0.0, 0.2, 0.5, 0.9, 1.1, 1.5, 1.9, 2.0] {
        let rc = regime_constants(mu).unwrap();
        let lam = (1.0 + rc.t0).powf(rc.ell + 1.0) / (rc.ell + 1.0);
        assert!((lam - 1.0).abs() < 1e-12, "mu = {mu}");
    }
}
