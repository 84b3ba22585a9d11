//! Invariant suite behind `dampwave verify`.

use std::f64::consts::PI;

use dampwave::exponents::{admissible, kato_exponents, kato_lifespan_exponent, lifespan_exponent, strauss_exponent, strauss_gap};
use dampwave::functionals::functional_f;
use dampwave::specfun::{bessel_k, Clock};
use dampwave::transform::{original_time, transformed_time};
use dampwave::{LambdaWeight, ModelParams, PhiFunction, RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report::CheckOutcome;

pub const SEED: u64 = 0x5eed_d4a3;
pub const ELLS: [f64; 4] = [0.25, 0.5, 1.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Scale the normalizing constant of λ by 1.01.
    CEll,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioExtremes {
    pub ell: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyResults {
    pub fault: Option<Fault>,
    pub lambda_ratio_extremes: Vec<RatioExtremes>,
}

fn t0_of(ell: f64) -> f64 {
    (ell + 1.0).powf(1.0 / (ell + 1.0)) - 1.0
}

fn log_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..=points).map(move |i| lo * (hi / lo).powf(i as f64 / points as f64))
}

fn sample_triple(rng: &mut ChaCha8Rng) -> (u32, f64, f64) {
    let n = rng.random_range(2..=6u32);
    let mut mu = rng.random_range(0.0..=2.0f64);
    if mu == 1.0 {
        mu = 0.5;
    }
    (n, mu, rng.random_range(1.0001..6.0f64))
}

pub fn run(fault: Option<Fault>) -> dampwave::Result<(Vec<CheckOutcome>, VerifyResults)> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    checks.push(CheckOutcome::at_most("strauss_three", (strauss_exponent(3.0)? - (1.0 + 2f64.sqrt())).abs(), 1e-12));
    let quad = (3.5 + (3.5f64 * 3.5 + 8.0 * 1.5).sqrt()) / 3.0;
    checks.push(CheckOutcome::at_most("strauss_two_and_half", (strauss_exponent(2.5)? - quad).abs(), 1e-9));

    let mut disagreements = 0usize;
    for _ in 0..10_000 {
        let (n, mu, p) = sample_triple(&mut rng);
        let (a, q) = kato_exponents(n, mu, p)?;
        if (a * (p - 1.0) > q - 2.0) != (strauss_gap(n, mu, p) > 0.0) {
            disagreements += 1;
        }
    }
    checks.push(CheckOutcome::at_most("kato_condition_equivalence", disagreements as f64, 0.0));

    let mut worst = 0.0f64;
    let mut found = 0;
    while found < 1000 {
        let (n, mu, p) = sample_triple(&mut rng);
        let params = ModelParams::new(n, mu, p, 1.0, 1.0)?;
        if !admissible(&params) {
            continue;
        }
        found += 1;
        let life = lifespan_exponent(&params)?;
        worst = worst.max((kato_lifespan_exponent(&params)? - life).abs() / life.abs().max(1.0));
    }
    checks.push(CheckOutcome::at_most("kato_lifespan_identity", worst, 1e-10));

    let mut worst = 0.0f64;
    for t in log_grid(0.01, 100.0, 400) {
        let exact = (PI / (2.0 * t)).sqrt() * (-t).exp();
        worst = worst.max(((bessel_k(0.5, t)? - exact) / exact).abs());
    }
    checks.push(CheckOutcome::at_most("bessel_half_order", worst, 1e-8));

    let phi3 = PhiFunction::with_default_nodes(3)?;
    let mut worst = 0.0f64;
    for r in log_grid(0.01, 30.0, 300) {
        let exact = 4.0 * PI * r.sinh() / r;
        worst = worst.max(((phi3.eval(r)? - exact) / exact).abs());
    }
    checks.push(CheckOutcome::at_most("phi_three_dimensional", worst, 1e-9));

    let h = 1e-4;
    let mut worst = 0.0f64;
    for n in [2u32, 3] {
        let f = PhiFunction::with_default_nodes(n)?;
        for i in 0..=40 {
            let r = 0.1 + (20.0 - 0.1) * i as f64 / 40.0;
            let (a, b, c) = (f.eval(r - h)?, f.eval(r)?, f.eval(r + h)?);
            let lap = (c - 2.0 * b + a) / (h * h) + (n - 1) as f64 * (c - a) / (2.0 * h * r);
            worst = worst.max(((lap - b) / b).abs());
        }
    }
    checks.push(CheckOutcome::at_most("phi_eigenfunction", worst, 1e-4));

    let mut norm = 0.0f64;
    let mut extremes = Vec::new();
    for ell in ELLS {
        let mut w = LambdaWeight::new(ell, t0_of(ell), Clock::Bracket)?;
        if fault == Some(Fault::CEll) {
            w = w.with_scaled_constant(1.01);
        }
        norm = norm.max((w.value(w.t0)? - 1.0).abs());
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..=500 {
            let t = w.t0 + (50.0 - w.t0) * i as f64 / 500.0;
            let r = w.ratio(t)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        extremes.push(RatioExtremes { ell, min: lo, max: hi });
    }
    checks.push(CheckOutcome::at_most("lambda_normalization", norm, 1e-10));
    let lo = extremes.iter().map(|e| e.min).fold(f64::INFINITY, f64::min);
    let hi = extremes.iter().map(|e| e.max).fold(0.0, f64::max);
    checks.push(CheckOutcome::within("lambda_ratio_min", lo, 0.1, 10.0));
    checks.push(CheckOutcome::within("lambda_ratio_max", hi, 0.1, 10.0));

    let w = LambdaWeight::new(1.0, t0_of(1.0), Clock::Bracket)?;
    let r1 = w.ode_residual(2.0, 1e-3)?;
    let r2 = w.ode_residual(2.0, 5e-4)?;
    checks.push(CheckOutcome::at_most("lambda_ode_residual", r1, 1e-4));
    checks.push(CheckOutcome::within("lambda_residual_order", r1 / r2, 3.0, 5.0));

    let mut gap = 0.0f64;
    for t in [0.0, 0.5, 3.0, 17.0] {
        gap = gap.max((original_time(t, 0.0) - t).abs()).max((transformed_time(t, 0.0)? - t).abs());
    }
    checks.push(CheckOutcome::at_most("undamped_transform_identity", gap, 0.0));

    let grid = RadialGrid::new(1025, 2.0)?;
    let bump = RadialField::from_fn(grid, |r| (1.0 - r * r).max(0.0).powi(3))?;
    let exact = 4.0 * PI * 16.0 / 315.0;
    checks.push(CheckOutcome::at_most("space_integral_oracle", ((functional_f(&bump, 3) - exact) / exact).abs(), 1e-4));

    Ok((checks, VerifyResults { fault, lambda_ratio_extremes: extremes }))
}
