//! Special functions of the test-function method.
//!
//! - φ(x) = ∫_{S^{n-1}} e^{x·ω} dω, reduced to a polar-angle integral.
//! - K_α(t) = ∫_0^∞ e^{-t cosh z} cosh(αz) dz for |α| ≤ 2.
//! - λ(t) = C_ℓ τ^{1/2} K_{1/(2ℓ+2)}(τ^{ℓ+1}/(ℓ+1)), normalised by λ(t₀) = 1,
//!   where the clock τ is either ⟨t⟩ = 1 + t (default) or t itself.
//! - ψ(t, x) = λ(t) φ(x).
//!
//! Large arguments are handled in log space: φ(r) ~ e^r and λ decays like
//! e^{-Λ(t)}, so every evaluator has a `ln_*` twin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::RegimeConstants;
use crate::quadrature::{adaptive, AdaptiveOptions, GaussLegendre, NeumaierSum};

/// Surface measure of the unit sphere S^{m-1} ⊂ R^m.
pub fn sphere_area(ambient_dim: u32) -> f64 {
    match ambient_dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        m => 2.0 * PI / (m as f64 - 2.0) * sphere_area(m - 2),
    }
}

/// Volume of the ball of radius `r` in R^n.
pub fn ball_volume(n: u32, r: f64) -> f64 {
    sphere_area(n) * r.powi(n as i32) / n as f64
}

// Polar-angle integrand below e^{-PHI_CUTOFF} relative to its peak is dropped.
const PHI_CUTOFF: f64 = 45.0;

/// φ in dimension n, evaluated by composite Gauss–Legendre in the polar angle.
#[derive(Debug, Clone)]
pub struct PhiFunction {
    n: u32,
    rule: GaussLegendre,
    ln_equator: f64,
}

impl PhiFunction {
    pub const DEFAULT_NODES: usize = 24;

    pub fn new(n: u32, quadrature_nodes: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain!("phi needs n >= 2, got {n}"));
        }
        if quadrature_nodes < 4 {
            return Err(domain!("phi needs at least 4 quadrature nodes"));
        }
        Ok(Self {
            n,
            rule: GaussLegendre::new(quadrature_nodes),
            ln_equator: sphere_area(n - 1).ln(),
        })
    }

    pub fn with_default_nodes(n: u32) -> Result<Self> {
        Self::new(n, Self::DEFAULT_NODES)
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.rule.order()
    }

    /// φ(0) = |S^{n-1}|.
    pub fn surface_measure(&self) -> f64 {
        sphere_area(self.n)
    }

    /// ln φ(r) = ln|S^{n-2}| + r + ln ∫_0^π e^{-r(1-cos θ)} sin^{n-2}θ dθ.
    pub fn ln_eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain!("phi needs finite r >= 0, got {r}"));
        }
        if r == 0.0 {
            return Ok(self.surface_measure().ln());
        }
        let theta_max = if 2.0 * r <= PHI_CUTOFF {
            PI
        } else {
            2.0 * (PHI_CUTOFF / (2.0 * r)).sqrt().asin()
        };
        let width = (PI / 8.0).min(1.5 / r.sqrt());
        let panels = (theta_max / width).ceil().max(1.0) as usize;
        let h = theta_max / panels as f64;
        let k = (self.n - 2) as i32;
        let mut sum = NeumaierSum::default();
        for j in 0..panels {
            let a = j as f64 * h;
            let b = if j + 1 == panels { theta_max } else { a + h };
            sum.add(self.rule.integrate(a, b, |theta| {
                let s = (0.5 * theta).sin();
                (-2.0 * r * s * s).exp() * theta.sin().powi(k)
            }));
        }
        let polar = sum.value();
        if !(polar > 0.0) {
            return Err(Error::Numerical(format!("phi polar integral vanished at r = {r}")));
        }
        Ok(self.ln_equator + r + polar.ln())
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let v = self.ln_eval(r)?.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numerical(format!("phi({r}) overflows; use ln_eval")))
        }
    }
}

pub fn phi(r: f64, n: u32) -> Result<f64> {
    PhiFunction::with_default_nodes(n)?.eval(r)
}

const BESSEL_OPTS: AdaptiveOptions = AdaptiveOptions { rel_tol: 1e-14, abs_tol: 0.0, max_intervals: 1000 };

/// e^t K_α(t).
///
/// With sinh(z/2) = v/√(2t) the integrand of e^t K_α(t) becomes
/// e^{-v²} cosh(αz) · 2/√(2t + v²), a Gaussian-weighted function on
/// [0, ∞); the tail beyond v = 30 lies below e^{-800} and is dropped.
pub fn bessel_k_scaled(alpha: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain!("K_alpha needs finite t > 0, got {t}"));
    }
    if !(alpha.abs() <= 2.0) {
        return Err(domain!("K_alpha restricted to |alpha| <= 2, got {alpha}"));
    }
    let alpha = alpha.abs();
    let scale = (2.0 * t).sqrt();
    let integrand = |v: f64| {
        let h = v / scale;
        let g = h + (1.0 + h * h).sqrt();
        let c = 0.5 * (g.powf(2.0 * alpha) + g.powf(-2.0 * alpha));
        (-v * v).exp() * c * 2.0 / (scale * (1.0 + h * h).sqrt())
    };
    let mut breaks = vec![0.0];
    for m in [1.0, 10.0, 100.0] {
        let b = scale * m;
        if b < 1.0 {
            breaks.push(b);
        }
    }
    breaks.extend_from_slice(&[1.0, 2.0, 4.0, 8.0, 16.0, 30.0]);
    let res = adaptive(integrand, &breaks, BESSEL_OPTS)?;
    Ok(res.value)
}

pub fn bessel_k(alpha: f64, t: f64) -> Result<f64> {
    Ok(bessel_k_scaled(alpha, t)? * (-t).exp())
}

pub fn ln_bessel_k(alpha: f64, t: f64) -> Result<f64> {
    Ok(bessel_k_scaled(alpha, t)?.ln() - t)
}

/// Time variable fed to the Bessel representation of λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// τ = ⟨t⟩ = 1 + t, the clock of the transformed wave operator
    /// ∂_t² - ⟨t⟩^{2ℓ}Δ; λ'' = ⟨t⟩^{2ℓ} λ.
    #[default]
    Bracket,
    /// τ = t; λ'' = t^{2ℓ} λ.
    Literal,
}

/// The time weight λ: decaying solution of λ'' = τ^{2ℓ} λ with λ(t₀) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaWeight {
    pub ell: f64,
    pub t0: f64,
    pub clock: Clock,
    ln_c: f64,
}

impl LambdaWeight {
    pub fn new(ell: f64, t0: f64, clock: Clock) -> Result<Self> {
        if !(ell >= 0.0) || !ell.is_finite() {
            return Err(domain!("lambda needs finite ell >= 0, got {ell}"));
        }
        if !(t0 >= 0.0) || !t0.is_finite() {
            return Err(domain!("lambda needs finite t0 >= 0, got {t0}"));
        }
        let mut w = Self { ell, t0, clock, ln_c: 0.0 };
        w.ln_c = -w.raw_ln(w.tau(t0))?;
        Ok(w)
    }

    pub fn from_regime(rc: &RegimeConstants, clock: Clock) -> Result<Self> {
        Self::new(rc.ell, rc.t0, clock)
    }

    /// Same weight with C_ℓ multiplied by `factor` (fault injection).
    pub fn with_scaled_constant(&self, factor: f64) -> Self {
        Self { ln_c: self.ln_c + factor.ln(), ..*self }
    }

    pub fn c_ell(&self) -> f64 {
        self.ln_c.exp()
    }

    /// Bessel order ν = 1/(2ℓ+2).
    pub fn order(&self) -> f64 {
        1.0 / (2.0 * self.ell + 2.0)
    }

    pub fn tau(&self, t: f64) -> f64 {
        match self.clock {
            Clock::Bracket => 1.0 + t,
            Clock::Literal => t,
        }
    }

    /// Bessel argument τ^{ℓ+1}/(ℓ+1).
    pub fn argument(&self, t: f64) -> f64 {
        let tau = self.tau(t);
        tau.powf(self.ell + 1.0) / (self.ell + 1.0)
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t >= self.t0) || !t.is_finite() {
            return Err(domain!("lambda evaluated at t = {t} < t0 = {}", self.t0));
        }
        Ok(())
    }

    // ln(τ^{1/2} K_ν(s)), or -τ when ℓ = 0
    fn raw_ln(&self, tau: f64) -> Result<f64> {
        if self.ell == 0.0 {
            return Ok(-tau);
        }
        let nu = self.order();
        if tau == 0.0 {
            // τ^{1/2} K_ν(s) → ½Γ(ν) 2^ν (ℓ+1)^ν
            let g = statrs::function::gamma::ln_gamma(nu);
            return Ok(g + (nu - 1.0) * 2f64.ln() + nu * (self.ell + 1.0).ln());
        }
        let s = tau.powf(self.ell + 1.0) / (self.ell + 1.0);
        Ok(0.5 * tau.ln() + ln_bessel_k(nu, s)?)
    }

    pub fn ln_value(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.ln_c + self.raw_ln(self.tau(t))?)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.ln_value(t)?.exp())
    }

    /// ln(-λ'(t)). Uses K_ν' = -(K_{ν-1} + K_{ν+1})/2 and the recurrence
    /// K_{ν+1} = K_{ν-1} + (2ν/s)K_ν, which collapse to
    /// λ'(t) = -C_ℓ τ^{ℓ+1/2} K_{1-ν}(s).
    pub fn ln_neg_derivative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let tau = self.tau(t);
        if self.ell == 0.0 {
            return Ok(self.ln_c - tau);
        }
        let nu = self.order();
        if tau == 0.0 {
            let g = statrs::function::gamma::ln_gamma(1.0 - nu);
            return Ok(self.ln_c + g - nu * 2f64.ln() + (1.0 - nu) * (self.ell + 1.0).ln());
        }
        let s = tau.powf(self.ell + 1.0) / (self.ell + 1.0);
        Ok(self.ln_c + (self.ell + 0.5) * tau.ln() + ln_bessel_k(1.0 - nu, s)?)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(-self.ln_neg_derivative(t)?.exp())
    }

    /// −λ'(t) / (λ(t) τ^ℓ) = K_{1-ν}(s) / K_ν(s).
    pub fn ratio(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        if self.ell == 0.0 {
            return Ok(1.0);
        }
        let tau = self.tau(t);
        if tau < 1e-6 {
            return Err(domain!("lambda ratio needs tau >= 1e-6, got {tau}"));
        }
        let s = self.argument(t);
        let nu = self.order();
        Ok(bessel_k_scaled(1.0 - nu, s)? / bessel_k_scaled(nu, s)?)
    }

    /// |D²λ(t)/λ(t) − τ^{2ℓ}| with the central second difference of step h.
    pub fn ode_residual(&self, t: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(domain!("residual step h = {h} must be positive"));
        }
        self.check(t - h)?;
        let centre = self.ln_value(t)?;
        let up = (self.ln_value(t + h)? - centre).exp();
        let down = (self.ln_value(t - h)? - centre).exp();
        let second = (up - 2.0 + down) / (h * h);
        Ok((second - self.tau(t).powf(2.0 * self.ell)).abs())
    }
}

pub fn lambda_fn(t: f64, w: &LambdaWeight) -> Result<f64> {
    w.value(t)
}

pub fn lambda_prime(t: f64, w: &LambdaWeight) -> Result<f64> {
    w.derivative(t)
}

pub fn lambda_ode_residual(t: f64, h: f64, w: &LambdaWeight) -> Result<f64> {
    w.ode_residual(t, h)
}

pub fn lambda_ratio(t: f64, w: &LambdaWeight) -> Result<f64> {
    w.ratio(t)
}

pub fn ln_psi(t: f64, r: f64, w: &LambdaWeight, phi: &PhiFunction) -> Result<f64> {
    Ok(w.ln_value(t)? + phi.ln_eval(r)?)
}

/// ψ(t, r) = λ(t) φ(r).
pub fn psi(t: f64, r: f64, w: &LambdaWeight, phi: &PhiFunction) -> Result<f64> {
    let v = ln_psi(t, r, w, phi)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("psi({t}, {r}) out of floating-point range")))
    }
}
