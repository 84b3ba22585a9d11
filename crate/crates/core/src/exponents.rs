//! Closed-form exponent algebra.
//!
//! Everything here is a pure function of the problem instance. The
//! effective dimension that enters the Strauss-type exponent is `n + μ`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Problem instance: dimension, damping, nonlinearity, data size and support radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub mu: f64,
    pub p: f64,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl ModelParams {
    pub fn new(n: u32, mu: f64, p: f64, epsilon: f64, radius: f64) -> Result<Self> {
        let params = Self { n, mu, p, epsilon, radius };
        params.validate()?;
        Ok(params)
    }

    /// Structural invariants. Admissibility (p below the critical
    /// exponent) is a separate question, see [`admissible`].
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain!("dimension n = {} must be at least 2", self.n));
        }
        if !(0.0..=2.0).contains(&self.mu) {
            return Err(domain!("damping mu = {} outside [0, 2]", self.mu));
        }
        if self.mu == 1.0 {
            return Err(domain!("damping mu = 1 is the excluded case"));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(domain!("nonlinearity p = {} must be a finite number > 1", self.p));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(domain!("data size epsilon = {} must be positive", self.epsilon));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(domain!("support radius R = {} must be positive", self.radius));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// Effective dimension `n + μ`.
    pub fn effective_dimension(&self) -> f64 {
        self.n as f64 + self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// μ < 1: w(t, x) = u(Λ(t) - 1, x).
    Low,
    /// μ > 1: w(t, x) = ⟨t⟩ u(Λ(t) - 1, x).
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub ell: f64,
    pub t0: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoParams {
    pub a: f64,
    pub q: f64,
    pub m: f64,
}

/// Positive root of `(k-1)p² - (k+1)p - 2 = 0`.
///
/// The larger root is taken from the sign-matched form
/// `s = ((k+1) + sqrt(D)) / 2`, root `s / (k-1)`, which never subtracts
/// nearly equal quantities.
pub fn strauss_exponent(k: f64) -> Result<f64> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(domain!("Strauss exponent needs k > 1, got {k}"));
    }
    let a = k - 1.0;
    let b = -(k + 1.0);
    let c = -2.0;
    let disc = b * b - 4.0 * a * c;
    let s = -0.5 * (b - disc.sqrt());
    Ok(s / a)
}

pub fn fujita_exponent(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(domain!("Fujita exponent needs n >= 1"));
    }
    Ok(1.0 + 2.0 / n as f64)
}

/// `2 + (k+1)p - (k-1)p²` with `k = n + μ`; positive exactly below the
/// Strauss exponent.
pub fn strauss_gap(n: u32, mu: f64, p: f64) -> f64 {
    let k = n as f64 + mu;
    2.0 + (k + 1.0) * p - (k - 1.0) * p * p
}

/// True iff (n, μ, p) satisfies `n ≥ 2`, `0 ≤ μ ≤ 2`, `μ ≠ 1`,
/// `1 < p < p_S(n+μ)`. Strict at the critical exponent.
pub fn admissible_triple(n: u32, mu: f64, p: f64) -> bool {
    if n < 2 || !(0.0..=2.0).contains(&mu) || mu == 1.0 || !(p > 1.0) || !p.is_finite() {
        return false;
    }
    match strauss_exponent(n as f64 + mu) {
        Ok(ps) => p < ps,
        Err(_) => false,
    }
}

pub fn admissible(params: &ModelParams) -> bool {
    admissible_triple(params.n, params.mu, params.p)
}

fn require_admissible(params: &ModelParams) -> Result<()> {
    if admissible(params) {
        Ok(())
    } else {
        Err(domain!(
            "inadmissible parameters (n = {}, mu = {}, p = {}): need n >= 2, 0 <= mu <= 2, mu != 1, 1 < p < p_S(n+mu)",
            params.n,
            params.mu,
            params.p
        ))
    }
}

/// Exponent k in `T_ε ≤ C ε^{-k}`:
/// `2p(p-1)|1-μ| / (2 + (n+μ+1)p - (n+μ-1)p²)`.
pub fn lifespan_exponent(params: &ModelParams) -> Result<f64> {
    require_admissible(params)?;
    let gap = strauss_gap(params.n, params.mu, params.p);
    if gap <= 0.0 {
        return Err(domain!("denominator {gap} is not positive: p >= p_S(n+mu)"));
    }
    let p = params.p;
    Ok(2.0 * p * (p - 1.0) * (1.0 - params.mu).abs() / gap)
}

pub fn regime_constants(mu: f64) -> Result<RegimeConstants> {
    if !(0.0..=2.0).contains(&mu) {
        return Err(domain!("damping mu = {mu} outside [0, 2]"));
    }
    if mu == 1.0 {
        return Err(domain!("damping mu = 1 is the excluded case"));
    }
    if mu == 0.0 {
        return Ok(RegimeConstants { ell: 0.0, t0: 0.0, regime: Regime::Low });
    }
    if mu < 1.0 {
        Ok(RegimeConstants {
            ell: mu / (1.0 - mu),
            t0: (1.0 - mu).powf(mu - 1.0) - 1.0,
            regime: Regime::Low,
        })
    } else {
        Ok(RegimeConstants {
            ell: (2.0 - mu) / (mu - 1.0),
            t0: (mu - 1.0).powf(1.0 - mu) - 1.0,
            regime: Regime::High,
        })
    }
}

/// (a, q) as rational functions of (n, μ, p), defined for every μ ≠ 1.
pub fn kato_exponents(n: u32, mu: f64, p: f64) -> Result<(f64, f64)> {
    if mu == 1.0 {
        return Err(domain!("damping mu = 1 is the excluded case"));
    }
    let n = n as f64;
    Ok(if mu < 1.0 {
        (
            (2.0 + 2.0 * n - p * (n + mu - 1.0)) / (2.0 * (1.0 - mu)),
            (2.0 * mu + n - n * p) / (mu - 1.0),
        )
    } else {
        (
            (2.0 * mu + 2.0 * n - (n + mu - 1.0) * p) / (2.0 * (mu - 1.0)),
            -(3.0 + n - mu + (1.0 - n - mu) * p) / (mu - 1.0),
        )
    })
}

/// Growth exponent a and weight exponent q of the comparison ODE
/// satisfied by F(t) = ∫ w dx in the transformed picture.
pub fn kato_parameters(params: &ModelParams) -> Result<KatoParams> {
    require_admissible(params)?;
    let (a, q) = kato_exponents(params.n, params.mu, params.p)?;
    Ok(KatoParams { a, q, m: 1.0 })
}

/// Lifespan exponent predicted by the comparison ODE with δ ∝ ε^p:
/// `p(p-1) / ((p-1)a - q + 2)`.
pub fn kato_lifespan_exponent(params: &ModelParams) -> Result<f64> {
    let k = kato_parameters(params)?;
    let p = params.p;
    Ok(p * (p - 1.0) / ((p - 1.0) * k.a - k.q + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_root(k: f64) -> f64 {
        let (a, b, c) = (k - 1.0, -(k + 1.0), -2.0);
        (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
    }

    fn mp(n: u32, mu: f64, p: f64) -> ModelParams {
        ModelParams { n, mu, p, epsilon: 1.0, radius: 1.0 }
    }

    #[test]
    fn strauss_examples() {
        assert!((strauss_exponent(3.0).unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        let k2 = (3.0 + 17f64.sqrt()) / 2.0;
        assert!((strauss_exponent(2.0).unwrap() - k2).abs() < 1e-14);
        let k25 = (3.5 + 24.25f64.sqrt()) / 3.0;
        assert!((strauss_exponent(2.5).unwrap() - k25).abs() < 1e-14);
        assert!((k25 - 2.808_143_0).abs() < 1e-7);
        assert!((strauss_exponent(7.3).unwrap() - naive_root(7.3)).abs() < 1e-13);
    }

    #[test]
    fn strauss_rejects_degenerate() {
        assert!(strauss_exponent(1.0).is_err());
        assert!(strauss_exponent(0.5).is_err());
        assert!(strauss_exponent(f64::NAN).is_err());
    }

    #[test]
    fn fujita_examples() {
        assert_eq!(fujita_exponent(2).unwrap(), 2.0);
        assert_eq!(fujita_exponent(1).unwrap(), 3.0);
        assert_eq!(fujita_exponent(4).unwrap(), 1.5);
        assert!(fujita_exponent(0).is_err());
    }

    #[test]
    fn lifespan_examples() {
        assert!((lifespan_exponent(&mp(3, 0.5, 2.0)).unwrap() - 2.0).abs() < 1e-14);
        assert!((lifespan_exponent(&mp(2, 0.5, 2.0)).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        let ps = strauss_exponent(2.5).unwrap();
        assert!(lifespan_exponent(&mp(2, 0.5, ps)).is_err());
        assert!(lifespan_exponent(&mp(2, 1.0, 2.0)).is_err());
    }

    #[test]
    fn regime_examples() {
        let r0 = regime_constants(0.0).unwrap();
        assert_eq!((r0.ell, r0.t0, r0.regime), (0.0, 0.0, Regime::Low));
        let r = regime_constants(0.5).unwrap();
        assert!((r.ell - 1.0).abs() < 1e-15);
        assert!((r.t0 - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(r.regime, Regime::Low);
        let r = regime_constants(1.5).unwrap();
        assert!((r.ell - 1.0).abs() < 1e-15);
        assert!((r.t0 - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(r.regime, Regime::High);
        let r2 = regime_constants(2.0).unwrap();
        assert_eq!((r2.ell, r2.t0), (0.0, 0.0));
        assert!(regime_constants(1.0).is_err());
        assert!(regime_constants(-0.1).is_err());
        assert!(regime_constants(2.1).is_err());
    }

    #[test]
    fn kato_examples() {
        let k = kato_parameters(&mp(2, 0.5, 2.0)).unwrap();
        assert!((k.a - 3.0).abs() < 1e-14 && (k.q - 2.0).abs() < 1e-14);
        let k = kato_parameters(&mp(2, 1.5, 2.0)).unwrap();
        assert!((k.a - 2.0).abs() < 1e-14 && (k.q - 3.0).abs() < 1e-14);
        assert!(kato_parameters(&mp(3, 0.5, 3.0)).is_err());
    }

    #[test]
    fn admissible_examples() {
        assert!(admissible(&mp(2, 0.5, 2.0)));
        assert!(!admissible(&mp(2, 1.0, 2.0)));
        assert!(naive_root(3.5) < 3.0);
        assert!(!admissible(&mp(3, 0.5, 3.0)));
        assert!(!admissible(&mp(1, 0.5, 1.5)));
        assert!(!admissible(&mp(2, 0.5, 1.0)));
    }

    #[test]
    fn kato_identity_at_examples() {
        let k = kato_lifespan_exponent(&mp(2, 0.5, 2.0)).unwrap();
        assert!((k - 2.0 / 3.0).abs() < 1e-14);
        let k = kato_lifespan_exponent(&mp(3, 0.5, 2.0)).unwrap();
        assert!((k - 2.0).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2, 0.5, 2.0, 0.1, 1.0).is_ok());
        assert!(ModelParams::new(2, 1.0, 2.0, 0.1, 1.0).is_err());
        assert!(ModelParams::new(2, 0.5, 2.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(2, 0.5, 2.0, 0.1, -1.0).is_err());
        // inadmissible but structurally valid (exploratory runs)
        assert!(ModelParams::new(2, 0.5, 5.0, 0.1, 1.0).is_ok());
    }
}
