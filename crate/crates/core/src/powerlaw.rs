//! Least-squares power laws y ≈ C x^slope fitted in log-log space.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    /// ln C.
    pub intercept: f64,
    pub r_squared: f64,
    /// (ln x, ln y) pairs.
    pub samples: Vec<(f64, f64)>,
}

impl PowerLawFit {
    pub const MIN_SAMPLES: usize = 4;

    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(domain!("power-law fit: {} x values but {} y values", xs.len(), ys.len()));
        }
        if xs.len() < Self::MIN_SAMPLES {
            return Err(domain!("power-law fit needs at least {} samples, got {}", Self::MIN_SAMPLES, xs.len()));
        }
        let mut samples = Vec::with_capacity(xs.len());
        for (&x, &y) in xs.iter().zip(ys) {
            if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
                return Err(domain!("power-law fit needs positive finite data, got ({x}, {y})"));
            }
            samples.push((x.ln(), y.ln()));
        }
        let k = samples.len() as f64;
        let mx = samples.iter().map(|s| s.0).sum::<f64>() / k;
        let my = samples.iter().map(|s| s.1).sum::<f64>() / k;
        let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
        let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
        let syy: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(domain!("power-law fit needs at least two distinct x values"));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = samples.iter().map(|s| (s.1 - intercept - slope * s.0).powi(2)).sum();
        let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
        Ok(Self { slope, intercept, r_squared, samples })
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }

    /// max_i y_i / (C x_i^slope).
    pub fn envelope_ratio_max(&self) -> f64 {
        self.samples
            .iter()
            .map(|&(lx, ly)| (ly - self.intercept - self.slope * lx).exp())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Log-range of x in decades.
    pub fn decades(&self) -> f64 {
        let lo = self.samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / std::f64::consts::LN_10
    }

    /// |slope − expected| / |expected|.
    pub fn relative_slope_error(&self, expected: f64) -> f64 {
        ((self.slope - expected) / expected).abs()
    }
}
