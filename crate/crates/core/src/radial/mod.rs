//! Radially symmetric finite differences for the damped equation and its
//! variable-speed transforms.

mod io;
mod lifespan;
mod solver;

pub use io::{read_binary, write_binary, write_csv, BinaryTrajectory, BINARY_MAGIC};
pub use lifespan::{epsilon_sweep, estimate_lifespan, EpsilonPoint, EpsilonSweep, LevelResult, LifespanEstimate};
pub use solver::{
    laplacian_spectral_radius, solve_damped, solve_damped_at, solve_transformed, solve_transformed_at, stability_factor, Picture,
    Snapshot, SolverConfig, Trajectory,
};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::sphere_area;

/// Uniform nodes r_i = i·dr, i = 0..count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub dr: f64,
    pub count: usize,
}

impl RadialGrid {
    pub const MIN_COUNT: usize = 64;

    pub fn new(count: usize, r_max: f64) -> Result<Self> {
        if count < Self::MIN_COUNT {
            return Err(Error::Config(format!("grid needs at least {} nodes, got {count}", Self::MIN_COUNT)));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::Config(format!("grid radius {r_max} must be positive")));
        }
        Ok(Self { r_max, dr: r_max / (count - 1) as f64, count })
    }

    /// Halves dr; every old node is a node of the refined grid.
    pub fn refined(&self) -> Self {
        let count = 2 * (self.count - 1) + 1;
        Self { r_max: self.r_max, dr: self.r_max / (count - 1) as f64, count }
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.r(i)).collect()
    }

    /// Trapezoid weights for ∫_{R^n} f dx = |S^{n-1}| ∫ f(r) r^{n-1} dr.
    pub fn volume_weights(&self, n: u32) -> Vec<f64> {
        let area = sphere_area(n);
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                let end = if i == 0 || i == last { 0.5 } else { 1.0 };
                area * end * self.dr * self.r(i).powi(n as i32 - 1)
            })
            .collect()
    }

    /// ∫_{R^n} f dx by the trapezoid rule on the nodes.
    pub fn integrate(&self, n: u32, values: &[f64]) -> f64 {
        self.volume_weights(n).iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(domain!("field has {} values for {} nodes", values.len(), grid.count));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain!("field values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self { grid, values: vec![0.0; grid.count] }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn sup(&self) -> f64 {
        sup_abs(&self.values)
    }

    /// Largest node radius with |value| > tol, 0 if none.
    pub fn support_radius(&self, tol: f64) -> f64 {
        self.values.iter().rposition(|v| v.abs() > tol).map_or(0.0, |i| self.grid.r(i))
    }

    /// True when every node beyond `radius` is exactly zero.
    pub fn vanishes_beyond(&self, radius: f64) -> bool {
        self.values.iter().enumerate().all(|(i, v)| self.grid.r(i) <= radius || *v == 0.0)
    }
}

pub(crate) fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| if v.abs() > m || v.is_nan() { v.abs() } else { m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    #[default]
    Bump,
}

/// u_i(r) = A_i (1 - (r/R)²)₊^k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub kind: ProfileKind,
    pub amplitude0: f64,
    pub amplitude1: f64,
    pub smoothness: u32,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl Default for DataProfile {
    fn default() -> Self {
        Self { kind: ProfileKind::Bump, amplitude0: 2.0, amplitude1: 2.0, smoothness: 3, radius: 1.0 }
    }
}

impl DataProfile {
    pub fn bump(amplitude0: f64, amplitude1: f64, smoothness: u32, radius: f64) -> Result<Self> {
        let p = Self { kind: ProfileKind::Bump, amplitude0, amplitude1, smoothness, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude0 > 0.0) || !(self.amplitude1 > 0.0) {
            return Err(Error::Config("bump amplitudes must be positive".into()));
        }
        if self.smoothness < 2 {
            return Err(Error::Config(format!("bump smoothness {} must be at least 2", self.smoothness)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config("bump radius must be positive".into()));
        }
        Ok(())
    }

    pub fn shape(&self, r: f64) -> f64 {
        let s = 1.0 - (r / self.radius).powi(2);
        if s <= 0.0 {
            0.0
        } else {
            s.powi(self.smoothness as i32)
        }
    }

    /// Unscaled data (u₀, u₁) on the grid.
    pub fn sample(&self, grid: RadialGrid) -> Result<(RadialField, RadialField)> {
        self.validate()?;
        let u0 = RadialField::from_fn(grid, |r| self.amplitude0 * self.shape(r))?;
        let u1 = RadialField::from_fn(grid, |r| self.amplitude1 * self.shape(r))?;
        Ok((u0, u1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = RadialGrid::new(101, 10.0).unwrap();
        assert!((g.dr - 0.1).abs() < 1e-15);
        assert!(((g.count - 1) as f64 * g.dr - g.r_max).abs() < 1e-12);
        let f = g.refined();
        assert_eq!(f.count, 201);
        assert!((f.dr - 0.05).abs() < 1e-15);
        assert!(RadialGrid::new(63, 1.0).is_err());
        assert!(RadialGrid::new(64, 0.0).is_err());
    }

    #[test]
    fn trapezoid_volume_of_ball() {
        let g = RadialGrid::new(2001, 2.0).unwrap();
        let ones: Vec<f64> = g.nodes().iter().map(|&r| if r <= 1.0 { 1.0 } else { 0.0 }).collect();
        let vol = g.integrate(3, &ones);
        assert!((vol - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn bump_profile() {
        let p = DataProfile::default();
        let g = RadialGrid::new(201, 4.0).unwrap();
        let (u0, u1) = p.sample(g).unwrap();
        assert_eq!(u0.values[0], 2.0);
        assert!(u0.values.iter().all(|&v| v >= 0.0));
        assert!(u1.vanishes_beyond(1.0));
        assert!(u0.support_radius(0.0) < 1.0);
        assert!(DataProfile::bump(1.0, 1.0, 1, 1.0).is_err());
        assert!(DataProfile::bump(0.0, 1.0, 3, 1.0).is_err());
    }

    #[test]
    fn field_validation() {
        let g = RadialGrid::new(64, 1.0).unwrap();
        assert!(RadialField::new(g, vec![0.0; 10]).is_err());
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(RadialField::new(g, v).is_err());
        assert_eq!(RadialField::zeros(g).sup(), 0.0);
    }
}
