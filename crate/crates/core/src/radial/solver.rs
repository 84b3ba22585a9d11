use serde::{Deserialize, Serialize};

use super::{sup_abs, DataProfile, RadialField, RadialGrid};
use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::ode_oracle::{extrapolate_blowup, BlowupReport, Termination};
use crate::transform::{time_forward, TransformedProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl: f64,
    pub blowup_threshold: f64,
    pub t_max: f64,
    /// Extra radius beyond the light cone of the support at t_max.
    pub margin: f64,
    pub count: usize,
    /// Overrides the radius derived from t_max and margin.
    pub r_max: Option<f64>,
    /// Step cap κ (s(t) M^{p-1})^{-1/2} resolving the nonlinear time scale.
    pub nl_factor: f64,
    /// Collapse means dt ≤ collapse_ratio · dt_cfl.
    pub collapse_ratio: f64,
    pub source_enabled: bool,
    /// Snapshot cadence; `None` keeps only the first and last states.
    pub frame_interval: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            blowup_threshold: 1e6,
            t_max: 50.0,
            margin: 5.0,
            count: 1025,
            r_max: None,
            nl_factor: 0.05,
            collapse_ratio: 0.05,
            source_enabled: true,
            frame_interval: None,
            max_steps: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(Error::Config(format!("cfl = {} must lie in (0, 0.9]", self.cfl)));
        }
        if !(self.blowup_threshold >= 1e6) {
            return Err(Error::Config(format!("blow-up threshold {} must be at least 1e6", self.blowup_threshold)));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::Config(format!("t_max = {} must be positive", self.t_max)));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Config("margin must be nonnegative".into()));
        }
        if !(self.nl_factor > 0.0) || !(self.collapse_ratio > 0.0 && self.collapse_ratio < 1.0) {
            return Err(Error::Config("nl_factor must be positive and collapse_ratio in (0, 1)".into()));
        }
        if let Some(fi) = self.frame_interval {
            if !(fi > 0.0) {
                return Err(Error::Config(format!("frame interval {fi} must be positive")));
            }
        }
        Ok(())
    }

    /// Grid whose Dirichlet edge lies outside the light cone through t_max.
    pub fn grid_for(&self, support: f64, reach: f64) -> Result<RadialGrid> {
        let needed = support + reach + self.margin;
        let r_max = self.r_max.unwrap_or(needed);
        if r_max < needed * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "r_max = {r_max} is inside the light cone: need at least R + reach + margin = {needed}"
            )));
        }
        RadialGrid::new(self.count, r_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Damped,
    Transformed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// ∫|u|^p dx.
    pub power_integral: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub picture: Picture,
    pub n: u32,
    pub p: f64,
    pub epsilon: f64,
    pub grid: RadialGrid,
    pub t_start: f64,
    pub snapshots: Vec<Snapshot>,
    pub report: BlowupReport,
    /// CFL step cfl·κ_n·dr/c(t_k) at every step k, κ_n = [`stability_factor`].
    pub cfl_steps: Vec<f64>,
}

impl Trajectory {
    pub fn field(&self, k: usize) -> RadialField {
        RadialField { grid: self.grid, values: self.snapshots[k].u.clone() }
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// ∫(u_t² + |∇u|²) dx of snapshot k, gradient by one-sided differences
    /// at cell midpoints.
    pub fn energy(&self, k: usize) -> f64 {
        let s = &self.snapshots[k];
        let g = self.grid;
        let kinetic: f64 = g.integrate(self.n, &s.v.iter().map(|v| v * v).collect::<Vec<_>>());
        let area = crate::specfun::sphere_area(self.n);
        let potential: f64 = (0..g.count - 1)
            .map(|i| {
                let du = (s.u[i + 1] - s.u[i]) / g.dr;
                let rm = (i as f64 + 0.5) * g.dr;
                area * du * du * rm.powi(self.n as i32 - 1) * g.dr
            })
            .sum();
        kinetic + potential
    }
}

// c(t)², source factor and damping of one picture
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    speed_exponent: f64,
    source_exponent: f64,
    mu: f64,
}

impl Coefficients {
    fn bracket_pow(t: f64, e: f64) -> f64 {
        if e == 0.0 {
            1.0
        } else {
            (1.0 + t).powf(e)
        }
    }
    fn speed_sq(&self, t: f64) -> f64 {
        Self::bracket_pow(t, self.speed_exponent)
    }
    fn speed(&self, t: f64) -> f64 {
        Self::bracket_pow(t, 0.5 * self.speed_exponent)
    }
    fn source(&self, t: f64) -> f64 {
        Self::bracket_pow(t, self.source_exponent)
    }
    fn damping(&self, t: f64) -> f64 {
        if self.mu == 0.0 {
            0.0
        } else {
            self.mu / (1.0 + t)
        }
    }
}

#[inline]
fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else {
        a.powf(p)
    }
}

/// Spectral radius of the dimensionless radial Laplacian (dr = 1) on
/// `size` interior nodes, by power iteration.
///
/// The spectrum is real and negative. In n ≥ 3 the origin row carries an
/// isolated mode below the bulk bound −4, so the iteration converges
/// geometrically.
pub fn laplacian_spectral_radius(n: u32, size: usize) -> f64 {
    let m = (n - 1) as f64;
    let mut x: Vec<f64> = (0..size).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / (1.0 + i as f64)).collect();
    let mut y = vec![0.0; size];
    let mut rho = 0.0;
    for _ in 0..4000 {
        y[0] = 2.0 * n as f64 * (x[1] - x[0]);
        for i in 1..size {
            let g = m / (2.0 * i as f64);
            let next = if i + 1 < size { x[i + 1] } else { 0.0 };
            y[i] = (1.0 + g) * next - 2.0 * x[i] + (1.0 - g) * x[i - 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let prev = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        rho = norm / prev;
        for (a, b) in x.iter_mut().zip(&y) {
            *a = b / norm;
        }
    }
    rho
}

/// Multiplier on cfl·dr keeping the leapfrog within its stability limit
/// c·dt ≤ 2dr/√ρ at any cfl ≤ 1.
pub fn stability_factor(n: u32) -> f64 {
    (2.0 / laplacian_spectral_radius(n, 512).sqrt()).min(1.0)
}

struct Stencil {
    up: Vec<f64>,
    down: Vec<f64>,
    centre: f64,
    origin: f64,
}

impl Stencil {
    fn new(grid: RadialGrid, n: u32) -> Self {
        let h2 = 1.0 / (grid.dr * grid.dr);
        let m = (n - 1) as f64;
        let mut up = vec![0.0; grid.count];
        let mut down = vec![0.0; grid.count];
        for i in 1..grid.count - 1 {
            let g = m / (2.0 * i as f64 * grid.dr * grid.dr);
            up[i] = h2 + g;
            down[i] = h2 - g;
        }
        Self { up, down, centre: -2.0 * h2, origin: 2.0 * n as f64 * h2 }
    }

    // a = c²·Lu + s·|u|^p; last node is held at zero
    fn accel(&self, u: &[f64], c2: f64, s: f64, p: f64, source: bool, a: &mut [f64]) {
        let last = u.len() - 1;
        a[0] = c2 * self.origin * (u[1] - u[0]);
        for i in 1..last {
            a[i] = c2 * (self.up[i] * u[i + 1] + self.centre * u[i] + self.down[i] * u[i - 1]);
        }
        a[last] = 0.0;
        if source {
            for i in 0..last {
                a[i] += s * abs_pow(u[i], p);
            }
        }
    }
}

struct Setup<'a> {
    picture: Picture,
    frame_times: &'a [f64],
    n: u32,
    p: f64,
    epsilon: f64,
    grid: RadialGrid,
    t_start: f64,
    coeffs: Coefficients,
    u0: &'a [f64],
    v0: &'a [f64],
}

fn evolve(s: Setup<'_>, cfg: &SolverConfig) -> Result<Trajectory> {
    let grid = s.grid;
    let last = grid.count - 1;
    let weights = grid.volume_weights(s.n);
    let power = |u: &[f64]| -> f64 { weights.iter().zip(u).map(|(w, x)| w * abs_pow(*x, s.p)).sum() };
    let stencil = Stencil::new(grid, s.n);
    let stable = stability_factor(s.n);

    let mut u = s.u0.to_vec();
    let mut v = s.v0.to_vec();
    u[last] = 0.0;
    v[last] = 0.0;
    let mut a = vec![0.0; grid.count];
    let mut t = s.t_start;
    let t_end = s.t_start + cfg.t_max;
    stencil.accel(&u, s.coeffs.speed_sq(t), s.coeffs.source(t), s.p, cfg.source_enabled, &mut a);

    let mut sup = sup_abs(&u);
    let snap = |t: f64, u: &[f64], v: &[f64], sup: f64| Snapshot {
        t,
        u: u.to_vec(),
        v: v.to_vec(),
        power_integral: power(u),
        sup,
    };
    let mut snapshots = vec![snap(t, &u, &v, sup)];
    let mut frame_index = 0usize;
    let next_frame = |k: usize| s.frame_times.get(k).copied().unwrap_or(f64::INFINITY);
    let mut cfl_steps = Vec::new();
    let mut prev = (t, sup);
    let mut steps = 0usize;

    let finish = |blew_up: bool, t_est: Option<f64>, reason, t_last: f64, sup_last: f64, steps| BlowupReport {
        blew_up,
        t_est,
        t_uncertainty: t_est.map(|te| (te - t_last).abs()),
        reason,
        t_last,
        sup_last,
        steps,
    };

    let report = loop {
        if t >= t_end {
            break finish(false, None, Termination::HorizonReached, t, sup, steps);
        }
        if steps >= cfg.max_steps {
            return Err(Error::Numerical(format!("solver exceeded {} steps at t = {t}", cfg.max_steps)));
        }
        let dt_cfl = cfg.cfl * stable * grid.dr / s.coeffs.speed(t);
        let dt_nl = if cfg.source_enabled && sup > 0.0 {
            cfg.nl_factor / (s.coeffs.source(t) * sup.powf(s.p - 1.0)).sqrt()
        } else {
            f64::INFINITY
        };
        let target = dt_cfl.min(dt_nl);
        let stop = next_frame(frame_index).min(t_end);
        let rem = stop - t;
        let (dt, land) = if target >= rem {
            (rem, true)
        } else if 2.0 * target > rem {
            (0.5 * rem, false)
        } else {
            (target, false)
        };
        cfl_steps.push(dt_cfl);

        let b0 = s.coeffs.damping(t);
        let half = 0.5 * dt;
        for i in 0..last {
            v[i] += half * (a[i] - b0 * v[i]);
            u[i] += dt * v[i];
        }
        let t_new = if land { stop } else { t + dt };
        stencil.accel(&u, s.coeffs.speed_sq(t_new), s.coeffs.source(t_new), s.p, cfg.source_enabled, &mut a);
        let b1 = s.coeffs.damping(t_new);
        let denom = 1.0 + half * b1;
        for i in 0..last {
            v[i] = (v[i] + half * a[i]) / denom;
        }
        steps += 1;
        let sup_new = sup_abs(&u);

        if !sup_new.is_finite() || v.iter().any(|x| !x.is_finite()) {
            if sup >= cfg.blowup_threshold {
                let t_est = extrapolate_blowup(s.p, prev, (t, sup));
                break finish(t_est.is_some(), t_est, Termination::Nonfinite, t, sup, steps);
            }
            break finish(false, None, Termination::Nonfinite, t, sup, steps);
        }
        prev = (t, sup);
        t = t_new;
        sup = sup_new;

        if land && stop == next_frame(frame_index) {
            snapshots.push(snap(t, &u, &v, sup));
            frame_index += 1;
        }
        if sup >= cfg.blowup_threshold && dt <= cfg.collapse_ratio * dt_cfl {
            let t_est = extrapolate_blowup(s.p, prev, (t, sup));
            break finish(t_est.is_some(), t_est, Termination::ThresholdCollapse, t, sup, steps);
        }
    };

    if snapshots.last().map(|f| f.t) != Some(t) && u.iter().all(|x| x.is_finite()) {
        snapshots.push(snap(t, &u, &v, sup));
    }
    Ok(Trajectory {
        picture: s.picture,
        n: s.n,
        p: s.p,
        epsilon: s.epsilon,
        grid,
        t_start: s.t_start,
        snapshots,
        report,
        cfl_steps,
    })
}

fn cadence(cfg: &SolverConfig, t_start: f64) -> Vec<f64> {
    match cfg.frame_interval {
        None => Vec::new(),
        Some(fi) => {
            let k = (cfg.t_max / fi * (1.0 + 1e-12)).floor() as usize;
            (1..=k).map(|j| t_start + j as f64 * fi).filter(|&t| t <= t_start + cfg.t_max).collect()
        }
    }
}

fn check_frames(frames: &[f64], t_start: f64) -> Result<()> {
    if frames.first().is_some_and(|&t| !(t > t_start)) || frames.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("frame times must be strictly increasing and after the start time".into()));
    }
    Ok(())
}

/// u_tt − Δu + μ/(1+t) u_t = |u|^p with data (εu₀, εu₁) at t = 0.
pub fn solve_damped(params: &ModelParams, profile: &DataProfile, cfg: &SolverConfig) -> Result<Trajectory> {
    solve_damped_at(params, profile, cfg, &cadence(cfg, 0.0))
}

/// As [`solve_damped`], storing snapshots exactly at `frames`.
pub fn solve_damped_at(params: &ModelParams, profile: &DataProfile, cfg: &SolverConfig, frames: &[f64]) -> Result<Trajectory> {
    params.validate()?;
    check_frames(frames, 0.0)?;
    cfg.validate()?;
    let grid = cfg.grid_for(profile.radius, cfg.t_max)?;
    let (u0, u1) = profile.sample(grid)?;
    let u0 = u0.scaled(params.epsilon);
    let u1 = u1.scaled(params.epsilon);
    evolve(
        Setup {
            picture: Picture::Damped,
            frame_times: frames,
            n: params.n,
            p: params.p,
            epsilon: params.epsilon,
            grid,
            t_start: 0.0,
            coeffs: Coefficients { speed_exponent: 0.0, source_exponent: 0.0, mu: params.mu },
            u0: &u0.values,
            v0: &u1.values,
        },
        cfg,
    )
}

/// w_tt − ⟨t⟩^{2ℓ}Δw = ⟨t⟩^σ|w|^p from t₀, with `cfg.t_max` measured from t₀.
pub fn solve_transformed(tp: &TransformedProblem, cfg: &SolverConfig) -> Result<Trajectory> {
    solve_transformed_at(tp, cfg, &cadence(cfg, tp.t0))
}

/// As [`solve_transformed`], storing snapshots exactly at `frames`.
pub fn solve_transformed_at(tp: &TransformedProblem, cfg: &SolverConfig, frames: &[f64]) -> Result<Trajectory> {
    check_frames(frames, tp.t0)?;
    cfg.validate()?;
    let reach = time_forward(tp.t0 + cfg.t_max, tp.ell) - time_forward(tp.t0, tp.ell);
    let grid = cfg.grid_for(tp.radius, reach)?;
    let (w0, w1) = tp.initial_on(grid)?;
    evolve(
        Setup {
            picture: Picture::Transformed,
            frame_times: frames,
            n: tp.params.n,
            p: tp.params.p,
            epsilon: tp.params.epsilon,
            grid,
            t_start: tp.t0,
            coeffs: Coefficients { speed_exponent: tp.speed_exponent, source_exponent: tp.source_exponent, mu: 0.0 },
            u0: &w0.values,
            v0: &w1.values,
        },
        cfg,
    )
}
