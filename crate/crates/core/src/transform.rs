//! Liouville time changes between the damped equation and the
//! variable-speed equations
//!
//! ```text
//! μ < 1:  w(t, x) = u(Λ(t) − 1, x),       w_tt − ⟨t⟩^{2ℓ}Δw = ⟨t⟩^{2ℓ}|w|^p
//! μ > 1:  w(t, x) = ⟨t⟩ u(Λ(t) − 1, x),   w_tt − ⟨t⟩^{2ℓ}Δw = ⟨t⟩^{2ℓ−(p−1)}|w|^p
//! ```
//!
//! with Λ(t) = ⟨t⟩^{ℓ+1}/(ℓ+1), ⟨t⟩ = 1 + t, started at t₀ where Λ(t₀) = 1.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::{admissible, regime_constants, ModelParams, Regime};
use crate::ode_oracle::BlowupReport;
use crate::radial::{solve_damped_at, solve_transformed_at, DataProfile, RadialField, RadialGrid, SolverConfig, Trajectory};

/// Λ(t) = (1+t)^{ℓ+1}/(ℓ+1).
pub fn time_forward(t: f64, ell: f64) -> f64 {
    if ell == 0.0 {
        1.0 + t
    } else {
        (1.0 + t).powf(ell + 1.0) / (ell + 1.0)
    }
}

/// Λ^{-1}(s) = ((ℓ+1)s)^{1/(ℓ+1)} − 1.
pub fn time_inverse(s: f64, ell: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain!("inverse time map needs s > 0, got {s}"));
    }
    if ell == 0.0 {
        return Ok(s - 1.0);
    }
    Ok(((ell + 1.0) * s).powf(1.0 / (ell + 1.0)) - 1.0)
}

/// Original time τ = Λ(t) − 1 of transformed time t.
pub fn original_time(t: f64, ell: f64) -> f64 {
    if ell == 0.0 {
        return t;
    }
    time_forward(t, ell) - 1.0
}

/// Transformed time of original time τ ≥ 0.
pub fn transformed_time(tau: f64, ell: f64) -> Result<f64> {
    if ell == 0.0 {
        if !(tau > -1.0) {
            return Err(domain!("original time {tau} must exceed -1"));
        }
        return Ok(tau);
    }
    time_inverse(tau + 1.0, ell)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDirection {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMap {
    pub ell: f64,
    pub direction: TimeDirection,
}

impl TimeMap {
    pub fn apply(&self, x: f64) -> Result<f64> {
        match self.direction {
            TimeDirection::Forward => {
                if !(x >= 0.0) {
                    return Err(domain!("forward time map needs t >= 0, got {x}"));
                }
                Ok(time_forward(x, self.ell))
            }
            TimeDirection::Inverse => time_inverse(x, self.ell),
        }
    }

    pub fn inverted(&self) -> Self {
        let direction = match self.direction {
            TimeDirection::Forward => TimeDirection::Inverse,
            TimeDirection::Inverse => TimeDirection::Forward,
        };
        Self { ell: self.ell, direction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    /// Unscaled (u₀, u₁), resampled on whatever grid the solver uses.
    Profile(DataProfile),
    /// Unscaled (u₀, u₁) frozen on one grid.
    Fields(RadialField, RadialField),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedProblem {
    pub params: ModelParams,
    pub regime: Regime,
    pub ell: f64,
    pub t0: f64,
    /// 2ℓ.
    pub speed_exponent: f64,
    /// 2ℓ (low) or 2ℓ − (p−1) (high).
    pub source_exponent: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub initial_data: InitialData,
    /// w(t₀) = position_factor · ε u₀.
    pub position_factor: f64,
    /// w_t(t₀) = ε (velocity_from_u0 · u₀ + velocity_from_u1 · u₁).
    pub velocity_from_u0: f64,
    pub velocity_from_u1: f64,
}

impl TransformedProblem {
    /// Scaled data (w(t₀), w_t(t₀)) on `grid`.
    pub fn initial_on(&self, grid: RadialGrid) -> Result<(RadialField, RadialField)> {
        let (u0, u1) = match &self.initial_data {
            InitialData::Profile(p) => p.sample(grid)?,
            InitialData::Fields(a, b) => {
                if a.grid != grid || b.grid != grid {
                    return Err(Error::Config("initial fields live on a different grid than the solver".into()));
                }
                (a.clone(), b.clone())
            }
        };
        let eps = self.params.epsilon;
        let w0 = u0.scaled(eps * self.position_factor);
        let w1: Vec<f64> = u0
            .values
            .iter()
            .zip(&u1.values)
            .map(|(a, b)| eps * (self.velocity_from_u0 * a + self.velocity_from_u1 * b))
            .collect();
        Ok((w0, RadialField { grid, values: w1 }))
    }

    /// Amplitude factor w = ⟨t⟩^k u: k = 0 (low) or 1 (high).
    pub fn amplitude(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Low => 1.0,
            Regime::High => 1.0 + t,
        }
    }
}

fn build(params: &ModelParams, data: InitialData) -> Result<TransformedProblem> {
    params.validate()?;
    if !admissible(params) {
        return Err(domain!("(n, mu, p) = ({}, {}, {}) is not admissible", params.n, params.mu, params.p));
    }
    let rc = regime_constants(params.mu)?;
    let mu = params.mu;
    let (source_exponent, position_factor, velocity_from_u0, velocity_from_u1) = match rc.regime {
        Regime::Low if mu == 0.0 => (0.0, 1.0, 0.0, 1.0),
        Regime::Low => (2.0 * rc.ell, 1.0, 0.0, (1.0 - mu).powf(-mu)),
        Regime::High => (2.0 * rc.ell - (params.p - 1.0), (mu - 1.0).powf(1.0 - mu), 1.0, 1.0 / (mu - 1.0)),
    };
    Ok(TransformedProblem {
        params: *params,
        regime: rc.regime,
        ell: rc.ell,
        t0: rc.t0,
        speed_exponent: 2.0 * rc.ell,
        source_exponent,
        radius: params.radius,
        initial_data: data,
        position_factor,
        velocity_from_u0,
        velocity_from_u1,
    })
}

pub fn build_transformed(params: &ModelParams, u0: &RadialField, u1: &RadialField) -> Result<TransformedProblem> {
    if u0.grid != u1.grid {
        return Err(domain!("u0 and u1 must share a grid"));
    }
    build(params, InitialData::Fields(u0.clone(), u1.clone()))
}

pub fn build_transformed_profile(params: &ModelParams, profile: &DataProfile) -> Result<TransformedProblem> {
    profile.validate()?;
    build(params, InitialData::Profile(*profile))
}

/// u on the original clock at `times`, from a transformed trajectory, by
/// linear interpolation between stored snapshots.
pub fn pullback_solution(w: &Trajectory, tp: &TransformedProblem, times: &[f64]) -> Result<Vec<RadialField>> {
    let frames = &w.snapshots;
    let mut out = Vec::with_capacity(times.len());
    for &tau in times {
        let t = transformed_time(tau, tp.ell)?;
        let j = frames.partition_point(|s| s.t < t);
        let values = if j < frames.len() && frames[j].t == t {
            frames[j].u.clone()
        } else if j == 0 || j == frames.len() {
            return Err(Error::Range(format!(
                "original time {tau} (transformed {t}) outside the trajectory [{}, {}]",
                frames.first().map_or(f64::NAN, |s| s.t),
                frames.last().map_or(f64::NAN, |s| s.t)
            )));
        } else {
            let (a, b) = (&frames[j - 1], &frames[j]);
            let theta = (t - a.t) / (b.t - a.t);
            a.u.iter().zip(&b.u).map(|(x, y)| x + theta * (y - x)).collect()
        };
        let k = 1.0 / tp.amplitude(t);
        out.push(RadialField { grid: w.grid, values: values.into_iter().map(|x| k * x).collect() });
    }
    Ok(out)
}

/// Blow-up report of the transformed run expressed on the original clock.
pub fn pullback_report(rep: &BlowupReport, tp: &TransformedProblem) -> BlowupReport {
    let t_last = original_time(rep.t_last, tp.ell);
    let t_est = rep.t_est.map(|t| original_time(t, tp.ell));
    BlowupReport {
        t_est,
        t_uncertainty: t_est.map(|te| (te - t_last).abs()),
        t_last,
        sup_last: rep.sup_last / tp.amplitude(rep.t_last),
        ..rep.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossResidual {
    pub count: usize,
    pub dr: f64,
    pub window_end: f64,
    pub frames: usize,
    pub discrepancy: f64,
    /// sup|u| over the window divided by the initial amplitude.
    pub growth: f64,
}

/// Largest allowed sup|u| over the comparison window, relative to sup|εu₀|.
pub const WINDOW_GROWTH_LIMIT: f64 = 10.0;

/// Sup-norm gap between the direct damped solution and the pullback of
/// the transformed solution at `frames` original times in (0, window_end].
pub fn cross_residual(
    params: &ModelParams,
    profile: &DataProfile,
    cfg: &SolverConfig,
    window_end: f64,
    frames: usize,
) -> Result<CrossResidual> {
    if !(window_end > 0.0) || frames == 0 {
        return Err(domain!("cross residual needs a positive window and at least one frame"));
    }
    let tp = build_transformed_profile(params, profile)?;
    let taus: Vec<f64> = (1..=frames).map(|k| window_end * k as f64 / frames as f64).collect();
    let ts: Vec<f64> = taus.iter().map(|&tau| transformed_time(tau, tp.ell)).collect::<Result<_>>()?;

    // horizons pad the last frame by a relative 1e-12 so that it is always landed on
    let pad = 1.0 + 1e-12;
    let r_max = cfg.r_max.unwrap_or(profile.radius + window_end * pad + cfg.margin);
    let damped_cfg = SolverConfig { t_max: taus[frames - 1] * pad, r_max: Some(r_max), frame_interval: None, ..*cfg };
    let t_end = ts[frames - 1];
    let trans_cfg = SolverConfig { t_max: (t_end - tp.t0) * pad, r_max: Some(r_max), frame_interval: None, ..*cfg };

    let (direct, transformed) = rayon::join(
        || solve_damped_at(params, profile, &damped_cfg, &taus),
        || solve_transformed_at(&tp, &trans_cfg, &ts),
    );
    let direct = direct?;
    let transformed = transformed?;
    for (name, traj) in [("damped", &direct), ("transformed", &transformed)] {
        if traj.report.blew_up || traj.snapshots.len() < frames + 1 {
            return Err(Error::Range(format!("{name} solve ended before the window closed at t = {}", traj.report.t_last)));
        }
    }
    let pulled = pullback_solution(&transformed, &tp, &taus)?;
    let initial = direct.snapshots[0].sup;
    let mut discrepancy = 0.0f64;
    let mut peak = initial;
    for (k, u) in pulled.iter().enumerate() {
        let d = &direct.snapshots[k + 1];
        peak = peak.max(d.sup);
        for (a, b) in d.u.iter().zip(&u.values) {
            discrepancy = discrepancy.max((a - b).abs());
        }
    }
    let growth = peak / initial;
    if growth > WINDOW_GROWTH_LIMIT {
        return Err(Error::Range(format!(
            "sup|u| grew by {growth:.3} > {WINDOW_GROWTH_LIMIT} inside the window; shorten it"
        )));
    }
    Ok(CrossResidual { count: direct.grid.count, dr: direct.grid.dr, window_end, frames, discrepancy, growth })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossConvergence {
    pub levels: Vec<CrossResidual>,
    /// Successive discrepancy ratios e_h / e_{h/2}.
    pub ratios: Vec<f64>,
}

/// [`cross_residual`] at `levels` successively refined grids.
pub fn cross_convergence(
    params: &ModelParams,
    profile: &DataProfile,
    cfg: &SolverConfig,
    window_end: f64,
    frames: usize,
    levels: usize,
) -> Result<CrossConvergence> {
    if levels < 2 {
        return Err(domain!("convergence study needs at least two levels"));
    }
    let mut out = Vec::with_capacity(levels);
    let mut count = cfg.count;
    for _ in 0..levels {
        let c = SolverConfig { count, ..*cfg };
        out.push(cross_residual(params, profile, &c, window_end, frames)?);
        count = 2 * (count - 1) + 1;
    }
    let ratios = out.windows(2).map(|w| w[0].discrepancy / w[1].discrepancy).collect();
    Ok(CrossConvergence { levels: out, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_examples() {
        assert_eq!(time_forward(0.0, 0.0), 1.0);
        assert!((time_forward(1.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((time_forward(2f64.sqrt() - 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((time_forward(3.0, 1.0) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_examples() {
        assert!((time_inverse(2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(time_inverse(1.0, 0.0).unwrap(), 0.0);
        assert!(time_inverse(0.0, 1.0).is_err());
        assert!(time_inverse(-1.0, 0.5).is_err());
        let m = TimeMap { ell: 1.0, direction: TimeDirection::Forward };
        assert!((m.inverted().apply(m.apply(0.7).unwrap()).unwrap() - 0.7).abs() < 1e-15);
        assert!(m.apply(-0.1).is_err());
    }

    #[test]
    fn regime_exponents_and_data_factors() {
        let lo = build_transformed_profile(&ModelParams::new(2, 0.5, 2.0, 1.0, 1.0).unwrap(), &DataProfile::default())
            .unwrap();
        assert_eq!(lo.source_exponent - lo.speed_exponent, 0.0);
        assert!((lo.velocity_from_u1 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(lo.velocity_from_u0, 0.0);
        assert_eq!(lo.position_factor, 1.0);

        let hi = build_transformed_profile(&ModelParams::new(2, 1.5, 2.0, 1.0, 1.0).unwrap(), &DataProfile::default())
            .unwrap();
        assert_eq!(hi.source_exponent - hi.speed_exponent, -(2.0 - 1.0));
        assert!((hi.position_factor - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(hi.velocity_from_u0, 1.0);
        assert!((hi.velocity_from_u1 - 2.0).abs() < 1e-15);

        let id = build_transformed_profile(&ModelParams::new(3, 0.0, 2.0, 1.0, 1.0).unwrap(), &DataProfile::default())
            .unwrap();
        assert_eq!((id.ell, id.t0, id.speed_exponent, id.source_exponent), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((id.position_factor, id.velocity_from_u0, id.velocity_from_u1), (1.0, 0.0, 1.0));
    }

    #[test]
    fn inadmissible_is_rejected() {
        let p = ModelParams::new(3, 0.5, 3.0, 1.0, 1.0).unwrap();
        assert!(build_transformed_profile(&p, &DataProfile::default()).is_err());
    }

    #[test]
    fn pullback_of_blowup_time() {
        let params = ModelParams::new(2, 1.0 / 2.0, 2.0, 1.0, 1.0).unwrap();
        let tp = build_transformed_profile(&params, &DataProfile::default()).unwrap();
        assert_eq!(tp.ell, 1.0);
        let rep = BlowupReport {
            blew_up: true,
            t_est: Some(3.0),
            t_uncertainty: Some(0.0),
            reason: crate::ode_oracle::Termination::ThresholdCollapse,
            t_last: 3.0,
            sup_last: 1e7,
            steps: 1,
        };
        let back = pullback_report(&rep, &tp);
        assert!((back.t_est.unwrap() - 7.0).abs() < 1e-13);
    }
}
