use serde::{Deserialize, Serialize};

use super::{solve_damped, DataProfile, SolverConfig};
use crate::error::{domain, Error, Result};
use crate::exponents::{admissible, lifespan_exponent, regime_constants, ModelParams};
use crate::ode_oracle::{run_jobs, BlowupReport};
use crate::powerlaw::PowerLawFit;
use crate::transform::transformed_time;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub count: usize,
    pub dr: f64,
    pub report: BlowupReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanEstimate {
    #[serde(rename = "T")]
    pub t: f64,
    pub uncertainty: f64,
    pub levels: Vec<LevelResult>,
}

impl LifespanEstimate {
    /// |T_h − T_{h/2}| / |T_{h/2} − T_{h/4}| for each consecutive triple.
    pub fn refinement_ratios(&self) -> Vec<f64> {
        let ts: Vec<f64> = self.levels.iter().filter_map(|l| l.report.t_est).collect();
        ts.windows(3).map(|w| (w[0] - w[1]).abs() / (w[1] - w[2]).abs()).collect()
    }

    pub fn relative_uncertainty(&self) -> f64 {
        self.uncertainty / self.t.abs()
    }
}

/// Lifespan from `levels` runs, starting at `cfg.count` and halving dr.
pub fn estimate_lifespan(
    params: &ModelParams,
    profile: &DataProfile,
    cfg: &SolverConfig,
    levels: usize,
) -> Result<LifespanEstimate> {
    if levels < 2 {
        return Err(domain!("lifespan estimate needs at least 2 refinement levels"));
    }
    let mut out: Vec<LevelResult> = Vec::with_capacity(levels);
    let mut count = cfg.count;
    let base_cfg = SolverConfig { frame_interval: None, ..*cfg };
    for level in 0..levels {
        let c = SolverConfig { count, ..base_cfg };
        let traj = solve_damped(params, profile, &c)?;
        if !traj.report.blew_up {
            return Err(Error::Inconclusive { level, count, t_max: cfg.t_max });
        }
        out.push(LevelResult { count, dr: traj.grid.dr, report: traj.report });
        count = 2 * (count - 1) + 1;
    }
    let ts: Vec<f64> = out.iter().map(|l| l.report.t_est.expect("blow-up carries T")).collect();
    let t = ts[levels - 1];
    let uncertainty = (t - ts[levels - 2]).abs();
    Ok(LifespanEstimate { t, uncertainty, levels: out })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPoint {
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub uncertainty: f64,
    /// Λ^{-1}(T + 1): the lifespan on the transformed clock.
    #[serde(rename = "T_transformed")]
    pub t_transformed: f64,
    pub levels: Vec<LevelResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub params: ModelParams,
    pub points: Vec<EpsilonPoint>,
    pub fit: PowerLawFit,
    pub expected_slope: f64,
    pub relative_slope_error: f64,
    pub slope_tolerance: f64,
    pub slope_consistent: bool,
    pub envelope_ratio_max: f64,
    pub envelope_limit: f64,
    pub envelope_consistent: bool,
    pub max_relative_uncertainty: f64,
    /// Fit of the transformed-clock lifespans against ε.
    pub transformed_fit: PowerLawFit,
    pub decades: f64,
    /// Fewer than 5 values or less than 1.5 decades of ε.
    pub short_range: bool,
    pub exploratory: bool,
}

impl EpsilonSweep {
    pub const SLOPE_TOLERANCE: f64 = 0.3;
    pub const ENVELOPE_LIMIT: f64 = 2.0;
}

/// Lifespans for every ε (in parallel over `jobs` workers) and the
/// log-log fit against ε.
pub fn epsilon_sweep(
    params: &ModelParams,
    profile: &DataProfile,
    cfg: &SolverConfig,
    epsilons: &[f64],
    levels: usize,
    jobs: usize,
    exploratory: bool,
) -> Result<EpsilonSweep> {
    params.validate()?;
    let admissible_params = admissible(params);
    if !admissible_params && !exploratory {
        return Err(domain!(
            "(n, mu, p) = ({}, {}, {}) is not admissible; exploratory runs must be requested explicitly",
            params.n,
            params.mu,
            params.p
        ));
    }
    if epsilons.len() < PowerLawFit::MIN_SAMPLES {
        return Err(domain!("epsilon sweep needs at least {} values", PowerLawFit::MIN_SAMPLES));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(domain!("epsilon values must be positive"));
    }
    let ell = regime_constants(params.mu)?.ell;
    let run = |&eps: &f64| -> Result<EpsilonPoint> {
        let p = params.with_epsilon(eps);
        let est = match estimate_lifespan(&p, profile, cfg, levels) {
            Err(Error::Inconclusive { .. }) => return Err(Error::NoBlowup { parameter: "epsilon", value: eps }),
            other => other?,
        };
        Ok(EpsilonPoint {
            epsilon: eps,
            t: est.t,
            uncertainty: est.uncertainty,
            t_transformed: transformed_time(est.t, ell)?,
            levels: est.levels,
        })
    };
    let points = run_jobs(jobs, epsilons, run)?;
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    let tws: Vec<f64> = points.iter().map(|p| p.t_transformed).collect();
    let fit = PowerLawFit::fit(epsilons, &ts)?;
    let transformed_fit = PowerLawFit::fit(epsilons, &tws)?;
    let expected_slope = if admissible_params { -lifespan_exponent(params)? } else { f64::NAN };
    let relative_slope_error = fit.relative_slope_error(expected_slope);
    let envelope_ratio_max = fit.envelope_ratio_max();
    let decades = fit.decades();
    let max_relative_uncertainty = points.iter().map(|p| p.uncertainty / p.t).fold(0.0, f64::max);
    Ok(EpsilonSweep {
        params: *params,
        points,
        slope_consistent: relative_slope_error <= EpsilonSweep::SLOPE_TOLERANCE,
        envelope_consistent: envelope_ratio_max <= EpsilonSweep::ENVELOPE_LIMIT,
        fit,
        expected_slope,
        relative_slope_error,
        slope_tolerance: EpsilonSweep::SLOPE_TOLERANCE,
        envelope_ratio_max,
        envelope_limit: EpsilonSweep::ENVELOPE_LIMIT,
        max_relative_uncertainty,
        transformed_fit,
        short_range: epsilons.len() < 5 || decades < 1.5,
        decades,
        exploratory: !admissible_params,
    })
}
