//! Flat key-value configuration.
//!
//! A TOML file supplies any subset of the keys below, and command-line
//! flags of the same name override it. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::Args;
use dampwave::ode_oracle::KatoProblem;
use dampwave::{DataProfile, ModelParams, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "DAMPWAVE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "dampwave-out";

/// ε values of the reference sweep.
pub const DEFAULT_EPSILONS: [f64; 6] = [0.4, 0.28, 0.2, 0.14, 0.1, 0.07];

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Space dimension.
    #[arg(long)]
    pub n: Option<u32>,
    /// Damping coefficient in [0, 2], μ ≠ 1.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Nonlinearity power.
    #[arg(long)]
    pub p: Option<f64>,
    /// Data amplitude.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Support radius of the data (also R of the comparison ODE).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub amplitude0: Option<f64>,
    #[arg(long)]
    pub amplitude1: Option<f64>,
    /// Exponent k of the (1 - r²/R²)^k bump.
    #[arg(long)]
    pub smoothness: Option<u32>,

    #[arg(long)]
    pub cfl: Option<f64>,
    /// Grid nodes at the coarsest level.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Blow-up threshold on sup|u| (also used by the ODE oracle).
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub nl_factor: Option<f64>,
    #[arg(long)]
    pub collapse_ratio: Option<f64>,
    #[arg(long)]
    pub frame_interval: Option<f64>,
    /// Switch the nonlinear source off (linear runs).
    #[arg(long)]
    pub source: Option<bool>,
    /// Refinement levels per lifespan estimate.
    #[arg(long)]
    pub levels: Option<usize>,

    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,

    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long)]
    pub t_start: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,

    /// End of the comparison window, original clock.
    #[arg(long)]
    pub window_end: Option<f64>,
    #[arg(long)]
    pub frames: Option<usize>,

    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Write trajectory files next to the report.
    #[arg(long)]
    pub emit_frames: Option<bool>,
    /// Functional checks to run on a solve: lemma22, f1, chain.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Allow (n, μ, p) outside the blow-up range.
    #[arg(long)]
    pub exploratory: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        Overrides { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Overrides {
    /// Fields set in `top` win.
    pub fn overlay(self, top: Overrides) -> Overrides {
        let base = self;
        overlay!(base, top; n, mu, p, epsilon, radius, amplitude0, amplitude1, smoothness, cfl, count, t_max, margin,
            r_max, threshold, nl_factor, collapse_ratio, frame_interval, source, levels, epsilons, jobs, a, q, m, delta,
            deltas, t_start, horizon, window_end, frames, output_dir, emit_frames, checks, exploratory)
    }

    pub fn from_file(path: &Path) -> CliResult<Overrides> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Ok(toml::from_str(&text)?)
    }

    /// File values (if any) under the flag values.
    pub fn load(file: Option<&Path>, flags: Overrides) -> CliResult<Overrides> {
        let base = match file {
            Some(p) => Self::from_file(p)?,
            None => Overrides::default(),
        };
        Ok(base.overlay(flags))
    }
}

/// Everything a run depends on; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub params: ModelParams,
    pub profile: DataProfile,
    pub solver: SolverConfig,
    pub levels: usize,
    pub epsilons: Vec<f64>,
    pub jobs: usize,
    pub ode: KatoProblem,
    pub deltas: Option<Vec<f64>>,
    pub horizon: f64,
    pub window_end: f64,
    pub frames: usize,
    pub emit_frames: bool,
    pub checks: Vec<String>,
    pub exploratory: bool,
    /// Not echoed: reports must not depend on where they are written.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

pub const KNOWN_CHECKS: [&str; 3] = ["lemma22", "f1", "chain"];

impl Settings {
    /// Resolves defaults. `t_max_default` lets sweeps use a longer horizon.
    pub fn resolve(o: &Overrides, t_max_default: f64) -> CliResult<Settings> {
        let params = ModelParams::new(
            o.n.unwrap_or(2),
            o.mu.unwrap_or(0.5),
            o.p.unwrap_or(2.0),
            o.epsilon.unwrap_or(1.0),
            o.radius.unwrap_or(1.0),
        )?;
        let d = DataProfile::default();
        let profile = DataProfile::bump(
            o.amplitude0.unwrap_or(d.amplitude0),
            o.amplitude1.unwrap_or(d.amplitude1),
            o.smoothness.unwrap_or(d.smoothness),
            params.radius,
        )?;
        let s = SolverConfig::default();
        let solver = SolverConfig {
            cfl: o.cfl.unwrap_or(s.cfl),
            blowup_threshold: o.threshold.unwrap_or(s.blowup_threshold),
            t_max: o.t_max.unwrap_or(t_max_default),
            margin: o.margin.unwrap_or(s.margin),
            count: o.count.unwrap_or(s.count),
            r_max: o.r_max.or(s.r_max),
            nl_factor: o.nl_factor.unwrap_or(s.nl_factor),
            collapse_ratio: o.collapse_ratio.unwrap_or(s.collapse_ratio),
            source_enabled: o.source.unwrap_or(true),
            frame_interval: o.frame_interval.or(s.frame_interval),
            max_steps: s.max_steps,
        };
        solver.validate()?;
        let checks = o.checks.clone().unwrap_or_default();
        if let Some(bad) = checks.iter().find(|c| !KNOWN_CHECKS.contains(&c.as_str())) {
            return Err(CliError::Config(format!("unknown check {bad:?}; known: {}", KNOWN_CHECKS.join(", "))));
        }
        let delta = o.delta.unwrap_or(0.1);
        let ode = KatoProblem::on_envelope(
            o.p.unwrap_or(3.0),
            o.a.unwrap_or(1.0),
            o.q.unwrap_or(0.0),
            o.m.unwrap_or(1.0),
            params.radius,
            delta,
            o.t_start.unwrap_or(0.0),
        )?;
        let jobs = o.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        let output_dir = o
            .output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        Ok(Settings {
            params,
            profile,
            solver,
            levels: o.levels.unwrap_or(2),
            epsilons: o.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec()),
            jobs,
            ode,
            deltas: o.deltas.clone(),
            horizon: o.horizon.unwrap_or(1e6),
            window_end: o.window_end.unwrap_or(1.0),
            frames: o.frames.unwrap_or(10),
            emit_frames: o.emit_frames.unwrap_or(false),
            checks,
            exploratory: o.exploratory.unwrap_or(false),
            output_dir,
        })
    }

    /// Refuses (n, μ, p) outside the blow-up range unless exploratory.
    pub fn gate(&self) -> CliResult<()> {
        let p = &self.params;
        if !self.exploratory && !dampwave::exponents::admissible(p) {
            return Err(CliError::Config(format!(
                "(n, mu, p) = ({}, {}, {}) is outside the blow-up range 1 < p < p_S(n + mu); pass --exploratory true to run anyway",
                p.n, p.mu, p.p
            )));
        }
        Ok(())
    }
}
