use std::fmt;
use std::path::Path;
use std::time::Instant;

use dampwave::exponents::{
    admissible_triple, fujita_exponent, kato_exponents, lifespan_exponent, regime_constants, strauss_exponent,
};
use dampwave::functionals::{check_chain, check_f1_lower, lemma22_ratio, FunctionalTrace};
use dampwave::ode_oracle::{integrate_blowup, sweep_delta, KatoProblem};
use dampwave::radial::{epsilon_sweep, estimate_lifespan, solve_damped, solve_transformed, write_binary, write_csv, EpsilonSweep};
use dampwave::specfun::Clock;
use dampwave::transform::{build_transformed_profile, cross_convergence, pullback_report};
use dampwave::{LambdaWeight, ModelParams, PhiFunction, SolverConfig};
use serde::Serialize;
use serde_json::json;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::report::{write_outputs, CheckOutcome, RunReport, Timings};

/// A finished command: its report plus any sidecar files.
pub struct Outcome {
    pub report: RunReport,
    pub timings: Timings,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new(report: RunReport, timings: Timings) -> Self {
        Self { report, timings, files: Vec::new() }
    }

    /// Writes the report, timings and sidecars under `dir`.
    pub fn persist(self, dir: &Path) -> CliResult<RunReport> {
        write_outputs(dir, &self.report, &self.timings)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(self.report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentTable {
    pub n: u32,
    pub mu: f64,
    pub p: Option<f64>,
    pub strauss: f64,
    pub fujita: f64,
    pub ell: f64,
    pub t0: f64,
    pub kato_a: Option<f64>,
    pub kato_q: Option<f64>,
    pub lifespan_exponent: Option<f64>,
    pub admissible: Option<bool>,
}

pub fn exponents(n: u32, mu: f64, p: Option<f64>) -> CliResult<ExponentTable> {
    if mu == 1.0 {
        return Err(CliError::Config(
            "mu = 1 is excluded: the Liouville transform degenerates (ell = mu/(1-mu) is undefined) and no lifespan bound is available".into(),
        ));
    }
    if n < 2 {
        return Err(CliError::Config(format!("n = {n}: the blow-up analysis needs n >= 2")));
    }
    let rc = regime_constants(mu)?;
    let mut table = ExponentTable {
        n,
        mu,
        p,
        strauss: strauss_exponent(n as f64 + mu)?,
        fujita: fujita_exponent(n)?,
        ell: rc.ell,
        t0: rc.t0,
        kato_a: None,
        kato_q: None,
        lifespan_exponent: None,
        admissible: None,
    };
    if let Some(p) = p {
        let (a, q) = kato_exponents(n, mu, p)?;
        let ok = admissible_triple(n, mu, p);
        table.kato_a = Some(a);
        table.kato_q = Some(q);
        table.admissible = Some(ok);
        if ok {
            table.lifespan_exponent = Some(lifespan_exponent(&ModelParams::new(n, mu, p, 1.0, 1.0)?)?);
        }
    }
    Ok(table)
}

impl fmt::Display for ExponentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.12}"));
        writeln!(f, "n                  {}", self.n)?;
        writeln!(f, "mu                 {}", self.mu)?;
        writeln!(f, "p_S(n+mu)          {:.12}", self.strauss)?;
        writeln!(f, "p_F(n)             {:.12}", self.fujita)?;
        writeln!(f, "ell                {:.12}", self.ell)?;
        writeln!(f, "t0                 {:.12}", self.t0)?;
        if let Some(p) = self.p {
            writeln!(f, "p                  {p}")?;
            writeln!(f, "a                  {}", opt(self.kato_a))?;
            writeln!(f, "q                  {}", opt(self.kato_q))?;
            writeln!(f, "lifespan exponent  {}", self.lifespan_exponent.map_or("n/a (p outside the blow-up range)".into(), |v| format!("{v:.12}")))?;
            writeln!(f, "admissible         {}", self.admissible.unwrap_or(false))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeFixture {
    /// Data on the envelope δ(t+R)^a.
    Envelope,
    /// f'' = f³ with f(0) = δ, f'(0) = δ²/√2, blowing up at √2/δ.
    Cubic,
}

pub fn ode_blowup(s: &Settings, fixture: OdeFixture) -> CliResult<Outcome> {
    let mut timings = Timings::default();
    let start = Instant::now();
    let threshold = s.solver.blowup_threshold;
    let base = match fixture {
        OdeFixture::Envelope => s.ode,
        OdeFixture::Cubic => KatoProblem::cubic_exact(s.ode.delta)?,
    };
    let config = json!({ "fixture": fixture, "problem": base, "deltas": s.deltas, "threshold": threshold, "horizon": s.horizon, "jobs": s.jobs });
    let report = match &s.deltas {
        Some(deltas) => {
            let sweep = sweep_delta(&base, deltas, threshold, s.horizon, s.jobs)?;
            RunReport::new("ode-blowup", &config, &sweep)?
        }
        None => {
            let rep = integrate_blowup(&base, threshold, s.horizon)?;
            let mut r = RunReport::new("ode-blowup", &config, &rep)?;
            if fixture == OdeFixture::Cubic {
                let exact = 2f64.sqrt() / base.delta;
                let err = rep.t_est.map_or(f64::INFINITY, |t| ((t - exact) / exact).abs());
                r.checks.push(CheckOutcome::at_most("cubic_lifespan_relative_error", err, 0.01));
            }
            r
        }
    };
    timings.record("integrate", start.elapsed());
    Ok(Outcome::new(report, timings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PictureArg {
    Damped,
    Transformed,
}

/// Limits of the weighted-integral ratio taken as "bounded".
pub const LEMMA22_BAND: (f64, f64) = (1e-2, 1e2);
pub const LEMMA22_T_END: f64 = 30.0;

pub fn solve(s: &Settings, picture: PictureArg) -> CliResult<Outcome> {
    s.gate()?;
    let mut timings = Timings::default();
    let mut files = Vec::new();
    let mut results = serde_json::Map::new();
    let mut checks = Vec::new();
    let t = Instant::now();
    // the transform is only defined inside the blow-up range
    let traj = match picture {
        PictureArg::Damped => solve_damped(&s.params, &s.profile, &s.solver)?,
        PictureArg::Transformed => {
            let tp = build_transformed_profile(&s.params, &s.profile)?;
            let traj = solve_transformed(&tp, &s.solver)?;
            results.insert("original_clock_report".into(), serde_json::to_value(pullback_report(&traj.report, &tp))?);
            traj
        }
    };
    timings.record("solve", t.elapsed());
    results.insert("report".into(), serde_json::to_value(&traj.report)?);
    results.insert("grid".into(), serde_json::to_value(traj.grid)?);
    if picture == PictureArg::Damped && traj.report.blew_up && s.levels >= 2 {
        let t = Instant::now();
        let est = estimate_lifespan(&s.params, &s.profile, &s.solver, s.levels)?;
        timings.record("lifespan", t.elapsed());
        results.insert("lifespan".into(), json!({ "T": est.t, "uncertainty": est.uncertainty, "refinement_ratios": est.refinement_ratios() }));
    }
    if s.emit_frames {
        let mut csv = Vec::new();
        write_csv(&traj, &mut csv)?;
        files.push(("trajectory.csv".into(), csv));
        let mut bin = Vec::new();
        write_binary(&traj, s.params.mu, &mut bin)?;
        files.push(("trajectory.bin".into(), bin));
    }
    if !s.checks.is_empty() {
        let t = Instant::now();
        let block = functional_checks(s, &mut checks)?;
        timings.record("checks", t.elapsed());
        results.insert("checks".into(), block);
    }
    let mut report = RunReport::new("solve", &json!({ "settings": s, "picture": picture }), &results)?;
    report.checks = checks;
    Ok(Outcome { report, timings, files })
}

/// Functionals along a transformed trajectory with frames every 0.25
/// (or the configured cadence).
fn functional_checks(s: &Settings, checks: &mut Vec<CheckOutcome>) -> CliResult<serde_json::Value> {
    let tp = build_transformed_profile(&s.params, &s.profile)?;
    let cfg = SolverConfig { frame_interval: Some(s.solver.frame_interval.unwrap_or(0.25)), ..s.solver };
    let traj = solve_transformed(&tp, &cfg)?;
    let rc = regime_constants(s.params.mu)?;
    let weight = LambdaWeight::from_regime(&rc, Clock::Bracket)?;
    let phi = PhiFunction::with_default_nodes(s.params.n)?;
    let trace = FunctionalTrace::from_trajectory(&traj, &tp, &weight, &phi)?;
    let mut block = serde_json::Map::new();
    for name in &s.checks {
        match name.as_str() {
            "lemma22" => {
                let ts: Vec<f64> = trace.times.iter().copied().filter(|&t| t >= trace.t1() && t <= LEMMA22_T_END).collect();
                let ratios = ts.iter().map(|&t| lemma22_ratio(t, &s.params, &weight, &phi)).collect::<dampwave::Result<Vec<_>>>()?;
                let lo = ratios.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
                let hi = ratios.iter().map(|r| r.ratio).fold(0.0, f64::max);
                checks.push(CheckOutcome::within("lemma22_ratio_min", lo, LEMMA22_BAND.0, LEMMA22_BAND.1));
                checks.push(CheckOutcome::within("lemma22_ratio_max", hi, LEMMA22_BAND.0, LEMMA22_BAND.1));
                block.insert("lemma22".into(), json!({ "min": lo, "max": hi, "samples": ratios.len() }));
            }
            "f1" => {
                let w = check_f1_lower(&trace, s.params.epsilon)?;
                checks.push(CheckOutcome::holds("f1_window_minimum_positive", w.minimum > 0.0, w.minimum, "> 0"));
                block.insert("f1".into(), serde_json::to_value(w)?);
            }
            "chain" => {
                let c = check_chain(&trace, &traj)?;
                checks.push(CheckOutcome::holds("holder_chain", c.holder_ok, c.holder_f_max.max(c.holder_f1_max), "<= 1 + 1e-8"));
                block.insert("chain".into(), serde_json::to_value(c)?);
            }
            other => return Err(CliError::Config(format!("unknown check {other:?}"))),
        }
    }
    Ok(block.into())
}

pub fn sweep(s: &Settings) -> CliResult<Outcome> {
    s.gate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let sweep = epsilon_sweep(&s.params, &s.profile, &s.solver, &s.epsilons, s.levels, s.jobs, s.exploratory)?;
    timings.record("sweep", t.elapsed());
    let report = RunReport::new("sweep", s, &sweep)?;
    let mut out = Outcome::new(report, timings);
    out.files.push(("sweep.csv".into(), sweep_csv(&sweep).into_bytes()));
    out.files.push(("sweep.gp".into(), plot_script(&sweep).into_bytes()));
    Ok(out)
}

pub fn sweep_csv(sweep: &EpsilonSweep) -> String {
    let mut s = String::from("epsilon,T,uncertainty,T_transformed\n");
    for p in &sweep.points {
        s.push_str(&format!("{},{},{},{}\n", p.epsilon, p.t, p.uncertainty, p.t_transformed));
    }
    s
}

/// gnuplot script over sweep.csv: data, fitted power law, and the bound
/// exponent through the geometric mean of the data.
pub fn plot_script(sweep: &EpsilonSweep) -> String {
    let n = sweep.points.len() as f64;
    let ln_e = sweep.points.iter().map(|p| p.epsilon.ln()).sum::<f64>() / n;
    let ln_t = sweep.points.iter().map(|p| p.t.ln()).sum::<f64>() / n;
    let k = -sweep.expected_slope;
    format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel 'epsilon'\n\
         set ylabel 'T'\n\
         set key top right\n\
         fit_c = {c}\n\
         fit_s = {s}\n\
         bound_c = {bc}\n\
         bound_k = {k}\n\
         plot 'sweep.csv' using 1:2:3 skip 1 with yerrorbars title 'measured', \\\n\
         \x20    fit_c * x**fit_s title sprintf('fit, slope %.3f', fit_s), \\\n\
         \x20    bound_c * x**(-bound_k) dashtype 2 title sprintf('bound exponent -%.3f', bound_k), \\\n\
         \x20    2 * fit_c * x**fit_s dashtype 3 title '2x fitted envelope'\n",
        c = sweep.fit.intercept.exp(),
        s = sweep.fit.slope,
        bc = (ln_t + k * ln_e).exp(),
        k = k,
    )
}

pub fn transform_check(s: &Settings) -> CliResult<Outcome> {
    s.gate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let conv = cross_convergence(&s.params, &s.profile, &s.solver, s.window_end, s.frames, s.levels.max(2))?;
    timings.record("cross_convergence", t.elapsed());
    let mut report = RunReport::new("transform-check", s, &conv)?;
    for (i, r) in conv.ratios.iter().enumerate() {
        report.checks.push(CheckOutcome::within(&format!("cross_residual_ratio_{i}"), *r, 3.0, 5.0));
    }
    Ok(Outcome::new(report, timings))
}

pub fn verify(fault: Option<crate::verify::Fault>) -> CliResult<Outcome> {
    let mut timings = Timings::default();
    let t = Instant::now();
    let (checks, results) = crate::verify::run(fault)?;
    timings.record("verify", t.elapsed());
    let mut report = RunReport::new("verify", &json!({ "seed": crate::verify::SEED, "fault": fault }), &results)?;
    report.checks = checks;
    Ok(Outcome::new(report, timings))
}
