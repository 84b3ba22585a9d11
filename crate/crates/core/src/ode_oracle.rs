//! Comparison ODE f'' = m (t+R)^{-q} f^p with blow-up detection.
//!
//! The equality case of the differential inequality is integrated with an
//! embedded Dormand–Prince 5(4) pair. Blow-up is declared once f passes a
//! threshold and the accepted step has collapsed; the singular time is then
//! extrapolated from the self-similar rate f ~ C (T - t)^{-2/(p-1)}.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::{kato_lifespan_exponent, kato_parameters, lifespan_exponent, ModelParams};
use crate::powerlaw::PowerLawFit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoProblem {
    pub p: f64,
    pub a: f64,
    pub q: f64,
    pub m: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub delta: f64,
    pub t_start: f64,
    pub f_init: f64,
    pub fprime_init: f64,
}

impl KatoProblem {
    /// Data on the lower envelope: f = δ(t+R)^a, f' = δa(t+R)^{a-1} at t_start.
    pub fn on_envelope(p: f64, a: f64, q: f64, m: f64, radius: f64, delta: f64, t_start: f64) -> Result<Self> {
        let base = t_start + radius;
        let prob = Self {
            p,
            a,
            q,
            m,
            radius,
            delta,
            t_start,
            f_init: delta * base.powf(a),
            fprime_init: delta * a * base.powf(a - 1.0),
        };
        prob.validate()?;
        Ok(prob)
    }

    /// f'' = f³ with f(0) = δ, f'(0) = δ²/√2, whose solution √2/(√2/δ - t)
    /// blows up at T = √2/δ.
    pub fn cubic_exact(delta: f64) -> Result<Self> {
        let prob = Self {
            p: 3.0,
            a: 1.0,
            q: 0.0,
            m: 1.0,
            radius: 1.0,
            delta,
            t_start: 0.0,
            f_init: delta,
            fprime_init: delta * delta / 2f64.sqrt(),
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::on_envelope(self.p, self.a, self.q, self.m, self.radius, delta, self.t_start)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(domain!("comparison ODE needs p > 1, got {}", self.p));
        }
        if !(self.a >= 1.0) {
            return Err(domain!("comparison ODE needs a >= 1, got {}", self.a));
        }
        if !((self.p - 1.0) * self.a > self.q - 2.0) {
            return Err(domain!("(p-1)a = {} must exceed q-2 = {}", (self.p - 1.0) * self.a, self.q - 2.0));
        }
        if !(self.m >= 0.0) || !(self.radius > 0.0) || !(self.delta > 0.0) {
            return Err(domain!("comparison ODE needs m >= 0, R > 0, delta > 0"));
        }
        if !(self.t_start + self.radius > 0.0) {
            return Err(domain!("t_start + R must be positive"));
        }
        let floor = self.delta * (self.t_start + self.radius).powf(self.a);
        if !(self.f_init >= floor * (1.0 - 1e-12)) || !self.fprime_init.is_finite() {
            return Err(domain!("f_init = {} lies below the envelope {floor}", self.f_init));
        }
        Ok(())
    }

    /// Exponent of the lifespan bound T_δ ≲ δ^{-κ}: κ = (p-1)/((p-1)a − q + 2).
    pub fn predicted_exponent(&self) -> f64 {
        (self.p - 1.0) / ((self.p - 1.0) * self.a - self.q + 2.0)
    }

    fn accel(&self, t: f64, f: f64) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        self.m * (t + self.radius).powf(-self.q) * f.abs().powf(self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[serde(rename = "threshold+collapse")]
    ThresholdCollapse,
    HorizonReached,
    Nonfinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub blew_up: bool,
    #[serde(rename = "T_est")]
    pub t_est: Option<f64>,
    #[serde(rename = "T_uncertainty")]
    pub t_uncertainty: Option<f64>,
    pub reason: Termination,
    pub t_last: f64,
    pub sup_last: f64,
    pub steps: usize,
}

impl BlowupReport {
    pub fn lifespan(&self) -> Result<f64> {
        match (self.blew_up, self.t_est) {
            (true, Some(t)) => Ok(t),
            _ => Err(Error::Numerical(format!("no blow-up detected (stopped at t = {})", self.t_last))),
        }
    }
}

/// Extrapolated singular time from two samples of M(t) ~ C (T - t)^{-2/(p-1)}.
///
/// y = M^{-(p-1)/2} is linear in T - t; the secant through the last two
/// samples is continued to y = 0.
pub fn extrapolate_blowup(p: f64, (t1, m1): (f64, f64), (t2, m2): (f64, f64)) -> Option<f64> {
    let e = -(p - 1.0) / 2.0;
    let y1 = m1.powf(e);
    let y2 = m2.powf(e);
    if !(y1 > y2) || !(t2 > t1) {
        return None;
    }
    let t = t2 + y2 * (t2 - t1) / (y1 - y2);
    t.is_finite().then_some(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Collapse means h < h_min_rel · (t + R).
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_min_rel: 1e-6, max_steps: 2_000_000 }
    }
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn axpy(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

pub fn integrate_blowup(prob: &KatoProblem, threshold: f64, horizon: f64) -> Result<BlowupReport> {
    integrate_blowup_with(prob, threshold, horizon, OracleOptions::default())
}

pub fn integrate_blowup_with(
    prob: &KatoProblem,
    threshold: f64,
    horizon: f64,
    opts: OracleOptions,
) -> Result<BlowupReport> {
    prob.validate()?;
    if !(threshold >= 1e6) {
        return Err(domain!("blow-up threshold {threshold} must be at least 1e6"));
    }
    if !(horizon > prob.t_start) {
        return Err(domain!("horizon {horizon} must exceed t_start {}", prob.t_start));
    }
    let rhs = |t: f64, y: State| -> State { [y[1], prob.accel(t, y[0])] };

    let mut t = prob.t_start;
    let mut y = [prob.f_init, prob.fprime_init];
    let mut k1 = rhs(t, y);
    let mut h = 1e-3 * (horizon - t).min(t + prob.radius);
    let mut prev = (t, y[0]);
    let mut steps = 0usize;

    let report = |blew_up, t_est: Option<f64>, reason, t_last: f64, sup_last, steps| BlowupReport {
        blew_up,
        t_est,
        t_uncertainty: t_est.map(|te| (te - t_last).abs()),
        reason,
        t_last,
        sup_last,
        steps,
    };

    while steps < opts.max_steps {
        if t >= horizon {
            return Ok(report(false, None, Termination::HorizonReached, t, y[0], steps));
        }
        let h_min = opts.h_min_rel * (t + prob.radius).abs();
        if y[0] >= threshold && h < h_min {
            let t_est = extrapolate_blowup(prob.p, prev, (t, y[0]));
            return Ok(report(t_est.is_some(), t_est, Termination::ThresholdCollapse, t, y[0], steps));
        }
        h = h.min(horizon - t);

        let k2 = rhs(t + C2 * h, axpy(y, h, &[(A21, k1)]));
        let k3 = rhs(t + C3 * h, axpy(y, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(t + C4 * h, axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs(t + C5 * h, axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = rhs(t + h, axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
        let y_new = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = rhs(t + h, y_new);

        let mut err = 0.0f64;
        for i in 0..2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }

        if !err.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
            if y[0] >= threshold {
                // overflow inside the terminal layer
                let t_est = extrapolate_blowup(prob.p, prev, (t, y[0]));
                return Ok(report(t_est.is_some(), t_est, Termination::Nonfinite, t, y[0], steps));
            }
            h *= 0.2;
            if h < f64::EPSILON * (t.abs() + prob.radius) {
                return Ok(report(false, None, Termination::Nonfinite, t, y[0], steps));
            }
            continue;
        }

        if err <= 1.0 {
            prev = (t, y[0]);
            t += h;
            y = y_new;
            k1 = k7;
            steps += 1;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
        }
    }
    Err(Error::Numerical(format!("comparison ODE exceeded {} steps at t = {t}", opts.max_steps)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_blowup: f64,
    #[serde(rename = "T_uncertainty")]
    pub t_uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSweep {
    pub points: Vec<DeltaPoint>,
    pub fit: PowerLawFit,
    pub expected_slope: f64,
    pub relative_slope_error: f64,
    /// Fit of T_δ + R, the lifespan on the clock t + R that appears in
    /// the weight (t+R)^{-q}.
    pub shifted_fit: PowerLawFit,
    pub monotone: bool,
}

/// Runs the envelope problem for every δ and fits T_δ against δ.
pub fn sweep_delta(base: &KatoProblem, deltas: &[f64], threshold: f64, horizon: f64, jobs: usize) -> Result<DeltaSweep> {
    if deltas.len() < PowerLawFit::MIN_SAMPLES {
        return Err(domain!("delta sweep needs at least {} values", PowerLawFit::MIN_SAMPLES));
    }
    if deltas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain!("delta values must be strictly ascending"));
    }
    if deltas[deltas.len() - 1] / deltas[0] < 10.0 {
        return Err(domain!("delta values must span at least one decade"));
    }
    let run = |&delta: &f64| -> Result<DeltaPoint> {
        let prob = base.with_delta(delta)?;
        let rep = integrate_blowup(&prob, threshold, horizon)?;
        match (rep.blew_up, rep.t_est, rep.t_uncertainty) {
            (true, Some(t), Some(u)) => Ok(DeltaPoint { delta, t_blowup: t - prob.t_start, t_uncertainty: u }),
            _ => Err(Error::NoBlowup { parameter: "delta", value: delta }),
        }
    };
    let points = run_jobs(jobs, deltas, run)?;
    let ts: Vec<f64> = points.iter().map(|p| p.t_blowup).collect();
    let shifted: Vec<f64> = points.iter().map(|p| p.t_blowup + base.t_start + base.radius).collect();
    let fit = PowerLawFit::fit(deltas, &ts)?;
    let shifted_fit = PowerLawFit::fit(deltas, &shifted)?;
    let expected_slope = -base.predicted_exponent();
    let monotone = ts.windows(2).all(|w| w[0] >= w[1]);
    Ok(DeltaSweep {
        relative_slope_error: fit.relative_slope_error(expected_slope),
        points,
        fit,
        expected_slope,
        shifted_fit,
        monotone,
    })
}

/// Ordered parallel map: results come back in input order regardless of `jobs`.
pub fn run_jobs<T, U, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>()).into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KatoLink {
    pub problem: KatoProblem,
    pub report: BlowupReport,
    /// p(p-1)/((p-1)a − q + 2).
    pub ode_exponent: f64,
    /// 2p(p-1)|1-μ|/(2 + (n+μ+1)p − (n+μ-1)p²).
    pub lifespan_exponent: f64,
    pub identity_error: f64,
}

/// Builds the comparison problem F'' ≥ (t+R)^{-q} F^p, F ≥ δ(t+R)^a with
/// δ = C ε^p and the exponents of the transformed problem, runs it, and
/// compares the implied ε-exponent with the lifespan exponent.
pub fn verify_kato_link(params: &ModelParams, envelope_constant: f64, threshold: f64, horizon: f64) -> Result<KatoLink> {
    if !(envelope_constant > 0.0) {
        return Err(domain!("envelope constant must be positive"));
    }
    let k = kato_parameters(params)?;
    let delta = envelope_constant * params.epsilon.powf(params.p);
    let problem = KatoProblem::on_envelope(params.p, k.a, k.q, k.m, params.radius, delta, 0.0)?;
    let report = integrate_blowup(&problem, threshold, horizon)?;
    let ode_exponent = kato_lifespan_exponent(params)?;
    let life = lifespan_exponent(params)?;
    Ok(KatoLink {
        problem,
        report,
        ode_exponent,
        lifespan_exponent: life,
        identity_error: (ode_exponent - life).abs() / life.abs().max(1.0),
    })
}
