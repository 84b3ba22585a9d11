//! Space integrals of transformed solutions and the inequalities between them.
//!
//! With ψ(t, x) = λ(t)φ(x):
//!
//! - F(t) = ∫ w dx and F₁(t) = ∫ w ψ dx;
//! - F''(t) = ⟨t⟩^σ ∫|w|^p dx, read off the equation rather than by
//!   differencing F;
//! - Hölder on the light cone B(0, R + Λ(t)) bounds |F|^p and |F₁|^p by
//!   ∫|w|^p times powers of the ball volume and of ∫ψ^{p/(p-1)}.
//!
//! Every weighted sum is formed in log space with a max shift because
//! φ(r) ~ e^r and λ(t) ~ e^{-Λ(t)} leave floating-point range separately.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::ModelParams;
use crate::quadrature::{integrate_log, AdaptiveOptions, NeumaierSum};
use crate::radial::{RadialField, RadialGrid, Trajectory};
use crate::specfun::{LambdaWeight, PhiFunction};
use crate::transform::{time_forward, TransformedProblem};

/// ∫_{R^n} w dx by the trapezoid rule.
pub fn functional_f(field: &RadialField, n: u32) -> f64 {
    field.grid.integrate(n, &field.values)
}

/// Σ_i c_i e^{g_i} with the largest g_i factored out; returns (sum, shift).
fn shifted_sum(terms: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let shift = terms.clone().filter(|t| t.0 != 0.0).map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    let mut s = NeumaierSum::default();
    for (c, g) in terms {
        if c != 0.0 {
            s.add(c * (g - shift).exp());
        }
    }
    (s.value(), shift)
}

fn reassemble(sum: f64, shift: f64, what: &str) -> Result<f64> {
    let v = sum * shift.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what} leaves floating-point range (log scale {shift})")))
    }
}

/// ln φ at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    pub grid: RadialGrid,
    pub ln_phi: Vec<f64>,
}

impl PhiTable {
    pub fn new(phi: &PhiFunction, grid: RadialGrid) -> Result<Self> {
        let ln_phi = grid.nodes().into_iter().map(|r| phi.ln_eval(r)).collect::<Result<_>>()?;
        Ok(Self { grid, ln_phi })
    }
}

/// ∫ w λ(t) φ dx on the grid.
pub fn functional_f1(field: &RadialField, t: f64, weight: &LambdaWeight, table: &PhiTable, n: u32) -> Result<f64> {
    if field.grid != table.grid {
        return Err(domain!("field and phi table live on different grids"));
    }
    let ln_l = weight.ln_value(t)?;
    let vw = field.grid.volume_weights(n);
    let terms = vw.iter().zip(&field.values).zip(&table.ln_phi).map(|((w, x), lp)| (w * x, ln_l + lp));
    let (s, shift) = shifted_sum(terms);
    reassemble(s, shift, "F1")
}

/// Per-frame functionals of a transformed trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTrace {
    pub n: u32,
    pub p: f64,
    pub epsilon: f64,
    pub ell: f64,
    pub t0: f64,
    /// Exponent σ of the source factor ⟨t⟩^σ.
    pub sigma: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub times: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "F1")]
    pub f1: Vec<f64>,
    /// ∫|w|^p dx.
    pub power_integral: Vec<f64>,
    /// Σ over nodes in B(0, R + Λ(t)) of ψ^{p/(p-1)} times volume weights.
    pub psi_dual_integral: Vec<f64>,
    /// Discrete volume of B(0, R + Λ(t)).
    pub ball_volume: Vec<f64>,
    /// sup of ψ(t, ·) over B(0, R + Λ(t)).
    pub psi_sup: Vec<f64>,
}

impl FunctionalTrace {
    pub fn from_trajectory(
        traj: &Trajectory,
        tp: &TransformedProblem,
        weight: &LambdaWeight,
        phi: &PhiFunction,
    ) -> Result<Self> {
        if phi.dimension() != traj.n {
            return Err(domain!("phi dimension {} differs from trajectory dimension {}", phi.dimension(), traj.n));
        }
        let n = traj.n;
        let p = traj.p;
        let dual = p / (p - 1.0);
        let table = PhiTable::new(phi, traj.grid)?;
        let vw = traj.grid.volume_weights(n);
        let nodes = traj.grid.nodes();
        let mut out = Self {
            n,
            p,
            epsilon: traj.epsilon,
            ell: tp.ell,
            t0: tp.t0,
            sigma: tp.source_exponent,
            radius: tp.radius,
            times: Vec::new(),
            f: Vec::new(),
            f1: Vec::new(),
            power_integral: Vec::new(),
            psi_dual_integral: Vec::new(),
            ball_volume: Vec::new(),
            psi_sup: Vec::new(),
        };
        for s in &traj.snapshots {
            let field = RadialField { grid: traj.grid, values: s.u.clone() };
            let ball = tp.radius + time_forward(s.t, tp.ell);
            let ln_l = weight.ln_value(s.t)?;
            let inside = nodes.iter().take_while(|&&r| r <= ball).count();
            let (ds, dshift) = shifted_sum((0..inside).map(|i| (vw[i], dual * (ln_l + table.ln_phi[i]))));
            let sup_ln = (0..inside).map(|i| ln_l + table.ln_phi[i]).fold(f64::NEG_INFINITY, f64::max);
            out.times.push(s.t);
            out.f.push(functional_f(&field, n));
            out.f1.push(functional_f1(&field, s.t, weight, &table, n)?);
            out.power_integral.push(s.power_integral);
            out.psi_dual_integral.push(reassemble(ds, dshift, "psi dual integral")?);
            out.ball_volume.push(vw[..inside].iter().sum());
            out.psi_sup.push(sup_ln.exp());
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// F''(t) = ⟨t⟩^σ ∫|w|^p dx.
    pub fn second_derivative(&self, k: usize) -> f64 {
        (1.0 + self.times[k]).powf(self.sigma) * self.power_integral[k]
    }

    /// Stand-in for the first threshold of the weighted estimate: t₀ + 1.
    pub fn t1(&self) -> f64 {
        self.t0 + 1.0
    }

    /// Stand-in for the threshold of the F₁ lower bound: 2t₀ + 1.
    pub fn t2(&self) -> f64 {
        2.0 * self.t0 + 1.0
    }

    pub fn t3(&self) -> f64 {
        self.t1().max(self.t2())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Window {
    pub window_start: f64,
    pub frames: usize,
    /// min of F₁(t) t^ℓ / ε over the window.
    pub minimum: f64,
    pub argmin: f64,
}

pub fn check_f1_lower(trace: &FunctionalTrace, epsilon: f64) -> Result<F1Window> {
    if !(epsilon > 0.0) {
        return Err(domain!("epsilon must be positive"));
    }
    let start = trace.t2();
    let mut best: Option<(f64, f64)> = None;
    let mut frames = 0;
    for (k, &t) in trace.times.iter().enumerate() {
        if t < start {
            continue;
        }
        frames += 1;
        let v = trace.f1[k] * t.powf(trace.ell) / epsilon;
        if best.is_none_or(|b| v < b.0) {
            best = Some((v, t));
        }
    }
    let (minimum, argmin) =
        best.ok_or_else(|| Error::Range(format!("no frames at t >= {start} for the F1 lower bound")))?;
    Ok(F1Window { window_start: start, frames, minimum, argmin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma22Ratio {
    pub t: f64,
    /// ln ∫_{|x| ≤ R+Λ(t)} ψ^{p/(p-1)} dx.
    pub ln_lhs: f64,
    /// ln of τ^{-ℓp/(2(p-1))} (R+Λ(t))^{n-1-(n-1)p/(2(p-1))}.
    pub ln_rhs: f64,
    pub ratio: f64,
}

/// Exponent n − 1 − (n−1)p/(2(p−1)) of the light-cone radius.
pub fn lemma22_radius_exponent(n: u32, p: f64) -> f64 {
    let m = (n - 1) as f64;
    m - 0.5 * m * p / (p - 1.0)
}

/// Weighted integral of ψ^{p/(p-1)} over the light cone divided by its
/// predicted size with unit constant. τ is the clock of `weight`.
pub fn lemma22_ratio(t: f64, params: &ModelParams, weight: &LambdaWeight, phi: &PhiFunction) -> Result<Lemma22Ratio> {
    if phi.dimension() != params.n {
        return Err(domain!("phi dimension {} differs from n = {}", phi.dimension(), params.n));
    }
    let p = params.p;
    let n = params.n;
    let dual = p / (p - 1.0);
    let ell = weight.ell;
    let edge = params.radius + time_forward(t, ell);
    let ln_l = weight.ln_value(t)?;
    let ln_area = crate::specfun::sphere_area(n).ln();
    let mut breaks = vec![0.0];
    let mut b = edge;
    let mut tail = Vec::new();
    while b > 1.0 {
        tail.push(b);
        b = if b > 16.0 { b - 8.0 } else { b / 2.0 };
    }
    tail.reverse();
    breaks.extend(tail);
    if breaks.len() == 1 {
        breaks.push(edge);
    }
    let mut failure = None;
    let g = |r: f64| -> f64 {
        if r == 0.0 && n > 1 {
            return f64::NEG_INFINITY;
        }
        match phi.ln_eval(r) {
            Ok(lp) => dual * (ln_l + lp) + (n - 1) as f64 * r.ln(),
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        }
    };
    let opts = AdaptiveOptions { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000 };
    let ln_int = integrate_log(g, &breaks, opts)
        .map_err(|e| Error::Numerical(format!("weighted integral at t = {t} (edge {edge}): {e}")))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let ln_lhs = ln_area + ln_int;
    let tau = weight.tau(t);
    let ln_rhs = -ell * p / (2.0 * (p - 1.0)) * tau.ln() + lemma22_radius_exponent(n, p) * edge.ln();
    Ok(Lemma22Ratio { t, ln_lhs, ln_rhs, ratio: (ln_lhs - ln_rhs).exp() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub window_start: f64,
    pub frames_used: usize,
    /// Frames with F ≤ 0 or F₁ ≤ 0.
    pub frames_skipped: usize,
    /// min of F''·⟨t⟩^{n(ℓ+1)(p-1)-σ}/|F|^p.
    pub c1_min: f64,
    /// min of F''·(∫ψ^{p/(p-1)})^{p-1}/(ε^p ⟨t⟩^{σ} t^{-pℓ}).
    pub c2_min: f64,
    /// max of |F|^p / (∫|w|^p · vol^{p-1}).
    pub holder_f_max: f64,
    /// max of |F₁|^p / (∫|w|^p · (∫ψ^{p/(p-1)})^{p-1}).
    pub holder_f1_max: f64,
    /// max of F₁ / (F · sup ψ) over frames with w ≥ 0.
    pub f1_sup_max: f64,
    pub tolerance: f64,
    pub holder_ok: bool,
}

pub const HOLDER_TOLERANCE: f64 = 1e-8;

/// Implied constants of the differential inequalities and the Hölder
/// steps between them, per frame at t ≥ max(t₀+1, 2t₀+1).
pub fn check_chain(trace: &FunctionalTrace, traj: &Trajectory) -> Result<ChainReport> {
    if trace.len() != traj.snapshots.len() {
        return Err(domain!("trace and trajectory have different frame counts"));
    }
    if trace.power_integral.iter().all(|&x| x == 0.0) {
        return Err(domain!("source-free trace: the chain is vacuous"));
    }
    let p = trace.p;
    let n = trace.n as f64;
    let start = trace.t3();
    let mut rep = ChainReport {
        window_start: start,
        frames_used: 0,
        frames_skipped: 0,
        c1_min: f64::INFINITY,
        c2_min: f64::INFINITY,
        holder_f_max: 0.0,
        holder_f1_max: 0.0,
        f1_sup_max: 0.0,
        tolerance: HOLDER_TOLERANCE,
        holder_ok: true,
    };
    for k in 0..trace.len() {
        let t = trace.times[k];
        if t < start {
            continue;
        }
        let f = trace.f[k];
        let f1 = trace.f1[k];
        if !(f > 0.0) || !(f1 > 0.0) {
            rep.frames_skipped += 1;
            continue;
        }
        rep.frames_used += 1;
        let bracket = 1.0 + t;
        let lp = trace.power_integral[k];
        let fpp = trace.second_derivative(k);
        let dual = trace.psi_dual_integral[k];
        let c1 = fpp * bracket.powf(n * (trace.ell + 1.0) * (p - 1.0) - trace.sigma) / f.powf(p);
        let c2 = fpp * dual.powf(p - 1.0)
            / (trace.epsilon.powf(p) * bracket.powf(trace.sigma) * t.powf(-p * trace.ell));
        rep.c1_min = rep.c1_min.min(c1);
        rep.c2_min = rep.c2_min.min(c2);
        rep.holder_f_max = rep.holder_f_max.max(f.powf(p) / (lp * trace.ball_volume[k].powf(p - 1.0)));
        rep.holder_f1_max = rep.holder_f1_max.max(f1.powf(p) / (lp * dual.powf(p - 1.0)));
        if traj.snapshots[k].u.iter().all(|&x| x >= 0.0) {
            rep.f1_sup_max = rep.f1_sup_max.max(f1 / (f * trace.psi_sup[k]));
        }
    }
    if rep.frames_used == 0 {
        return Err(Error::Range(format!("no usable frames at t >= {start}")));
    }
    let limit = 1.0 + HOLDER_TOLERANCE;
    rep.holder_ok = rep.holder_f_max <= limit && rep.holder_f1_max <= limit && rep.f1_sup_max <= limit;
    Ok(rep)
}
