//! First and second energies of a fixed-domain trajectory,
//! `E = ½∫|w|²` and `F = ½∫|w_y|²`, and the relations they obey:
//!
//! * `ℓ(t)E(t) = E(0)`;
//! * `π²E(0)/ℓ(t) ≤ F(t) ≤ ℓ(t)F(0)` for non-shrinking walls;
//! * `F(t) = ℓ(t)F(0) − ℓ(t)∫₀ᵗ ℓ'/(2ℓ²)|w_y(1,s)|² ds`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::pde::Trajectory;
use crate::quadrature::{cumulative_cubic, cumulative_trapezoid, simpson};

/// Relative tolerance on the second-energy bounds.
pub const BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    /// ∫₀ᵗ ℓ'/(2ℓ²)|w_y(1,s)|² ds
    pub right_trace_accum: Vec<f64>,
    /// |w_y(1,t)|² at each sample.
    pub right_trace_sq: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondBounds {
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// min over samples of (F − π²E(0)/ℓ) / (π²E(0)/ℓ)
    pub lower_margin: f64,
    /// min over samples of (ℓF(0) − F) / (ℓF(0))
    pub upper_margin: f64,
    /// False when the wall shrinks somewhere on the horizon: the bounds are
    /// still evaluated but no longer guaranteed.
    pub theory_applies: bool,
}

/// One row of the energy report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    pub e: f64,
    pub f: f64,
    pub le_residual: f64,
    pub f_var_residual: f64,
    pub poincare_margin: f64,
}

/// With exact gradients: Simpson in space. For solver trajectories: the
/// discrete energies the scheme conserves, h Σ|w_j|² and h Σ|(w_{j+1} − w_j)/h|².
/// In time: fourth-order cumulative rule on uniform steps, trapezoid otherwise.
pub fn energies(traj: &Trajectory) -> Result<EnergyTrace> {
    if traj.is_empty() {
        return Err(Error::Invalid("empty trajectory".into()));
    }
    let h = 1.0 / traj.grid() as f64;
    let times = traj.times();
    let mut e = Vec::with_capacity(traj.len());
    let mut f = Vec::with_capacity(traj.len());
    let mut weighted = Vec::with_capacity(traj.len());
    let mut right_sq = Vec::with_capacity(traj.len());
    for (k, state) in traj.states.iter().enumerate() {
        let w2: Vec<f64> = state.values.iter().map(|v| v.norm_sqr()).collect();
        match &traj.gradients {
            Some(grads) => {
                let g2: Vec<f64> = grads[k].iter().map(|v| v.norm_sqr()).collect();
                e.push(0.5 * simpson(&w2, h));
                f.push(0.5 * simpson(&g2, h));
            }
            None => {
                e.push(0.5 * h * w2.iter().sum::<f64>());
                let d2: f64 = state.values.windows(2).map(|p| (p[1] - p[0]).norm_sqr()).sum();
                f.push(0.5 * d2 / h);
            }
        }
        let p = traj.curve.eval(state.t)?;
        let r2 = traj.traces[k].fixed_right.norm_sqr();
        right_sq.push(r2);
        weighted.push(p.velocity / (2.0 * p.length * p.length) * r2);
    }
    let right_trace_accum = if is_uniform(&times) && times.len() >= 4 {
        cumulative_cubic(&weighted, times[1] - times[0])
    } else {
        cumulative_trapezoid(&times, &weighted)
    };
    Ok(EnergyTrace { times, e, f, right_trace_accum, right_trace_sq: right_sq })
}

fn is_uniform(times: &[f64]) -> bool {
    if times.len() < 3 {
        return true;
    }
    let dt = times[1] - times[0];
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs())
}

fn lengths(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<Vec<f64>> {
    trace.times.iter().map(|&t| curve.length(t)).collect()
}

/// max_k |ℓ(t_k)E(t_k) − E(0)| / E(0); zero for vanishing data.
pub fn check_first_identity(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<f64> {
    let e0 = trace.e[0];
    if e0 == 0.0 {
        return Ok(0.0);
    }
    let ls = lengths(trace, curve)?;
    Ok(trace
        .e
        .iter()
        .zip(&ls)
        .map(|(e, l)| (l * e - e0).abs() / e0)
        .fold(0.0, f64::max))
}

pub fn check_second_bounds(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<SecondBounds> {
    let ls = lengths(trace, curve)?;
    let (e0, f0) = (trace.e[0], trace.f[0]);
    let mut theory_applies = true;
    let (mut lower_ok, mut upper_ok) = (true, true);
    let (mut lower_margin, mut upper_margin) = (f64::INFINITY, f64::INFINITY);
    for (k, &t) in trace.times.iter().enumerate() {
        theory_applies &= curve.eval(t)?.velocity >= 0.0;
        let f = trace.f[k];
        let lower = PI * PI * e0 / ls[k];
        let upper = ls[k] * f0;
        lower_ok &= f >= lower * (1.0 - BOUND_TOL);
        upper_ok &= f <= upper * (1.0 + BOUND_TOL);
        if lower > 0.0 {
            lower_margin = lower_margin.min((f - lower) / lower);
        }
        if upper > 0.0 {
            upper_margin = upper_margin.min((upper - f) / upper);
        }
    }
    if !lower_margin.is_finite() {
        lower_margin = 0.0;
    }
    if !upper_margin.is_finite() {
        upper_margin = 0.0;
    }
    if !theory_applies {
        log::warn!("wall shrinks on the horizon; second-energy bounds are not guaranteed");
    }
    Ok(SecondBounds { lower_ok, upper_ok, lower_margin, upper_margin, theory_applies })
}

fn f_variation_terms(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<Vec<f64>> {
    let ls = lengths(trace, curve)?;
    let f0 = trace.f[0];
    Ok((0..trace.times.len())
        .map(|k| {
            let l = ls[k];
            let r = trace.f[k] - l * f0 + l * trace.right_trace_accum[k];
            if f0 == 0.0 { r.abs() } else { r.abs() / f0 }
        })
        .collect())
}

/// max_k |F(t_k) − ℓF(0) + ℓ·accum(t_k)| / F(0).
pub fn f_variation_residual(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<f64> {
    Ok(f_variation_terms(trace, curve)?.into_iter().fold(0.0, f64::max))
}

/// Per-step defect of dE/dt + (ℓ'/ℓ)E = 0 with midpoint coefficients;
/// O(Δt³) for smooth trajectories.
pub fn first_rate_defects(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(trace.times.len().saturating_sub(1));
    for k in 0..trace.times.len().saturating_sub(1) {
        let (t0, t1) = (trace.times[k], trace.times[k + 1]);
        let p = curve.eval(0.5 * (t0 + t1))?;
        let mid = 0.5 * (trace.e[k] + trace.e[k + 1]);
        out.push((trace.e[k + 1] - trace.e[k] + (t1 - t0) * p.velocity / p.length * mid).abs());
    }
    Ok(out)
}

/// Per-step defect of dF/dt = (ℓ'/ℓ)(F − ½|w_y(1,t)|²).
pub fn second_rate_defects(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(trace.times.len().saturating_sub(1));
    for k in 0..trace.times.len().saturating_sub(1) {
        let (t0, t1) = (trace.times[k], trace.times[k + 1]);
        let p = curve.eval(0.5 * (t0 + t1))?;
        let f_mid = 0.5 * (trace.f[k] + trace.f[k + 1]);
        let r_mid = 0.5 * (trace.right_trace_sq[k] + trace.right_trace_sq[k + 1]);
        let rhs = p.velocity / p.length * (f_mid - 0.5 * r_mid);
        out.push((trace.f[k + 1] - trace.f[k] - (t1 - t0) * rhs).abs());
    }
    Ok(out)
}

/// min_k (F − π²E)/F, the discrete Poincaré margin (≥ 0 in the continuum).
pub fn poincare_margin(trace: &EnergyTrace) -> f64 {
    trace
        .e
        .iter()
        .zip(&trace.f)
        .filter(|(_, f)| **f > 0.0)
        .map(|(e, f)| (f - PI * PI * e) / f)
        .fold(f64::INFINITY, f64::min)
}

pub fn report_rows(trace: &EnergyTrace, curve: &BoundaryCurve) -> Result<Vec<EnergyRow>> {
    let ls = lengths(trace, curve)?;
    let fv = f_variation_terms(trace, curve)?;
    let e0 = trace.e[0];
    Ok((0..trace.times.len())
        .map(|k| EnergyRow {
            t: trace.times[k],
            e: trace.e[k],
            f: trace.f[k],
            le_residual: if e0 == 0.0 { 0.0 } else { (ls[k] * trace.e[k] - e0).abs() / e0 },
            f_var_residual: fv[k],
            poincare_margin: if trace.f[k] > 0.0 {
                (trace.f[k] - PI * PI * trace.e[k]) / trace.f[k]
            } else {
                0.0
            },
        })
        .collect())
}
