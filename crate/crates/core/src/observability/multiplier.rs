use serde::{Deserialize, Serialize};

use super::MultiplierFunction;
use crate::error::Result;
use crate::pde::Trajectory;
use crate::quadrature::simpson;
use crate::{C64, I};

/// The seven terms of the multiplier identity and their normalised sum.
///
/// With a time-independent real q the identity reads T1 + … + T7 = 0 where
///
/// ```text
/// T1 = Re ∫ (i/2) q w̄_y w dy |_{t=0}^{t=τ}
/// T2 = −Re ∫∫ (i/2) q_t w̄_y w                       (zero here)
/// T3 = ∫ (q(1)|w_y(1,t)|² − q(0)|w_y(0,t)|²)/(2ℓ²) dt
/// T4 = −∫∫ q_y |w_y|² / ℓ²
/// T5 = −Re ∫∫ q_yy w_y w̄ / (2ℓ²)
/// T6 = −Re ∫∫ i (ℓ'/ℓ) y q |w_y|²                   (identically zero)
/// T7 = −Re ∫∫ (i/2) (ℓ'/ℓ) y q_y w_y w̄
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub terms: [f64; 7],
    /// |Σ T_i| / scale
    pub residual: f64,
    /// max(max_i |T_i|, ∫∫|w_y|²/ℓ²)
    pub scale: f64,
}

/// Evaluates the identity on a trajectory: Simpson in y, trapezoid in t.
pub fn multiplier_residual(traj: &Trajectory, q: &MultiplierFunction) -> Result<MultiplierReport> {
    let m = traj.grid();
    let h = 1.0 / m as f64;
    let ys: Vec<f64> = (0..=m).map(|j| j as f64 * h).collect();
    let qv: Vec<f64> = ys.iter().map(|&y| q.q(y)).collect();
    let qy: Vec<f64> = ys.iter().map(|&y| q.q_y(y)).collect();
    let qyy: Vec<f64> = ys.iter().map(|&y| q.q_yy(y)).collect();

    let bracket = |k: usize| -> f64 {
        let g = traj.gradient(k);
        let w = &traj.states[k].values;
        let v: Vec<C64> = (0..=m).map(|j| I * 0.5 * qv[j] * g[j].conj() * w[j]).collect();
        simpson(&v, h).re
    };
    let last = traj.len() - 1;
    let t1 = bracket(last) - bracket(0);

    // per-time integrands of T3..T7 and the normalisation
    let mut rows = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let p = traj.curve.eval(traj.states[k].t)?;
        let inv_l2 = 1.0 / (p.length * p.length);
        let rate = p.velocity / p.length;
        let g = traj.gradient(k);
        let w = &traj.states[k].values;
        let tr = &traj.traces[k];

        let t3 = 0.5 * inv_l2 * (qv[m] * tr.fixed_right.norm_sqr() - qv[0] * tr.fixed_left.norm_sqr());
        let mut i4 = Vec::with_capacity(m + 1);
        let mut i5 = Vec::with_capacity(m + 1);
        let mut i6 = Vec::with_capacity(m + 1);
        let mut i7 = Vec::with_capacity(m + 1);
        let mut norm = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let g2 = g[j].norm_sqr();
            let gw = g[j] * w[j].conj();
            i4.push(-qy[j] * g2 * inv_l2);
            i5.push(-(qyy[j] * gw).re * 0.5 * inv_l2);
            i6.push(-(I * rate * ys[j] * qv[j] * g2).re);
            i7.push(-(I * 0.5 * rate * ys[j] * qy[j] * gw).re);
            norm.push(g2 * inv_l2);
        }
        rows.push([
            t3,
            simpson(&i4, h),
            simpson(&i5, h),
            simpson(&i6, h),
            simpson(&i7, h),
            simpson(&norm, h),
        ]);
    }

    let times = traj.times();
    let mut acc = [0.0f64; 6];
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        for (i, a) in acc.iter_mut().enumerate() {
            *a += 0.5 * dt * (rows[k - 1][i] + rows[k][i]);
        }
    }
    let terms = [t1, 0.0, acc[0], acc[1], acc[2], acc[3], acc[4]];
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.abs()).fold(acc[5], f64::max);
    let residual = if scale == 0.0 { 0.0 } else { sum.abs() / scale };
    Ok(MultiplierReport { terms, residual, scale })
}
