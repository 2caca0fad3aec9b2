use serde::{Deserialize, Serialize};

use super::oscillatory_intervals;
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::quadrature::simpson;

/// Integrals behind the Lₚ estimate at one point, and the inequalities tying them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub p: f64,
    /// θ = 2/(4 − p)
    pub theta: f64,
    /// ∫|u(a,t)|² dt
    pub l2: f64,
    /// ∫|u(a,t)|^p dt
    pub lp: f64,
    /// ∫|u(a,t)|⁴ dt
    pub l4: f64,
    /// Σ|a_n|
    pub coefficient_sum: f64,
    /// ∫|u|² ≤ (∫|u|^p)^θ (∫|u|⁴)^{1−θ}
    pub chain_ok: bool,
    /// ∫|u|⁴ ≤ (Σ|a_n|)² ∫|u|²
    pub four_to_two_ok: bool,
    /// ∫|u|⁴ ≤ sup(2/ℓ)·(Σ|a_n|)² ∫|u|², which follows from |u|² ≤ (2/ℓ)(Σ|a_n|)².
    pub four_to_two_weighted_ok: bool,
}

fn samples(sol: &ExactSolution, a: f64, tau: f64, intervals: usize) -> Result<(Vec<f64>, f64)> {
    if !(tau > 0.0) {
        return Err(Error::domain("tau", tau, "(0, ∞)"));
    }
    let n = intervals + intervals % 2;
    let h = tau / n as f64;
    let v = (0..=n)
        .map(|j| sol.point_observation(a, j as f64 * h).map(|u| u.norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((v, h))
}

/// ∫₀^τ |u(a,t)|^p dt for any p > 0 (Simpson, auto resolution when `None`).
pub fn lp_integral(
    sol: &ExactSolution,
    a: f64,
    tau: f64,
    p: f64,
    intervals: Option<usize>,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::domain("p", p, "(0, ∞)"));
    }
    let n = intervals.unwrap_or_else(|| 4 * oscillatory_intervals(sol.spectrum().len(), tau));
    let (v, h) = samples(sol, a, tau, n)?;
    let vp: Vec<f64> = v.iter().map(|x| x.powf(p)).collect();
    Ok(simpson(&vp, h))
}

/// (∫₀^τ |u(a,t)|^p dt)^{1/p} for p ∈ (0, 2).
pub fn lp_observation(
    sol: &ExactSolution,
    a: f64,
    tau: f64,
    p: f64,
    intervals: Option<usize>,
) -> Result<f64> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::domain("p", p, "(0, 2)"));
    }
    Ok(lp_integral(sol, a, tau, p, intervals)?.powf(1.0 / p))
}

/// Lₚ observation divided by ‖u₀‖_{L₂}^{2/p} ‖u₀‖_{H¹₀}^{1−2/p}; the two-sided
/// estimate says this ratio stays within fixed constants [k_p, K_p].
pub fn lp_normalised_ratio(
    sol: &ExactSolution,
    a: f64,
    tau: f64,
    p: f64,
    intervals: Option<usize>,
) -> Result<f64> {
    let l2 = sol.spectrum().l2_norm();
    let h1 = sol.spectrum().h1_seminorms().exact;
    if l2 == 0.0 || h1 == 0.0 {
        return Err(Error::UndefinedRatio("zero initial data"));
    }
    let obs = lp_observation(sol, a, tau, p, intervals)?;
    Ok(obs / (l2.powf(2.0 / p) * h1.powf(1.0 - 2.0 / p)))
}

pub fn holder_chain(
    sol: &ExactSolution,
    a: f64,
    tau: f64,
    p: f64,
    intervals: Option<usize>,
) -> Result<HolderReport> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::domain("p", p, "(0, 2)"));
    }
    let n = intervals.unwrap_or_else(|| 4 * oscillatory_intervals(sol.spectrum().len(), tau));
    let (v, h) = samples(sol, a, tau, n)?;
    let integral = |q: f64| {
        let vq: Vec<f64> = v.iter().map(|x| x.powf(q)).collect();
        simpson(&vq, h)
    };
    let (l2, lp, l4) = (integral(2.0), integral(p), integral(4.0));
    let theta = 2.0 / (4.0 - p);
    let sum = sol.spectrum().l1_coefficients();
    let tol = 1e-10;
    let chain_rhs = lp.powf(theta) * l4.powf(1.0 - theta);
    // ℓ is non-decreasing from ℓ(0) = 1
    let sup_weight = 2.0;
    Ok(HolderReport {
        p,
        theta,
        l2,
        lp,
        l4,
        coefficient_sum: sum,
        chain_ok: l2 <= chain_rhs * (1.0 + tol),
        four_to_two_ok: l4 <= sum * sum * l2 * (1.0 + tol),
        four_to_two_weighted_ok: l4 <= sup_weight * sum * sum * l2 * (1.0 + tol),
    })
}
