use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::oscillatory_intervals;
use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::pde::Trajectory;
use crate::quadrature::{simpson, simpson_fn, trapezoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierPreset {
    /// q = 1 − y
    LeftWeight,
    /// q = y
    RightWeight,
    /// q ≡ 1
    Constant,
}

/// Real multiplier `q(y) = scale · preset(y)` on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierFunction {
    pub preset: MultiplierPreset,
    pub scale: f64,
}

impl MultiplierFunction {
    pub fn left() -> Self {
        Self { preset: MultiplierPreset::LeftWeight, scale: 1.0 }
    }

    pub fn right() -> Self {
        Self { preset: MultiplierPreset::RightWeight, scale: 1.0 }
    }

    pub fn constant(value: f64) -> Self {
        Self { preset: MultiplierPreset::Constant, scale: value }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { scale: self.scale * factor, ..self }
    }

    pub fn q(&self, y: f64) -> f64 {
        self.scale
            * match self.preset {
                MultiplierPreset::LeftWeight => 1.0 - y,
                MultiplierPreset::RightWeight => y,
                MultiplierPreset::Constant => 1.0,
            }
    }

    pub fn q_y(&self, _y: f64) -> f64 {
        self.scale
            * match self.preset {
                MultiplierPreset::LeftWeight => -1.0,
                MultiplierPreset::RightWeight => 1.0,
                MultiplierPreset::Constant => 0.0,
            }
    }

    pub fn q_yy(&self, _y: f64) -> f64 {
        0.0
    }

    /// (‖q‖∞, ‖q_y‖∞, ‖q_yy‖∞) on [0, 1].
    pub fn sup_norms(&self) -> (f64, f64, f64) {
        let s = self.scale.abs();
        match self.preset {
            MultiplierPreset::LeftWeight | MultiplierPreset::RightWeight => (s, s, 0.0),
            MultiplierPreset::Constant => (s, 0.0, 0.0),
        }
    }
}

/// C₁(τ) = [(5ℓ(τ)² + (π²−3)ℓ(τ) + π²)/(4ℓ(τ))]‖q‖∞
///       + [π(ℓ(τ)−1)/2 + ∫₀^τ dt/ℓ]‖q_y‖∞
///       + [∫₀^τ π/(2ℓ) dt]‖q_yy‖∞
pub fn admissibility_constant(
    curve: &BoundaryCurve,
    tau: f64,
    q: &MultiplierFunction,
) -> Result<f64> {
    curve.sup_log_derivative(tau)?;
    let l = curve.length(tau)?;
    let inv_l = simpson_fn(|t| 1.0 / curve.length(t).unwrap_or(f64::NAN), 0.0, tau, 4096);
    if !inv_l.is_finite() {
        return Err(Error::Invalid("non-finite ∫dt/ℓ".into()));
    }
    let (q0, q1, q2) = q.sup_norms();
    let first = (5.0 * l * l + (PI * PI - 3.0) * l + PI * PI) / (4.0 * l);
    let second = PI * (l - 1.0) / 2.0 + inv_l;
    let third = PI / 2.0 * inv_l;
    Ok(first * q0 + second * q1 + third * q2)
}

/// [∫₀^τ |u_x(0,t)|² + |u_x(ℓ(t),t)|² dt] / ‖u₀‖²_{H¹₀} for the exact series,
/// Simpson in time with `intervals` panels (auto when `None`).
pub fn admissibility_ratio_exact(
    sol: &ExactSolution,
    tau: f64,
    intervals: Option<usize>,
) -> Result<f64> {
    let denom = sol.spectrum().h1_seminorms().exact.powi(2);
    if denom == 0.0 {
        return Err(Error::UndefinedRatio("initial data has zero H¹₀ norm"));
    }
    let n = intervals.unwrap_or_else(|| oscillatory_intervals(sol.spectrum().len(), tau));
    let h = tau / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = j as f64 * h;
        values.push(
            sol.neumann_trace_left(t)?.norm_sqr() + sol.neumann_trace_right(t)?.norm_sqr(),
        );
    }
    Ok(simpson(&values, h) / denom)
}

/// Same ratio from a solver trajectory: trapezoid in time on the recorded
/// moving-frame traces, Simpson for the initial gradient.
pub fn admissibility_ratio_trajectory(traj: &Trajectory) -> Result<f64> {
    let g0: Vec<f64> = traj.gradient(0).iter().map(|v| v.norm_sqr()).collect();
    let denom = simpson(&g0, 1.0 / traj.grid() as f64);
    if denom == 0.0 {
        return Err(Error::UndefinedRatio("initial data has zero H¹₀ norm"));
    }
    let times = traj.times();
    let values: Vec<f64> = traj
        .traces
        .iter()
        .map(|p| p.moving_left.norm_sqr() + p.moving_right.norm_sqr())
        .collect();
    let mut num = 0.0;
    for k in 1..times.len() {
        num += trapezoid(&values[k - 1..=k], times[k] - times[k - 1]);
    }
    Ok(num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SineSpectrum;

    #[test]
    fn autonomous_constant() {
        let c = BoundaryCurve::linear(0.0, 1.0).unwrap();
        let c1 = admissibility_constant(&c, 1.0, &MultiplierFunction::left()).unwrap();
        assert!((c1 - ((1.0 + PI * PI) / 2.0 + 1.0)).abs() < 1e-12);
        assert!((c1 - 6.435).abs() < 1e-3);
    }

    #[test]
    fn linear_constant_closed_form() {
        let c = BoundaryCurve::linear(0.5, 1.0).unwrap();
        let l: f64 = 1.5;
        let ln = 2.0 * l.ln();
        let want = (5.0 * l * l + (PI * PI - 3.0) * l + PI * PI) / (4.0 * l) + PI * 0.5 / 2.0 + ln;
        let got = admissibility_constant(&c, 1.0, &MultiplierFunction::left()).unwrap();
        assert!((got - want).abs() < 1e-12);
        let doubled =
            admissibility_constant(&c, 1.0, &MultiplierFunction::left().scaled(2.0)).unwrap();
        assert!((doubled - 2.0 * got).abs() < 1e-12);
    }

    #[test]
    fn autonomous_ratio_is_four_tau() {
        let s = ExactSolution::new(SineSpectrum::mode(1, 1, 0.0).unwrap()).unwrap();
        let r = admissibility_ratio_exact(&s, 1.0, None).unwrap();
        assert!((r - 4.0).abs() < 1e-6);
        let padded = ExactSolution::new(SineSpectrum::mode(1, 1, 0.0).unwrap().padded(5)).unwrap();
        assert!((admissibility_ratio_exact(&padded, 1.0, None).unwrap() - r).abs() < 1e-9);
    }

    #[test]
    fn zero_data_ratio_is_undefined() {
        let s = ExactSolution::new(SineSpectrum::zero(2, 0.5).unwrap()).unwrap();
        assert!(matches!(
            admissibility_ratio_exact(&s, 1.0, None),
            Err(Error::UndefinedRatio(_))
        ));
    }
}
