//! Wall trajectories ℓ(t) with ℓ(0) = 1, and the growth window on which the
//! observability estimate for general curves applies.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when a time lands a rounding error past the horizon.
const HORIZON_SLACK: f64 = 1e-12;

/// Strict-inequality tolerance for sampled window checks.
const WINDOW_TOL: f64 = 1e-12;

/// Tolerance on the normalisation ℓ(0) = 1 for tabulated input.
const NORMALISATION_TOL: f64 = 1e-9;

/// ℓ and its first two derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub length: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

/// One row of a tabulated curve: `t, l, lp, lpp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub l: f64,
    pub lp: f64,
    pub lpp: f64,
}

/// Piecewise quintic Hermite interpolant through `(ℓ, ℓ', ℓ'')` samples.
/// The interpolant is C² and reproduces all three tabulated columns at the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    samples: Vec<CurveSample>,
}

impl TabulatedCurve {
    pub fn new(samples: Vec<CurveSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Interpolation(format!(
                "need at least two samples, got {}",
                samples.len()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.l.is_finite() && s.lp.is_finite() && s.lpp.is_finite()) {
                return Err(Error::Interpolation(format!("non-finite value in row {i}")));
            }
            if s.l <= 0.0 {
                return Err(Error::domain("tabulated l", s.l, "(0, ∞)"));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::Interpolation(format!(
                    "times must be strictly increasing (row {i}: {} after {})",
                    s.t,
                    samples[i - 1].t
                )));
            }
        }
        if samples[0].t.abs() > HORIZON_SLACK {
            return Err(Error::Interpolation(format!(
                "first sample must be at t = 0, got {}",
                samples[0].t
            )));
        }
        if (samples[0].l - 1.0).abs() > NORMALISATION_TOL {
            return Err(Error::domain("l(0)", samples[0].l, "{1} (normalisation)"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Reads the `t,l,lp,lpp` CSV layout.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut samples = Vec::new();
        for row in reader.deserialize() {
            samples.push(row?);
        }
        Self::new(samples)
    }

    fn eval(&self, t: f64) -> Result<CurvePoint> {
        let first = self.samples[0].t;
        let last = self.end();
        if !(t >= first - HORIZON_SLACK && t <= last * (1.0 + HORIZON_SLACK) + HORIZON_SLACK) {
            return Err(Error::Interpolation(format!(
                "t = {t} outside tabulated range [{first}, {last}]"
            )));
        }
        let t = t.clamp(first, last);
        // index of the panel [k, k+1] containing t
        let k = match self
            .samples
            .binary_search_by(|s| s.t.partial_cmp(&t).expect("finite"))
        {
            Ok(i) => i.min(self.samples.len() - 2),
            Err(i) => i - 1,
        };
        let (a, b) = (&self.samples[k], &self.samples[k + 1]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;

        let c0 = a.l;
        let c1 = h * a.lp;
        let c2 = 0.5 * h * h * a.lpp;
        let ca = b.l - c0 - c1 - c2;
        let cb = h * b.lp - c1 - 2.0 * c2;
        let cc = h * h * b.lpp - 2.0 * c2;
        let c3 = 10.0 * ca - 4.0 * cb + 0.5 * cc;
        let c4 = -15.0 * ca + 7.0 * cb - cc;
        let c5 = 6.0 * ca - 3.0 * cb + 0.5 * cc;

        let p = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
        let dp = c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)));
        let ddp = 2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5));
        Ok(CurvePoint {
            length: p,
            velocity: dp / h,
            acceleration: ddp / (h * h),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// ℓ(t) = 1 + εt.
    Linear { epsilon: f64 },
    /// ℓ(t) = 1 + ε sin(ωt).
    Periodic { epsilon: f64, omega: f64 },
    Tabulated(TabulatedCurve),
}

/// A wall trajectory on the horizon `[0, τ]`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    kind: CurveKind,
    horizon: f64,
}

impl BoundaryCurve {
    pub fn linear(epsilon: f64, horizon: f64) -> Result<Self> {
        Self::new(CurveKind::Linear { epsilon }, horizon)
    }

    pub fn periodic(epsilon: f64, omega: f64, horizon: f64) -> Result<Self> {
        Self::new(CurveKind::Periodic { epsilon, omega }, horizon)
    }

    /// Tabulated curve whose horizon is the last sample time.
    pub fn tabulated(table: TabulatedCurve) -> Result<Self> {
        let horizon = table.end();
        Self::new(CurveKind::Tabulated(table), horizon)
    }

    pub fn new(kind: CurveKind, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::domain("horizon", horizon, "[0, ∞)"));
        }
        match &kind {
            CurveKind::Linear { epsilon } => {
                if !epsilon.is_finite() {
                    return Err(Error::domain("epsilon", *epsilon, "finite reals"));
                }
                if 1.0 + epsilon * horizon <= 0.0 {
                    return Err(Error::domain(
                        "l(horizon)",
                        1.0 + epsilon * horizon,
                        "(0, ∞)",
                    ));
                }
            }
            CurveKind::Periodic { epsilon, omega } => {
                if !(epsilon.is_finite() && omega.is_finite()) {
                    return Err(Error::Invalid("periodic curve parameters must be finite".into()));
                }
            }
            CurveKind::Tabulated(table) => {
                if horizon > table.end() * (1.0 + HORIZON_SLACK) + HORIZON_SLACK {
                    return Err(Error::Interpolation(format!(
                        "horizon {horizon} beyond last sample {}",
                        table.end()
                    )));
                }
            }
        }
        let curve = Self { kind, horizon };
        if !matches!(curve.kind, CurveKind::Linear { .. }) {
            curve.check_positive()?;
        }
        Ok(curve)
    }

    fn check_positive(&self) -> Result<()> {
        let n = 4096;
        for i in 0..=n {
            let t = self.horizon * i as f64 / n as f64;
            let p = self.eval(t)?;
            if p.length <= 0.0 {
                return Err(Error::domain("l(t)", p.length, format!("(0, ∞) at t = {t}")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Same curve restricted to (or extended to) another horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.kind.clone(), horizon)
    }

    /// ε if this is a linear wall.
    pub fn linear_rate(&self) -> Option<f64> {
        match self.kind {
            CurveKind::Linear { epsilon } => Some(epsilon),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<CurvePoint> {
        if !(t >= -HORIZON_SLACK && t <= self.horizon * (1.0 + HORIZON_SLACK) + HORIZON_SLACK) {
            return Err(Error::domain("t", t, format!("[0, {}]", self.horizon)));
        }
        Ok(match &self.kind {
            CurveKind::Linear { epsilon } => CurvePoint {
                length: 1.0 + epsilon * t,
                velocity: *epsilon,
                acceleration: 0.0,
            },
            CurveKind::Periodic { epsilon, omega } => {
                let (s, c) = (omega * t).sin_cos();
                CurvePoint {
                    length: 1.0 + epsilon * s,
                    velocity: epsilon * omega * c,
                    acceleration: -epsilon * omega * omega * s,
                }
            }
            CurveKind::Tabulated(table) => table.eval(t)?,
        })
    }

    pub fn length(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.length)
    }

    /// sup over `[0, τ]` of |ℓ'/ℓ|.
    pub fn sup_log_derivative(&self, tau: f64) -> Result<f64> {
        match self.kind {
            CurveKind::Linear { epsilon } => {
                let l_end = 1.0 + epsilon * tau;
                if l_end <= 0.0 {
                    return Err(Error::domain("l(tau)", l_end, "(0, ∞)"));
                }
                Ok(epsilon.abs() / l_end.min(1.0))
            }
            _ => {
                let n = 8192;
                let mut sup = 0.0f64;
                for i in 0..=n {
                    let p = self.eval(tau * i as f64 / n as f64)?;
                    sup = sup.max((p.velocity / p.length).abs());
                }
                Ok(sup)
            }
        }
    }
}

/// Outcome of the growth-window check on `(0, τ)`:
/// ℓ' > 0 and ℓ'ℓ < 1/π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub positive_derivative: bool,
    /// ℓ'(t)ℓ(t) < 1/π on (0, τ).
    pub product_bound_ok: bool,
    /// 2τ + π(1 − ℓ(τ)²), the integrated form of the product bound.
    pub integrated_consequence: f64,
    pub admissible: bool,
    /// The closed-form parameter window quoted for the analytic families:
    /// ε ∈ (0, 2/π), τ < [`linear_tau_max`] for linear walls and
    /// ω < 1/(πε(1+ε)), τ < π/(2ω) for periodic ones. `None` for tabulated curves.
    pub closed_form_window: Option<bool>,
    /// False when the product bound holds but its integrated consequence does not.
    pub consequence_consistent: bool,
}

/// Checks ℓ' > 0 and ℓ'ℓ < 1/π on the open interval (0, τ).
///
/// Linear and periodic walls are decided by closed-form suprema where those are
/// available; the uniform grid of `grid_points` samples is used otherwise.
pub fn check_observability_window(
    curve: &BoundaryCurve,
    tau: f64,
    grid_points: usize,
) -> Result<WindowReport> {
    if grid_points < 2 {
        return Err(Error::Invalid(format!("grid_points must be ≥ 2, got {grid_points}")));
    }
    if !(tau > 0.0) {
        return Err(Error::domain("tau", tau, "(0, ∞)"));
    }
    let end = curve.eval(tau)?;
    let integrated_consequence = 2.0 * tau + PI * (1.0 - end.length * end.length);

    let (sampled_positive, sampled_product) = sample_window(curve, tau, grid_points)?;

    let (positive_derivative, product_bound_ok, closed_form_window) = match *curve.kind() {
        CurveKind::Linear { epsilon } => {
            // ℓ'ℓ = ε(1 + εt) is monotone; its sup over (0, τ) is the value at τ.
            let positive = epsilon > 0.0;
            let product = epsilon * (1.0 + epsilon * tau) <= FRAC_1_PI;
            let window = linear_tau_max(epsilon).map(|m| tau < m).unwrap_or(false);
            (positive, positive && product, Some(window))
        }
        CurveKind::Periodic { epsilon, omega } => {
            let positive = epsilon > 0.0 && omega > 0.0 && omega * tau <= FRAC_PI_2;
            let worst_case = epsilon * omega * (1.0 + epsilon) < FRAC_1_PI;
            let window = positive && worst_case && epsilon < 1.0 && tau < PI / (2.0 * omega);
            (positive, worst_case || sampled_product, Some(window))
        }
        CurveKind::Tabulated(_) => (sampled_positive, sampled_product, None),
    };

    let admissible = positive_derivative && product_bound_ok && integrated_consequence > 0.0;
    Ok(WindowReport {
        positive_derivative,
        product_bound_ok,
        integrated_consequence,
        admissible,
        closed_form_window,
        consequence_consistent: !(product_bound_ok && integrated_consequence <= 0.0),
    })
}

/// Grid check of both conditions; interior points strict, endpoints as limits.
fn sample_window(curve: &BoundaryCurve, tau: f64, grid_points: usize) -> Result<(bool, bool)> {
    let mut positive = true;
    let mut product = true;
    let n = grid_points - 1;
    for i in 0..=n {
        let t = tau * i as f64 / n as f64;
        let p = curve.eval(t)?;
        let interior = i != 0 && i != n;
        let lp_l = p.velocity * p.length;
        if interior {
            positive &= p.velocity > WINDOW_TOL;
            product &= lp_l < FRAC_1_PI - WINDOW_TOL;
        } else {
            positive &= p.velocity >= -WINDOW_TOL;
            product &= lp_l <= FRAC_1_PI + WINDOW_TOL;
        }
    }
    Ok((positive, product))
}

/// The closed-form horizon (1/ε)(2/(επ) − 1) quoted for linear walls, ε ∈ (0, 2/π).
pub fn linear_tau_max(epsilon: f64) -> Result<f64> {
    let upper = 2.0 / PI;
    if !(epsilon > 0.0 && epsilon < upper) {
        return Err(Error::domain("epsilon", epsilon, "(0, 2/π)"));
    }
    Ok((2.0 / (epsilon * PI) - 1.0) / epsilon)
}

/// The horizon below which ℓ'ℓ < 1/π holds for a linear wall:
/// (1/ε)(1/(επ) − 1), defined for ε ∈ (0, 1/π).
pub fn linear_product_horizon(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < FRAC_1_PI) {
        return Err(Error::domain("epsilon", epsilon, "(0, 1/π)"));
    }
    Ok((1.0 / (epsilon * PI) - 1.0) / epsilon)
}
