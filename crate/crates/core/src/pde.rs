//! Crank–Nicolson integration of the fixed-domain problem
//!
//! ```text
//! w_t = A(t)w = (i/ℓ²) w_yy + (ℓ'/ℓ) y w_y,   w(0,t) = w(1,t) = 0,
//! ```
//!
//! obtained from the moving-wall equation by `y = x/ℓ(t)`.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::spectral::SineSpectrum;
use crate::{C64, I};

/// Smallest admissible spatial grid.
pub const MIN_GRID: usize = 8;

/// Values of w on `y_j = j/M`, `j = 0..=M`, at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedState {
    pub t: f64,
    pub values: Vec<C64>,
}

impl FixedState {
    pub fn zero(t: f64, m: usize) -> Self {
        Self { t, values: vec![C64::new(0.0, 0.0); m + 1] }
    }

    /// Samples `f(y)` on the grid and pins the Dirichlet endpoints.
    pub fn from_fn(t: f64, m: usize, f: impl Fn(f64) -> C64) -> Self {
        let h = 1.0 / m as f64;
        let mut values: Vec<C64> = (0..=m).map(|j| f(j as f64 * h)).collect();
        values[0] = C64::new(0.0, 0.0);
        values[m] = C64::new(0.0, 0.0);
        Self { t, values }
    }

    pub fn grid(&self) -> usize {
        self.values.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.grid() as f64
    }
}

/// Boundary derivatives at one instant, in both frames:
/// `w_y(0,t) = ℓ u_x(0,t)` and `w_y(1,t) = ℓ u_x(ℓ(t),t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub fixed_left: C64,
    pub fixed_right: C64,
    pub moving_left: C64,
    pub moving_right: C64,
}

impl TracePoint {
    pub fn from_fixed(t: f64, length: f64, left: C64, right: C64) -> Self {
        Self {
            t,
            fixed_left: left,
            fixed_right: right,
            moving_left: left / length,
            moving_right: right / length,
        }
    }
}

/// A time series of fixed-domain states with their boundary traces.
///
/// Trajectories sampled from the exact series also carry exact spatial
/// gradients; solver output leaves `gradients` empty and differences instead.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<FixedState>,
    pub gradients: Option<Vec<Vec<C64>>>,
    pub traces: Vec<TracePoint>,
    pub curve: BoundaryCurve,
}

impl Trajectory {
    pub fn new(
        states: Vec<FixedState>,
        gradients: Option<Vec<Vec<C64>>>,
        traces: Vec<TracePoint>,
        curve: BoundaryCurve,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Invalid("empty trajectory".into()));
        }
        if traces.len() != states.len() {
            return Err(Error::Invalid(format!(
                "{} traces for {} states",
                traces.len(),
                states.len()
            )));
        }
        if states.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Invalid("timestamps must be strictly increasing".into()));
        }
        let m = states[0].grid();
        if states.iter().any(|s| s.grid() != m) {
            return Err(Error::Invalid("states on different grids".into()));
        }
        if let Some(g) = &gradients {
            if g.len() != states.len() || g.iter().any(|v| v.len() != m + 1) {
                return Err(Error::Invalid("gradient shape does not match states".into()));
            }
        }
        Ok(Self { states, gradients, traces, curve })
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn grid(&self) -> usize {
        self.states[0].grid()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// w_y at step `k`: exact when available, finite differences otherwise.
    pub fn gradient(&self, k: usize) -> Cow<'_, [C64]> {
        match &self.gradients {
            Some(g) => Cow::Borrowed(&g[k]),
            None => Cow::Owned(grid_gradient(&self.states[k].values)),
        }
    }
}

/// Centered differences inside, second-order one-sided stencils at both ends.
pub fn grid_gradient(values: &[C64]) -> Vec<C64> {
    let m = values.len() - 1;
    let h = 1.0 / m as f64;
    let mut out = Vec::with_capacity(m + 1);
    out.push(left_derivative(values, h));
    for j in 1..m {
        out.push((values[j + 1] - values[j - 1]) / (2.0 * h));
    }
    out.push(right_derivative(values, h));
    out
}

/// (−3w₀ + 4w₁ − w₂)/(2h)
pub fn left_derivative(values: &[C64], h: f64) -> C64 {
    (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
}

/// (3w_M − 4w_{M−1} + w_{M−2})/(2h)
pub fn right_derivative(values: &[C64], h: f64) -> C64 {
    let m = values.len() - 1;
    (3.0 * values[m] - 4.0 * values[m - 1] + values[m - 2]) / (2.0 * h)
}

/// Tridiagonal realisation of A(t). Rows 0 and M are all zero (Dirichlet).
/// The drift is in skew-symmetric form, which differs from the plain central
/// stencil by (ℓ'/ℓ)(h²/4)w_yy.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStamp {
    pub t: f64,
    pub lower: Vec<C64>,
    pub diag: Vec<C64>,
    pub upper: Vec<C64>,
}

impl OperatorStamp {
    pub fn grid(&self) -> usize {
        self.diag.len() - 1
    }

    pub fn apply(&self, w: &[C64]) -> Vec<C64> {
        let m = self.grid();
        assert_eq!(w.len(), m + 1);
        let mut out = vec![C64::new(0.0, 0.0); m + 1];
        for j in 1..m {
            out[j] = self.lower[j] * w[j - 1] + self.diag[j] * w[j] + self.upper[j] * w[j + 1];
        }
        out
    }
}

pub fn assemble_operator(curve: &BoundaryCurve, t: f64, m: usize) -> Result<OperatorStamp> {
    if m < MIN_GRID {
        return Err(Error::Invalid(format!("grid M = {m} below minimum {MIN_GRID}")));
    }
    let p = curve.eval(t)?;
    let h = 1.0 / m as f64;
    let diffusion = I / (p.length * p.length * h * h);
    let rate = p.velocity / p.length;
    let zero = C64::new(0.0, 0.0);
    let mut lower = vec![zero; m + 1];
    let mut diag = vec![zero; m + 1];
    let mut upper = vec![zero; m + 1];
    // y w_y = ½((y w)_y + y w_y) − ½w with central differences: the bracket
    // is skew, so Re⟨A w, w⟩ = −(ℓ'/2ℓ)‖w‖² holds exactly on the grid.
    for j in 1..m {
        let jf = j as f64;
        lower[j] = diffusion - rate * (2.0 * jf - 1.0) / 4.0;
        diag[j] = -2.0 * diffusion - rate / 2.0;
        upper[j] = diffusion + rate * (2.0 * jf + 1.0) / 4.0;
    }
    Ok(OperatorStamp { t, lower, diag, upper })
}

/// One Crank–Nicolson step with the operator frozen at the midpoint.
pub fn step(state: &FixedState, curve: &BoundaryCurve, dt: f64) -> Result<FixedState> {
    if !(dt > 0.0) {
        return Err(Error::domain("dt", dt, "(0, ∞)"));
    }
    let m = state.grid();
    let stamp = assemble_operator(curve, state.t + 0.5 * dt, m)?;
    let half = 0.5 * dt;
    let w = &state.values;

    // rhs = (I + dt/2 A) w on the interior
    let n = m - 1;
    let mut rhs = Vec::with_capacity(n);
    let mut sub = Vec::with_capacity(n);
    let mut dia = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    for j in 1..m {
        let aw = stamp.lower[j] * w[j - 1] + stamp.diag[j] * w[j] + stamp.upper[j] * w[j + 1];
        rhs.push(w[j] + half * aw);
        sub.push(-half * stamp.lower[j]);
        dia.push(C64::new(1.0, 0.0) - half * stamp.diag[j]);
        sup.push(-half * stamp.upper[j]);
    }
    let interior = thomas(&sub, &dia, &sup, rhs).ok_or(Error::SingularSystem {
        t: state.t,
        dt,
        m,
    })?;

    let mut values = Vec::with_capacity(m + 1);
    values.push(C64::new(0.0, 0.0));
    values.extend(interior);
    values.push(C64::new(0.0, 0.0));
    Ok(FixedState { t: state.t + dt, values })
}

/// Thomas algorithm; `None` on a vanishing or non-finite pivot.
fn thomas(sub: &[C64], diag: &[C64], sup: &[C64], mut rhs: Vec<C64>) -> Option<Vec<C64>> {
    let n = diag.len();
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut pivot = diag[0];
    if !(pivot.norm() > 1e-300) {
        return None;
    }
    c[0] = sup[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if !(pivot.norm() > 1e-300 && pivot.re.is_finite() && pivot.im.is_finite()) {
            return None;
        }
        c[i] = sup[i] / pivot;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i] * rhs[i + 1];
    }
    Some(rhs)
}

fn trace_of(state: &FixedState, curve: &BoundaryCurve) -> Result<TracePoint> {
    let h = state.spacing();
    let length = curve.length(state.t)?;
    Ok(TracePoint::from_fixed(
        state.t,
        length,
        left_derivative(&state.values, h),
        right_derivative(&state.values, h),
    ))
}

/// Integrates from `initial` over `steps` equal steps up to `tau`.
pub fn solve_from(
    initial: FixedState,
    curve: &BoundaryCurve,
    tau: f64,
    steps: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::Invalid("steps must be ≥ 1".into()));
    }
    if initial.grid() < MIN_GRID {
        return Err(Error::Invalid(format!(
            "grid M = {} below minimum {MIN_GRID}",
            initial.grid()
        )));
    }
    let t0 = initial.t;
    let dt = (tau - t0) / steps as f64;
    let mut states = Vec::with_capacity(steps + 1);
    let mut traces = Vec::with_capacity(steps + 1);
    traces.push(trace_of(&initial, curve)?);
    states.push(initial);
    for k in 0..steps {
        let mut next = step(&states[k], curve, dt)?;
        // land exactly on the grid of times
        next.t = if k + 1 == steps { tau } else { t0 + (k + 1) as f64 * dt };
        traces.push(trace_of(&next, curve)?);
        states.push(next);
    }
    log::debug!("solved {steps} steps on M = {} to t = {tau}", states[0].grid());
    Trajectory::new(states, None, traces, curve.clone())
}

/// Final state only, without storing the trajectory: for refinement studies.
pub fn solve_final(
    spectrum: &SineSpectrum,
    curve: &BoundaryCurve,
    tau: f64,
    m: usize,
    steps: usize,
) -> Result<FixedState> {
    if steps == 0 {
        return Err(Error::Invalid("steps must be ≥ 1".into()));
    }
    if m < MIN_GRID {
        return Err(Error::Invalid(format!("grid M = {m} below minimum {MIN_GRID}")));
    }
    let dt = tau / steps as f64;
    let mut state = FixedState::from_fn(0.0, m, |y| spectrum.reconstruct(y));
    for k in 0..steps {
        state = step(&state, curve, dt)?;
        state.t = if k + 1 == steps { tau } else { (k + 1) as f64 * dt };
    }
    Ok(state)
}

/// Integrates the data `Σ a_n e_n` sampled on the grid (ℓ(0) = 1, so y = x at t = 0).
pub fn solve(
    spectrum: &SineSpectrum,
    curve: &BoundaryCurve,
    tau: f64,
    m: usize,
    steps: usize,
) -> Result<Trajectory> {
    if m < MIN_GRID {
        return Err(Error::Invalid(format!("grid M = {m} below minimum {MIN_GRID}")));
    }
    let initial = FixedState::from_fn(0.0, m, |y| spectrum.reconstruct(y));
    solve_from(initial, curve, tau, steps)
}

/// sup over [0, τ] of |ℓ'/(2ℓ)| plus a 1e−9 margin: any larger shift makes
/// A(t) + ω quasi-dissipative.
pub fn coercivity_shift(curve: &BoundaryCurve, tau: f64) -> Result<f64> {
    Ok(0.5 * curve.sup_log_derivative(tau)? + 1e-9)
}

/// Discrete L₂(0,1) inner product h Σ f_j conj(g_j).
pub fn inner(f: &[C64], g: &[C64]) -> C64 {
    let h = 1.0 / (f.len() - 1) as f64;
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>() * h
}

/// Simpson L₂(0,1) norm of grid values.
pub fn l2_norm(values: &[C64]) -> f64 {
    let h = 1.0 / (values.len() - 1) as f64;
    let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    crate::quadrature::simpson(&sq, h).max(0.0).sqrt()
}
