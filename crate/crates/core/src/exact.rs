//! Closed-form solution for the linearly moving wall ℓ(t) = 1 + εt:
//!
//! ```text
//! u(x,t) = Σ a_n √(2/ℓ) sin(nπx/ℓ) exp(i(εx²/(4ℓ) − n²π²t/ℓ))
//! ```
//!
//! Every term solves `i u_t + u_xx = 0` with `u(0,t) = u(ℓ(t),t) = 0`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::pde::{FixedState, TracePoint, Trajectory};
use crate::quadrature::{even_at_least, simpson};
use crate::spectral::SineSpectrum;
use crate::{C64, I};

/// Relative slack on `x ≤ ℓ(t)`.
const EDGE_SLACK: f64 = 1e-12;

/// Observed scalar signal of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Channel {
    /// u_x(0, t)
    Left,
    /// u_x(ℓ(t), t)
    Right,
    /// u(a, t) at a fixed physical point.
    Point(f64),
}

/// Moving frame observes u_x; fixed frame observes w_y = ℓ u_x.
/// Point values are frame independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Moving,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    spectrum: SineSpectrum,
}

impl ExactSolution {
    /// ε is taken from the spectrum; it must be ≥ 0.
    pub fn new(spectrum: SineSpectrum) -> Result<Self> {
        let eps = spectrum.epsilon();
        if !(eps >= 0.0) {
            return Err(Error::domain("epsilon", eps, "[0, ∞)"));
        }
        Ok(Self { spectrum })
    }

    pub fn spectrum(&self) -> &SineSpectrum {
        &self.spectrum
    }

    pub fn epsilon(&self) -> f64 {
        self.spectrum.epsilon()
    }

    pub fn length(&self, t: f64) -> f64 {
        1.0 + self.epsilon() * t
    }

    pub fn curve(&self, horizon: f64) -> Result<BoundaryCurve> {
        BoundaryCurve::linear(self.epsilon(), horizon)
    }

    /// c_n(t) = a_n √(2/ℓ) e^{−iπ²n²t/ℓ}, ascending n.
    fn modal(&self, t: f64) -> Vec<C64> {
        let l = self.length(t);
        let amp = (2.0 / l).sqrt();
        self.spectrum
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let n = (i + 1) as f64;
                a * amp * (-I * (PI * PI * n * n * t / l)).exp()
            })
            .collect()
    }

    fn check_point(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain("t", t, "[0, ∞)"));
        }
        let l = self.length(t);
        if !(x >= -EDGE_SLACK * l && x <= l * (1.0 + EDGE_SLACK)) {
            return Err(Error::domain("x", x, format!("[0, ℓ(t)] = [0, {l}]")));
        }
        Ok(l)
    }

    pub fn eval_u(&self, x: f64, t: f64) -> Result<C64> {
        let l = self.check_point(x, t)?;
        let mut acc = C64::new(0.0, 0.0);
        for (i, c) in self.modal(t).iter().enumerate() {
            acc += c * ((i + 1) as f64 * PI * x / l).sin();
        }
        Ok(acc * (I * (self.epsilon() * x * x / (4.0 * l))).exp())
    }

    pub fn u_x(&self, x: f64, t: f64) -> Result<C64> {
        let l = self.check_point(x, t)?;
        let drift = I * (self.epsilon() * x / (2.0 * l));
        let mut acc = C64::new(0.0, 0.0);
        for (i, c) in self.modal(t).iter().enumerate() {
            let k = (i + 1) as f64 * PI / l;
            let (s, co) = (k * x).sin_cos();
            acc += c * (k * co + drift * s);
        }
        Ok(acc * (I * (self.epsilon() * x * x / (4.0 * l))).exp())
    }

    /// u_x(0, t) = Σ a_n √(2/ℓ) e^{−iπ²n²t/ℓ} nπ/ℓ
    pub fn neumann_trace_left(&self, t: f64) -> Result<C64> {
        if !(t >= 0.0) {
            return Err(Error::domain("t", t, "[0, ∞)"));
        }
        let l = self.length(t);
        Ok(self
            .modal(t)
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * PI / l))
            .sum())
    }

    /// u_x(ℓ(t), t) = e^{iεℓ/4} Σ (−1)ⁿ a_n √(2/ℓ) e^{−iπ²n²t/ℓ} nπ/ℓ
    pub fn neumann_trace_right(&self, t: f64) -> Result<C64> {
        if !(t >= 0.0) {
            return Err(Error::domain("t", t, "[0, ∞)"));
        }
        let l = self.length(t);
        let sum: C64 = self
            .modal(t)
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = i + 1;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                c * (sign * n as f64 * PI / l)
            })
            .sum();
        Ok(sum * (I * (self.epsilon() * l / 4.0)).exp())
    }

    /// u(a, t) for a fixed interior point `a ∈ (0, 1)`; since ℓ ≥ 1 it stays inside.
    pub fn point_observation(&self, a: f64, t: f64) -> Result<C64> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::domain("a", a, "(0, 1)"));
        }
        self.eval_u(a, t)
    }

    pub fn observe(&self, channel: Channel, t: f64) -> Result<C64> {
        match channel {
            Channel::Left => self.neumann_trace_left(t),
            Channel::Right => self.neumann_trace_right(t),
            Channel::Point(a) => self.point_observation(a, t),
        }
    }

    /// w(y, t) = u(ℓ(t)y, t) on the grid of `m` intervals.
    pub fn fixed_state(&self, t: f64, m: usize) -> Result<FixedState> {
        let table = SineTable::new(self.spectrum.len(), m);
        Ok(self.sample(t, &table).0)
    }

    fn sample(&self, t: f64, table: &SineTable) -> (FixedState, Vec<C64>, TracePoint) {
        let l = self.length(t);
        let eps = self.epsilon();
        let modal = self.modal(t);
        let m = table.grid;
        let mut values = Vec::with_capacity(m + 1);
        let mut grads = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let y = j as f64 / m as f64;
            let chirp = (I * (eps * l * y * y / 4.0)).exp();
            let drift = I * (eps * y / 2.0);
            let mut w = C64::new(0.0, 0.0);
            let mut wy = C64::new(0.0, 0.0);
            for (i, c) in modal.iter().enumerate() {
                let (s, co) = (table.sin[i][j], table.cos[i][j]);
                w += c * s;
                wy += c * ((i + 1) as f64 * PI / l * co + drift * s);
            }
            values.push(w * chirp);
            grads.push(wy * chirp * l);
        }
        values[0] = C64::new(0.0, 0.0);
        values[m] = C64::new(0.0, 0.0);
        let trace = TracePoint::from_fixed(t, l, grads[0], grads[m]);
        (FixedState { t, values }, grads, trace)
    }

    /// Exact states, gradients and traces at `t_k = kτ/steps`.
    pub fn trajectory(&self, tau: f64, m: usize, steps: usize) -> Result<Trajectory> {
        if steps == 0 {
            return Err(Error::Invalid("steps must be ≥ 1".into()));
        }
        if m < 2 {
            return Err(Error::Invalid(format!("grid M = {m} too small")));
        }
        let curve = self.curve(tau)?;
        let table = SineTable::new(self.spectrum.len(), m);
        let mut states = Vec::with_capacity(steps + 1);
        let mut grads = Vec::with_capacity(steps + 1);
        let mut traces = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let t = if k == steps { tau } else { tau * k as f64 / steps as f64 };
            let (s, g, tr) = self.sample(t, &table);
            states.push(s);
            grads.push(g);
            traces.push(tr);
        }
        Trajectory::new(states, Some(grads), traces, curve)
    }
}

/// sin(nπy_j), cos(nπy_j) — time independent in the fixed frame.
struct SineTable {
    grid: usize,
    sin: Vec<Vec<f64>>,
    cos: Vec<Vec<f64>>,
}

impl SineTable {
    fn new(modes: usize, grid: usize) -> Self {
        let mut sin = Vec::with_capacity(modes);
        let mut cos = Vec::with_capacity(modes);
        for n in 1..=modes {
            let (s, c): (Vec<f64>, Vec<f64>) = (0..=grid)
                .map(|j| (n as f64 * PI * j as f64 / grid as f64).sin_cos())
                .unzip();
            sin.push(s);
            cos.push(c);
        }
        Self { grid, sin, cos }
    }
}

/// Signal of mode `n` (unit coefficient) in `channel`, in the given frame.
pub fn mode_waveform(epsilon: f64, n: usize, t: f64, channel: Channel, frame: Frame) -> C64 {
    let l = 1.0 + epsilon * t;
    let nf = n as f64;
    let base = (2.0 / l).sqrt() * (-I * (PI * PI * nf * nf * t / l)).exp();
    let scale = match frame {
        Frame::Moving => 1.0,
        Frame::Fixed => l,
    };
    match channel {
        Channel::Left => base * (nf * PI / l) * scale,
        Channel::Right => {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            base * (sign * nf * PI / l) * (I * (epsilon * l / 4.0)).exp() * scale
        }
        Channel::Point(a) => {
            base * (nf * PI * a / l).sin() * (I * (epsilon * a * a / (4.0 * l))).exp()
        }
    }
}

/// τ = 2/(π − 2ε), the horizon on which τ/ℓ(τ) = 2/π.
pub fn bn_tau(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < PI / 2.0) {
        return Err(Error::domain("epsilon", epsilon, "(0, π/2)"));
    }
    Ok(2.0 / (PI - 2.0 * epsilon))
}

/// b_n(t) = (√π/(√2 ℓ)) e^{−iπ²n²t/ℓ}
pub fn bn(epsilon: f64, n: usize, t: f64) -> C64 {
    let l = 1.0 + epsilon * t;
    let nf = n as f64;
    (-I * (PI * PI * nf * nf * t / l)).exp() * (PI.sqrt() / (SQRT_2 * l))
}

/// (√π/(√2 ℓ)) e^{+3iπ²t/ℓ}: orthogonal to every b_n yet not in their span.
pub fn counterexample_mode(epsilon: f64, t: f64) -> C64 {
    let l = 1.0 + epsilon * t;
    (I * (3.0 * PI * PI * t / l)).exp() * (PI.sqrt() / (SQRT_2 * l))
}

fn check_bn_resolution(n: usize, points: usize) -> Result<()> {
    let required = 200 * n * n;
    if points < required {
        return Err(Error::Resolution { points, modes: n, required });
    }
    Ok(())
}

/// G[m][n] = ∫₀^τ b_m conj(b_n) dt by Simpson, τ = [`bn_tau`].
pub fn bn_gram(epsilon: f64, n: usize, points: usize) -> Result<DMatrix<C64>> {
    let tau = bn_tau(epsilon)?;
    check_bn_resolution(n, points)?;
    let intervals = even_at_least(points);
    let h = tau / intervals as f64;
    let samples: Vec<Vec<C64>> = (1..=n)
        .map(|k| (0..=intervals).map(|j| bn(epsilon, k, j as f64 * h)).collect())
        .collect();
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut buf = vec![C64::new(0.0, 0.0); intervals + 1];
    for r in 0..n {
        for c in 0..n {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = samples[r][j] * samples[c][j].conj();
            }
            g[(r, c)] = simpson(&buf, h);
        }
    }
    Ok(g)
}

/// ⟨f, b_n⟩ = ∫₀^τ f conj(b_n) dt for n = 1..=N.
pub fn bn_inner_products(
    f: impl Fn(f64) -> C64,
    epsilon: f64,
    n: usize,
    points: usize,
) -> Result<Vec<C64>> {
    let tau = bn_tau(epsilon)?;
    check_bn_resolution(n, points)?;
    let intervals = even_at_least(points);
    let h = tau / intervals as f64;
    let fs: Vec<C64> = (0..=intervals).map(|j| f(j as f64 * h)).collect();
    Ok((1..=n)
        .map(|k| {
            let v: Vec<C64> = fs
                .iter()
                .enumerate()
                .map(|(j, fv)| fv * bn(epsilon, k, j as f64 * h).conj())
                .collect();
            simpson(&v, h)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sol(coeffs: Vec<C64>, eps: f64) -> ExactSolution {
        ExactSolution::new(SineSpectrum::new(coeffs, eps).unwrap()).unwrap()
    }

    #[test]
    fn dirichlet_endpoints() {
        let s = sol(vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.1, 0.0)], 0.5);
        for t in [0.0, 0.3, 1.7] {
            assert_eq!(s.eval_u(0.0, t).unwrap(), c(0.0, 0.0));
            assert!(s.eval_u(s.length(t), t).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn autonomous_single_mode_value() {
        let s = sol(vec![c(1.0, 0.0)], 0.0);
        let t = 0.37;
        let want = (-I * PI * PI * t).exp() * SQRT_2;
        assert!((s.eval_u(0.5, t).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn outside_domain() {
        let s = sol(vec![c(1.0, 0.0)], 0.5);
        assert!(matches!(s.eval_u(1.6, 1.0), Err(Error::Domain { .. })));
        assert!(s.eval_u(1.5, 1.0).is_ok());
        assert!(matches!(s.point_observation(1.0, 0.1), Err(Error::Domain { .. })));
        assert!(ExactSolution::new(SineSpectrum::mode(1, 1, -0.1).unwrap()).is_err());
    }

    #[test]
    fn trace_values() {
        let s = sol(vec![c(1.0, 0.0)], 0.0);
        assert!((s.neumann_trace_left(0.0).unwrap() - c(SQRT_2 * PI, 0.0)).norm() < 1e-14);
        assert!((s.neumann_trace_right(0.0).unwrap() + c(SQRT_2 * PI, 0.0)).norm() < 1e-14);
        let s = sol(vec![c(0.0, 0.0), c(1.0, 0.0)], 0.0);
        assert!((s.neumann_trace_right(0.0).unwrap() - c(2.0 * SQRT_2 * PI, 0.0)).norm() < 1e-13);
        let s = sol(vec![c(0.0, 0.0); 3], 0.5);
        assert_eq!(s.neumann_trace_left(0.4).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn traces_agree_with_u_x() {
        let s = sol(vec![c(0.4, 0.1), c(-0.2, 0.7), c(0.3, -0.3)], 0.6);
        for t in [0.0, 0.5, 1.3] {
            let l = s.length(t);
            assert!((s.u_x(0.0, t).unwrap() - s.neumann_trace_left(t).unwrap()).norm() < 1e-12);
            assert!((s.u_x(l, t).unwrap() - s.neumann_trace_right(t).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn fixed_trajectory_is_consistent() {
        let s = sol(vec![c(0.4, 0.1), c(-0.2, 0.7)], 0.5);
        let tr = s.trajectory(1.0, 64, 10).unwrap();
        let k = 7;
        let st = &tr.states[k];
        let l = s.length(st.t);
        for j in [5usize, 30, 63] {
            let y = j as f64 / 64.0;
            assert!((st.values[j] - s.eval_u(l * y, st.t).unwrap()).norm() < 1e-12);
            let wy = tr.gradient(k)[j];
            assert!((wy - l * s.u_x(l * y, st.t).unwrap()).norm() < 1e-11);
        }
        let tp = tr.traces[k];
        assert!((tp.moving_left - s.neumann_trace_left(st.t).unwrap()).norm() < 1e-11);
        assert!((tp.moving_right - s.neumann_trace_right(st.t).unwrap()).norm() < 1e-11);
    }

    #[test]
    fn waveforms_sum_to_traces() {
        let s = sol(vec![c(0.4, 0.1), c(-0.2, 0.7), c(0.3, 0.0)], 0.5);
        let t = 0.8;
        for ch in [Channel::Left, Channel::Right, Channel::Point(0.41)] {
            let sum: C64 = s
                .spectrum()
                .coefficients()
                .iter()
                .enumerate()
                .map(|(i, a)| a * mode_waveform(0.5, i + 1, t, ch, Frame::Moving))
                .sum();
            assert!((sum - s.observe(ch, t).unwrap()).norm() < 1e-12, "{ch:?}");
        }
    }

    #[test]
    fn bn_tau_substitution() {
        let tau = bn_tau(0.5).unwrap();
        assert!((tau - 0.933884).abs() < 1e-6);
        assert!((tau / (1.0 + 0.5 * tau) - 2.0 / PI).abs() < 1e-14);
        assert!(bn_tau(0.0).is_err());
        assert!(bn_tau(PI / 2.0).is_err());
    }

    #[test]
    fn bn_resolution_enforced() {
        assert!(matches!(bn_gram(0.5, 4, 3199), Err(Error::Resolution { .. })));
    }
}
