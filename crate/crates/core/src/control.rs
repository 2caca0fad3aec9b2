//! Duality between observation and control.
//!
//! On L₂(0,1) the adjoint of the fixed-domain generator is
//! `A(t)* = −A(t) − ℓ'/ℓ`. The retrograde problem
//! `z' = −A*z − C*C w`, `z(τ) = 0` gives `⟨w₀, z(0)⟩ = ∫₀^τ ‖C w‖² dt`, and the
//! map `w₀ ↦ z(0)` is the observation Gramian. When the Gramian is positive
//! definite every target `z(0)` is reached by solving `G w₀ = z(0)`.
//!
//! Control computations run in spectral coordinates where `C w` is an explicit
//! waveform; the distributional `C*` is never discretised.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curves::BoundaryCurve;
use crate::error::{Error, Result};
use crate::exact::{mode_waveform, Channel, Frame};
use crate::observability::{
    check_observable, oscillatory_intervals, quadrature_gramian, GramianMatrix, ObservationKind,
};
use crate::pde::{self, assemble_operator, inner, OperatorStamp, MIN_GRID};
use crate::spectral::SineSpectrum;
use crate::{C64, I};

/// Tridiagonal realisation of A(t)* = −A(t) − ℓ'/ℓ on interior rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointStamp {
    pub t: f64,
    pub lower: Vec<C64>,
    pub diag: Vec<C64>,
    pub upper: Vec<C64>,
}

impl AdjointStamp {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let m = self.diag.len() - 1;
        let mut out = vec![C64::new(0.0, 0.0); m + 1];
        for j in 1..m {
            out[j] = self.lower[j] * v[j - 1] + self.diag[j] * v[j] + self.upper[j] * v[j + 1];
        }
        out
    }
}

pub fn adjoint_stamp(curve: &BoundaryCurve, t: f64, m: usize) -> Result<AdjointStamp> {
    let a: OperatorStamp = assemble_operator(curve, t, m)?;
    let p = curve.eval(t)?;
    let shift = p.velocity / p.length;
    let mut diag: Vec<C64> = a.diag.iter().map(|d| -d - shift).collect();
    diag[0] = C64::new(0.0, 0.0);
    diag[m] = C64::new(0.0, 0.0);
    Ok(AdjointStamp {
        t,
        lower: a.lower.iter().map(|v| -v).collect(),
        diag,
        upper: a.upper.iter().map(|v| -v).collect(),
    })
}

/// |⟨A w, v⟩ − ⟨w, A* v⟩| in the discrete L₂ inner product. The skew drift
/// stencil makes the stamp the exact discrete adjoint, so this is round-off.
pub fn adjoint_defect(curve: &BoundaryCurve, t: f64, w: &[C64], v: &[C64]) -> Result<f64> {
    let m = w.len() - 1;
    let a = assemble_operator(curve, t, m)?;
    let s = adjoint_stamp(curve, t, m)?;
    Ok((inner(&a.apply(w), v) - inner(w, &s.apply(v))).norm())
}

/// max_j |(A*_h v)_j − (A* v)(y_j)| on the interior for v with known
/// derivatives: the O(h²) truncation error of the adjoint stamp.
pub fn adjoint_truncation_error(
    curve: &BoundaryCurve,
    t: f64,
    m: usize,
    v: impl Fn(f64) -> (C64, C64, C64),
) -> Result<f64> {
    let s = adjoint_stamp(curve, t, m)?;
    let p = curve.eval(t)?;
    let rate = p.velocity / p.length;
    let h = 1.0 / m as f64;
    let samples: Vec<C64> = (0..=m).map(|j| v(j as f64 * h).0).collect();
    let applied = s.apply(&samples);
    Ok((1..m)
        .map(|j| {
            let y = j as f64 * h;
            let (f, fy, fyy) = v(y);
            let exact = -I * fyy / (p.length * p.length) - rate * y * fy - rate * f;
            (applied[j] - exact).norm()
        })
        .fold(0.0, f64::max))
}

/// How the forward solution is produced in [`duality_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DualityDiscretization {
    /// Exact modal waveforms; the retrograde pairing uses the trapezoid rule
    /// with `steps` steps and is compared with the Gramian form.
    Series { steps: usize },
    /// Crank–Nicolson forward solve on `grid` intervals; the output is read
    /// from the boundary traces or interpolated at the physical point.
    Pde { grid: usize, steps: usize },
}

impl Default for DualityDiscretization {
    fn default() -> Self {
        DualityDiscretization::Series { steps: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// ⟨w₀, z(0)⟩
    pub pairing: f64,
    /// ∫₀^τ ‖C w‖² dt
    pub output_energy: f64,
    /// |pairing − output_energy| / output_energy (0 for zero data)
    pub residual: f64,
}

fn channel_output(kind: ObservationKind) -> Vec<Channel> {
    kind.channels()
}

/// Evaluates both sides of ⟨w₀, z(0)⟩ = ∫₀^τ ‖C w‖² for a linear wall, with
/// C w = w_y(0|1, t) (boundary) or u(a, t) (point).
pub fn duality_residual(
    spectrum: &SineSpectrum,
    curve: &BoundaryCurve,
    tau: f64,
    kind: ObservationKind,
    disc: DualityDiscretization,
) -> Result<DualityReport> {
    let eps = curve
        .linear_rate()
        .ok_or_else(|| Error::Invalid("duality residual needs a linear wall".into()))?;
    if (eps - spectrum.epsilon()).abs() > 1e-15 {
        return Err(Error::Invalid("spectrum and curve use different ε".into()));
    }
    if spectrum.is_zero() {
        return Ok(DualityReport { pairing: 0.0, output_energy: 0.0, residual: 0.0 });
    }
    let channels = channel_output(kind);
    let n = spectrum.len();
    let a = spectrum.coefficients();

    let (times, outputs, output_energy) = match disc {
        DualityDiscretization::Series { steps } => {
            if steps == 0 {
                return Err(Error::Invalid("steps must be ≥ 1".into()));
            }
            let times: Vec<f64> = (0..=steps).map(|k| tau * k as f64 / steps as f64).collect();
            let outputs: Vec<Vec<C64>> = times
                .iter()
                .map(|&t| {
                    channels
                        .iter()
                        .map(|&ch| {
                            (0..n)
                                .map(|i| a[i] * mode_waveform(eps, i + 1, t, ch, Frame::Fixed))
                                .sum()
                        })
                        .collect()
                })
                .collect();
            let g = quadrature_gramian(eps, tau, n, kind, Frame::Fixed, 16 * oscillatory_intervals(n, tau))?;
            let energy = g.quadratic_form(a);
            (times, outputs, energy)
        }
        DualityDiscretization::Pde { grid, steps } => {
            if grid < MIN_GRID {
                return Err(Error::Invalid(format!("grid M = {grid} below minimum {MIN_GRID}")));
            }
            let traj = pde::solve(spectrum, curve, tau, grid, steps)?;
            let times = traj.times();
            let mut outputs = Vec::with_capacity(times.len());
            for (k, state) in traj.states.iter().enumerate() {
                let tr = &traj.traces[k];
                let row = channels
                    .iter()
                    .map(|&ch| -> Result<C64> {
                        Ok(match ch {
                            Channel::Left => tr.fixed_left,
                            Channel::Right => tr.fixed_right,
                            Channel::Point(pa) => {
                                let y = pa / curve.length(state.t)?;
                                cubic_interpolate(&state.values, y)
                            }
                        })
                    })
                    .collect::<Result<Vec<C64>>>()?;
                outputs.push(row);
            }
            let sq: Vec<f64> = outputs.iter().map(|r| r.iter().map(|v| v.norm_sqr()).sum()).collect();
            let energy = trapezoid_nonuniform(&times, &sq);
            (times, outputs, energy)
        }
    };

    // Retrograde solve in modal coordinates: z_n(0) = ∫₀^τ Σ_ch conj(ψ_n) y dt.
    let z0 = retrograde_coefficients(eps, n, &channels, Frame::Fixed, &times, &outputs);
    let pairing: C64 = a.iter().zip(&z0).map(|(ai, zi)| ai * zi.conj()).sum();
    let residual = if output_energy == 0.0 {
        0.0
    } else {
        (pairing - output_energy).norm() / output_energy
    };
    Ok(DualityReport { pairing: pairing.re, output_energy, residual })
}

fn trapezoid_nonuniform(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// ∫₀^τ Σ_ch conj(ψ_n^ch) y^ch dt by the trapezoid rule, n = 1..=modes.
fn retrograde_coefficients(
    eps: f64,
    modes: usize,
    channels: &[Channel],
    frame: Frame,
    times: &[f64],
    outputs: &[Vec<C64>],
) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); modes];
    // accumulate from τ backwards, as the retrograde problem runs
    for k in (1..times.len()).rev() {
        let dt = times[k] - times[k - 1];
        for (n, slot) in acc.iter_mut().enumerate() {
            let mut panel = C64::new(0.0, 0.0);
            for (c, &ch) in channels.iter().enumerate() {
                panel += mode_waveform(eps, n + 1, times[k], ch, frame).conj() * outputs[k][c];
                panel += mode_waveform(eps, n + 1, times[k - 1], ch, frame).conj() * outputs[k - 1][c];
            }
            *slot += panel * (0.5 * dt);
        }
    }
    acc
}

/// Four-point Lagrange interpolation of grid values at `y ∈ [0, 1]`.
fn cubic_interpolate(values: &[C64], y: f64) -> C64 {
    let m = values.len() - 1;
    let x = (y * m as f64).clamp(0.0, m as f64);
    let j = (x.floor() as usize).clamp(1, m - 2);
    let s = x - j as f64;
    let (f0, f1, f2, f3) = (values[j - 1], values[j], values[j + 1], values[j + 2]);
    // nodes at −1, 0, 1, 2
    let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3
}

/// Retrograde modal state c_n(t) = ∫_t^τ Σ_ch conj(ψ_n) y ds; c(τ) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrogradeSample {
    pub t: f64,
    pub coefficients: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSolution {
    pub w0: SineSpectrum,
    pub target: Vec<C64>,
    pub achieved: Vec<C64>,
    /// ‖achieved − target‖ / ‖target‖ (0 for a zero target).
    pub residual: f64,
    /// λ_max(G)/λ_min(G)
    pub cond: f64,
    /// Down-sampled retrograde trajectory, ending with z(0).
    pub z_trajectory: Vec<RetrogradeSample>,
}

/// Control report record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub kind: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub tau: f64,
    #[serde(rename = "cond_G")]
    pub cond_g: f64,
    pub residual: f64,
    pub target_norm: f64,
    pub w0_norm: f64,
}

impl ControlSolution {
    pub fn report(&self, g: &GramianMatrix) -> ControlReport {
        let norm = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        ControlReport {
            kind: g.kind.to_string(),
            n: g.modes(),
            epsilon: g.epsilon,
            tau: g.tau,
            cond_g: self.cond,
            residual: self.residual,
            target_norm: norm(&self.target),
            w0_norm: self.w0.l2_norm(),
        }
    }
}

/// Time steps used to re-simulate the retrograde problem by default.
pub fn default_steer_steps(modes: usize, tau: f64) -> usize {
    16 * oscillatory_intervals(modes, tau)
}

/// Solves G w₀ = target and re-simulates the retrograde problem driven by
/// the output of w₀ to report the state actually reached.
pub fn steer(g: &GramianMatrix, target: &[C64], steps: Option<usize>) -> Result<ControlSolution> {
    let n = g.modes();
    if target.len() != n {
        return Err(Error::Invalid(format!("target has {} modes, Gramian {n}", target.len())));
    }
    let zero = C64::new(0.0, 0.0);
    let eig = g.eigenvalues();
    let cond = if eig[0] > 0.0 { eig[n - 1] / eig[0] } else { f64::INFINITY };
    if target.iter().all(|c| c.norm_sqr() == 0.0) {
        return Ok(ControlSolution {
            w0: SineSpectrum::zero(n, g.epsilon)?,
            target: target.to_vec(),
            achieved: vec![zero; n],
            residual: 0.0,
            cond,
            z_trajectory: vec![RetrogradeSample { t: 0.0, coefficients: vec![zero; n] }],
        });
    }
    check_observable(g)?;
    let herm: DMatrix<C64> = (g.g() + g.g().adjoint()) * C64::new(0.5, 0.0);
    let chol = Cholesky::new(herm).ok_or(Error::NotPositiveDefinite)?;
    let w0: Vec<C64> = chol.solve(&DVector::from_column_slice(target)).iter().copied().collect();

    let steps = steps.unwrap_or_else(|| default_steer_steps(n, g.tau)).max(1);
    let channels = g.kind.channels();
    let times: Vec<f64> = (0..=steps).map(|k| g.tau * k as f64 / steps as f64).collect();
    let outputs: Vec<Vec<C64>> = times
        .iter()
        .map(|&t| {
            channels
                .iter()
                .map(|&ch| {
                    (0..n)
                        .map(|i| w0[i] * mode_waveform(g.epsilon, i + 1, t, ch, Frame::Moving))
                        .sum()
                })
                .collect()
        })
        .collect();

    let stride = (steps / 200).max(1);
    let mut acc = vec![zero; n];
    let mut z_trajectory = vec![RetrogradeSample { t: g.tau, coefficients: acc.clone() }];
    for k in (1..=steps).rev() {
        let dt = times[k] - times[k - 1];
        for (i, slot) in acc.iter_mut().enumerate() {
            let mut panel = zero;
            for (c, &ch) in channels.iter().enumerate() {
                panel += mode_waveform(g.epsilon, i + 1, times[k], ch, Frame::Moving).conj() * outputs[k][c];
                panel += mode_waveform(g.epsilon, i + 1, times[k - 1], ch, Frame::Moving).conj()
                    * outputs[k - 1][c];
            }
            *slot += panel * (0.5 * dt);
        }
        if (k - 1) % stride == 0 {
            z_trajectory.push(RetrogradeSample { t: times[k - 1], coefficients: acc.clone() });
        }
    }
    let achieved = acc;
    let t_norm = target.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let err = achieved
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(ControlSolution {
        w0: SineSpectrum::new(w0, g.epsilon)?,
        target: target.to_vec(),
        achieved,
        residual: err / t_norm,
        cond,
        z_trajectory,
    })
}

/// One controlled endpoint of the moving-domain dual problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledEndpoint {
    pub location: String,
    pub datum: String,
}

/// Metadata of the dual (control) problem on the moving domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualProblem {
    pub kind: String,
    pub equation: String,
    pub terminal_condition: String,
    pub controlled: Vec<ControlledEndpoint>,
    pub homogeneous: Vec<String>,
}

/// Describes the Dirichlet control problem dual to boundary observation.
pub fn dual_problem_descriptor(kind: ObservationKind) -> Result<DualProblem> {
    let left = ControlledEndpoint {
        location: "x = 0".into(),
        datum: "h(0, t) = -i l(t)^3 u_x(0, t)".into(),
    };
    let right = ControlledEndpoint {
        location: "x = l(t)".into(),
        datum: "h(l(t), t) = -i l(t)^3 u_x(l(t), t)".into(),
    };
    let (controlled, homogeneous) = match kind {
        ObservationKind::BoundaryLeft => (vec![left], vec!["h(l(t), t) = 0".to_string()]),
        ObservationKind::BoundaryRight => (vec![right], vec!["h(0, t) = 0".to_string()]),
        ObservationKind::BoundaryBoth => (vec![left, right], vec![]),
        ObservationKind::Point { .. } => {
            return Err(Error::Invalid(
                "the Dirichlet dual problem is defined for boundary observation".into(),
            ))
        }
    };
    Ok(DualProblem {
        kind: kind.label().into(),
        equation: "i h_t + h_xx - i (l'(t)/l(t)) h = 0 on 0 < x < l(t), 0 < t < tau".into(),
        terminal_condition: "h(x, tau) = 0".into(),
        controlled,
        homogeneous,
    })
}
