use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ObservationKind;
use crate::error::{Error, Result};
use crate::exact::{mode_waveform, Frame};
use crate::quadrature::{even_at_least, simpson};
use crate::{C64, I};

/// Relative Hermitian tolerance on G.
const HERMITIAN_TOL: f64 = 1e-10;

/// λ_min(G) below this fraction of tr(G) counts as a kernel.
pub const NON_OBSERVABLE_THRESHOLD: f64 = 1e-12;

/// Output-energy form on the span of the first N modes.
///
/// `g[(m, n)] = ∫₀^τ Σ_channels conj(φ_m) φ_n dt`, so that for coefficients
/// `a`, `a^H G a = ∫₀^τ ‖Σ a_n φ_n‖² dt`. `w` defines the initial-data norm
/// (`diag(π²n²)` for boundary observation, identity for point observation).
#[derive(Debug, Clone, PartialEq)]
pub struct GramianMatrix {
    g: DMatrix<C64>,
    w: DMatrix<C64>,
    pub tau: f64,
    pub epsilon: f64,
    pub kind: ObservationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are W-orthonormal coefficient vectors.
    pub vectors: DMatrix<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityEstimate {
    /// Smallest generalized eigenvalue of (G, W).
    pub c_est: f64,
    /// Largest generalized eigenvalue of (G, W).
    pub c_upper: f64,
    /// c_upper / c_est
    pub cond: f64,
    /// Coefficients attaining c_est.
    pub min_vector: Vec<C64>,
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

impl GramianMatrix {
    pub fn new(
        g: DMatrix<C64>,
        w: DMatrix<C64>,
        tau: f64,
        epsilon: f64,
        kind: ObservationKind,
    ) -> Result<Self> {
        if !g.is_square() || g.shape() != w.shape() || g.nrows() == 0 {
            return Err(Error::Invalid(format!(
                "Gramian shapes {:?} and {:?} are incompatible",
                g.shape(),
                w.shape()
            )));
        }
        let out = Self { g, w, tau, epsilon, kind };
        let defect = out.hermitian_defect();
        if defect > HERMITIAN_TOL * max_abs(&out.g).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        if Cholesky::new(out.w.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(out)
    }

    pub fn g(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn w(&self) -> &DMatrix<C64> {
        &self.w
    }

    pub fn modes(&self) -> usize {
        self.g.nrows()
    }

    /// max |G − G^H|
    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(&self.g - self.g.adjoint()))
    }

    pub fn trace(&self) -> f64 {
        self.g.diagonal().iter().map(|v| v.re).sum()
    }

    /// Same form for waveforms multiplied by `sqrt(factor)`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { g: &self.g * C64::new(factor, 0.0), ..self.clone() }
    }

    /// Leading k×k block (the first k modes).
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.modes() {
            return Err(Error::Invalid(format!("cannot restrict {} modes to {k}", self.modes())));
        }
        Ok(Self {
            g: self.g.view((0, 0), (k, k)).into_owned(),
            w: self.w.view((0, 0), (k, k)).into_owned(),
            ..self.clone()
        })
    }

    /// a^H G a
    pub fn quadratic_form(&self, a: &[C64]) -> f64 {
        let v = DVector::from_column_slice(a);
        (v.adjoint() * &self.g * &v)[(0, 0)].re
    }

    /// Eigenvalues of G itself, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let e = SymmetricEigen::new(hermitian_part(&self.g));
        let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        v
    }

    /// Solves G a = λ W a through W = LL^H and L⁻¹ G L^{−H}.
    pub fn generalized_eigen(&self) -> Result<GeneralizedEigen> {
        let l = Cholesky::new(self.w.clone()).ok_or(Error::NotPositiveDefinite)?.l();
        let m = whitened(&l, &self.g)?;
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues")
        });
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let n = self.modes();
        let mut z = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for (c, &i) in order.iter().enumerate() {
            z.set_column(c, &eig.eigenvectors.column(i));
        }
        let vectors = l
            .adjoint()
            .solve_upper_triangular(&z)
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(GeneralizedEigen { values, vectors })
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// L⁻¹ G L^{−H}, symmetrised.
fn whitened(l: &DMatrix<C64>, g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let x = l.solve_lower_triangular(g).ok_or(Error::NotPositiveDefinite)?;
    let m = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or(Error::NotPositiveDefinite)?;
    Ok(hermitian_part(&m))
}

fn spectral_weight(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            let k = (r + 1) as f64;
            C64::new(PI * PI * k * k, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// ∫₀^S (1 − εs) e^{−iκs} ds
fn weighted_exponential(kappa: f64, s_end: f64, epsilon: f64) -> C64 {
    if kappa == 0.0 {
        return C64::new(s_end - 0.5 * epsilon * s_end * s_end, 0.0);
    }
    let e = (-I * (kappa * s_end)).exp();
    let plain = (C64::new(1.0, 0.0) - e) / (I * kappa);
    let moment = I * s_end * e / kappa + (e - 1.0) / (kappa * kappa);
    plain - epsilon * moment
}

/// Closed-form Neumann-trace Gramian for ℓ = 1 + εt.
///
/// With s = t/ℓ(t) the left entries are 2π²mn ∫₀^{τ/ℓ(τ)} (1 − εs) e^{iπ²(m²−n²)s} ds;
/// the right trace only adds the sign (−1)^{m+n}. `W = diag(π²n²)`.
pub fn boundary_gramian(
    epsilon: f64,
    tau: f64,
    n: usize,
    kind: ObservationKind,
) -> Result<GramianMatrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain("epsilon", epsilon, "[0, ∞)"));
    }
    if !(tau > 0.0) {
        return Err(Error::domain("tau", tau, "(0, ∞)"));
    }
    if n == 0 {
        return Err(Error::Invalid("need at least one mode".into()));
    }
    let (left, right) = match kind {
        ObservationKind::BoundaryLeft => (1.0, 0.0),
        ObservationKind::BoundaryRight => (0.0, 1.0),
        ObservationKind::BoundaryBoth => (1.0, 1.0),
        ObservationKind::Point { .. } => {
            return Err(Error::Invalid("use point_gramian for point observation".into()))
        }
    };
    let s_end = tau / (1.0 + epsilon * tau);
    let g = DMatrix::from_fn(n, n, |r, c| {
        let (m, k) = ((r + 1) as f64, (c + 1) as f64);
        let kappa = PI * PI * (k * k - m * m);
        let base = weighted_exponential(kappa, s_end, epsilon) * (2.0 * PI * PI * m * k);
        let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
        base * (left + right * sign)
    });
    GramianMatrix::new(g, spectral_weight(n), tau, epsilon, kind)
}

/// Point-observation Gramian at a fixed physical point `a ∈ (0, 1)`, `W = I`.
///
/// Entries ∫₀^S 2ℓ(s) sin(mπa/ℓ) sin(nπa/ℓ) e^{iπ²(m²−n²)s} ds with
/// ℓ(s) = 1/(1 − εs), by Simpson with ≥ 64 points per fastest period.
pub fn point_gramian(epsilon: f64, a: f64, tau: f64, n: usize) -> Result<GramianMatrix> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("a", a, "(0, 1)"));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain("epsilon", epsilon, "[0, ∞)"));
    }
    if !(tau > 0.0) {
        return Err(Error::domain("tau", tau, "(0, ∞)"));
    }
    if n == 0 {
        return Err(Error::Invalid("need at least one mode".into()));
    }
    let s_end = tau / (1.0 + epsilon * tau);
    let periods = PI * ((n * n).saturating_sub(1)) as f64 * s_end / 2.0;
    let intervals = even_at_least(((64.0 * periods).ceil() as usize).max(2048));
    let h = s_end / intervals as f64;

    let mut sines = vec![vec![0.0; intervals + 1]; n];
    let mut weight = vec![0.0; intervals + 1];
    for j in 0..=intervals {
        let s = j as f64 * h;
        let inv_l = 1.0 - epsilon * s;
        weight[j] = 2.0 / inv_l;
        for (k, row) in sines.iter_mut().enumerate() {
            row[j] = ((k + 1) as f64 * PI * a * inv_l).sin();
        }
    }
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut buf = vec![C64::new(0.0, 0.0); intervals + 1];
    for r in 0..n {
        for c in r..n {
            let m2 = ((r + 1) * (r + 1)) as f64;
            let n2 = ((c + 1) * (c + 1)) as f64;
            let freq = PI * PI * (m2 - n2);
            for (j, b) in buf.iter_mut().enumerate() {
                let phase = (I * (freq * j as f64 * h)).exp();
                *b = phase * (weight[j] * sines[r][j] * sines[c][j]);
            }
            let v = simpson(&buf, h);
            g[(r, c)] = v;
            g[(c, r)] = v.conj();
        }
        g[(r, r)] = C64::new(g[(r, r)].re, 0.0);
    }
    GramianMatrix::new(
        g,
        DMatrix::identity(n, n),
        tau,
        epsilon,
        ObservationKind::Point { a },
    )
}

/// Direct Simpson quadrature in t of the mode waveforms — an independent
/// route to the same matrices, and the only one for the fixed frame.
pub fn quadrature_gramian(
    epsilon: f64,
    tau: f64,
    n: usize,
    kind: ObservationKind,
    frame: Frame,
    intervals: usize,
) -> Result<GramianMatrix> {
    if n == 0 {
        return Err(Error::Invalid("need at least one mode".into()));
    }
    let intervals = even_at_least(intervals.max(2));
    let h = tau / intervals as f64;
    let channels = kind.channels();
    let waves: Vec<Vec<Vec<C64>>> = channels
        .iter()
        .map(|&ch| {
            (1..=n)
                .map(|k| {
                    (0..=intervals)
                        .map(|j| mode_waveform(epsilon, k, j as f64 * h, ch, frame))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut buf = vec![C64::new(0.0, 0.0); intervals + 1];
    for r in 0..n {
        for c in r..n {
            let mut total = C64::new(0.0, 0.0);
            for ch in &waves {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = ch[r][j].conj() * ch[c][j];
                }
                total += simpson(&buf, h);
            }
            g[(r, c)] = total;
            g[(c, r)] = total.conj();
        }
        g[(r, r)] = C64::new(g[(r, r)].re, 0.0);
    }
    let w = if kind.is_boundary() { spectral_weight(n) } else { DMatrix::identity(n, n) };
    GramianMatrix::new(g, w, tau, epsilon, kind)
}

/// Extremal generalized eigenvalues of (G, W): the sharp lower and upper
/// constants on the truncated space.
pub fn observability_constant_estimate(g: &GramianMatrix) -> Result<ObservabilityEstimate> {
    let defect = g.hermitian_defect();
    if defect > HERMITIAN_TOL * max_abs(g.g()).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let eig = g.generalized_eigen()?;
    let c_est = eig.values[0];
    let c_upper = *eig.values.last().expect("non-empty");
    Ok(ObservabilityEstimate {
        c_est,
        c_upper,
        cond: if c_est > 0.0 { c_upper / c_est } else { f64::INFINITY },
        min_vector: eig.vectors.column(0).iter().copied().collect(),
    })
}

/// Fails with [`Error::NonObservable`] when λ_min(G) < 1e−12·tr(G), naming a
/// unit kernel vector (phase fixed so its largest entry is real positive).
pub fn check_observable(g: &GramianMatrix) -> Result<()> {
    let eig = SymmetricEigen::new(hermitian_part(g.g()));
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite eigenvalues"))
        .expect("non-empty");
    let threshold = NON_OBSERVABLE_THRESHOLD * g.trace();
    if lmin < threshold {
        let v: Vec<C64> = eig.eigenvectors.column(imin).iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite"))
            .expect("non-empty");
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        return Err(Error::NonObservable {
            min_eigenvalue: lmin,
            threshold,
            kernel: v.into_iter().map(|x| x * phase).collect(),
        });
    }
    Ok(())
}

/// Minimum Rayleigh quotient a^H G a / a^H W a over `samples` random
/// directions, drawn uniformly on the W-unit sphere (a = L^{−H} z, z uniform).
pub fn random_search_min(g: &GramianMatrix, samples: usize, seed: u64) -> Result<f64> {
    let n = g.modes();
    let l = Cholesky::new(g.w().clone()).ok_or(Error::NotPositiveDefinite)?.l();
    let lh = l.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut z = DVector::from_element(n, C64::new(0.0, 0.0));
    for _ in 0..samples {
        for v in z.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v = C64::new(re, im);
        }
        let a = lh.solve_upper_triangular(&z).ok_or(Error::NotPositiveDefinite)?;
        let num = (a.adjoint() * g.g() * &a)[(0, 0)].re;
        let den = (a.adjoint() * g.w() * &a)[(0, 0)].re;
        best = best.min(num / den);
    }
    Ok(best)
}

/// ετ/ℓ(τ) = 1/ℓ(0) − 1/ℓ(τ), the effective window after s = t/ℓ.
pub fn t_param(epsilon: f64, tau: f64) -> f64 {
    epsilon * tau / (1.0 + epsilon * tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_exponential_matches_quadrature() {
        for (kappa, s, eps) in [(0.0, 0.7, 0.5), (3.0 * PI * PI, 0.6, 0.5), (-8.0 * PI * PI, 0.4, 0.0)] {
            let q = crate::quadrature::simpson_fn(
                |x| (-I * (kappa * x)).exp() * (1.0 - eps * x),
                0.0,
                s,
                20000,
            );
            assert!((q - weighted_exponential(kappa, s, eps)).norm() < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_time_quadrature() {
        for kind in [
            ObservationKind::BoundaryLeft,
            ObservationKind::BoundaryRight,
            ObservationKind::BoundaryBoth,
        ] {
            let cf = boundary_gramian(0.5, 0.8, 4, kind).unwrap();
            let q = quadrature_gramian(0.5, 0.8, 4, kind, Frame::Moving, 40000).unwrap();
            let diff = max_abs(&(cf.g() - q.g()));
            assert!(diff < 1e-8 * max_abs(cf.g()), "{kind:?}: {diff}");
        }
    }

    #[test]
    fn point_matches_time_quadrature() {
        let cf = point_gramian(0.5, 0.41, 0.7, 5).unwrap();
        let q = quadrature_gramian(0.5, 0.7, 5, ObservationKind::Point { a: 0.41 }, Frame::Moving, 40000)
            .unwrap();
        assert!(max_abs(&(cf.g() - q.g())) < 1e-8);
    }

    #[test]
    fn scalar_case() {
        let g = boundary_gramian(0.5, 1.0, 1, ObservationKind::BoundaryLeft).unwrap();
        assert!(g.g()[(0, 0)].re > 0.0);
        let e = observability_constant_estimate(&g).unwrap();
        assert!((e.c_est - e.c_upper).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut g = DMatrix::identity(2, 2);
        g[(0, 1)] = C64::new(1.0, 0.0);
        let r = GramianMatrix::new(g, DMatrix::identity(2, 2), 1.0, 0.0, ObservationKind::BoundaryLeft);
        assert!(matches!(r, Err(Error::NotHermitian(_))));
    }

    #[test]
    fn kernel_named() {
        let g = point_gramian(0.0, 0.5, 1.0, 2).unwrap();
        match check_observable(&g) {
            Err(Error::NonObservable { kernel, .. }) => {
                assert!(kernel[0].norm() < 1e-8);
                assert!((kernel[1] - C64::new(1.0, 0.0)).norm() < 1e-8);
            }
            other => panic!("expected kernel, got {other:?}"),
        }
    }
}
