//! Initial data as finite spectra in the chirped sine basis
//! `e_n(x) = √2 e^{iεx²/4} sin(nπx)`, orthonormal in L₂(0, 1).

use std::f64::consts::{PI, SQRT_2};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{even_at_least, simpson};
use crate::{C64, I};

/// Default quadrature points per mode for projections.
pub const POINTS_PER_MODE: usize = 64;

/// Finite coefficient sequence `a_1..a_N` with the chirp rate ε of its basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineSpectrum {
    coefficients: Vec<C64>,
    epsilon: f64,
}

/// Result of [`project_initial`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub spectrum: SineSpectrum,
    /// L₂ distance between `u0` and its reconstruction, by the same quadrature.
    pub reconstruction_error: f64,
}

/// Spectral and quadrature H¹₀ seminorms with the norm-equivalence bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H1Seminorms {
    /// sqrt(Σ n²|a_n|²)
    pub spectral: f64,
    /// ‖u₀'‖_{L₂(0,1)} by quadrature of the reconstructed function.
    pub exact: f64,
    /// π²·spectral² ≤ exact²
    pub lower_ok: bool,
    /// exact² ≤ (π² + ε²/2)·spectral²
    pub upper_ok: bool,
}

impl SineSpectrum {
    pub fn new(coefficients: Vec<C64>, epsilon: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Invalid("a spectrum needs at least one mode".into()));
        }
        if !epsilon.is_finite() {
            return Err(Error::domain("epsilon", epsilon, "finite reals"));
        }
        if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Invalid("non-finite spectral coefficient".into()));
        }
        Ok(Self { coefficients, epsilon })
    }

    /// Unit coefficient on mode `k` (1-based) within `n` modes.
    pub fn mode(k: usize, n: usize, epsilon: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("modes are numbered from 1".into()));
        }
        let mut c = vec![C64::new(0.0, 0.0); n.max(k)];
        c[k - 1] = C64::new(1.0, 0.0);
        Self::new(c, epsilon)
    }

    pub fn zero(n: usize, epsilon: f64) -> Result<Self> {
        Self::new(vec![C64::new(0.0, 0.0); n], epsilon)
    }

    /// Independent standard complex Gaussian coefficients, E|a_n|² = 1.
    pub fn random(n: usize, epsilon: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let c = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re * scale, im * scale)
            })
            .collect();
        Self::new(c, epsilon)
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Trailing zero coefficients removed (at least one mode kept).
    pub fn canonical(&self) -> Self {
        let last = self
            .coefficients
            .iter()
            .rposition(|c| c.norm_sqr() != 0.0)
            .unwrap_or(0);
        Self {
            coefficients: self.coefficients[..=last].to_vec(),
            epsilon: self.epsilon,
        }
    }

    /// Zero-padded (never truncated) to `n` modes.
    pub fn padded(&self, n: usize) -> Self {
        let mut c = self.coefficients.clone();
        if n > c.len() {
            c.resize(n, C64::new(0.0, 0.0));
        }
        Self { coefficients: c, epsilon: self.epsilon }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
            epsilon: self.epsilon,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// sqrt(Σ n²|a_n|²)
    pub fn spectral_h1(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| ((i + 1) * (i + 1)) as f64 * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Rescaled so that Σ π²n²|a_n|² = 1.
    pub fn unit_h1(&self) -> Result<Self> {
        let norm = PI * self.spectral_h1();
        if norm == 0.0 {
            return Err(Error::UndefinedRatio("zero spectrum cannot be normalised"));
        }
        Ok(self.scaled(1.0 / norm))
    }

    /// Rescaled to unit L₂ norm.
    pub fn unit_l2(&self) -> Result<Self> {
        let norm = self.l2_norm();
        if norm == 0.0 {
            return Err(Error::UndefinedRatio("zero spectrum cannot be normalised"));
        }
        Ok(self.scaled(1.0 / norm))
    }

    /// Σ|a_n|
    pub fn l1_coefficients(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).sum()
    }

    /// u₀(x) = √2 e^{iεx²/4} Σ a_n sin(nπx)
    pub fn reconstruct(&self, x: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, a) in self.coefficients.iter().enumerate() {
            acc += a * ((i + 1) as f64 * PI * x).sin();
        }
        acc * chirp(self.epsilon, x) * SQRT_2
    }

    /// u₀'(x)
    pub fn derivative(&self, x: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let drift = I * (0.5 * self.epsilon * x);
        for (i, a) in self.coefficients.iter().enumerate() {
            let k = (i + 1) as f64 * PI;
            let (s, c) = (k * x).sin_cos();
            acc += a * (drift * s + k * c);
        }
        acc * chirp(self.epsilon, x) * SQRT_2
    }

    pub fn h1_seminorms(&self) -> H1Seminorms {
        let n = self.len();
        let intervals = even_at_least((POINTS_PER_MODE * 4 * n).max(2048));
        let h = 1.0 / intervals as f64;
        let values: Vec<f64> = (0..=intervals)
            .map(|j| self.derivative(j as f64 * h).norm_sqr())
            .collect();
        let exact_sq = simpson(&values, h).max(0.0);
        let spectral = self.spectral_h1();
        let s2 = spectral * spectral;
        let slack = 1e-9 * (exact_sq.max(PI * PI * s2)) + 1e-300;
        H1Seminorms {
            spectral,
            exact: exact_sq.sqrt(),
            lower_ok: PI * PI * s2 <= exact_sq + slack,
            upper_ok: exact_sq <= (PI * PI + 0.5 * self.epsilon * self.epsilon) * s2 + slack,
        }
    }
}

fn chirp(epsilon: f64, x: f64) -> C64 {
    (I * (0.25 * epsilon * x * x)).exp()
}

/// a_n = ∫₀¹ u₀(x) √2 e^{−iεx²/4} sin(nπx) dx by composite Simpson on
/// `quadrature_points` intervals.
pub fn project_initial(
    u0: impl Fn(f64) -> C64,
    n: usize,
    epsilon: f64,
    quadrature_points: usize,
) -> Result<Projection> {
    if n == 0 {
        return Err(Error::Invalid("need at least one mode".into()));
    }
    if quadrature_points < 4 * n {
        return Err(Error::Resolution {
            points: quadrature_points,
            modes: n,
            required: 4 * n,
        });
    }
    let intervals = even_at_least(quadrature_points);
    let h = 1.0 / intervals as f64;
    let xs: Vec<f64> = (0..=intervals).map(|j| j as f64 * h).collect();
    let samples: Vec<C64> = xs.iter().map(|&x| u0(x)).collect();
    let dechirped: Vec<C64> = xs
        .iter()
        .zip(&samples)
        .map(|(&x, u)| u * chirp(epsilon, x).conj() * SQRT_2)
        .collect();

    let mut coefficients = Vec::with_capacity(n);
    let mut integrand = vec![C64::new(0.0, 0.0); xs.len()];
    for k in 1..=n {
        let kp = k as f64 * PI;
        for (j, (&x, v)) in xs.iter().zip(&dechirped).enumerate() {
            integrand[j] = v * (kp * x).sin();
        }
        coefficients.push(simpson(&integrand, h));
    }
    let spectrum = SineSpectrum::new(coefficients, epsilon)?;

    let residual: Vec<f64> = xs
        .iter()
        .zip(&samples)
        .map(|(&x, u)| (u - spectrum.reconstruct(x)).norm_sqr())
        .collect();
    let reconstruction_error = simpson(&residual, h).max(0.0).sqrt();
    Ok(Projection { spectrum, reconstruction_error })
}

/// Named initial data: `mode:k`, `hat`, `parabola`, `random:seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Mode(usize),
    /// min(x, 1 − x)
    Hat,
    /// x(1 − x)
    Parabola,
    /// Seeded complex Gaussian coefficients, unit L₂ norm.
    Random(u64),
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let bad = || Error::Invalid(format!("unknown spectrum preset '{s}'"));
        match (head, tail) {
            ("mode", Some(k)) => {
                let k: usize = k.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(Preset::Mode(k))
            }
            ("hat", None) => Ok(Preset::Hat),
            ("parabola", None) => Ok(Preset::Parabola),
            ("random", Some(seed)) => Ok(Preset::Random(seed.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Preset::Mode(k) => write!(f, "mode:{k}"),
            Preset::Hat => write!(f, "hat"),
            Preset::Parabola => write!(f, "parabola"),
            Preset::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl Preset {
    /// Builds the spectrum on `n` modes (more if a `mode:k` preset needs it).
    pub fn spectrum(&self, n: usize, epsilon: f64) -> Result<SineSpectrum> {
        let points = POINTS_PER_MODE * n.max(1);
        match *self {
            Preset::Mode(k) => SineSpectrum::mode(k, n, epsilon),
            Preset::Hat => Ok(project_initial(
                |x| {
                    let v = x.min(1.0 - x);
                    chirp(epsilon, x) * v
                },
                n,
                epsilon,
                points,
            )?
            .spectrum),
            Preset::Parabola => Ok(project_initial(
                |x| chirp(epsilon, x) * (x * (1.0 - x)),
                n,
                epsilon,
                points,
            )?
            .spectrum),
            Preset::Random(seed) => SineSpectrum::random(n, epsilon, seed)?.unit_l2(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norms() {
        let s = SineSpectrum::new(vec![c(1.0, 0.0), c(0.0, 0.0)], 0.0).unwrap();
        assert_eq!(s.l2_norm(), 1.0);
        let s = SineSpectrum::new(vec![c(0.6, 0.0), c(0.8, 0.0)], 0.0).unwrap();
        assert!((s.l2_norm() - 1.0).abs() < 1e-15);
        let s = SineSpectrum::new(vec![c(1.0, 0.0); 3], 0.0).unwrap();
        assert!((s.l2_norm() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn canonical_and_padding() {
        let s = SineSpectrum::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 0.2).unwrap();
        assert_eq!(s.canonical().len(), 1);
        assert_eq!(s.padded(5).len(), 5);
        assert_eq!(s.padded(5).canonical(), s.canonical());
        assert_eq!(SineSpectrum::zero(3, 0.0).unwrap().canonical().len(), 1);
    }

    #[test]
    fn project_chirped_mode() {
        let eps = 0.5;
        let u0 = |x: f64| chirp(eps, x) * SQRT_2 * (PI * x).sin();
        let p = project_initial(u0, 4, eps, 256).unwrap();
        let a = p.spectrum.coefficients();
        assert!((a[0] - c(1.0, 0.0)).norm() < 1e-10);
        for v in &a[1..] {
            assert!(v.norm() < 1e-10);
        }
        assert!(p.reconstruction_error < 1e-10);
    }

    #[test]
    fn project_plain_sine() {
        let u0 = |x: f64| C64::new(SQRT_2 * (2.0 * PI * x).sin(), 0.0);
        let p = project_initial(u0, 4, 0.0, 256).unwrap();
        let want = [0.0, 1.0, 0.0, 0.0];
        for (a, w) in p.spectrum.coefficients().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn resolution_error() {
        let r = project_initial(|_| c(1.0, 0.0), 16, 0.0, 63);
        assert!(matches!(r, Err(Error::Resolution { required: 64, .. })));
    }

    #[test]
    fn h1_single_modes() {
        let s = SineSpectrum::mode(1, 1, 0.0).unwrap();
        let h = s.h1_seminorms();
        assert!((h.spectral - 1.0).abs() < 1e-15);
        assert!((h.exact - PI).abs() < 1e-9);
        let s = SineSpectrum::mode(2, 2, 0.0).unwrap();
        assert!((s.h1_seminorms().exact - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = SineSpectrum::random(6, 0.7, 3).unwrap();
        let h = 1e-6;
        for x in [0.1, 0.45, 0.9] {
            let fd = (s.reconstruct(x + h) - s.reconstruct(x - h)) / (2.0 * h);
            assert!((fd - s.derivative(x)).norm() < 1e-6);
        }
    }

    #[test]
    fn presets_parse_and_display() {
        for name in ["mode:3", "hat", "parabola", "random:42"] {
            let p: Preset = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        for bad in ["mode:0", "mode", "random", "wave", "hat:1"] {
            assert!(bad.parse::<Preset>().is_err(), "{bad}");
        }
        let r = Preset::Random(7).spectrum(8, 0.5).unwrap();
        assert!((r.l2_norm() - 1.0).abs() < 1e-14);
        assert_eq!(Preset::Mode(3).spectrum(2, 0.0).unwrap().len(), 3);
    }

    #[test]
    fn random_is_deterministic() {
        let a = SineSpectrum::random(5, 0.1, 9).unwrap();
        let b = SineSpectrum::random(5, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, SineSpectrum::random(5, 0.1, 10).unwrap());
    }
}
