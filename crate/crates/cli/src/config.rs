//! Run configuration: JSON file plus flag overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mws_core::curves::TabulatedCurve;
use mws_core::io::read_spectrum_csv;
use mws_core::pde::MIN_GRID;
use mws_core::spectral::Preset;
use mws_core::{BoundaryCurve, ObservationKind, SineSpectrum};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Wall trajectory as given on the command line: `linear:ε`,
/// `periodic:ε:ω` or `tabulated:path`.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Linear { epsilon: f64 },
    Periodic { epsilon: f64, omega: f64 },
    Tabulated(PathBuf),
}

impl FromStr for CurveSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Config(format!("bad curve spec '{s}': {why}"));
        let num = |v: &str, name: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(&format!("{name} must be a finite number")))
        };
        let parts: Vec<&str> = s.splitn(2, ':').collect();
        match parts.as_slice() {
            ["linear", rest] => Ok(CurveSpec::Linear { epsilon: num(rest, "epsilon")? }),
            ["periodic", rest] => {
                let (e, w) = rest.split_once(':').ok_or_else(|| bad("expected periodic:eps:omega"))?;
                Ok(CurveSpec::Periodic { epsilon: num(e, "epsilon")?, omega: num(w, "omega")? })
            }
            ["tabulated", path] | ["table", path] if !path.is_empty() => {
                Ok(CurveSpec::Tabulated(PathBuf::from(path)))
            }
            _ => Err(bad("expected linear:eps, periodic:eps:omega or tabulated:file")),
        }
    }
}

impl std::fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveSpec::Linear { epsilon } => write!(f, "linear:{epsilon}"),
            CurveSpec::Periodic { epsilon, omega } => write!(f, "periodic:{epsilon}:{omega}"),
            CurveSpec::Tabulated(p) => write!(f, "tabulated:{}", p.display()),
        }
    }
}

impl CurveSpec {
    /// ε of a linear wall; the exact series and Gramians need one.
    pub fn linear_epsilon(&self) -> Option<f64> {
        match *self {
            CurveSpec::Linear { epsilon } => Some(epsilon),
            _ => None,
        }
    }

    pub fn build(&self, tau: f64) -> Result<BoundaryCurve, CliError> {
        let curve = match self {
            CurveSpec::Linear { epsilon } => BoundaryCurve::linear(*epsilon, tau)?,
            CurveSpec::Periodic { epsilon, omega } => {
                BoundaryCurve::periodic(*epsilon, *omega, tau)?
            }
            CurveSpec::Tabulated(path) => {
                BoundaryCurve::tabulated(TabulatedCurve::from_csv(path)?)?.with_horizon(tau)?
            }
        };
        Ok(curve)
    }
}

/// Parameter grid of a sweep; empty lists fall back to the scalar settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub epsilons: Vec<f64>,
    pub taus: Vec<f64>,
    pub modes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub curve: String,
    /// Preset (`mode:k`, `hat`, `parabola`, `random[:seed]`) or an `n,re,im` CSV file.
    pub spectrum: String,
    pub tau: f64,
    pub grid: usize,
    /// Time steps; chosen from the stiffness of the data when absent.
    pub steps: Option<usize>,
    pub modes: usize,
    /// Time-quadrature panels for exact-series integrals; automatic when absent.
    pub quadrature_points: Option<usize>,
    /// `left`, `right`, `both` or `point:a`.
    pub obs: String,
    pub p: f64,
    pub out: PathBuf,
    pub seed: u64,
    /// Write the binary state dump next to the traces.
    pub dump: bool,
    /// Refuse to run when the growth window fails on (0, τ).
    pub check_window: bool,
    pub sweep: SweepGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curve: "linear:0.5".into(),
            spectrum: "mode:1".into(),
            tau: 1.0,
            grid: 256,
            steps: None,
            modes: 8,
            quadrature_points: None,
            obs: "both".into(),
            p: 1.0,
            out: PathBuf::from("out"),
            seed: 1,
            dump: false,
            check_window: false,
            sweep: SweepGrid::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn curve_spec(&self) -> Result<CurveSpec, CliError> {
        self.curve.parse()
    }

    pub fn observation(&self) -> Result<ObservationKind, CliError> {
        self.obs
            .parse()
            .map_err(|e| CliError::Config(format!("bad --obs '{}': {e}", self.obs)))
    }

    fn spectrum_file(&self) -> Option<&Path> {
        let p = Path::new(&self.spectrum);
        (self.spectrum.ends_with(".csv") || p.exists()).then_some(p)
    }

    /// Initial data on `modes` modes; `epsilon` sets the chirp of the exact series.
    pub fn spectrum(&self, epsilon: f64) -> Result<SineSpectrum, CliError> {
        if let Some(path) = self.spectrum_file() {
            return Ok(read_spectrum_csv(path, epsilon)?.padded(self.modes));
        }
        let preset: Preset = if self.spectrum == "random" {
            Preset::Random(self.seed)
        } else {
            self.spectrum
                .parse()
                .map_err(|e| CliError::Config(format!("bad --spectrum: {e}")))?
        };
        Ok(preset.spectrum(self.modes, epsilon)?)
    }

    /// Range and existence checks done before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let curve = self.curve_spec()?;
        if let CurveSpec::Tabulated(path) = &curve {
            if !path.is_file() {
                return bad(format!("curve table {} does not exist", path.display()));
            }
        }
        if let Some(path) = self.spectrum_file() {
            if !path.is_file() {
                return bad(format!("spectrum file {} does not exist", path.display()));
            }
        } else if self.spectrum != "random" {
            self.spectrum
                .parse::<Preset>()
                .map_err(|e| CliError::Config(format!("bad --spectrum: {e}")))?;
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau = {} must be positive and finite", self.tau));
        }
        if self.grid < MIN_GRID {
            return bad(format!("grid = {} below minimum {MIN_GRID}", self.grid));
        }
        if self.steps == Some(0) {
            return bad("steps must be at least 1".into());
        }
        if self.modes == 0 {
            return bad("modes must be at least 1".into());
        }
        if self.quadrature_points.is_some_and(|q| q < 2) {
            return bad("quadrature_points must be at least 2".into());
        }
        if !(self.p > 0.0 && self.p < 2.0) {
            return bad(format!("p = {} outside (0, 2)", self.p));
        }
        self.observation()?;
        if self.sweep.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("sweep taus must be positive".into());
        }
        if self.sweep.modes.contains(&0) {
            return bad("sweep modes must be at least 1".into());
        }
        if self.sweep.epsilons.iter().any(|e| !e.is_finite()) {
            return bad("sweep epsilons must be finite".into());
        }
        Ok(())
    }
}
