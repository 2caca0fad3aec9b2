//! File formats. Floats are written with 17 significant digits so outputs can
//! be diffed byte for byte across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyRow;
use crate::error::{Error, Result};
use crate::pde::{TracePoint, Trajectory};
use crate::spectral::SineSpectrum;
use crate::C64;

/// `{:.16e}` — 17 significant digits, round-trips every f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,re_left,im_left,re_right,im_right,abs2_left,abs2_right` with the
/// moving-frame Neumann traces u_x(0,t), u_x(ℓ(t),t).
pub fn write_traces_csv(path: impl AsRef<Path>, traces: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "re_left", "im_left", "re_right", "im_right", "abs2_left", "abs2_right"])?;
    for p in traces {
        let (l, r) = (p.moving_left, p.moving_right);
        w.write_record([
            fmt_f64(p.t),
            fmt_f64(l.re),
            fmt_f64(l.im),
            fmt_f64(r.re),
            fmt_f64(r.im),
            fmt_f64(l.norm_sqr()),
            fmt_f64(r.norm_sqr()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,E,F,lE_residual,F_var_residual,poincare_margin`
pub fn write_energy_csv(path: impl AsRef<Path>, rows: &[EnergyRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "E", "F", "lE_residual", "F_var_residual", "poincare_margin"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.e),
            fmt_f64(r.f),
            fmt_f64(r.le_residual),
            fmt_f64(r.f_var_residual),
            fmt_f64(r.poincare_margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One cell of an observability sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub tau: f64,
    pub n: usize,
    pub kind: String,
    pub c_est: f64,
    pub c_upper: f64,
    pub cond: f64,
    pub t_param: f64,
    /// False when the Gramian has a numerical kernel.
    pub observable: bool,
}

/// `epsilon,tau,N,kind,c_est,C_est,cond,T_param,observable`
pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    let file = File::create(path)?;
    write_sweep(file, rows)
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "tau", "N", "kind", "c_est", "C_est", "cond", "T_param", "observable"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.epsilon),
            fmt_f64(r.tau),
            r.n.to_string(),
            r.kind.clone(),
            fmt_f64(r.c_est),
            fmt_f64(r.c_upper),
            fmt_f64(r.cond),
            fmt_f64(r.t_param),
            r.observable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct SpectrumRow {
    n: usize,
    re: f64,
    im: f64,
}

/// Reads `n,re,im` rows (1-based n, any order, gaps are zero).
pub fn read_spectrum_csv(path: impl AsRef<Path>, epsilon: f64) -> Result<SineSpectrum> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: SpectrumRow = row?;
        if row.n == 0 {
            return Err(Error::Invalid("spectrum rows are numbered from n = 1".into()));
        }
        rows.push(row);
    }
    let len = rows.iter().map(|r| r.n).max().unwrap_or(0);
    if len == 0 {
        return Err(Error::Invalid("empty spectrum file".into()));
    }
    let mut c = vec![C64::new(0.0, 0.0); len];
    for row in rows {
        c[row.n - 1] = C64::new(row.re, row.im);
    }
    SineSpectrum::new(c, epsilon)
}

pub fn write_spectrum_csv(path: impl AsRef<Path>, spectrum: &SineSpectrum) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "re", "im"])?;
    for (i, c) in spectrum.coefficients().iter().enumerate() {
        w.write_record([(i + 1).to_string(), fmt_f64(c.re), fmt_f64(c.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Binary state dump, little endian:
/// `u64 M, u64 steps, f64 τ`, then for every stored state (steps + 1 of
/// them) the M + 1 values as `f32 re, f32 im` pairs, row-major in time.
pub fn write_dump(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let m = traj.grid() as u64;
    let steps = (traj.len() - 1) as u64;
    let tau = traj.states.last().expect("non-empty").t;
    out.write_all(&m.to_le_bytes())?;
    out.write_all(&steps.to_le_bytes())?;
    out.write_all(&tau.to_le_bytes())?;
    for s in &traj.states {
        for v in &s.values {
            out.write_all(&(v.re as f32).to_le_bytes())?;
            out.write_all(&(v.im as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Header of a dump written by [`write_dump`].
pub fn read_dump_header(bytes: &[u8]) -> Result<(u64, u64, f64)> {
    if bytes.len() < 24 {
        return Err(Error::Invalid("dump shorter than its header".into()));
    }
    let u = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    Ok((u(0), u(8), f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"))))
}
