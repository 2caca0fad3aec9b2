//! One function per subcommand. Each prints a one-line JSON (or CSV) summary
//! on stdout and writes its files under `cfg.out`.

use std::fs;
use std::path::PathBuf;

use mws_core::control;
use mws_core::curves::check_observability_window;
use mws_core::energy::{self, check_first_identity, check_second_bounds, f_variation_residual};
use mws_core::io::{self, SweepRow};
use mws_core::observability::{
    admissibility_constant, admissibility_ratio_exact, admissibility_ratio_trajectory,
    boundary_gramian, check_observable, holder_chain, lp_normalised_ratio, lp_observation,
    observability_constant_estimate, point_gramian, t_param, GramianMatrix, MultiplierFunction,
};
use mws_core::verify::{self, auto_steps, VerifyConfig};
use mws_core::{pde, BoundaryCurve, Error, ExactSolution, ObservationKind, SineSpectrum, Trajectory, C64};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{CurveSpec, RunConfig};
use crate::output::to_json;
use crate::CliError;

const WINDOW_GRID: usize = 4097;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cfg.out.display())))?;
    Ok(cfg.out.clone())
}

fn print<T: Serialize>(value: &T) {
    println!("{}", to_json(value));
}

/// Names the first violated growth-window condition, if any.
fn window_violation(curve: &BoundaryCurve, tau: f64) -> Result<Option<String>, CliError> {
    let w = check_observability_window(curve, tau, WINDOW_GRID)?;
    let why = if !w.positive_derivative {
        Some("l'(t) > 0 on (0, tau)")
    } else if !w.product_bound_ok {
        Some("l'(t) l(t) < 1/pi on (0, tau)")
    } else if w.integrated_consequence <= 0.0 {
        Some("2 tau + pi (1 - l(tau)^2) > 0")
    } else {
        None
    };
    Ok(why.map(|c| format!("growth window violated: {c} fails for {} on tau = {tau}", curve_label(curve))))
}

fn curve_label(curve: &BoundaryCurve) -> String {
    match *curve.kind() {
        mws_core::CurveKind::Linear { epsilon } => format!("linear:{epsilon}"),
        mws_core::CurveKind::Periodic { epsilon, omega } => format!("periodic:{epsilon}:{omega}"),
        mws_core::CurveKind::Tabulated(_) => "tabulated".into(),
    }
}

/// The wall, after the optional window gate.
fn checked_curve(cfg: &RunConfig) -> Result<(CurveSpec, BoundaryCurve), CliError> {
    let spec = cfg.curve_spec()?;
    let curve = spec.build(cfg.tau)?;
    if cfg.check_window {
        if let Some(msg) = window_violation(&curve, cfg.tau)? {
            return Err(CliError::Config(msg));
        }
    }
    Ok((spec, curve))
}

/// Commands built on the exact series or closed-form Gramians need ε ≥ 0.
fn linear_epsilon(spec: &CurveSpec, command: &str) -> Result<f64, CliError> {
    let eps = spec.linear_epsilon().ok_or_else(|| {
        CliError::Config(format!("{command} needs a linear wall (linear:eps), got {spec}"))
    })?;
    if eps < 0.0 {
        return Err(CliError::Config(format!(
            "{command} needs epsilon >= 0 (expanding wall), got epsilon = {eps}"
        )));
    }
    Ok(eps)
}

/// Initial data for the solver: chirped sine series for linear walls, plain
/// sine series otherwise.
fn solver_spectrum(cfg: &RunConfig, spec: &CurveSpec) -> Result<SineSpectrum, CliError> {
    cfg.spectrum(spec.linear_epsilon().unwrap_or(0.0))
}

fn solver_steps(cfg: &RunConfig, spectrum: &SineSpectrum) -> usize {
    cfg.steps
        .unwrap_or_else(|| auto_steps(spectrum.canonical().len(), cfg.tau, cfg.grid))
}

fn solve(cfg: &RunConfig, spec: &CurveSpec, curve: &BoundaryCurve) -> Result<Trajectory, CliError> {
    let spectrum = solver_spectrum(cfg, spec)?;
    let steps = solver_steps(cfg, &spectrum);
    log::info!("solver: M = {}, K = {steps}", cfg.grid);
    Ok(pde::solve(&spectrum, curve, cfg.tau, cfg.grid, steps)?)
}

/// Exact-series trajectory for linear walls with ε ≥ 0, solver otherwise.
fn trajectory(cfg: &RunConfig, spec: &CurveSpec, curve: &BoundaryCurve) -> Result<(Trajectory, &'static str), CliError> {
    match spec.linear_epsilon() {
        Some(eps) if eps >= 0.0 => {
            let sol = ExactSolution::new(cfg.spectrum(eps)?)?;
            let steps = solver_steps(cfg, sol.spectrum());
            Ok((sol.trajectory(cfg.tau, cfg.grid, steps)?, "exact"))
        }
        _ => Ok((solve(cfg, spec, curve)?, "solver")),
    }
}

#[derive(Serialize)]
struct EnergySummary {
    e_final: f64,
    f_final: f64,
    first_identity_residual: f64,
    f_variation_residual: f64,
    second_lower_ok: bool,
    second_upper_ok: bool,
    second_bounds_guaranteed: bool,
}

fn energy_summary(traj: &Trajectory, curve: &BoundaryCurve) -> Result<(EnergySummary, energy::EnergyTrace), CliError> {
    let trace = energy::energies(traj)?;
    let bounds = check_second_bounds(&trace, curve)?;
    let summary = EnergySummary {
        e_final: *trace.e.last().expect("non-empty"),
        f_final: *trace.f.last().expect("non-empty"),
        first_identity_residual: check_first_identity(&trace, curve)?,
        f_variation_residual: f_variation_residual(&trace, curve)?,
        second_lower_ok: bounds.lower_ok,
        second_upper_ok: bounds.upper_ok,
        second_bounds_guaranteed: bounds.theory_applies,
    };
    Ok((summary, trace))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, curve) = checked_curve(cfg)?;
    let dir = out_dir(cfg)?;
    let traj = solve(cfg, &spec, &curve)?;
    let traces = dir.join("traces.csv");
    io::write_traces_csv(&traces, &traj.traces)?;
    let dump = if cfg.dump {
        let path = dir.join("state.bin");
        io::write_dump(&path, &traj)?;
        Some(path)
    } else {
        None
    };
    let (energy, _) = energy_summary(&traj, &curve)?;
    let window = check_observability_window(&curve, cfg.tau, WINDOW_GRID)?;
    print(&json!({
        "command": "simulate",
        "curve": spec.to_string(),
        "tau": cfg.tau,
        "grid": cfg.grid,
        "steps": traj.len() - 1,
        "energy": energy,
        "window": window,
        "traces": traces,
        "dump": dump,
    }));
    Ok(())
}

pub fn traces(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, curve) = checked_curve(cfg)?;
    let dir = out_dir(cfg)?;
    let (traj, source) = trajectory(cfg, &spec, &curve)?;
    let path = dir.join("traces.csv");
    io::write_traces_csv(&path, &traj.traces)?;
    print(&json!({
        "command": "traces",
        "source": source,
        "samples": traj.traces.len(),
        "traces": path,
    }));
    Ok(())
}

pub fn energy(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, curve) = checked_curve(cfg)?;
    let dir = out_dir(cfg)?;
    let (traj, source) = trajectory(cfg, &spec, &curve)?;
    let (summary, trace) = energy_summary(&traj, &traj.curve)?;
    let path = dir.join("energy.csv");
    io::write_energy_csv(&path, &energy::report_rows(&trace, &traj.curve)?)?;
    print(&json!({
        "command": "energy",
        "source": source,
        "energy": summary,
        "table": path,
    }));
    Ok(())
}

pub fn admissibility(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, curve) = checked_curve(cfg)?;
    let (ratio, source) = match spec.linear_epsilon() {
        Some(eps) if eps >= 0.0 => {
            let sol = ExactSolution::new(cfg.spectrum(eps)?)?;
            (admissibility_ratio_exact(&sol, cfg.tau, cfg.quadrature_points)?, "exact")
        }
        _ => (admissibility_ratio_trajectory(&solve(cfg, &spec, &curve)?)?, "solver"),
    };
    let c1_left = admissibility_constant(&curve, cfg.tau, &MultiplierFunction::left())?;
    let c1_right = admissibility_constant(&curve, cfg.tau, &MultiplierFunction::right())?;
    let bound = 2.0 * (c1_left + c1_right);
    print(&json!({
        "command": "admissibility",
        "source": source,
        "curve": spec.to_string(),
        "tau": cfg.tau,
        "ratio": ratio,
        "c1_left": c1_left,
        "c1_right": c1_right,
        "bound": bound,
        "within_bound": ratio <= bound,
    }));
    Ok(())
}

fn gramian_for(kind: ObservationKind, eps: f64, tau: f64, n: usize) -> Result<GramianMatrix, Error> {
    match kind {
        ObservationKind::Point { a } => point_gramian(eps, a, tau, n),
        k => boundary_gramian(eps, tau, n, k),
    }
}

/// One constants row; a numerical kernel only flags the row.
fn cell(kind: ObservationKind, eps: f64, tau: f64, n: usize) -> Result<(SweepRow, Option<Vec<C64>>), Error> {
    let g = gramian_for(kind, eps, tau, n)?;
    let kernel = match check_observable(&g) {
        Ok(()) => None,
        Err(Error::NonObservable { kernel, .. }) => Some(kernel),
        Err(e) => return Err(e),
    };
    let est = observability_constant_estimate(&g)?;
    let row = SweepRow {
        epsilon: eps,
        tau,
        n,
        kind: kind.to_string(),
        c_est: est.c_est,
        c_upper: est.c_upper,
        cond: est.cond,
        t_param: t_param(eps, tau),
        observable: kernel.is_none(),
    };
    Ok((row, kernel))
}

fn emit_rows(path: PathBuf, rows: &[SweepRow]) -> Result<(), CliError> {
    io::write_sweep_csv(&path, rows)?;
    io::write_sweep(std::io::stdout().lock(), rows)?;
    Ok(())
}

pub fn observability(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, _) = checked_curve(cfg)?;
    let eps = linear_epsilon(&spec, "observability")?;
    let dir = out_dir(cfg)?;
    let (row, _) = cell(cfg.observation()?, eps, cfg.tau, cfg.modes)?;
    emit_rows(dir.join("observability.csv"), &[row])
}

fn point_a(cfg: &RunConfig, command: &str) -> Result<f64, CliError> {
    match cfg.observation()? {
        ObservationKind::Point { a } => Ok(a),
        other => Err(CliError::Config(format!("{command} needs --obs point:a, got {other}"))),
    }
}

pub fn point_obs(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, _) = checked_curve(cfg)?;
    let eps = linear_epsilon(&spec, "point-obs")?;
    let a = point_a(cfg, "point-obs")?;
    let dir = out_dir(cfg)?;
    let (row, kernel) = cell(ObservationKind::Point { a }, eps, cfg.tau, cfg.modes)?;
    io::write_sweep_csv(dir.join("point_obs.csv"), std::slice::from_ref(&row))?;
    let kernel: Option<Vec<[f64; 2]>> = kernel.map(|k| k.iter().map(|c| [c.re, c.im]).collect());
    print(&json!({
        "command": "point-obs",
        "a": a,
        "epsilon": eps,
        "tau": cfg.tau,
        "N": cfg.modes,
        "c_est": row.c_est,
        "C_est": row.c_upper,
        "cond": row.cond,
        "observable": row.observable,
        "kernel": kernel,
    }));
    Ok(())
}

pub fn lp(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, _) = checked_curve(cfg)?;
    let eps = linear_epsilon(&spec, "lp")?;
    let a = point_a(cfg, "lp")?;
    let sol = ExactSolution::new(cfg.spectrum(eps)?)?;
    let q = cfg.quadrature_points;
    print(&json!({
        "command": "lp",
        "a": a,
        "p": cfg.p,
        "epsilon": eps,
        "tau": cfg.tau,
        "lp_observation": lp_observation(&sol, a, cfg.tau, cfg.p, q)?,
        "normalised_ratio": lp_normalised_ratio(&sol, a, cfg.tau, cfg.p, q)?,
        "holder": holder_chain(&sol, a, cfg.tau, cfg.p, q)?,
    }));
    Ok(())
}

pub fn gramian(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, _) = checked_curve(cfg)?;
    let eps = linear_epsilon(&spec, "gramian")?;
    let dir = out_dir(cfg)?;
    let g = gramian_for(cfg.observation()?, eps, cfg.tau, cfg.modes)?;
    let path = dir.join("gramian.csv");
    let mut rows = vec![vec!["m".to_string(), "n".into(), "re".into(), "im".into()]];
    for r in 0..g.modes() {
        for c in 0..g.modes() {
            let v = g.g()[(r, c)];
            rows.push(vec![(r + 1).to_string(), (c + 1).to_string(), io::fmt_f64(v.re), io::fmt_f64(v.im)]);
        }
    }
    let text: String = rows.iter().map(|r| r.join(",") + "\n").collect();
    fs::write(&path, text)?;
    let eig = g.generalized_eigen()?;
    print(&json!({
        "command": "gramian",
        "kind": g.kind.to_string(),
        "N": g.modes(),
        "epsilon": eps,
        "tau": cfg.tau,
        "trace": g.trace(),
        "hermitian_defect": g.hermitian_defect(),
        "generalized_eigenvalues": eig.values,
        "matrix": path,
    }));
    Ok(())
}

pub fn steer(cfg: &RunConfig) -> Result<(), CliError> {
    let (spec, _) = checked_curve(cfg)?;
    let eps = linear_epsilon(&spec, "steer")?;
    let dir = out_dir(cfg)?;
    let g = gramian_for(cfg.observation()?, eps, cfg.tau, cfg.modes)?;
    let mut target = cfg.spectrum(eps)?.coefficients().to_vec();
    if target[cfg.modes.min(target.len())..].iter().any(|c| c.norm_sqr() != 0.0) {
        return Err(CliError::Config(format!(
            "target spectrum has {} modes, more than --modes {}",
            target.len(),
            cfg.modes
        )));
    }
    target.resize(cfg.modes, C64::new(0.0, 0.0));
    let solution = control::steer(&g, &target, cfg.steps)?;
    let report = solution.report(&g);
    let json = to_json(&report);
    fs::write(dir.join("control.json"), format!("{json}\n"))?;
    println!("{json}");
    Ok(())
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.curve_spec()?;
    let curve = spec.build(cfg.tau)?;
    let dir = out_dir(cfg)?;
    let vcfg = VerifyConfig {
        tau: cfg.tau,
        grid: cfg.grid,
        steps: cfg.steps,
        modes: cfg.modes,
        seed: cfg.seed,
    };
    let report = verify::run_suite(&curve, &vcfg)?;
    let json = to_json(&report);
    fs::write(dir.join("verify.json"), format!("{json}\n"))?;
    println!("{json}");
    let failures = report.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        let names: Vec<String> = failures
            .iter()
            .map(|c| format!("{} (value {:.3e}, tolerance {:.3e})", c.name, c.value, c.tolerance))
            .collect();
        Err(CliError::Verify(names.join("; ")))
    }
}

pub fn sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<(), CliError> {
    let (spec, _) = checked_curve(cfg)?;
    let kind = cfg.observation()?;
    let epsilons = if cfg.sweep.epsilons.is_empty() {
        vec![linear_epsilon(&spec, "sweep")?]
    } else {
        cfg.sweep.epsilons.clone()
    };
    if let Some(&e) = epsilons.iter().find(|e| **e < 0.0) {
        return Err(CliError::Config(format!("sweep needs epsilon >= 0, got {e}")));
    }
    let taus = if cfg.sweep.taus.is_empty() { vec![cfg.tau] } else { cfg.sweep.taus.clone() };
    let modes = if cfg.sweep.modes.is_empty() { vec![cfg.modes] } else { cfg.sweep.modes.clone() };
    let mut cells = Vec::with_capacity(epsilons.len() * taus.len() * modes.len());
    for &e in &epsilons {
        for &t in &taus {
            for &n in &modes {
                cells.push((e, t, n));
            }
        }
    }
    let dir = out_dir(cfg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Solver(format!("cannot start worker pool: {e}")))?;
    log::info!("sweep: {} cells on {} workers", cells.len(), pool.current_num_threads());
    // collect keeps cell order whatever the scheduling
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(e, t, n)| cell(kind, e, t, n).map(|(row, _)| row))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    emit_rows(dir.join("sweep.csv"), &rows)
}
