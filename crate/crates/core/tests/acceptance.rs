//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use mws_core::control::{
    adjoint_defect, adjoint_truncation_error, duality_residual, steer, DualityDiscretization,
};
use mws_core::energy::{check_first_identity, check_second_bounds, energies, f_variation_residual};
use mws_core::exact::{bn_gram, bn_inner_products, counterexample_mode, ExactSolution};
use mws_core::observability::{
    admissibility_constant, admissibility_ratio_exact, boundary_gramian, holder_chain,
    lp_integral, lp_normalised_ratio, multiplier_residual, observability_constant_estimate,
    point_gramian, random_search_min, MultiplierFunction, ObservationKind,
};
use mws_core::pde::{self, inner, l2_norm, FixedState};
use mws_core::spectral::SineSpectrum;
use mws_core::stats::{fit_line, observed_orders};
use mws_core::verify::auto_steps;
use mws_core::{BoundaryCurve, C64};

type Outcome = Result<String, String>;

fn pass_if(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn orders_within(orders: &[f64], lo: f64, hi: f64) -> bool {
    orders.iter().all(|o| *o >= lo && *o <= hi)
}

fn linear(eps: f64, tau: f64) -> BoundaryCurve {
    BoundaryCurve::linear(eps, tau).unwrap()
}

const GRID: usize = 256;

/// 1. ℓ(τ)E(τ) = E(0).
fn first_energy_identity() -> Outcome {
    let mut worst_exact: f64 = 0.0;
    let mut worst_pde: f64 = 0.0;
    for (cell, (eps, tau)) in [0.1, 0.5].iter().flat_map(|e| [0.5, 1.0, 2.0].map(|t| (*e, t))).enumerate() {
        let s = SineSpectrum::random(8, eps, 100 + cell as u64).unwrap().unit_l2().unwrap();
        let curve = linear(eps, tau);
        let steps = auto_steps(8, tau, GRID);
        let exact = ExactSolution::new(s.clone()).unwrap().trajectory(tau, GRID, steps).unwrap();
        worst_exact = worst_exact.max(check_first_identity(&energies(&exact).unwrap(), &curve).unwrap());
        let traj = pde::solve(&s, &curve, tau, GRID, steps).unwrap();
        worst_pde = worst_pde.max(check_first_identity(&energies(&traj).unwrap(), &curve).unwrap());
    }
    // refinement of the solver residual: (M, steps) doubled together
    let (eps, tau) = (0.5, 1.0);
    let s = SineSpectrum::random(8, eps, 100).unwrap().unit_l2().unwrap();
    let curve = linear(eps, tau);
    let base = auto_steps(8, tau, GRID) / 4;
    let residuals: Vec<f64> = [1usize, 2, 4]
        .iter()
        .map(|&f| {
            let traj = pde::solve(&s, &curve, tau, 64 * f, base * f).unwrap();
            check_first_identity(&energies(&traj).unwrap(), &curve).unwrap()
        })
        .collect();
    let orders = observed_orders(&residuals);
    pass_if(
        worst_exact < 1e-8 && worst_pde < 1e-3 && orders.iter().all(|o| *o >= 1.8),
        format!("exact max {worst_exact:.2e} (< 1e-8), solver max {worst_pde:.2e} (< 1e-3), orders {orders:.3?} (>= 1.8)"),
    )
}

/// 2. π²E(0)/ℓ ≤ F ≤ ℓF(0) and the variation-of-constants residual.
fn second_energy_bounds() -> Outcome {
    let mut all_bounds = true;
    let mut worst_var: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for (cell, (eps, tau)) in [0.1, 0.5].iter().flat_map(|e| [0.5, 1.0, 2.0].map(|t| (*e, t))).enumerate() {
        let s = SineSpectrum::random(8, eps, 100 + cell as u64).unwrap().unit_l2().unwrap();
        let curve = linear(eps, tau);
        let steps = auto_steps(8, tau, GRID);
        let exact = ExactSolution::new(s.clone()).unwrap().trajectory(tau, GRID, steps).unwrap();
        let en = energies(&exact).unwrap();
        let b = check_second_bounds(&en, &curve).unwrap();
        worst_var = worst_var.max(f_variation_residual(&en, &curve).unwrap());
        let traj = pde::solve(&s, &curve, tau, GRID, steps).unwrap();
        let pb = check_second_bounds(&energies(&traj).unwrap(), &curve).unwrap();
        all_bounds &= b.lower_ok && b.upper_ok && pb.lower_ok && pb.upper_ok;
        min_margin = min_margin.min(b.lower_margin).min(pb.lower_margin);
    }
    pass_if(
        all_bounds && worst_var < 1e-4,
        format!("bounds hold at every sample: {all_bounds} (min lower margin {min_margin:.3}), F residual max {worst_var:.2e} (< 1e-4)"),
    )
}

/// 3. Orthonormality of b_n on [0, τ] and the shifted-phase counterexample.
fn orthonormality() -> Outcome {
    let n = 8;
    let points = 200 * n * n;
    let mut worst_gram: f64 = 0.0;
    let mut worst_ce: f64 = 0.0;
    for eps in [0.2, 0.5, 1.0] {
        let g = bn_gram(eps, n, points).unwrap();
        for r in 0..n {
            for c in 0..n {
                let id = if r == c { 1.0 } else { 0.0 };
                worst_gram = worst_gram.max((g[(r, c)] - C64::new(id, 0.0)).norm());
            }
        }
        let ip = bn_inner_products(|t| counterexample_mode(eps, t), eps, n, points).unwrap();
        worst_ce = worst_ce.max(ip.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    pass_if(
        worst_gram < 1e-6 && worst_ce < 1e-6,
        format!("max |Gram - I| {worst_gram:.2e}, max counterexample product {worst_ce:.2e} (both < 1e-6)"),
    )
}

/// 4. Multiplier identity on exact trajectories.
fn multiplier_identity() -> Outcome {
    let (eps, tau) = (0.5, 0.5);
    let sol = ExactSolution::new(SineSpectrum::random(4, eps, 41).unwrap().unit_l2().unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    let mut all_orders = Vec::new();
    for q in [MultiplierFunction::left(), MultiplierFunction::right()] {
        let residuals: Vec<f64> = [(64usize, 200usize), (128, 400), (256, 800)]
            .iter()
            .map(|&(m, k)| multiplier_residual(&sol.trajectory(tau, m, k).unwrap(), &q).unwrap().residual)
            .collect();
        let fine = multiplier_residual(&sol.trajectory(tau, GRID, auto_steps(4, tau, GRID) * 2).unwrap(), &q)
            .unwrap()
            .residual;
        worst = worst.max(fine);
        all_orders.extend(observed_orders(&residuals));
    }
    pass_if(
        worst < 1e-4 && orders_within(&all_orders, 1.7, 2.3),
        format!("residual max {worst:.2e} (< 1e-4), refinement orders {all_orders:.3?} (~2)"),
    )
}

/// 5. Admissibility: output / |u0|²_H¹ ≤ 2(C₁_left + C₁_right).
fn admissibility() -> Outcome {
    let (eps, tau) = (0.5, 1.0);
    let curve = linear(eps, tau);
    let bound = 2.0
        * (admissibility_constant(&curve, tau, &MultiplierFunction::left()).unwrap()
            + admissibility_constant(&curve, tau, &MultiplierFunction::right()).unwrap());
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let s = SineSpectrum::random(8, eps, 500 + seed).unwrap().unit_h1().unwrap();
        let ratio = admissibility_ratio_exact(&ExactSolution::new(s).unwrap(), tau, None).unwrap();
        worst = worst.max(ratio);
    }
    let cell = SineSpectrum::mode(1, 1, 0.0).unwrap().unit_h1().unwrap();
    let cell_ratio = admissibility_ratio_exact(&ExactSolution::new(cell).unwrap(), tau, None).unwrap();
    let cell_err = (cell_ratio - 4.0 * tau).abs();
    pass_if(
        worst <= bound && cell_err < 1e-6,
        format!("max ratio {worst:.4} <= bound {bound:.4} over 100 spectra; eps=0 cell |ratio - 4 tau| = {cell_err:.2e} (< 1e-6)"),
    )
}

/// 6. Both-endpoint Gramian: positivity, decay-law shape, random-search oracle.
fn boundary_observability() -> Outcome {
    let eps = 0.5;
    let taus = [0.25, 0.5, 1.0, 2.0];
    let mut min_eig = f64::INFINITY;
    let mut fits = Vec::new();
    let mut worst_oracle: f64 = 0.0;
    for n in [4usize, 8, 12] {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &tau in &taus {
            let g = boundary_gramian(eps, tau, n, ObservationKind::BoundaryBoth).unwrap();
            let est = observability_constant_estimate(&g).unwrap();
            min_eig = min_eig.min(est.c_est);
            x.push(1.0 / tau);
            y.push(est.c_est.ln());
            if n == 8 {
                let oracle = random_search_min(&g, 100_000, 2024).unwrap();
                worst_oracle = worst_oracle.max((oracle - est.c_est).abs() / est.c_est);
            }
        }
        fits.push(fit_line(&x, &y));
    }
    let shape_ok = fits.iter().all(|f| f.slope < 0.0 && f.r_squared > 0.95);
    let fit_text: Vec<String> = fits.iter().map(|f| format!("slope {:.3} R2 {:.4}", f.slope, f.r_squared)).collect();
    pass_if(
        min_eig > 0.0 && shape_ok && worst_oracle < 0.05,
        format!("min c_est {min_eig:.4} (> 0); N=4/8/12: {}; oracle gap at N=8 {:.2}% (< 5%)", fit_text.join(", "), 100.0 * worst_oracle),
    )
}

/// 7. Point observation: kernel at the midpoint for ε = 0, positivity for ε = 0.5.
fn point_observation() -> Outcome {
    let n = 8;
    let g0 = point_gramian(0.0, 0.5, 1.0, n).unwrap();
    let e0 = g0.generalized_eigen().unwrap();
    let singular = e0.values[0] < 1e-12 * g0.trace();
    // kernel vector supported on even modes
    let v = e0.vectors.column(0);
    let odd_mass: f64 = (0..n).step_by(2).map(|i| v[i].norm_sqr()).sum();
    let even_kernel = odd_mass < 1e-20;
    let mut min_pos = f64::INFINITY;
    for a in [0.5, 1.0 / 3.0, 0.41] {
        let g = point_gramian(0.5, a, 0.25, n).unwrap();
        min_pos = min_pos.min(g.generalized_eigen().unwrap().values[0]);
    }
    pass_if(
        singular && even_kernel && min_pos > 0.0,
        format!("eps=0 min eigenvalue {:.2e} (< 1e-12 trace = {:.0e}), odd-mode mass of kernel {odd_mass:.1e}; eps=0.5 min eigenvalue {min_pos:.4e} (> 0)", e0.values[0], 1e-12 * g0.trace()),
    )
}

/// 8. Lₚ estimates: Hölder chain, two-sided bound with fitted constants, analytic single mode.
fn lp_estimates() -> Outcome {
    let (eps, a, tau) = (0.5, 0.41, 1.0);
    let mut chain_ok = true;
    let mut weighted_ok = true;
    let mut displayed_fail = 0;
    let mut bounds_ok = true;
    let mut fitted = Vec::new();
    for p in [0.5, 1.0, 1.5] {
        let mut train = Vec::new();
        for seed in 0..20 {
            let sol = ExactSolution::new(SineSpectrum::random(6, eps, 800 + seed).unwrap()).unwrap();
            let r = holder_chain(&sol, a, tau, p, None).unwrap();
            chain_ok &= r.chain_ok;
            weighted_ok &= r.four_to_two_weighted_ok;
            displayed_fail += usize::from(!r.four_to_two_ok);
            train.push(lp_normalised_ratio(&sol, a, tau, p, None).unwrap());
        }
        let k = train.iter().copied().fold(f64::INFINITY, f64::min);
        let kk = train.iter().copied().fold(0.0, f64::max);
        // held-out spectra must fall within the fitted constants up to a factor 2
        for seed in 0..20 {
            let sol = ExactSolution::new(SineSpectrum::random(6, eps, 900 + seed).unwrap()).unwrap();
            let r = lp_normalised_ratio(&sol, a, tau, p, None).unwrap();
            bounds_ok &= r >= 0.5 * k && r <= 2.0 * kk;
        }
        fitted.push(format!("p={p}: [{k:.3}, {kk:.3}]"));
    }
    let single = ExactSolution::new(SineSpectrum::mode(1, 1, 0.0).unwrap()).unwrap();
    let l1 = lp_integral(&single, 1.0 / 3.0, tau, 1.0, None).unwrap();
    let analytic_err = (l1 - 1.5f64.sqrt() * tau).abs();
    pass_if(
        chain_ok && weighted_ok && bounds_ok && analytic_err < 1e-8,
        format!(
            "Holder chain {chain_ok}, 4-to-2 with sup(2/l) weight {weighted_ok} (unweighted form failed {displayed_fail}/60), held-out within fitted constants {bounds_ok} ({}), single mode error {analytic_err:.1e} (< 1e-8)",
            fitted.join("; ")
        ),
    )
}

/// 9. Duality pairing, steering, adjoint consistency.
fn duality() -> Outcome {
    let (eps, tau) = (0.5, 1.0);
    let curve = linear(eps, tau);
    let s = SineSpectrum::random(4, eps, 77).unwrap();
    let default = duality_residual(&s, &curve, tau, ObservationKind::BoundaryBoth, DualityDiscretization::default())
        .unwrap()
        .residual;
    let ladder: Vec<f64> = [500usize, 1000, 2000]
        .iter()
        .map(|&k| {
            duality_residual(&s, &curve, tau, ObservationKind::BoundaryBoth, DualityDiscretization::Series { steps: k })
                .unwrap()
                .residual
        })
        .collect();
    let duality_orders = observed_orders(&ladder);

    let g = boundary_gramian(eps, tau, 6, ObservationKind::BoundaryBoth).unwrap();
    let mut worst_steer: f64 = 0.0;
    for seed in 0..5 {
        let target = SineSpectrum::random(6, eps, 300 + seed).unwrap().coefficients().to_vec();
        worst_steer = worst_steer.max(steer(&g, &target, None).unwrap().residual);
    }

    let probe = |y: f64| {
        let (s1, c1) = (PI * y).sin_cos();
        let (s2, c2) = (2.0 * PI * y).sin_cos();
        (
            C64::new(s1, s2),
            C64::new(PI * c1, 2.0 * PI * c2),
            C64::new(-PI * PI * s1, -4.0 * PI * PI * s2),
        )
    };
    let trunc: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&m| adjoint_truncation_error(&curve, 0.7, m, probe).unwrap())
        .collect();
    let adj_orders = observed_orders(&trunc);
    let w = FixedState::from_fn(0.7, 64, |y| probe(y).0);
    let v = FixedState::from_fn(0.7, 64, |y| C64::new(y * (1.0 - y), 0.0));
    let discrete = adjoint_defect(&curve, 0.7, &w.values, &v.values).unwrap();
    pass_if(
        default < 1e-3 && orders_within(&duality_orders, 1.8, 2.2) && worst_steer < 1e-3 && orders_within(&adj_orders, 1.8, 2.2),
        format!(
            "pairing residual {default:.2e} (< 1e-3), orders {duality_orders:.3?}; steer residual max {worst_steer:.2e} (< 1e-3); A* truncation orders {adj_orders:.3?}, discrete duality defect {discrete:.1e}"
        ),
    )
}

/// 10. Solver against the exact series; norm conservation on a fixed wall.
fn solver_validation() -> Outcome {
    let (eps, tau) = (0.5, 1.0);
    let curve = linear(eps, tau);
    let sol = ExactSolution::new(
        SineSpectrum::new(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)], eps).unwrap(),
    )
    .unwrap();
    let errors: Vec<f64> = [(64usize, 256usize), (128, 512), (256, 1024)]
        .iter()
        .map(|&(m, k)| {
            let last = pde::solve_final(sol.spectrum(), &curve, tau, m, k).unwrap();
            let exact = sol.fixed_state(tau, m).unwrap();
            let d: Vec<C64> = last.values.iter().zip(&exact.values).map(|(x, y)| x - y).collect();
            l2_norm(&d)
        })
        .collect();
    let orders = observed_orders(&errors);

    let still = linear(0.0, 1.0);
    let s = SineSpectrum::random(8, 0.0, 5).unwrap();
    let steps = 2000;
    let traj = pde::solve(&s, &still, 1.0, GRID, steps).unwrap();
    let n0 = inner(&traj.states[0].values, &traj.states[0].values).re;
    let drift = traj
        .states
        .iter()
        .map(|st| (inner(&st.values, &st.values).re - n0).abs() / n0)
        .fold(0.0, f64::max);
    let per_1000 = drift * 1000.0 / steps as f64;
    pass_if(
        orders_within(&orders, 1.8, 2.2) && per_1000 < 1e-10,
        format!("L2 errors {errors:.3?}, orders {orders:.3?} (in [1.8, 2.2]); eps=0 norm drift {per_1000:.1e} per 1000 steps (< 1e-10)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("first-energy identity", first_energy_identity),
        ("second-energy bounds", second_energy_bounds),
        ("orthonormality", orthonormality),
        ("multiplier identity", multiplier_identity),
        ("admissibility", admissibility),
        ("boundary observability", boundary_observability),
        ("point observation", point_observation),
        ("Lp estimates", lp_estimates),
        ("duality", duality),
        ("solver validation", solver_validation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
