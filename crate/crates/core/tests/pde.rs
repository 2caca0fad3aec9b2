use std::f64::consts::PI;

use mws_core::pde::{self, assemble_operator, inner, l2_norm, step};
use mws_core::{BoundaryCurve, ExactSolution, FixedState, SineSpectrum, C64};
use proptest::prelude::*;

fn err_vs_exact(eps: f64, m: usize, steps: usize) -> f64 {
    let tau = 0.5;
    let sol = ExactSolution::new(SineSpectrum::random(3, eps, 4).unwrap()).unwrap();
    let curve = BoundaryCurve::linear(eps, tau).unwrap();
    let last = pde::solve_final(sol.spectrum(), &curve, tau, m, steps).unwrap();
    let exact = sol.fixed_state(tau, m).unwrap();
    let d: Vec<C64> = last.values.iter().zip(&exact.values).map(|(a, b)| a - b).collect();
    l2_norm(&d)
}

#[test]
fn converges_at_second_order() {
    for eps in [0.0, 0.3] {
        let e1 = err_vs_exact(eps, 64, 400);
        let e2 = err_vs_exact(eps, 128, 800);
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "eps {eps}: order {order}");
    }
}

#[test]
fn single_mode_fixed_wall_phase() {
    // w = √2 sin(πy) e^{−iπ²t}; the discrete frequency is (4/h²) sin²(πh/2)
    let m = 128;
    let h = 1.0 / m as f64;
    let curve = BoundaryCurve::linear(0.0, 1.0).unwrap();
    let s = SineSpectrum::mode(1, 1, 0.0).unwrap();
    let steps = 4000;
    let last = pde::solve_final(&s, &curve, 1.0, m, steps).unwrap();
    let omega_h = 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
    let dt = 1.0 / steps as f64;
    // Crank–Nicolson amplification of e^{−iωt}
    let g = (C64::new(1.0, -0.5 * omega_h * dt) / C64::new(1.0, 0.5 * omega_h * dt)).powu(steps as u32);
    for (j, w) in last.values.iter().enumerate() {
        let want = g * (2f64.sqrt() * (PI * j as f64 * h).sin());
        assert!((w - want).norm() < 1e-10, "j = {j}");
    }
}

#[test]
fn traces_recorded_both_frames() {
    let curve = BoundaryCurve::linear(0.5, 1.0).unwrap();
    let traj = pde::solve(&SineSpectrum::mode(1, 2, 0.5).unwrap(), &curve, 1.0, 64, 64).unwrap();
    for tr in &traj.traces {
        let l = curve.length(tr.t).unwrap();
        assert!((tr.fixed_left - tr.moving_left * l).norm() < 1e-12);
        assert!((tr.fixed_right - tr.moving_right * l).norm() < 1e-12);
    }
    assert_eq!(traj.len(), 65);
    assert_eq!(traj.times().last().copied(), Some(1.0));
}

#[test]
fn invalid_inputs() {
    let curve = BoundaryCurve::linear(0.1, 1.0).unwrap();
    let s = SineSpectrum::mode(1, 1, 0.1).unwrap();
    assert!(pde::solve(&s, &curve, 1.0, 4, 10).is_err());
    assert!(pde::solve(&s, &curve, 1.0, 16, 0).is_err());
    assert!(pde::solve(&s, &curve, 2.0, 16, 10).is_err());
    assert!(assemble_operator(&curve, 0.0, 7).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn step_is_linear(seed in 0u64..1000, eps in 0.0f64..0.8, dt in 1e-4f64..0.05) {
        let curve = BoundaryCurve::periodic(eps * 0.5, 2.0, 1.0).unwrap();
        let a = SineSpectrum::random(4, 0.0, seed).unwrap();
        let b = SineSpectrum::random(4, 0.0, seed + 1).unwrap();
        let (ca, cb) = (C64::new(0.3, -1.2), C64::new(-0.7, 0.4));
        let m = 32;
        let wa = FixedState::from_fn(0.2, m, |y| a.reconstruct(y));
        let wb = FixedState::from_fn(0.2, m, |y| b.reconstruct(y));
        let mix = FixedState { t: 0.2, values: wa.values.iter().zip(&wb.values).map(|(x, y)| ca * x + cb * y).collect() };
        let (sa, sb, sm) = (step(&wa, &curve, dt).unwrap(), step(&wb, &curve, dt).unwrap(), step(&mix, &curve, dt).unwrap());
        for j in 0..=m {
            prop_assert!((sm.values[j] - (ca * sa.values[j] + cb * sb.values[j])).norm() < 1e-12);
        }
    }

    /// One CN step changes h Σ|w|² by exactly −Δt (ℓ'/ℓ)(t_mid) ‖w_mid‖².
    #[test]
    fn discrete_norm_balance(seed in 0u64..1000, eps in 0.0f64..0.8, dt in 1e-4f64..0.05) {
        let curve = BoundaryCurve::linear(eps, 1.0).unwrap();
        let s = SineSpectrum::random(5, 0.0, seed).unwrap();
        let w = FixedState::from_fn(0.3, 48, |y| s.reconstruct(y));
        let next = step(&w, &curve, dt).unwrap();
        let mid: Vec<C64> = w.values.iter().zip(&next.values).map(|(a, b)| (a + b) * 0.5).collect();
        let p = curve.eval(0.3 + 0.5 * dt).unwrap();
        let lhs = inner(&next.values, &next.values).re - inner(&w.values, &w.values).re;
        let rhs = -dt * p.velocity / p.length * inner(&mid, &mid).re;
        prop_assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn fixed_wall_conserves_norm(seed in 0u64..1000, steps in 10usize..200) {
        let curve = BoundaryCurve::linear(0.0, 1.0).unwrap();
        let s = SineSpectrum::random(6, 0.0, seed).unwrap();
        let traj = pde::solve(&s, &curve, 1.0, 64, steps).unwrap();
        let n0 = inner(&traj.states[0].values, &traj.states[0].values).re;
        for st in &traj.states {
            prop_assert!((inner(&st.values, &st.values).re - n0).abs() < 1e-12 * n0);
        }
    }
}
