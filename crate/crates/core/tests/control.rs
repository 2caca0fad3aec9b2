use mws_core::control::{
    adjoint_defect, dual_problem_descriptor, duality_residual, steer, DualityDiscretization,
};
use mws_core::observability::{boundary_gramian, point_gramian, ObservationKind};
use mws_core::{BoundaryCurve, Error, FixedState, SineSpectrum, C64};
use proptest::prelude::*;

#[test]
fn duality_for_every_observation_kind() {
    let curve = BoundaryCurve::linear(0.4, 1.0).unwrap();
    let s = SineSpectrum::random(4, 0.4, 12).unwrap();
    for kind in [
        ObservationKind::BoundaryLeft,
        ObservationKind::BoundaryRight,
        ObservationKind::BoundaryBoth,
        ObservationKind::Point { a: 0.37 },
    ] {
        let r = duality_residual(&s, &curve, 1.0, kind, DualityDiscretization::default()).unwrap();
        assert!(r.residual < 1e-3, "{kind}: {r:?}");
    }
}

#[test]
fn solver_route_converges() {
    let curve = BoundaryCurve::linear(0.5, 1.0).unwrap();
    let s = SineSpectrum::random(3, 0.5, 2).unwrap();
    let res = |m, k| {
        duality_residual(&s, &curve, 1.0, ObservationKind::BoundaryBoth, DualityDiscretization::Pde { grid: m, steps: k })
            .unwrap()
            .residual
    };
    let (a, b) = (res(128, 1000), res(256, 2000));
    assert!(b < a / 3.0, "{a} -> {b}");
}

#[test]
fn duality_needs_matching_linear_wall() {
    let s = SineSpectrum::random(3, 0.5, 2).unwrap();
    let periodic = BoundaryCurve::periodic(0.1, 1.0, 1.0).unwrap();
    assert!(duality_residual(&s, &periodic, 1.0, ObservationKind::BoundaryBoth, DualityDiscretization::default()).is_err());
    let other = BoundaryCurve::linear(0.2, 1.0).unwrap();
    assert!(duality_residual(&s, &other, 1.0, ObservationKind::BoundaryBoth, DualityDiscretization::default()).is_err());
}

#[test]
fn steering_fails_without_observability() {
    let g = point_gramian(0.0, 0.5, 1.0, 4).unwrap();
    let target = vec![C64::new(1.0, 0.0); 4];
    assert!(matches!(steer(&g, &target, None), Err(Error::NonObservable { .. })));
    let zero = steer(&g, &[C64::new(0.0, 0.0); 4], None).unwrap();
    assert_eq!(zero.residual, 0.0);
}

#[test]
fn dual_problem_kinds() {
    assert_eq!(dual_problem_descriptor(ObservationKind::BoundaryBoth).unwrap().controlled.len(), 2);
    assert_eq!(dual_problem_descriptor(ObservationKind::BoundaryLeft).unwrap().homogeneous.len(), 1);
    assert!(dual_problem_descriptor(ObservationKind::Point { a: 0.3 }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steer_reaches_targets(seed in 0u64..10_000, eps in 0.0f64..0.8, tau in 0.3f64..1.5) {
        let g = boundary_gramian(eps, tau, 4, ObservationKind::BoundaryBoth).unwrap();
        let target = SineSpectrum::random(4, eps, seed).unwrap().coefficients().to_vec();
        let sol = steer(&g, &target, None).unwrap();
        prop_assert!(sol.residual < 1e-3, "{}", sol.residual);
        prop_assert_eq!(sol.z_trajectory.last().map(|z| z.t), Some(0.0));
    }

    #[test]
    fn adjoint_is_exact_on_the_grid(seed in 0u64..10_000, eps in -0.3f64..0.8, t in 0.0f64..1.0, m in 8usize..80) {
        let curve = BoundaryCurve::linear(eps, 1.0).unwrap();
        let a = SineSpectrum::random(4, 0.0, seed).unwrap();
        let b = SineSpectrum::random(4, 0.0, seed + 7).unwrap();
        let w = FixedState::from_fn(t, m, |y| a.reconstruct(y));
        let v = FixedState::from_fn(t, m, |y| b.reconstruct(y));
        prop_assert!(adjoint_defect(&curve, t, &w.values, &v.values).unwrap() < 1e-10);
    }
}
