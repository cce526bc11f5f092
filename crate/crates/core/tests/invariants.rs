use leray_core::funcspace::{make_family, FamilySpec, MeshSampler, RadialProfile};
use leray_core::functionals::{
    dirichlet_energy, hardy_difference, remainder_constant, remainder_term, trudinger_integral,
    weighted_lq_norm, TrudingerParams,
};
use leray_core::geometry::BallDomain;
use leray_core::quadrature::{integrate_log, QuadratureSpec, TailClass};
use leray_core::weights::{e1, e2, e2_of_t, weight_derivative, WeightKind, WeightPoint};
use proptest::prelude::*;

fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn family_strategy() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (0.2f64..8.0, 0.2f64..3.0)
            .prop_map(|(plateau, scale)| FamilySpec::MoserPlateau { plateau, scale }),
        (-0.4f64..0.45).prop_map(FamilySpec::ground_state_power),
        (0.8f64..2.5, 3.0f64..20.0).prop_map(|(a, t_cap)| FamilySpec::PurePower { a, t_cap }),
    ]
}

fn domain_strategy() -> impl Strategy<Value = BallDomain> {
    (
        2u32..=4,
        prop_oneof![Just((1.0, 1.0)), Just((0.5, 2.0)), Just((0.3, 0.3))],
    )
        .prop_map(|(n, (rho, r))| BallDomain::new(n, rho, r).unwrap())
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn weights_are_at_least_one_and_decreasing(s in 1e-300f64..=1.0, k in 0.5f64..0.999) {
        let s2 = s * k;
        prop_assert!(e1(s).unwrap() >= 1.0);
        prop_assert!(e2(s).unwrap() >= 1.0);
        prop_assert!(e1(s2).unwrap() > e1(s).unwrap());
        prop_assert!(e2(s2).unwrap() > e2(s).unwrap());
    }

    #[test]
    fn log_coordinate_composition(t in 1.0f64..700.0) {
        let p = WeightPoint::from_t(t).unwrap();
        prop_assert!(relative_gap(e1(p.r_over_r).unwrap(), t) <= 1e-14);
        prop_assert!(relative_gap(e2(p.r_over_r).unwrap(), e2_of_t(t)) <= 1e-14);
        prop_assert!(relative_gap(WeightPoint::from_ratio(p.r_over_r).unwrap().t, t) <= 1e-14);
    }

    #[test]
    fn weight_derivatives_match_finite_differences(
        s in 0.01f64..0.99,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        for kind in [WeightKind::E1, WeightKind::E2, WeightKind::E1PowerE2Power { a, b }] {
            let h = 1e-5 * s;
            let fd = central_difference(|x| kind.value(x).unwrap(), s, h);
            let exact = weight_derivative(kind, s).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "{kind:?} s={s}: {fd} vs {exact}");
        }
    }

    #[test]
    fn log_coordinate_is_decreasing_and_invertible(n in 2u32..6, r1 in 0.01f64..1.0, k in 0.1f64..0.99) {
        let d = BallDomain::new(n, 1.0, 1.5).unwrap();
        let r2 = r1 * k;
        let t1 = d.to_log_coordinate(r1).unwrap();
        let t2 = d.to_log_coordinate(r2).unwrap();
        prop_assert!(t2 > t1);
        prop_assert!(relative_gap(d.from_log_coordinate(t1), r1) <= 1e-14);
    }

    #[test]
    fn family_slopes_match_finite_differences(spec in family_strategy(), n in 2u32..=4, x in 0.02f64..1.0) {
        let d = BallDomain::unit(n).unwrap();
        prop_assume!(spec.admissible(n) || matches!(spec, FamilySpec::GroundStatePower { .. }));
        let u = make_family(spec, &d).unwrap();
        let t = 1.0 + 0.05 + 30.0 * x * x;
        let h = 1e-5;
        let kinks: Vec<f64> = match spec {
            FamilySpec::MoserPlateau { plateau, .. } => vec![1.0 + plateau],
            FamilySpec::PurePower { t_cap, .. } => vec![t_cap],
            _ => vec![],
        };
        prop_assume!(kinks.iter().all(|k| (k - t).abs() > 10.0 * h));
        let fd = central_difference(|x| u.value(x).unwrap(), t, h);
        let exact = u.slope(t).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-2), "{spec:?} t={t}: {fd} vs {exact}");
    }

    #[test]
    fn scaling_is_exact_pointwise(spec in family_strategy(), lambda in 0.01f64..100.0, t in 1.0f64..40.0) {
        let d = BallDomain::unit(2).unwrap();
        let u = make_family(spec, &d).unwrap();
        prop_assert_eq!(u.scaled(lambda).value(t).unwrap(), lambda * u.value(t).unwrap());
    }

    #[test]
    fn profiles_survive_json(spec in family_strategy(), seed in any::<u64>(), d in domain_strategy()) {
        let mesh = MeshSampler::default().sample(&d, seed).unwrap();
        for u in [make_family(spec, &d).unwrap().scaled(1.7), mesh.clone(), RadialProfile::weighted(mesh, -0.5)] {
            let text = serde_json::to_string(&u).unwrap();
            let back: RadialProfile = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &u);
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
    }

    #[test]
    fn sampled_meshes_are_deterministic_and_bounded(seed in any::<u64>(), d in domain_strategy(), amp in 0.0f64..5.0) {
        let sampler = MeshSampler { amplitude: amp, ..MeshSampler::default() };
        let u = sampler.sample(&d, seed).unwrap();
        prop_assert_eq!(&u, &sampler.sample(&d, seed).unwrap());
        prop_assert_eq!(u.value(d.t_boundary()).unwrap(), 0.0);
        for k in 0..50 {
            let t = d.t_boundary() + 0.5 * k as f64;
            prop_assert!(u.value(t).unwrap().abs() <= amp);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hardy_difference_is_homogeneous(seed in any::<u64>(), d in domain_strategy(), lambda in 1e-3f64..1e3) {
        let spec = QuadratureSpec::default();
        let u = MeshSampler::default().sample(&d, seed).unwrap();
        let i1 = hardy_difference(&u, &d, &spec).unwrap();
        let i2 = hardy_difference(&u.scaled(lambda), &d, &spec).unwrap();
        let expected = lambda.powi(d.n() as i32) * i1.value;
        prop_assert!(relative_gap(i2.value, expected) <= 1e-10, "{} vs {}", i2.value, expected);
    }

    #[test]
    fn lq_norm_is_homogeneous(seed in any::<u64>(), d in domain_strategy(), lambda in 1e-3f64..1e3) {
        let spec = QuadratureSpec::default();
        let u = MeshSampler::default().sample(&d, seed).unwrap();
        let q = d.dim() + 1.0;
        let a = weighted_lq_norm(&u, &d, q, &spec).unwrap();
        let b = weighted_lq_norm(&u.scaled(lambda), &d, q, &spec).unwrap();
        prop_assert!(relative_gap(b.value, lambda * a.value) <= 1e-10);
    }

    #[test]
    fn improved_hardy_holds_on_random_meshes(seed in any::<u64>(), d in domain_strategy(), nodes in 2usize..12) {
        let spec = QuadratureSpec::default();
        let sampler = MeshSampler { node_count: nodes, ..MeshSampler::default() };
        let u = sampler.sample(&d, seed).unwrap();
        let energy = dirichlet_energy(&u, &d, &spec).unwrap().value;
        let i = hardy_difference(&u, &d, &spec).unwrap();
        let r2 = remainder_term(&u, &d, 2.0, &spec).unwrap();
        prop_assert!(i.status.is_converged());
        prop_assert!(i.value >= -1e-9 * energy);
        prop_assert!(i.value >= remainder_constant(d.n()).unwrap() * r2.value - 1e-8 * energy);
    }

    #[test]
    fn trudinger_decreases_in_beta(seed in any::<u64>(), beta in 0.5f64..2.0, extra in 0.0f64..2.0, c in 0.05f64..0.5) {
        let d = BallDomain::unit(2).unwrap();
        let spec = QuadratureSpec::exponential();
        let u = MeshSampler::default().sample(&d, seed).unwrap();
        let lo = trudinger_integral(&u, &d, &TrudingerParams::new(c, beta + extra), &spec).unwrap();
        let hi = trudinger_integral(&u, &d, &TrudingerParams::new(c, beta), &spec).unwrap();
        prop_assert!(lo.report.value <= hi.report.value * (1.0 + 1e-8));
    }

    #[test]
    fn exponential_tails_survive_doubling_t_max(rate in 0.05f64..3.0, shift in 0.0f64..5.0) {
        let f = |t: f64| (-rate * (t - 1.0)).exp() / (1.0 + (t - shift).powi(2));
        let short = QuadratureSpec::default().with_t_max(40.0);
        let a = integrate_log(&f, 1.0, &[], TailClass::ExponentialDecay { rate }, &short).unwrap();
        let b = integrate_log(&f, 1.0, &[], TailClass::ExponentialDecay { rate }, &short.with_t_max(80.0)).unwrap();
        if a.status.is_converged() {
            prop_assert!((a.value - b.value).abs() <= a.error_estimate + a.tail_bound + 1e-15);
        }
    }
}
