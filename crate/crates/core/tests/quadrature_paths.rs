use leray_core::funcspace::{
    interpolate_on_mesh, make_family, FamilySpec, MeshSampler, RadialProfile,
};
use leray_core::functionals::{
    dirichlet_energy, ground_state_transform, hardy_difference, hardy_term, radius_path,
    remainder_term, trudinger_integral, weighted_energy, weighted_lq_norm, RadialFunctional,
    TrudingerParams,
};
use leray_core::geometry::BallDomain;
use leray_core::quadrature::{integrate_log, integrate_radius, QuadratureSpec, TailClass};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn random_smooth_integrands_agree_across_coordinates() {
    let spec = QuadratureSpec::default();
    let mut rng = SplitMix64::seed_from_u64(2024);
    for case in 0..20 {
        let terms: Vec<(f64, i32, f64)> = (0..3)
            .map(|_| {
                (
                    uniform(&mut rng, 0.1, 2.0),
                    (rng.next_u64() % 4) as i32,
                    uniform(&mut rng, 0.5, 3.0),
                )
            })
            .collect();
        let slowest = terms.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
        let g = |t: f64| -> f64 {
            terms
                .iter()
                .map(|&(a, m, b)| a * (t - 1.0).powi(m) * (-b * (t - 1.0)).exp())
                .sum()
        };
        let log_path = integrate_log(
            &g,
            1.0,
            &[],
            TailClass::ExponentialDecay { rate: slowest },
            &spec,
        )
        .unwrap();
        let radius = integrate_radius(&|r: f64| g(1.0 - r.ln()) / r, 1.0, 1.0, &[], &spec).unwrap();
        assert!(log_path.status.is_converged(), "case {case}: {log_path:?}");
        let gap = relative_gap(log_path.value, radius.value);
        assert!(
            gap <= 1e-6,
            "case {case}: {} vs {} ({gap:e})",
            log_path.value,
            radius.value
        );
    }
}

fn smooth_compact_bump(d: &BallDomain, nodes: usize) -> RadialProfile {
    let t_b = d.t_boundary();
    let span = 30.0 - t_b;
    let ts: Vec<f64> = (0..nodes)
        .map(|k| t_b + span * k as f64 / (nodes - 1) as f64)
        .collect();
    let vs: Vec<f64> = ts
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k + 1 == nodes {
                0.0
            } else {
                (std::f64::consts::PI * (t - t_b) / span).sin().powi(2)
            }
        })
        .collect();
    RadialProfile::mesh(ts, vs, true).unwrap()
}

#[test]
fn every_functional_agrees_across_coordinates() {
    let spec = QuadratureSpec::default();
    let exp_spec = QuadratureSpec::exponential();
    for n in 2..=4 {
        for (rho, r) in [(1.0, 1.0), (0.5, 2.0)] {
            let d = BallDomain::new(n, rho, r).unwrap();
            let u = smooth_compact_bump(&d, 80);
            let v = ground_state_transform(&u, &d);
            let q = d.dim() + 1.0;
            let params = TrudingerParams::new(0.3, 1.0);
            let cases = [
                (
                    dirichlet_energy(&u, &d, &spec).unwrap().value,
                    radius_path(&u, &d, &RadialFunctional::DirichletEnergy, &spec),
                ),
                (
                    hardy_term(&u, &d, &spec).unwrap().value,
                    radius_path(&u, &d, &RadialFunctional::HardyTerm, &spec),
                ),
                (
                    remainder_term(&u, &d, 2.0, &spec).unwrap().value,
                    radius_path(&u, &d, &RadialFunctional::Remainder { gamma: 2.0 }, &spec),
                ),
                (
                    weighted_energy(&v, &d, &spec).unwrap().value,
                    radius_path(&v, &d, &RadialFunctional::WeightedEnergy, &spec),
                ),
                (
                    weighted_lq_norm(&u, &d, q, &spec).unwrap().value,
                    radius_path(&u, &d, &RadialFunctional::WeightedLq { q }, &spec),
                ),
                (
                    trudinger_integral(&u, &d, &params, &exp_spec)
                        .unwrap()
                        .report
                        .value,
                    radius_path(&u, &d, &RadialFunctional::Trudinger { params }, &exp_spec),
                ),
            ];
            for (k, (primary, rad)) in cases.into_iter().enumerate() {
                let rad = rad.unwrap().value;
                let gap = relative_gap(primary, rad);
                assert!(
                    gap <= 1e-6,
                    "n={n} rho={rho} functional {k}: {primary} vs {rad} ({gap:e})"
                );
            }
        }
    }
}

#[test]
fn converged_values_are_stable_when_t_max_doubles() {
    let short = QuadratureSpec::exponential().with_t_max(150.0);
    let long = short.with_t_max(300.0);
    for n in 2..=3 {
        let d = BallDomain::unit(n).unwrap();
        let mut profiles: Vec<RadialProfile> = (0..10)
            .map(|seed| MeshSampler::default().sample(&d, seed).unwrap())
            .collect();
        profiles.push(make_family(FamilySpec::ground_state_power(0.2 / n as f64), &d).unwrap());
        profiles.push(make_family(FamilySpec::moser_plateau(3.0), &d).unwrap());
        for (k, u) in profiles.iter().enumerate() {
            let params = TrudingerParams::new(0.4, 2.0 / n as f64);
            let a = trudinger_integral(u, &d, &params, &short).unwrap().report;
            let b = trudinger_integral(u, &d, &params, &long).unwrap().report;
            if a.status.is_converged() {
                assert!(
                    (a.value - b.value).abs() <= a.error_estimate + b.error_estimate,
                    "n={n} profile {k}: {} vs {} (budget {:e})",
                    a.value,
                    b.value,
                    a.error_estimate
                );
            }
            let q = 2.0 * d.dim();
            let a = weighted_lq_norm(u, &d, q, &short).unwrap();
            let b = weighted_lq_norm(u, &d, q, &long).unwrap();
            if a.status.is_converged() {
                assert!((a.value - b.value).abs() <= a.error_estimate + b.error_estimate + 1e-15);
            }
        }
    }
}

#[test]
fn interpolated_profiles_converge_at_first_order_or_better() {
    let spec = QuadratureSpec::default();
    for n in 2..=3 {
        let d = BallDomain::unit(n).unwrap();
        let cutoff = 17.0;
        let u = make_family(
            FamilySpec::GroundStatePower {
                s: 0.2,
                cutoff: Some(cutoff),
            },
            &d,
        )
        .unwrap();
        let exact = hardy_difference(&u, &d, &spec).unwrap().require().unwrap();
        let mut errors = Vec::new();
        for level in 0..5 {
            let h = 1.0 / f64::from(1u32 << level);
            let count = ((cutoff - 1.0) / h).round() as usize;
            let nodes: Vec<f64> = (0..=count).map(|k| 1.0 + h * k as f64).collect();
            let mesh = interpolate_on_mesh(&u, &nodes).unwrap();
            let approx = hardy_difference(&mesh, &d, &spec)
                .unwrap()
                .require()
                .unwrap();
            errors.push((h, (approx - exact).abs()));
        }
        for pair in errors.windows(2) {
            let order = (pair[0].1 / pair[1].1).ln() / (pair[0].0 / pair[1].0).ln();
            assert!(
                order >= 1.0,
                "n={n}: observed order {order} from {errors:?}"
            );
        }
    }
}
