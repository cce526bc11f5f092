//! Invariant suites. Each profile-based check is a serializable [`Case`] so
//! that a failure can be written out and replayed bit for bit.

use std::time::Instant;

use leray_core::funcspace::{make_family, FamilySpec, MeshSampler, RadialProfile};
use leray_core::functionals::{
    bump_2d, c1, dirichlet_energy, eval_p_b1, green_representation_check, ground_state_transform,
    hardy_difference, hardy_term, prop31_bound_rhs, prop31_constant, radius_path,
    remainder_constant, remainder_term, series_threshold, trudinger_integral, weighted_energy,
    weighted_lq_norm, young_base_residual, young_pairing_check, RadialFunctional, TrudingerParams,
};
use leray_core::geometry::{unit_ball_volume, BallDomain};
use leray_core::optimize::{
    maximize_trudinger, minimize_ratio, MeshSearchSpec, OptimizeBudget, SearchSpace,
};
use leray_core::quadrature::{integrate_log, DiscGrid, QuadratureSpec, Status, TailClass};
use leray_core::weights::{e1, e2, weight_derivative, WeightKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SuiteConfig;
use crate::error::CliResult;

/// Independent multiprecision values of `C_n` for `n = 2..=6`.
pub const C_N_ORACLE: [f64; 5] = [
    std::f64::consts::FRAC_2_SQRT_PI,
    0.75342278515008029704,
    0.58221446871705648067,
    0.4830181652111733549,
    0.41788742520768306069,
];

/// Independent multiprecision values of `A_n = 1/(e·C_n^(n/(n-1)))`.
pub const A_N_ORACLE: [f64; 5] = [
    0.28893183744773042948,
    0.56253220771945435506,
    0.75670776897003128093,
    0.9135896866199190052,
    1.0481763456548128547,
];

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// The exponential-integrand variant of a quadrature spec.
pub fn exponential_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: spec.rel_tol.max(QuadratureSpec::exponential().rel_tol),
        ..*spec
    }
}

/// One replayable invariant check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum Case {
    HardyNonnegativity {
        domain: BallDomain,
        profile: RadialProfile,
    },
    ImprovedHardy {
        domain: BallDomain,
        profile: RadialProfile,
    },
    TransformInequality {
        domain: BallDomain,
        profile: RadialProfile,
    },
    WeightedLqBound {
        domain: BallDomain,
        profile: RadialProfile,
        q: f64,
    },
    Homogeneity {
        domain: BallDomain,
        profile: RadialProfile,
        lambda: f64,
    },
    WeightComparison {
        domain: BallDomain,
        profile: RadialProfile,
        c: f64,
        beta: f64,
        beta_high: f64,
    },
    DualPath {
        domain: BallDomain,
        profile: RadialProfile,
    },
    AdmissibilityThreshold {
        domain: BallDomain,
        s: f64,
    },
    TrudingerBaseline {
        domain: BallDomain,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub passed: bool,
    /// Signed slack; nonnegative exactly when the case passes.
    pub margin: f64,
    pub detail: String,
}

impl CaseOutcome {
    fn from_margin(margin: f64, detail: String) -> Self {
        Self {
            passed: margin >= 0.0,
            margin,
            detail,
        }
    }

    fn failed(detail: String) -> Self {
        Self {
            passed: false,
            margin: f64::NEG_INFINITY,
            detail,
        }
    }
}

fn converged(name: &str, status: Status) -> std::result::Result<(), String> {
    if status.is_converged() {
        Ok(())
    } else {
        Err(format!("{name} status {status:?}"))
    }
}

impl Case {
    pub fn domain(&self) -> &BallDomain {
        match self {
            Case::HardyNonnegativity { domain, .. }
            | Case::ImprovedHardy { domain, .. }
            | Case::TransformInequality { domain, .. }
            | Case::WeightedLqBound { domain, .. }
            | Case::Homogeneity { domain, .. }
            | Case::WeightComparison { domain, .. }
            | Case::DualPath { domain, .. }
            | Case::AdmissibilityThreshold { domain, .. }
            | Case::TrudingerBaseline { domain } => domain,
        }
    }

    /// Runs the check. Evaluation errors count as failures.
    pub fn check(&self, spec: &QuadratureSpec) -> CaseOutcome {
        let d = self.domain();
        if let Err(e) = BallDomain::new(d.n(), d.rho(), d.hardy_scale()) {
            return CaseOutcome::failed(format!("invalid domain: {e}"));
        }
        match self.evaluate(spec) {
            Ok(Ok(outcome)) => outcome,
            Ok(Err(msg)) => CaseOutcome::failed(msg),
            Err(e) => CaseOutcome::failed(e.to_string()),
        }
    }

    fn evaluate(
        &self,
        spec: &QuadratureSpec,
    ) -> leray_core::Result<std::result::Result<CaseOutcome, String>> {
        let tiny = f64::MIN_POSITIVE;
        Ok(Ok(match self {
            Case::HardyNonnegativity {
                domain: d,
                profile: u,
            } => {
                let energy = dirichlet_energy(u, d, spec)?;
                let i = hardy_difference(u, d, spec)?;
                if let Err(m) = converged("I_n", i.status) {
                    return Ok(Err(m));
                }
                CaseOutcome::from_margin(
                    (i.value + 1e-9 * energy.value) / energy.value.max(tiny),
                    format!("I_n = {:e}, D = {:e}", i.value, energy.value),
                )
            }
            Case::ImprovedHardy {
                domain: d,
                profile: u,
            } => {
                let energy = dirichlet_energy(u, d, spec)?;
                let i = hardy_difference(u, d, spec)?;
                let r2 = remainder_term(u, d, 2.0, spec)?;
                if let Err(m) = converged("I_n", i.status).and(converged("R_2", r2.status)) {
                    return Ok(Err(m));
                }
                let b = remainder_constant(d.n())?;
                CaseOutcome::from_margin(
                    (i.value - b * r2.value + 1e-8 * energy.value) / energy.value.max(tiny),
                    format!(
                        "I_n = {:e}, R_2 = {:e}, ratio = {:e}",
                        i.value,
                        r2.value,
                        i.value / r2.value
                    ),
                )
            }
            Case::TransformInequality {
                domain: d,
                profile: u,
            } => {
                let i = hardy_difference(u, d, spec)?;
                let j = weighted_energy(&ground_state_transform(u, d), d, spec)?;
                if let Err(m) = converged("I_n", i.status).and(converged("J_n", j.status)) {
                    return Ok(Err(m));
                }
                let bound = c1(d.n())? as f64 * i.value * (1.0 + 1e-8);
                let mut margin = (bound - j.value) / i.value.abs().max(tiny);
                if d.n() == 2 {
                    margin = margin.min(1e-6 - (j.value - i.value).abs() / i.value.max(1e-12));
                }
                CaseOutcome::from_margin(
                    margin,
                    format!("J_n = {:e}, I_n = {:e}", j.value, i.value),
                )
            }
            Case::WeightedLqBound {
                domain: d,
                profile: u,
                q,
            } => {
                let i = hardy_difference(u, d, spec)?;
                let lq = weighted_lq_norm(u, d, *q, spec)?;
                if let Err(m) = converged("I_n", i.status).and(converged("L^q", lq.status)) {
                    return Ok(Err(m));
                }
                let rhs = prop31_bound_rhs(d.n(), *q, d.volume(), i.value.max(0.0))?;
                CaseOutcome::from_margin(
                    (rhs - lq.value) / rhs.max(tiny),
                    format!("norm = {:e}, bound = {:e}", lq.value, rhs),
                )
            }
            Case::Homogeneity {
                domain: d,
                profile: u,
                lambda,
            } => {
                let v = u.scaled(*lambda);
                let q = d.dim() + 1.0;
                let i1 = hardy_difference(u, d, spec)?.value;
                let i2 = hardy_difference(&v, d, spec)?.value;
                let l1 = weighted_lq_norm(u, d, q, spec)?.value;
                let l2 = weighted_lq_norm(&v, d, q, spec)?.value;
                let gi = relative_gap(i2, lambda.powi(d.n() as i32) * i1);
                let gl = relative_gap(l2, lambda * l1);
                CaseOutcome::from_margin(
                    1e-10 - gi.max(gl),
                    format!("I_n gap {gi:e}, L^q gap {gl:e}"),
                )
            }
            Case::WeightComparison {
                domain: d,
                profile: u,
                c,
                beta,
                beta_high,
            } => {
                let sp = exponential_spec(spec);
                let lo = trudinger_integral(u, d, &TrudingerParams::new(*c, *beta), &sp)?.report;
                let hi =
                    trudinger_integral(u, d, &TrudingerParams::new(*c, *beta_high), &sp)?.report;
                if let Err(m) =
                    converged("T(beta)", lo.status).and(converged("T(beta')", hi.status))
                {
                    return Ok(Err(m));
                }
                CaseOutcome::from_margin(
                    (lo.value * (1.0 + 1e-8) - hi.value) / lo.value.max(tiny),
                    format!("T(beta) = {:e}, T(beta') = {:e}", lo.value, hi.value),
                )
            }
            Case::DualPath {
                domain: d,
                profile: u,
            } => {
                let sp = exponential_spec(spec);
                let v = ground_state_transform(u, d);
                let q = d.dim() + 1.0;
                let params = TrudingerParams::new(0.3, 1.0);
                let pairs = [
                    (
                        dirichlet_energy(u, d, spec)?.value,
                        radius_path(u, d, &RadialFunctional::DirichletEnergy, spec)?.value,
                    ),
                    (
                        hardy_term(u, d, spec)?.value,
                        radius_path(u, d, &RadialFunctional::HardyTerm, spec)?.value,
                    ),
                    (
                        remainder_term(u, d, 2.0, spec)?.value,
                        radius_path(u, d, &RadialFunctional::Remainder { gamma: 2.0 }, spec)?.value,
                    ),
                    (
                        weighted_energy(&v, d, spec)?.value,
                        radius_path(&v, d, &RadialFunctional::WeightedEnergy, spec)?.value,
                    ),
                    (
                        weighted_lq_norm(u, d, q, spec)?.value,
                        radius_path(u, d, &RadialFunctional::WeightedLq { q }, spec)?.value,
                    ),
                    (
                        trudinger_integral(u, d, &params, &sp)?.report.value,
                        radius_path(
                            u,
                            d,
                            &RadialFunctional::Trudinger {
                                params: params.clone(),
                            },
                            &sp,
                        )?
                        .value,
                    ),
                ];
                let worst = pairs
                    .iter()
                    .map(|&(a, b)| relative_gap(a, b))
                    .fold(0.0, f64::max);
                CaseOutcome::from_margin(1e-6 - worst, format!("largest relative gap {worst:e}"))
            }
            Case::AdmissibilityThreshold { domain: d, s } => {
                let u = make_family(FamilySpec::ground_state_power(*s), d)?;
                let r = remainder_term(&u, d, 2.0, spec)?;
                let expected = *s < 1.0 / d.dim();
                let ok = r.status.is_converged() == expected;
                CaseOutcome::from_margin(
                    if ok { 0.0 } else { -1.0 },
                    format!(
                        "s = {s}, remainder status {:?}, expected converged = {expected}",
                        r.status
                    ),
                )
            }
            Case::TrudingerBaseline { domain: d } => {
                let sp = exponential_spec(spec);
                let z = RadialProfile::zero(d);
                let t = trudinger_integral(&z, d, &TrudingerParams::new(1.0, 1.0), &sp)?.report;
                let exact = d.volume();
                let gap = relative_gap(t.value, exact);
                CaseOutcome::from_margin(
                    sp.rel_tol * 10.0 - gap,
                    format!("T(0) = {:e}, volume {:e}", t.value, exact),
                )
            }
        }))
    }
}

/// A failing case with its outcome, as written to replay files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub case: Option<Case>,
    pub outcome: CaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Smallest margin over all cases.
    pub worst_margin: f64,
    pub worst_detail: String,
    pub first_failure: Option<FailureRecord>,
    pub seconds: f64,
}

/// Replay file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub quadrature: QuadratureSpec,
    pub case: Case,
}

fn summarize(
    name: &str,
    started: Instant,
    results: Vec<(Option<Case>, CaseOutcome)>,
) -> SuiteReport {
    let cases = results.len();
    let failures = results.iter().filter(|r| !r.1.passed).count();
    let worst = results
        .iter()
        .min_by(|a, b| a.1.margin.total_cmp(&b.1.margin))
        .map(|r| (r.1.margin, r.1.detail.clone()))
        .unwrap_or((f64::INFINITY, String::new()));
    let first_failure = results
        .into_iter()
        .find(|r| !r.1.passed)
        .map(|(case, outcome)| FailureRecord { case, outcome });
    SuiteReport {
        name: name.to_string(),
        passed: failures == 0 && cases > 0,
        cases,
        failures,
        worst_margin: worst.0,
        worst_detail: worst.1,
        first_failure,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn run_cases(name: &str, cases: Vec<Case>, spec: &QuadratureSpec) -> SuiteReport {
    let started = Instant::now();
    let results = cases
        .into_par_iter()
        .map(|c| {
            let o = c.check(spec);
            (Some(c), o)
        })
        .collect();
    summarize(name, started, results)
}

fn run_plain(name: &str, started: Instant, outcomes: Vec<CaseOutcome>) -> SuiteReport {
    summarize(
        name,
        started,
        outcomes.into_iter().map(|o| (None, o)).collect(),
    )
}

fn case_seed(base: u64, n: u32, domain_index: usize, k: usize) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add((u64::from(n) << 40) | ((domain_index as u64) << 32) | k as u64)
}

fn domains(cfg: &SuiteConfig, n: u32) -> CliResult<Vec<BallDomain>> {
    cfg.domains
        .iter()
        .map(|&(rho, r)| Ok(BallDomain::new(n, rho, r)?))
        .collect()
}

/// Random meshes for one suite: `2 + k mod 10` nodes, or one more and
/// vanishing past the last node when `compact`.
fn suite_profiles(
    cfg: &SuiteConfig,
    dims: &[u32],
    count: usize,
    compact: bool,
) -> CliResult<Vec<(BallDomain, RadialProfile)>> {
    let mut out = Vec::new();
    for &n in dims {
        for (di, d) in domains(cfg, n)?.into_iter().enumerate() {
            for k in 0..count {
                let sampler = MeshSampler {
                    node_count: 2 + k % 10 + usize::from(compact),
                    compact,
                    ..MeshSampler::default()
                };
                out.push((d, sampler.sample(&d, case_seed(cfg.seed, n, di, k))?));
            }
        }
    }
    Ok(out)
}

pub fn hardy_nonnegativity(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let cases = suite_profiles(cfg, &cfg.dimensions, cfg.profiles, false)?
        .into_iter()
        .map(|(domain, profile)| Case::HardyNonnegativity { domain, profile })
        .collect();
    Ok(run_cases("hardy_nonnegativity", cases, spec))
}

pub fn improved_hardy(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let cases = suite_profiles(cfg, &cfg.dimensions, cfg.profiles, false)?
        .into_iter()
        .map(|(domain, profile)| Case::ImprovedHardy { domain, profile })
        .collect();
    Ok(run_cases("improved_hardy", cases, spec))
}

pub fn transform_inequality(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let cases = suite_profiles(cfg, &cfg.dimensions, cfg.transform_profiles, true)?
        .into_iter()
        .map(|(domain, profile)| Case::TransformInequality { domain, profile })
        .collect();
    Ok(run_cases("transform_inequality", cases, spec))
}

pub fn weighted_lq_bound(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let mut cases = Vec::new();
    for (domain, profile) in suite_profiles(cfg, &cfg.lq_dimensions, cfg.lq_profiles, false)? {
        let nf = domain.dim();
        for q in [nf + 1.0, 2.0 * nf, 4.0 * nf] {
            cases.push(Case::WeightedLqBound {
                domain,
                profile: profile.clone(),
                q,
            });
        }
    }
    Ok(run_cases("weighted_lq_bound", cases, spec))
}

pub fn homogeneity(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let cases = suite_profiles(cfg, &cfg.dimensions, cfg.homogeneity_profiles, false)?
        .into_iter()
        .enumerate()
        .map(|(k, (domain, profile))| {
            // golden-ratio stepping spreads log10(lambda) over [-3, 3)
            let frac = (k as f64 * 0.618_033_988_749_895).fract();
            Case::Homogeneity {
                domain,
                profile,
                lambda: 10f64.powf(6.0 * frac - 3.0),
            }
        })
        .collect();
    Ok(run_cases("homogeneity", cases, spec))
}

pub fn weight_comparison(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let cases = suite_profiles(cfg, &cfg.dimensions, cfg.monotonicity_profiles, false)?
        .into_iter()
        .enumerate()
        .map(|(k, (domain, profile))| {
            let beta = [0.25, 0.5, 1.0][k % 3];
            Case::WeightComparison {
                domain,
                profile,
                c: 0.3,
                beta,
                beta_high: beta + 0.5,
            }
        })
        .collect();
    Ok(run_cases("weight_comparison", cases, spec))
}

pub fn dual_path(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let cases = suite_profiles(cfg, &cfg.dimensions, cfg.dual_path_profiles, true)?
        .into_iter()
        .map(|(domain, profile)| Case::DualPath { domain, profile })
        .collect();
    Ok(run_cases("dual_path", cases, spec))
}

pub fn admissibility_threshold(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let mut cases = Vec::new();
    for &n in &cfg.dimensions {
        let domain = BallDomain::unit(n)?;
        for f in [0.3, 0.6, 0.9, 1.1, 1.4, 2.0] {
            cases.push(Case::AdmissibilityThreshold {
                domain,
                s: f / n as f64,
            });
        }
    }
    Ok(run_cases("admissibility_threshold", cases, spec))
}

pub fn trudinger_baseline(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let mut cases = Vec::new();
    for &n in &cfg.dimensions {
        cases.extend(
            domains(cfg, n)?
                .into_iter()
                .map(|domain| Case::TrudingerBaseline { domain }),
        );
    }
    Ok(run_cases("trudinger_baseline", cases, spec))
}

/// `E1, E2 >= 1`, monotonicity, and analytic derivatives against central
/// differences at 100 points per weight kind.
pub fn weights_suite() -> SuiteReport {
    let started = Instant::now();
    let mut out = Vec::new();
    let kinds = [
        WeightKind::E1,
        WeightKind::E2,
        WeightKind::E1PowerE2Power { a: 0.5, b: -1.0 },
        WeightKind::E1PowerE2Power { a: 0.75, b: -0.5 },
    ];
    for k in 0..100 {
        let s = 0.01 + 0.98 * (k as f64 * 0.618_033_988_749_895).fract();
        let (a, b) = (e1(s).unwrap_or(0.0), e2(s).unwrap_or(0.0));
        let (a2, b2) = (e1(0.99 * s).unwrap_or(0.0), e2(0.99 * s).unwrap_or(0.0));
        let mono = (a >= 1.0 && b >= 1.0 && a2 > a && b2 > b) as i32 as f64 - 0.5;
        out.push(CaseOutcome::from_margin(
            mono,
            format!("E1/E2 bounds and monotonicity at s = {s}"),
        ));
        for kind in kinds {
            let h = 1e-5 * s;
            let fd = match (kind.value(s + h), kind.value(s - h)) {
                (Ok(p), Ok(m)) => (p - m) / (2.0 * h),
                _ => f64::NAN,
            };
            let exact = weight_derivative(kind, s).unwrap_or(f64::NAN);
            let err = (fd - exact).abs() / exact.abs().max(1e-12);
            out.push(CaseOutcome::from_margin(
                if err.is_nan() { -1.0 } else { 1e-6 - err },
                format!("{kind:?} at s = {s}: relative error {err:e}"),
            ));
        }
    }
    run_plain("weights", started, out)
}

/// `C1(n)` exactly, `C_n` and `A_n` against the frozen oracle table.
pub fn constants_suite() -> SuiteReport {
    let started = Instant::now();
    let mut out = Vec::new();
    for (k, n) in (2u32..=6).enumerate() {
        let c1_ok = c1(n).ok() == Some((1u64 << (n - 1)) - 1);
        out.push(CaseOutcome::from_margin(
            if c1_ok { 0.0 } else { -1.0 },
            format!("C1({n})"),
        ));
        let c = prop31_constant(n).unwrap_or(f64::NAN);
        let a = series_threshold(n).unwrap_or(f64::NAN);
        let g = relative_gap(c, C_N_ORACLE[k]).max(relative_gap(a, A_N_ORACLE[k]));
        let m = if g.is_nan() { -1.0 } else { 1e-12 - g };
        out.push(CaseOutcome::from_margin(
            m,
            format!("C_{n} = {c:?}, A_{n} = {a:?}, gap {g:e}"),
        ));
    }
    run_plain("constants", started, out)
}

/// Closed-form quadrature oracles.
pub fn quadrature_suite(spec: &QuadratureSpec) -> SuiteReport {
    let started = Instant::now();
    let mut out = Vec::new();
    for n in 2..=6u32 {
        let d = BallDomain::unit(n).expect("unit ball");
        let f = |t: f64| d.radial_measure_factor(t);
        let r = integrate_log(
            &f,
            1.0,
            &[],
            TailClass::ExponentialDecay { rate: d.dim() },
            spec,
        );
        let exact = unit_ball_volume(n).expect("n >= 1");
        let gap = r
            .as_ref()
            .map(|r| relative_gap(r.value, exact))
            .unwrap_or(f64::INFINITY);
        out.push(CaseOutcome::from_margin(
            1e-10 - gap,
            format!("ball volume n = {n}: gap {gap:e}"),
        ));
        let area = d.sphere_area();
        let g = |t: f64| area / (t * t);
        let r = integrate_log(&g, 1.0, &[], TailClass::PowerDecay { exponent: -2.0 }, spec);
        let gap = r
            .as_ref()
            .map(|r| relative_gap(r.value, area))
            .unwrap_or(f64::INFINITY);
        out.push(CaseOutcome::from_margin(
            1e-10 - gap,
            format!("|x|^-n E1^-2 kernel n = {n}: gap {gap:e}"),
        ));
    }
    let h = integrate_log(
        &|t: f64| 1.0 / t,
        1.0,
        &[],
        TailClass::PowerDecay { exponent: -1.0 },
        spec,
    );
    let divergent = matches!(h, Ok(ref r) if r.status == Status::Divergent);
    out.push(CaseOutcome::from_margin(
        if divergent { 0.0 } else { -1.0 },
        format!("harmonic kernel diagnosed divergent: {divergent}"),
    ));
    run_plain("quadrature_oracles", started, out)
}

pub const GREEN_POINTS: [[f64; 2]; 5] = [
    [0.0, 0.0],
    [0.3, 0.1],
    [-0.2, 0.45],
    [0.5, -0.5],
    [-0.7, -0.1],
];

/// Reconstruction of `(1-|x|²)²` at five interior points, coarse and fine.
pub fn green_suite() -> SuiteReport {
    let started = Instant::now();
    let coarse = DiscGrid {
        angular: 16,
        radial: 8,
    };
    let fine = DiscGrid::default();
    let ec = green_representation_check(&bump_2d, &GREEN_POINTS, coarse).unwrap_or(f64::INFINITY);
    let ef = green_representation_check(&bump_2d, &GREEN_POINTS, fine).unwrap_or(f64::INFINITY);
    let out = vec![
        CaseOutcome::from_margin(
            1e-2 - ef,
            format!("max relative error {ef:e} on the default grid"),
        ),
        CaseOutcome::from_margin(ec - ef, format!("refinement: {ec:e} -> {ef:e}")),
    ];
    run_plain("green_representation", started, out)
}

/// Log-spaced grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect()
}

/// Base and derived pairing inequalities on 200×200 grids, and `P_B1`.
pub fn young_suite(spec: &QuadratureSpec) -> SuiteReport {
    let started = Instant::now();
    let grid = log_grid(1e-3, 50.0, 200);
    let mut out = Vec::new();
    let mut worst_base = f64::INFINITY;
    for &a in &grid {
        for &b in &grid {
            // relative slack guards the a ≈ b diagonal against rounding
            let r = young_base_residual(a, b).unwrap_or(f64::NEG_INFINITY) / (a * b).max(1e-300);
            worst_base = worst_base.min(r);
        }
    }
    out.push(CaseOutcome::from_margin(
        worst_base + 1e-12,
        format!("base inequality: smallest residual/(ab) {worst_base:e}"),
    ));
    for n in 2..=4 {
        let mut worst = f64::INFINITY;
        for &a in &grid {
            for &b in &grid {
                let r =
                    young_pairing_check(a, b, n).unwrap_or(f64::NEG_INFINITY) / (a * b).max(1e-300);
                worst = worst.min(r);
            }
        }
        out.push(CaseOutcome::from_margin(
            worst,
            format!("pairing n = {n}: smallest residual/(ab) {worst:e}"),
        ));
    }
    for theta in [1.2, 1.5, 1.8] {
        let ok = eval_p_b1(2, theta, spec).map(|r| r.status.is_converged() && r.value.is_finite());
        out.push(CaseOutcome::from_margin(
            if ok == Ok(true) { 0.0 } else { -1.0 },
            format!("P_B1 at theta = {theta}: converged = {ok:?}"),
        ));
    }
    run_plain("young_pairing", started, out)
}

/// Determinism, feasibility, monotone traces, and the Hardy lower bound
/// for the searches.
pub fn optimizer_suite(spec: &QuadratureSpec) -> CliResult<SuiteReport> {
    let started = Instant::now();
    let d = BallDomain::unit(2)?;
    let budget = OptimizeBudget {
        max_evaluations: 80,
        step_min: 0.01,
        ..OptimizeBudget::default()
    };
    let params = TrudingerParams::new(0.5 * series_threshold(2)?, 1.0);
    let mesh = MeshSearchSpec::default();
    let first = maximize_trudinger(&d, &params, &mesh, &budget, spec)?;
    let second = maximize_trudinger(&d, &params, &mesh, &budget, spec)?;
    let mut out = vec![CaseOutcome::from_margin(
        if first == second { 0.0 } else { -1.0 },
        "identical inputs reproduce the trace".into(),
    )];
    let i = hardy_difference(&first.best_profile, &d, spec)?.value;
    out.push(CaseOutcome::from_margin(
        1e-8 - (i - 1.0).abs(),
        format!("best profile I_n = {i:?}"),
    ));
    let monotone = first
        .trace
        .windows(2)
        .all(|w| w[1].objective >= w[0].objective);
    out.push(CaseOutcome::from_margin(
        if monotone { 0.0 } else { -1.0 },
        "trace is nondecreasing".into(),
    ));
    let search = SearchSpace::FamilySweep {
        s_values: [0.1, 0.2, 0.3, 0.4, 0.45, 0.49].to_vec(),
        cutoffs: vec![None, Some(30.0)],
    };
    let ratio = minimize_ratio(&d, 2.0, &search, &budget, spec)?;
    let best = remainder_constant(2)?;
    let lowest = ratio
        .samples
        .iter()
        .map(|s| s.ratio)
        .fold(f64::INFINITY, f64::min);
    out.push(CaseOutcome::from_margin(
        lowest - (best - 1e-6),
        format!("smallest ratio {lowest:?}"),
    ));
    Ok(run_plain("optimizer", started, out))
}

/// Every suite, in report order.
pub fn run_all(cfg: &SuiteConfig, spec: &QuadratureSpec) -> CliResult<Vec<SuiteReport>> {
    Ok(vec![
        weights_suite(),
        constants_suite(),
        quadrature_suite(spec),
        hardy_nonnegativity(cfg, spec)?,
        improved_hardy(cfg, spec)?,
        transform_inequality(cfg, spec)?,
        weighted_lq_bound(cfg, spec)?,
        homogeneity(cfg, spec)?,
        weight_comparison(cfg, spec)?,
        dual_path(cfg, spec)?,
        admissibility_threshold(cfg, spec)?,
        trudinger_baseline(cfg, spec)?,
        green_suite(),
        young_suite(spec),
        optimizer_suite(spec)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            profiles: 6,
            lq_profiles: 3,
            transform_profiles: 4,
            homogeneity_profiles: 3,
            dual_path_profiles: 2,
            monotonicity_profiles: 3,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn small_suites_pass() {
        let spec = QuadratureSpec::default();
        for r in run_all(&small(), &spec).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn cases_replay_identically() {
        let spec = QuadratureSpec::default();
        let d = BallDomain::new(3, 0.5, 2.0).unwrap();
        let u = MeshSampler::default().sample(&d, 11).unwrap();
        let case = Case::ImprovedHardy {
            domain: d,
            profile: u,
        };
        let text = serde_json::to_string(&Replay {
            quadrature: spec,
            case: case.clone(),
        })
        .unwrap();
        let back: Replay = serde_json::from_str(&text).unwrap();
        assert_eq!(back.case.check(&back.quadrature), case.check(&spec));
    }

    #[test]
    fn bad_domains_fail_cleanly() {
        let good = BallDomain::unit(2).unwrap();
        let mut v = serde_json::to_value(Case::TrudingerBaseline { domain: good }).unwrap();
        v["domain"]["rho"] = serde_json::json!(5.0);
        let case: Case = serde_json::from_value(v).unwrap();
        let out = case.check(&QuadratureSpec::default());
        assert!(!out.passed);
        assert!(out.detail.contains("invalid domain"));
    }
}
