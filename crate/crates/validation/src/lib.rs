//! Acceptance criteria with pinned tolerances and runtime limits. The
//! `acceptance` test target prints one PASS/FAIL line per criterion.

use std::fs;
use std::time::{Duration, Instant};

use leray_cli::commands::execute;
use leray_cli::config::{Command, ScenarioConfig, SuiteConfig};
use leray_cli::output::RunManifest;
use leray_cli::suites::{self, exponential_spec, SuiteReport};
use leray_core::funcspace::make_family;
use leray_core::functionals::{
    c1, normalize_to_unit_hardy, prop31_constant, series_threshold, trudinger_integral,
    TrudingerParams,
};
use leray_core::geometry::BallDomain;
use leray_core::optimize::{
    blowup_sweep, maximize_trudinger, minimize_ratio, warm_start_grid, MeshSearchSpec,
    OptimizeBudget, SearchSpace, Verdict,
};
use leray_core::quadrature::{integrate_log, integrate_radius, QuadratureSpec, TailClass};

/// Cₙ and Aₙ for n = 2..6 from 50-digit arithmetic (mpmath).
const C_N: [f64; 5] = [
    std::f64::consts::FRAC_2_SQRT_PI,
    0.75342278515008029704,
    0.58221446871705648067,
    0.4830181652111733549,
    0.41788742520768306069,
];
const A_N: [f64; 5] = [
    0.28893183744773042948,
    0.56253220771945435506,
    0.75670776897003128093,
    0.9135896866199190052,
    1.0481763456548128547,
];

pub struct Line {
    pub passed: bool,
    pub detail: String,
}

impl Line {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn suites_line(reports: &[SuiteReport]) -> Line {
    let passed = reports.iter().all(|r| r.passed);
    let detail = reports
        .iter()
        .map(|r| {
            let mut s = format!(
                "{}: {}/{} ok, worst margin {:e}",
                r.name,
                r.cases - r.failures,
                r.cases,
                r.worst_margin
            );
            if !r.passed {
                s.push_str(&format!(" ({})", r.worst_detail));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ");
    Line::new(passed, detail)
}

fn criterion_1() -> Line {
    let mut ok = true;
    let mut worst = 0.0f64;
    for (k, n) in (2u32..=6).enumerate() {
        ok &= c1(n).ok() == Some((1u64 << (n - 1)) - 1);
        let gc = rel(prop31_constant(n).unwrap_or(f64::NAN), C_N[k]);
        let ga = rel(series_threshold(n).unwrap_or(f64::NAN), A_N[k]);
        let g = gc.max(ga);
        if !(g <= 1e-12) {
            ok = false;
        }
        worst = worst.max(g);
    }
    let suite = suites::constants_suite();
    Line::new(
        ok && suite.passed,
        format!(
            "C1(n) exact, worst relative gap {worst:e}; C_2 = {:?}, A_2 = {:?}",
            C_N[0], A_N[0]
        ),
    )
}

fn default_suite() -> SuiteConfig {
    SuiteConfig::default()
}

fn criterion_2(spec: &QuadratureSpec) -> Line {
    let cfg = default_suite();
    let report = suites::hardy_nonnegativity(&cfg, spec).expect("suite runs");
    let ok = report.cases == 500 * 3 * 2;
    let mut line = suites_line(&[report]);
    line.passed &= ok;
    line
}

fn criterion_3(spec: &QuadratureSpec) -> Line {
    let cfg = default_suite();
    let report = suites::improved_hardy(&cfg, spec).expect("suite runs");
    let ok = report.cases == 500 * 3 * 2;
    let mut line = suites_line(&[report]);
    line.passed &= ok;
    line
}

fn criterion_4(spec: &QuadratureSpec) -> Line {
    let report = suites::transform_inequality(&default_suite(), spec).expect("suite runs");
    suites_line(&[report])
}

fn criterion_5(spec: &QuadratureSpec) -> Line {
    let report = suites::weighted_lq_bound(&default_suite(), spec).expect("suite runs");
    let ok = report.cases == 200 * 2 * 2 * 3;
    let mut line = suites_line(&[report]);
    line.passed &= ok;
    line
}

fn criterion_6(spec: &QuadratureSpec) -> Line {
    let d = BallDomain::unit(2).expect("unit disc");
    let fractions = [
        0.1, 0.2, 0.3, 0.4, 0.45, 0.48, 0.49, 0.495, 0.499, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99,
        0.995, 0.999,
    ];
    let search = SearchSpace::FamilySweep {
        s_values: fractions.iter().map(|f| f / 2.0).collect(),
        cutoffs: vec![None],
    };
    let budget = OptimizeBudget::default();
    let lowest = |gamma: f64| -> Result<f64, String> {
        let r = minimize_ratio(&d, gamma, &search, &budget, spec).map_err(|e| e.to_string())?;
        Ok(r.samples
            .iter()
            .map(|s| s.ratio)
            .fold(f64::INFINITY, f64::min))
    };
    match (lowest(2.0), lowest(1.5)) {
        (Ok(m2), Ok(m15)) => Line::new(
            (0.25 - 1e-6..=0.5).contains(&m2) && m15 < 0.05,
            format!("gamma = 2: min ratio {m2:?} (need in [0.25 - 1e-6, 0.5]); gamma = 1.5: min ratio {m15:?} (need < 0.05)"),
        ),
        (a, b) => Line::new(false, format!("sweep failed: {a:?}, {b:?}")),
    }
}

fn criterion_7(spec: &QuadratureSpec) -> Line {
    let d = BallDomain::unit(2).expect("unit disc");
    let eps: Vec<f64> = (2..=8).map(|k| 10f64.powi(-k)).collect();
    let (div, ctl) = match (
        blowup_sweep(&d, 0.25, 0.2, 0.4, &eps, spec),
        blowup_sweep(&d, 1.0, 0.2, 0.4, &eps, spec),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            return Line::new(
                false,
                format!("sweep failed: {:?} / {:?}", a.err(), b.err()),
            )
        }
    };
    let beyond: Vec<f64> = div
        .rows
        .iter()
        .filter(|r| r.epsilon < 1e-4 * (1.0 + 1e-9))
        .filter_map(|r| r.growth_ratio)
        .collect();
    let min_growth = beyond.iter().copied().fold(f64::INFINITY, f64::min);
    let growth_ok = !beyond.is_empty() && min_growth >= 2.0;
    let div_verdict_ok = div.verdict == Verdict::Divergent;
    let k = ctl.rows.len();
    let ctl_gap = rel(ctl.rows[k - 1].truncated, ctl.rows[k - 2].truncated);
    let ctl_ok = ctl_gap <= 1e-6 && ctl.verdict == Verdict::Convergent;
    let partials: Vec<String> = div
        .rows
        .iter()
        .map(|r| format!("{:.12}", r.truncated))
        .collect();
    Line::new(
        growth_ok && div_verdict_ok && ctl_ok,
        format!(
            "beta = 0.25: verdict {:?} [{}], smallest growth per decade beyond 1e-4 {min_growth:?} (need >= 2) [{}], partials {}; \
             beta = 1 control: verdict {:?}, final-decade gap {ctl_gap:e} [{}]",
            div.verdict,
            if div_verdict_ok { "ok" } else { "FAIL" },
            if growth_ok { "ok" } else { "FAIL" },
            partials.join(" "),
            ctl.verdict,
            if ctl_ok { "ok" } else { "FAIL" },
        ),
    )
}

fn criterion_8(spec: &QuadratureSpec) -> Line {
    let d = BallDomain::unit(2).expect("unit disc");
    let c = 0.5 * series_threshold(2).expect("n = 2");
    let params = TrudingerParams::new(c, 1.0);
    let sp = exponential_spec(spec);
    let mut finite = true;
    let mut notes = Vec::new();
    for fam in warm_start_grid(2, d.t_boundary()) {
        let r = make_family(fam, &d)
            .and_then(|u| normalize_to_unit_hardy(&u, &d, spec))
            .and_then(|u| trudinger_integral(&u, &d, &params, &sp));
        match r {
            Ok(t) if t.report.status.is_converged() && t.report.value.is_finite() => {}
            other => {
                finite = false;
                notes.push(format!("{fam:?}: {:?}", other.map(|t| t.report.status)));
            }
        }
    }
    let objectives: Vec<f64> = (0..5u64)
        .filter_map(|seed| {
            let budget = OptimizeBudget {
                seed,
                ..OptimizeBudget::default()
            };
            maximize_trudinger(&d, &params, &MeshSearchSpec::default(), &budget, spec)
                .map(|r| r.objective)
                .map_err(|e| notes.push(format!("seed {seed}: {e}")))
                .ok()
        })
        .collect();
    let hi = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi.abs();
    Line::new(
        finite && objectives.len() == 5 && spread <= 0.01,
        format!("warm-start grid finite: {finite}; objectives {objectives:?}; relative spread {spread:e}; {}", notes.join(", ")),
    )
}

/// Deterministic quasi-random numbers in [0, 1).
fn weyl(k: usize, dim: usize) -> f64 {
    const ALPHAS: [f64; 9] = [
        0.6180339887498949,
        0.7548776662466927,
        0.5698402909980532,
        0.8191725133961645,
        0.6823278038280193,
        0.5436890126920764,
        0.7244919590005157,
        0.6180339887498949 * 0.5,
        0.7548776662466927 * 0.5,
    ];
    ((k + 1) as f64 * ALPHAS[dim % ALPHAS.len()] + 0.1 * dim as f64).fract()
}

fn criterion_9(spec: &QuadratureSpec) -> Line {
    let oracles = suites::quadrature_suite(spec);
    let mut worst = 0.0f64;
    let mut ok = true;
    for case in 0..20 {
        let terms: Vec<(f64, i32, f64)> = (0..3)
            .map(|j| {
                let a = 0.1 + 1.9 * weyl(case, 3 * j);
                let m = (4.0 * weyl(case, 3 * j + 1)) as i32;
                let b = 0.5 + 2.5 * weyl(case, 3 * j + 2);
                (a, m, b)
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
            spec,
        );
        let radius = integrate_radius(&|r: f64| g(1.0 - r.ln()) / r, 1.0, 1.0, &[], spec);
        match (log_path, radius) {
            (Ok(a), Ok(b)) if a.status.is_converged() => worst = worst.max(rel(a.value, b.value)),
            _ => ok = false,
        }
    }
    let mut line = suites_line(&[oracles]);
    line.passed &= ok && worst <= 1e-6;
    line.detail.push_str(&format!(
        "; dual path on 20 integrands: worst relative gap {worst:e}"
    ));
    line
}

fn criterion_10() -> Line {
    suites_line(&[suites::green_suite()])
}

fn criterion_11(spec: &QuadratureSpec) -> Line {
    suites_line(&[suites::young_suite(spec)])
}

fn criterion_12() -> Line {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = ScenarioConfig {
        command: Command::Sweep,
        output_dir: dir.path().display().to_string(),
        ..ScenarioConfig::default()
    };
    let first = execute(&cfg);
    let body1 = fs::read(dir.path().join("sweep.csv"));
    let second = execute(&cfg);
    let body2 = fs::read(dir.path().join("sweep.csv"));
    match (first, second, body1, body2) {
        (Ok(a), Ok(b), Ok(x), Ok(y)) => {
            let m = b.manifest.as_deref().map(RunManifest::load);
            let hit = matches!(&m, Some(Ok(m)) if m.summary["full_cache_hit"] == serde_json::Value::Bool(true));
            let identical = x == y;
            Line::new(
                a.exit_code == 0 && b.exit_code == 0 && hit && identical,
                format!(
                    "identical CSV bodies: {identical}; full cache hit on rerun: {hit}; {} bytes",
                    x.len()
                ),
            )
        }
        (a, b, x, y) => Line::new(
            false,
            format!(
                "sweep failed: {:?} {:?} {:?} {:?}",
                a.err(),
                b.err(),
                x.err(),
                y.err()
            ),
        ),
    }
}

pub struct Criterion {
    pub name: &'static str,
    pub limit: Duration,
    pub check: Box<dyn Fn() -> Line>,
}

/// Outcome of one timed criterion.
pub struct Report {
    pub passed: bool,
    pub elapsed: Duration,
    pub line: Line,
}

impl Criterion {
    fn new(name: &'static str, secs: u64, check: impl Fn() -> Line + 'static) -> Self {
        Self {
            name,
            limit: Duration::from_secs(secs),
            check: Box::new(check),
        }
    }

    /// Runs the check; exceeding the runtime limit fails the criterion.
    pub fn run(&self) -> Report {
        let started = Instant::now();
        let line = (self.check)();
        let elapsed = started.elapsed();
        Report {
            passed: line.passed && elapsed < self.limit,
            elapsed,
            line,
        }
    }
}

/// The twelve criteria in order.
pub fn criteria() -> Vec<Criterion> {
    let spec = QuadratureSpec::default();
    vec![
        Criterion::new("constants reproduction", 1, criterion_1),
        Criterion::new("Hardy nonnegativity", 60, move || criterion_2(&spec)),
        Criterion::new("improved Hardy", 60, move || criterion_3(&spec)),
        Criterion::new("transform identity", 60, move || criterion_4(&spec)),
        Criterion::new("weighted L^q bound", 120, move || criterion_5(&spec)),
        Criterion::new("sharpness trend", 120, move || criterion_6(&spec)),
        Criterion::new("divergence regime", 60, move || criterion_7(&spec)),
        Criterion::new("finite regime stability", 300, move || criterion_8(&spec)),
        Criterion::new("quadrature oracles", 30, move || criterion_9(&spec)),
        Criterion::new("Green representation", 60, criterion_10),
        Criterion::new("Young-type pairing", 30, move || criterion_11(&spec)),
        Criterion::new("sweep reproducibility", 30, criterion_12),
    ]
}
