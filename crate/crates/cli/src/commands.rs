//! The seven commands. Each writes its artifacts into the output directory
//! and finishes with a run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use leray_core::funcspace::{make_family, FamilySpec, RadialProfile};
use leray_core::functionals::{
    c1, dirichlet_energy, ground_state_transform, hardy_constant, hardy_difference, hardy_term,
    normalize_to_unit_hardy, prop31_constant, remainder_constant, remainder_term, series_threshold,
    trudinger_integral, weighted_energy, weighted_lq_norm, FunctionalReport,
};
use leray_core::geometry::BallDomain;
use leray_core::optimize::{
    blowup_sweep, gap_cell, maximize_trudinger, minimize_ratio, GapCell, OptimizeBudget,
    SearchSpace,
};
use leray_core::quadrature::QuadratureSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{Command, OptimizeTarget, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, fmt_opt, sha256_hex, timestamp, OutputDir, RunManifest};
use crate::suites::{self, exponential_spec, Replay};

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: u8,
    pub manifest: Option<PathBuf>,
    /// Human-readable summary printed on stdout.
    pub message: String,
}

struct Run {
    cfg: ScenarioConfig,
    out: OutputDir,
    started_at: String,
}

impl Run {
    fn finish(
        self,
        summary: serde_json::Value,
        exit_code: u8,
        message: String,
    ) -> CliResult<Outcome> {
        let manifest = RunManifest {
            seed: self.cfg.suite.seed,
            config: self.cfg,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            started_at: self.started_at,
            finished_at: timestamp(),
            outputs: self.out.outputs().to_vec(),
            summary,
        };
        let path = manifest.persist(self.out.root())?;
        manifest.verify(self.out.root())?;
        Ok(Outcome {
            exit_code,
            manifest: Some(path),
            message,
        })
    }
}

/// Runs the configured command inside a worker pool of `cfg.threads`.
pub fn execute(cfg: &ScenarioConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        let run = Run {
            cfg: cfg.clone(),
            out: OutputDir::create(&cfg.output_dir)?,
            started_at: timestamp(),
        };
        match cfg.command {
            Command::Verify => verify(run),
            Command::Constants => constants(run),
            Command::Functional => functional(run),
            Command::Optimize => optimize(run),
            Command::Counterexample => counterexample(run),
            Command::Gapscan => gapscan(run),
            Command::Sweep => sweep(run),
        }
    })
}

fn verify(mut run: Run) -> CliResult<Outcome> {
    let reports = suites::run_all(&run.cfg.suite, &run.cfg.quadrature)?;
    let passed = reports.iter().all(|r| r.passed);
    for r in reports.iter().filter(|r| !r.passed) {
        if let Some(case) = r.first_failure.as_ref().and_then(|f| f.case.clone()) {
            let replay = Replay {
                quadrature: run.cfg.quadrature,
                case,
            };
            run.out
                .write_json(&format!("replay/{}.json", r.name), &replay)?;
        }
    }
    run.out.write_json(
        "verify_report.json",
        &json!({ "passed": passed, "suites": reports }),
    )?;
    let mut message = String::new();
    for r in &reports {
        message.push_str(&format!(
            "{:<24} {} ({} cases, worst margin {:e})\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.cases,
            r.worst_margin
        ));
    }
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.as_str())
        .collect();
    run.finish(
        json!({ "passed": passed, "failing": failing }),
        if passed { 0 } else { 2 },
        message,
    )
}

/// Re-evaluates a case written by a failed `verify`.
pub fn replay(path: &Path) -> CliResult<Outcome> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let replay: Replay = serde_json::from_str(&text)?;
    replay.quadrature.validate()?;
    let outcome = replay.case.check(&replay.quadrature);
    let message =
        serde_json::to_string_pretty(&json!({ "case": replay.case, "outcome": outcome }))?;
    Ok(Outcome {
        exit_code: if outcome.passed { 0 } else { 2 },
        manifest: None,
        message,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub n: u32,
    pub c1: u64,
    pub hardy: f64,
    pub remainder: f64,
    pub c_n: f64,
    pub a_n: f64,
}

pub fn constants_table(n_max: u32) -> CliResult<Vec<ConstantsRow>> {
    (2..=n_max)
        .map(|n| {
            Ok(ConstantsRow {
                n,
                c1: c1(n)?,
                hardy: hardy_constant(n)?,
                remainder: remainder_constant(n)?,
                c_n: prop31_constant(n)?,
                a_n: series_threshold(n)?,
            })
        })
        .collect()
}

fn constants(mut run: Run) -> CliResult<Outcome> {
    let rows = constants_table(run.cfg.domain.n.max(6))?;
    let text: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.c1.to_string(),
                fmt_f64(r.hardy),
                fmt_f64(r.remainder),
                fmt_f64(r.c_n),
                fmt_f64(r.a_n),
            ]
        })
        .collect();
    run.out.write_csv(
        "constants.csv",
        &["n", "c1", "hardy", "remainder", "c_n", "a_n"],
        &text,
    )?;
    run.out.write_json("constants.json", &rows)?;
    let message = text
        .iter()
        .map(|r| r.join(","))
        .collect::<Vec<_>>()
        .join("\n");
    run.finish(json!({ "rows": rows.len() }), 0, message)
}

fn report_row(r: &FunctionalReport) -> Vec<String> {
    vec![
        r.name.clone(),
        fmt_f64(r.value),
        fmt_f64(r.error_estimate),
        serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        r.inputs_digest.clone(),
    ]
}

fn functional(mut run: Run) -> CliResult<Outcome> {
    let cfg = &run.cfg;
    let d = cfg.domain.build()?;
    let spec = cfg.quadrature;
    let f = &cfg.functional;
    let mut u = match &f.profile {
        Some(p) => p.clone(),
        None => make_family(f.family, &d)?,
    };
    if f.normalize {
        u = normalize_to_unit_hardy(&u, &d, &spec)?;
    }
    let q = f.q.unwrap_or(d.dim() + 1.0);
    let trud = trudinger_integral(&u, &d, &f.trudinger(), &exponential_spec(&spec))?;
    let reports = vec![
        hardy_difference(&u, &d, &spec)?,
        dirichlet_energy(&u, &d, &spec)?,
        hardy_term(&u, &d, &spec)?,
        remainder_term(&u, &d, f.gamma, &spec)?,
        weighted_energy(&ground_state_transform(&u, &d), &d, &spec)?,
        weighted_lq_norm(&u, &d, q, &spec)?,
        trud.report.clone(),
    ];
    let rows: Vec<Vec<String>> = reports.iter().map(report_row).collect();
    run.out.write_csv(
        "functional.csv",
        &["name", "value", "error_estimate", "status", "inputs_digest"],
        &rows,
    )?;
    run.out.write_json(
        "functional.json",
        &json!({ "profile": u, "reports": reports, "trudinger_far_rate": trud.far_rate }),
    )?;
    let message = rows
        .iter()
        .map(|r| r[..4].join(","))
        .collect::<Vec<_>>()
        .join("\n");
    run.finish(json!({ "functionals": reports.len() }), 0, message)
}

fn optimize(mut run: Run) -> CliResult<Outcome> {
    let cfg = run.cfg.clone();
    let d = cfg.domain.build()?;
    let o = &cfg.optimize;
    match o.target {
        OptimizeTarget::Trudinger => {
            let params = cfg.functional.trudinger();
            let spec = exponential_spec(&cfg.quadrature);
            let results = o
                .seeds
                .par_iter()
                .map(|&seed| {
                    let budget = OptimizeBudget { seed, ..o.budget };
                    maximize_trudinger(&d, &params, &o.mesh, &budget, &spec).map(|r| (seed, r))
                })
                .collect::<leray_core::Result<Vec<_>>>()?;
            let summary: Vec<Vec<String>> = results
                .iter()
                .map(|(seed, r)| {
                    vec![
                        seed.to_string(),
                        fmt_f64(r.objective),
                        fmt_f64(r.constraint_value),
                        serde_json::to_value(r.outcome)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                        r.evaluations.to_string(),
                    ]
                })
                .collect();
            let trace: Vec<Vec<String>> = results
                .iter()
                .flat_map(|(seed, r)| {
                    r.trace.iter().map(move |p| {
                        vec![
                            seed.to_string(),
                            p.evaluation.to_string(),
                            fmt_f64(p.objective),
                        ]
                    })
                })
                .collect();
            run.out.write_csv(
                "optimize.csv",
                &[
                    "seed",
                    "objective",
                    "constraint_value",
                    "outcome",
                    "evaluations",
                ],
                &summary,
            )?;
            run.out.write_csv(
                "optimize_trace.csv",
                &["seed", "evaluation", "objective"],
                &trace,
            )?;
            run.out.write_json(
                "optimize.json",
                &results
                    .iter()
                    .map(|(s, r)| json!({ "seed": s, "result": r }))
                    .collect::<Vec<_>>(),
            )?;
            let best = results
                .iter()
                .map(|r| r.1.objective)
                .fold(f64::NEG_INFINITY, f64::max);
            let message = summary
                .iter()
                .map(|r| r.join(","))
                .collect::<Vec<_>>()
                .join("\n");
            run.finish(
                json!({ "best_objective": best, "label": "lower bound on the supremum" }),
                0,
                message,
            )
        }
        OptimizeTarget::Ratio => {
            let nf = d.dim();
            let search = SearchSpace::FamilySweep {
                s_values: o.s_fractions.iter().map(|f| f / nf).collect(),
                cutoffs: vec![None],
            };
            let r = minimize_ratio(
                &d,
                cfg.functional.gamma,
                &search,
                &o.budget,
                &cfg.quadrature,
            )?;
            let rows: Vec<Vec<String>> = r
                .samples
                .iter()
                .map(|s| {
                    vec![
                        fmt_f64(s.s),
                        fmt_opt(s.cutoff),
                        fmt_f64(s.hardy_difference),
                        fmt_f64(s.remainder),
                        fmt_f64(s.ratio),
                    ]
                })
                .collect();
            run.out.write_csv(
                "ratio.csv",
                &["s", "cutoff", "I_n", "R_gamma", "ratio"],
                &rows,
            )?;
            run.out.write_json("ratio.json", &r)?;
            let message = format!(
                "smallest ratio {:?} over {} samples",
                r.extremal.objective,
                r.samples.len()
            );
            run.finish(
                json!({ "smallest_ratio": r.extremal.objective }),
                0,
                message,
            )
        }
    }
}

fn counterexample(mut run: Run) -> CliResult<Outcome> {
    let cfg = &run.cfg;
    let d = cfg.domain.build()?;
    let f = &cfg.functional;
    let nf = d.dim();
    let s = f.s.ok_or_else(|| {
        CliError::Config(format!(
            "counterexample needs functional.s in the window (beta, 1/n) = ({}, {})",
            f.beta,
            1.0 / nf
        ))
    })?;
    let table = blowup_sweep(&d, f.beta, f.c, s, &f.epsilons, &cfg.quadrature)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.epsilon),
                fmt_f64(r.truncated),
                fmt_opt(r.growth_ratio),
                fmt_f64(r.hardy_difference),
            ]
        })
        .collect();
    run.out.write_csv(
        "counterexample.csv",
        &["epsilon", "truncated_T", "growth_ratio", "I_n"],
        &rows,
    )?;
    run.out.write_json("counterexample.json", &table)?;
    let verdict = serde_json::to_value(table.verdict)?;
    let verdict = verdict.as_str().unwrap_or_default().to_string();
    let message = format!("verdict {verdict} (far-field rate {:e})", table.far_rate);
    run.finish(
        json!({ "verdict": verdict, "far_rate": table.far_rate }),
        0,
        message,
    )
}

fn gap_rows(n: u32, cells: &[GapCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            vec![
                n.to_string(),
                fmt_f64(c.beta),
                fmt_f64(c.c),
                fmt_opt(c.max_finite),
                c.argmax
                    .map(|a| serde_json::to_string(&a).unwrap_or_default())
                    .unwrap_or_default(),
                c.divergent_witnesses.len().to_string(),
                c.skipped.len().to_string(),
            ]
        })
        .collect()
}

fn gapscan(mut run: Run) -> CliResult<Outcome> {
    let cfg = run.cfg.clone();
    cfg.check_grid()?;
    let spec = exponential_spec(&cfg.quadrature);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in &cfg.grid.dimensions {
        let d = BallDomain::new(n, cfg.domain.rho, cfg.domain.hardy_scale)?;
        let families = cfg.grid.families_for(n);
        let grid: Vec<(f64, f64)> = cfg
            .grid
            .betas_for(n)
            .into_iter()
            .flat_map(|b| {
                cfg.grid
                    .cs_for(n)
                    .unwrap_or_default()
                    .into_iter()
                    .map(move |c| (b, c))
            })
            .collect();
        if grid.is_empty() {
            return Err(CliError::Config("gap scan grid is empty".into()));
        }
        let cells = grid
            .par_iter()
            .map(|&(beta, c)| gap_cell(&d, beta, c, &families, &spec))
            .collect::<leray_core::Result<Vec<_>>>()?;
        rows.extend(gap_rows(n, &cells));
        reports.push(json!({ "label": "EMPIRICAL", "n": n, "cells": cells }));
    }
    run.out.write_csv(
        "gapscan.csv",
        &[
            "n",
            "beta",
            "c",
            "max_finite",
            "argmax",
            "divergent_witnesses",
            "skipped",
        ],
        &rows,
    )?;
    run.out.write_json("gapscan.json", &reports)?;
    let witnesses: usize = rows
        .iter()
        .map(|r| r[5].parse::<usize>().unwrap_or(0))
        .sum();
    let message = format!(
        "EMPIRICAL gap scan: {} cells, {witnesses} divergent witnesses",
        rows.len()
    );
    run.finish(
        json!({ "label": "EMPIRICAL", "cells": rows.len(), "divergent_witnesses": witnesses }),
        0,
        message,
    )
}

/// Inputs that determine one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub version: String,
    pub domain: BallDomain,
    pub beta: f64,
    pub c: f64,
    pub family: FamilySpec,
    pub weight_kind: leray_core::functionals::TrudingerWeight,
    pub quadrature: QuadratureSpec,
}

impl CellKey {
    pub fn digest(&self) -> String {
        sha256_hex(
            serde_json::to_string(self)
                .expect("cell key serializes")
                .as_bytes(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    /// `T` of the family member rescaled to `I_n = 1`.
    pub trudinger: Option<f64>,
    pub error_estimate: Option<f64>,
    pub status: String,
    pub far_rate: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CachedCell {
    key: CellKey,
    result: CellResult,
}

fn evaluate_cell(key: &CellKey) -> CellResult {
    let eval = || -> leray_core::Result<CellResult> {
        let u: RadialProfile = make_family(key.family, &key.domain)?;
        let u = normalize_to_unit_hardy(&u, &key.domain, &key.quadrature)?;
        let params = leray_core::functionals::TrudingerParams {
            weight_kind: key.weight_kind,
            ..leray_core::functionals::TrudingerParams::new(key.c, key.beta)
        };
        let t = trudinger_integral(&u, &key.domain, &params, &exponential_spec(&key.quadrature))?;
        let status = serde_json::to_value(t.report.status)
            .ok()
            .and_then(|v| v.as_str().map(String::from));
        Ok(CellResult {
            trudinger: Some(t.report.value),
            error_estimate: Some(t.report.error_estimate),
            status: status.unwrap_or_default(),
            far_rate: Some(t.far_rate),
        })
    };
    eval().unwrap_or_else(|e| CellResult {
        trudinger: None,
        error_estimate: None,
        status: format!("error: {e}"),
        far_rate: None,
    })
}

/// Loads a cached cell when its stored key matches, else evaluates and
/// stores it. Returns the result and whether it was a cache hit.
fn cached_cell(dir: &Path, key: &CellKey) -> CliResult<(CellResult, bool)> {
    let path = dir.join(format!("{}.json", key.digest()));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(cached) = serde_json::from_str::<CachedCell>(&text) {
            if &cached.key == key {
                return Ok((cached.result, true));
            }
        }
    }
    let result = evaluate_cell(key);
    let text = serde_json::to_string_pretty(&CachedCell {
        key: key.clone(),
        result: result.clone(),
    })?;
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok((result, false))
}

pub fn sweep_keys(cfg: &ScenarioConfig) -> CliResult<Vec<CellKey>> {
    cfg.check_grid()?;
    let mut keys = Vec::new();
    for &n in &cfg.grid.dimensions {
        let domain = BallDomain::new(n, cfg.domain.rho, cfg.domain.hardy_scale)?;
        let families = cfg.grid.families_for(n);
        for beta in cfg.grid.betas_for(n) {
            for c in cfg.grid.cs_for(n)? {
                for &family in &families {
                    keys.push(CellKey {
                        version: env!("CARGO_PKG_VERSION").into(),
                        domain,
                        beta,
                        c,
                        family,
                        weight_kind: cfg.functional.weight_kind,
                        quadrature: cfg.quadrature,
                    });
                }
            }
        }
    }
    if keys.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    Ok(keys)
}

fn sweep(mut run: Run) -> CliResult<Outcome> {
    let keys = sweep_keys(&run.cfg)?;
    let cell_dir = run.out.root().join("cells");
    fs::create_dir_all(&cell_dir).map_err(|e| CliError::io(&cell_dir, e))?;
    let results = keys
        .par_iter()
        .map(|k| cached_cell(&cell_dir, k))
        .collect::<CliResult<Vec<_>>>()?;
    let hits = results.iter().filter(|r| r.1).count();
    let failed = results.iter().filter(|r| r.0.trudinger.is_none()).count();
    let rows: Vec<Vec<String>> = keys
        .iter()
        .zip(&results)
        .map(|(k, (r, _))| {
            vec![
                k.domain.n().to_string(),
                fmt_f64(k.beta),
                fmt_f64(k.c),
                serde_json::to_string(&k.family).unwrap_or_default(),
                fmt_opt(r.trudinger),
                fmt_opt(r.error_estimate),
                r.status.clone(),
                fmt_opt(r.far_rate),
                k.digest(),
            ]
        })
        .collect();
    run.out.write_csv(
        "sweep.csv",
        &[
            "n",
            "beta",
            "c",
            "family",
            "trudinger",
            "error_estimate",
            "status",
            "far_rate",
            "cell_digest",
        ],
        &rows,
    )?;
    let summary = json!({
        "cells": keys.len(),
        "cache_hits": hits,
        "full_cache_hit": hits == keys.len(),
        "failed_cells": failed,
    });
    let message = format!("{} cells, {hits} from cache, {failed} failed", keys.len());
    run.finish(summary, if failed == 0 { 0 } else { 4 }, message)
}
