//! Derivative-free searches over radial profiles: maximizing the Trudinger
//! integral under `I_n = 1`, minimizing Hardy-to-remainder ratios, and the
//! parameter sweeps for the divergent and undecided regimes.
//!
//! The search is a coordinate pattern search over mesh node values with
//! geometric step decay. The constraint is enforced by exact rescaling
//! (`I_n` is `n`-homogeneous), never by penalties.

use rand_core::RngCore;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{
    interpolate_on_mesh, make_family, FamilySpec, MeshSampler, RadialProfile, Representation,
};
use crate::functionals::{
    hardy_difference, normalize_to_unit_hardy, remainder_term, trudinger_integral, TrudingerParams,
};
use crate::geometry::BallDomain;
use crate::quadrature::{PartialIntegral, QuadratureSpec, Status};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeBudget {
    pub max_evaluations: usize,
    /// Initial step, relative to the largest node value.
    pub step_init: f64,
    pub step_min: f64,
    pub seed: u64,
}

impl Default for OptimizeBudget {
    fn default() -> Self {
        Self {
            max_evaluations: 400,
            step_init: 0.25,
            step_min: 1e-3,
            seed: 0,
        }
    }
}

impl OptimizeBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations < 1 {
            return Err(Error::Config("max_evaluations must be >= 1".into()));
        }
        if !(self.step_min > 0.0 && self.step_min < self.step_init && self.step_init.is_finite()) {
            return Err(Error::Config(format!(
                "steps need 0 < step_min < step_init, got step_min = {}, step_init = {}",
                self.step_min, self.step_init
            )));
        }
        Ok(())
    }
}

/// Mesh on which node values are searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshSearchSpec {
    pub node_count: usize,
    /// Extent of the mesh in `t` past the boundary.
    pub span: f64,
}

impl Default for MeshSearchSpec {
    fn default() -> Self {
        Self {
            node_count: 12,
            span: 12.0,
        }
    }
}

impl MeshSearchSpec {
    fn nodes(&self, t_b: f64) -> Result<Vec<f64>> {
        if self.node_count < 3 || !(self.span > 0.0 && self.span.is_finite()) {
            return Err(Error::Config(
                "search mesh needs node_count >= 3 and a positive span".into(),
            ));
        }
        // denser near the boundary, where concentration profiles vary fastest
        let m = (self.node_count - 1) as f64;
        Ok((0..self.node_count)
            .map(|k| t_b + self.span * (k as f64 / m).powi(2))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchOutcome {
    Completed,
    BudgetExhausted,
    /// A candidate produced a divergent objective; it is the returned profile.
    DivergentWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    /// Best objective found so far.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalResult {
    pub best_profile: RadialProfile,
    pub objective: f64,
    /// `I_n` of `best_profile`.
    pub constraint_value: f64,
    pub outcome: SearchOutcome,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
    /// Discarded candidates and other remarks.
    pub notes: Vec<String>,
}

/// Warm starts: Moser plateaus, ground-state powers below `1/n`, and pure
/// powers.
pub fn warm_start_grid(n: u32, t_boundary: f64) -> Vec<FamilySpec> {
    let nf = n as f64;
    let mut out: Vec<FamilySpec> = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&l| FamilySpec::moser_plateau(l))
        .collect();
    out.extend(
        [0.2, 0.4, 0.6, 0.8, 0.95]
            .iter()
            .map(|&f| FamilySpec::ground_state_power(f / nf)),
    );
    let a_min = 1.0 - 1.0 / nf;
    out.extend(
        [a_min + 0.1, 1.0, 1.5, 2.0]
            .iter()
            .map(|&a| FamilySpec::PurePower {
                a,
                t_cap: t_boundary + 4.0,
            }),
    );
    out
}

enum Eval {
    Finite(f64),
    Divergent,
    Skipped(String),
}

fn trudinger_objective(
    u: &RadialProfile,
    dom: &BallDomain,
    params: &TrudingerParams,
    spec: &QuadratureSpec,
) -> Result<(Eval, Option<RadialProfile>)> {
    let normalized = match normalize_to_unit_hardy(u, dom, spec) {
        Ok(v) => v,
        Err(Error::Normalization(msg)) => return Ok((Eval::Skipped(msg), None)),
        Err(e) => return Err(e),
    };
    let rep = trudinger_integral(
        &normalized,
        dom,
        params,
        &QuadratureSpec::exponential().with_t_max(spec.t_max),
    )?;
    let eval = match rep.report.status {
        Status::Converged => Eval::Finite(rep.report.value),
        Status::Divergent => Eval::Divergent,
        s => Eval::Skipped(format!("Trudinger integral status {s:?}")),
    };
    Ok((eval, Some(normalized)))
}

fn shuffled(len: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        idx.swap(i, j);
    }
    idx
}

fn mesh_values(u: &RadialProfile) -> (Vec<f64>, Vec<f64>) {
    match u.representation() {
        Representation::Mesh { nodes, values, .. } => (
            nodes.clone(),
            values.iter().map(|v| v * u.scale()).collect(),
        ),
        _ => unreachable!("pattern search runs on mesh profiles"),
    }
}

/// Coordinate pattern search over the interior node values of a mesh
/// profile. `objective` returns `None` for candidates to discard and the
/// search maximizes. Stops early when `stop` is returned as `true`.
struct PatternSearch<'a> {
    budget: &'a OptimizeBudget,
    evaluations: usize,
    trace: Vec<TracePoint>,
}

impl PatternSearch<'_> {
    fn run<F>(
        &mut self,
        start: RadialProfile,
        best_value: f64,
        mut objective: F,
    ) -> Result<(RadialProfile, f64, bool)>
    where
        F: FnMut(&RadialProfile) -> Result<(Option<f64>, bool)>,
    {
        let mut rng = SplitMix64::seed_from_u64(self.budget.seed);
        let (nodes, mut values) = mesh_values(&start);
        let mut best = start;
        let mut best_value = best_value;
        let mut step = self.budget.step_init;
        while step >= self.budget.step_min && self.evaluations < self.budget.max_evaluations {
            let amplitude = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
            let mut improved = false;
            for k in shuffled(values.len() - 1, &mut rng) {
                let k = k + 1;
                for dir in [1.0, -1.0] {
                    if self.evaluations >= self.budget.max_evaluations {
                        break;
                    }
                    let mut trial = values.clone();
                    trial[k] += dir * step * amplitude;
                    let cand = RadialProfile::mesh(nodes.clone(), trial.clone(), false)?;
                    self.evaluations += 1;
                    let (value, stop) = objective(&cand)?;
                    if stop {
                        return Ok((cand, value.unwrap_or(f64::NAN), true));
                    }
                    if let Some(v) = value {
                        if v > best_value {
                            best_value = v;
                            best = cand;
                            values = trial;
                            improved = true;
                        }
                    }
                    self.trace.push(TracePoint {
                        evaluation: self.evaluations,
                        objective: best_value,
                    });
                    if improved {
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((best, best_value, false))
    }
}

/// Maximizes the Trudinger integral over profiles with `I_n = 1`.
///
/// Warm starts from [`warm_start_grid`] are evaluated first; the best one is
/// interpolated onto the search mesh and refined by pattern search. Any
/// divergent candidate halts the search and is returned as a witness.
pub fn maximize_trudinger(
    dom: &BallDomain,
    params: &TrudingerParams,
    mesh: &MeshSearchSpec,
    budget: &OptimizeBudget,
    spec: &QuadratureSpec,
) -> Result<ExtremalResult> {
    params.validate()?;
    budget.validate()?;
    let t_b = dom.t_boundary();
    let nodes = mesh.nodes(t_b)?;
    let mut notes = Vec::new();
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut best: Option<(RadialProfile, f64)> = None;

    let witness = |u: RadialProfile, evaluations, trace, notes| -> Result<ExtremalResult> {
        let constraint_value = hardy_difference(&u, dom, spec)?.value;
        Ok(ExtremalResult {
            best_profile: u,
            objective: f64::INFINITY,
            constraint_value,
            outcome: SearchOutcome::DivergentWitness,
            evaluations,
            trace,
            notes,
        })
    };

    for fam in warm_start_grid(dom.n(), t_b) {
        if evaluations >= budget.max_evaluations {
            break;
        }
        let u = make_family(fam, dom)?;
        evaluations += 1;
        let (eval, normalized) = trudinger_objective(&u, dom, params, spec)?;
        match eval {
            Eval::Finite(v) => {
                if best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((normalized.expect("normalized"), v));
                }
            }
            Eval::Divergent => {
                notes.push(format!("divergent warm start {fam:?}"));
                return witness(normalized.expect("normalized"), evaluations, trace, notes);
            }
            Eval::Skipped(msg) => notes.push(format!("warm start {fam:?} discarded: {msg}")),
        }
        if let Some((_, b)) = &best {
            trace.push(TracePoint {
                evaluation: evaluations,
                objective: *b,
            });
        }
    }

    let Some((warm, warm_value)) = best else {
        return Err(Error::Numerical(
            "no warm start produced a finite objective".into(),
        ));
    };
    let start = normalize_to_unit_hardy(&interpolate_on_mesh(&warm, &nodes)?, dom, spec)?;
    let (start_eval, _) = trudinger_objective(&start, dom, params, spec)?;
    evaluations += 1;
    let start_value = match start_eval {
        Eval::Finite(v) => v,
        Eval::Divergent => return witness(start, evaluations, trace, notes),
        Eval::Skipped(msg) => {
            notes.push(format!("interpolated warm start discarded: {msg}"));
            f64::NEG_INFINITY
        }
    };

    let mut search = PatternSearch {
        budget,
        evaluations,
        trace,
    };
    let mut divergent_seen = false;
    let mut normalized_best: Option<RadialProfile> = None;
    let (found, value, stopped) = search.run(start.clone(), start_value, |cand| {
        let (eval, normalized) = trudinger_objective(cand, dom, params, spec)?;
        Ok(match eval {
            Eval::Finite(v) => {
                normalized_best = normalized;
                (Some(v), false)
            }
            Eval::Divergent => {
                divergent_seen = true;
                normalized_best = normalized;
                (None, true)
            }
            Eval::Skipped(_) => (None, false),
        })
    })?;
    let PatternSearch {
        evaluations,
        mut trace,
        ..
    } = search;
    let mut running = f64::NEG_INFINITY;
    for p in &mut trace {
        running = running.max(p.objective);
        p.objective = running;
    }
    if stopped && divergent_seen {
        let u = normalized_best.unwrap_or(found);
        return witness(u, evaluations, trace, notes);
    }

    // the warm start itself may beat the mesh search
    let (profile, objective) = if warm_value >= value {
        (warm, warm_value)
    } else {
        (found, value)
    };
    let profile = normalize_to_unit_hardy(&profile, dom, spec)?;
    let constraint_value = hardy_difference(&profile, dom, spec)?.require()?;
    let outcome = if evaluations >= budget.max_evaluations {
        SearchOutcome::BudgetExhausted
    } else {
        SearchOutcome::Completed
    };
    Ok(ExtremalResult {
        best_profile: profile,
        objective,
        constraint_value,
        outcome,
        evaluations,
        trace,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum SearchSpace {
    /// Ground-state powers for every `s`, each with every cutoff (`None` for
    /// the uncut profile).
    FamilySweep {
        s_values: Vec<f64>,
        cutoffs: Vec<Option<f64>>,
    },
    /// Pattern search from random meshes.
    MeshSearch {
        sampler: MeshSampler,
        restarts: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub s: f64,
    pub cutoff: Option<f64>,
    pub hardy_difference: f64,
    pub remainder: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioResult {
    /// Trace records the smallest ratio found so far.
    pub extremal: ExtremalResult,
    pub samples: Vec<RatioSample>,
}

fn ratio_of(
    u: &RadialProfile,
    dom: &BallDomain,
    gamma: f64,
    spec: &QuadratureSpec,
) -> Result<std::result::Result<(f64, f64), String>> {
    let r = remainder_term(u, dom, gamma, spec)?;
    if !r.status.is_converged() {
        return Ok(Err(format!("remainder status {:?}", r.status)));
    }
    if !(r.value > 0.0) {
        return Ok(Err("remainder vanishes".into()));
    }
    let i = hardy_difference(u, dom, spec)?;
    if !i.status.is_converged() {
        return Ok(Err(format!("I_n status {:?}", i.status)));
    }
    Ok(Ok((i.value, r.value)))
}

/// Minimizes `I_n[u] / R_gamma[u]` over the search space.
pub fn minimize_ratio(
    dom: &BallDomain,
    gamma: f64,
    search: &SearchSpace,
    budget: &OptimizeBudget,
    spec: &QuadratureSpec,
) -> Result<RatioResult> {
    budget.validate()?;
    if !gamma.is_finite() {
        return Err(Error::Config(format!("gamma must be finite, got {gamma}")));
    }
    let mut notes = Vec::new();
    let mut samples = Vec::new();
    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut best: Option<(RadialProfile, f64)> = None;

    match search {
        SearchSpace::FamilySweep { s_values, cutoffs } => {
            if s_values.is_empty() || cutoffs.is_empty() {
                return Err(Error::Config(
                    "family sweep needs at least one s and one cutoff entry".into(),
                ));
            }
            'outer: for &s in s_values {
                for &cutoff in cutoffs {
                    if evaluations >= budget.max_evaluations {
                        break 'outer;
                    }
                    evaluations += 1;
                    let u = make_family(FamilySpec::GroundStatePower { s, cutoff }, dom)?;
                    match ratio_of(&u, dom, gamma, spec)? {
                        Ok((i, r)) => {
                            let ratio = i / r;
                            samples.push(RatioSample {
                                s,
                                cutoff,
                                hardy_difference: i,
                                remainder: r,
                                ratio,
                            });
                            if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                                best = Some((u, ratio));
                            }
                        }
                        Err(msg) => {
                            notes.push(format!("s = {s}, cutoff = {cutoff:?} discarded: {msg}"))
                        }
                    }
                    if let Some((_, b)) = &best {
                        trace.push(TracePoint {
                            evaluation: evaluations,
                            objective: *b,
                        });
                    }
                }
            }
        }
        SearchSpace::MeshSearch { sampler, restarts } => {
            if *restarts < 1 {
                return Err(Error::Config(
                    "mesh search needs at least one restart".into(),
                ));
            }
            let mut rng = SplitMix64::seed_from_u64(budget.seed);
            let per_start = OptimizeBudget {
                max_evaluations: (budget.max_evaluations / restarts).max(1),
                ..*budget
            };
            for _ in 0..*restarts {
                let start = sampler.sample(dom, rng.next_u64())?;
                evaluations += 1;
                let start_value = match ratio_of(&start, dom, gamma, spec)? {
                    Ok((i, r)) => -(i / r),
                    Err(msg) => {
                        notes.push(format!("random start discarded: {msg}"));
                        continue;
                    }
                };
                let mut search = PatternSearch {
                    budget: &per_start,
                    evaluations: 0,
                    trace: Vec::new(),
                };
                let (found, value, _) = search.run(start, start_value, |cand| {
                    Ok((
                        ratio_of(cand, dom, gamma, spec)?
                            .ok()
                            .map(|(i, r)| -(i / r)),
                        false,
                    ))
                })?;
                let offset = evaluations;
                evaluations += search.evaluations;
                let ratio = -value;
                if best.as_ref().is_none_or(|(_, b)| ratio < *b) {
                    best = Some((found, ratio));
                }
                let current = best.as_ref().expect("set above").1;
                trace.extend(search.trace.into_iter().map(|p| TracePoint {
                    evaluation: offset + p.evaluation,
                    objective: (-p.objective).max(current),
                }));
                trace.push(TracePoint {
                    evaluation: evaluations,
                    objective: current,
                });
            }
            // enforce the best-so-far reading across restarts
            let mut running = f64::INFINITY;
            for p in &mut trace {
                running = running.min(p.objective);
                p.objective = running;
            }
        }
    }

    let Some((profile, ratio)) = best else {
        return Err(Error::Numerical("every candidate was discarded".into()));
    };
    let profile = normalize_to_unit_hardy(&profile, dom, spec).unwrap_or(profile);
    let constraint_value = hardy_difference(&profile, dom, spec)?.value;
    let outcome = if evaluations >= budget.max_evaluations {
        SearchOutcome::BudgetExhausted
    } else {
        SearchOutcome::Completed
    };
    Ok(RatioResult {
        extremal: ExtremalResult {
            best_profile: profile,
            objective: ratio,
            constraint_value,
            outcome,
            evaluations,
            trace,
            notes,
        },
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub epsilon: f64,
    pub truncated: f64,
    /// Ratio to the previous row's partial; absent on the first row.
    pub growth_ratio: Option<f64>,
    pub hardy_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupTable {
    pub n: u32,
    pub beta: f64,
    pub c: f64,
    pub s: f64,
    pub rows: Vec<BlowupRow>,
    /// Partial integral up to the quadrature truncation point.
    pub truncated_total: f64,
    pub far_rate: f64,
    pub verdict: Verdict,
}

/// Truncated Trudinger partials of the normalized ground-state power `u_s`.
///
/// Accepts the divergence window `beta < s < 1/n` and, as a control, any
/// `beta >= 2/n` with `s < 1/n`.
pub fn blowup_sweep(
    dom: &BallDomain,
    beta: f64,
    c: f64,
    s: f64,
    epsilons: &[f64],
    spec: &QuadratureSpec,
) -> Result<BlowupTable> {
    let nf = dom.dim();
    if !(s < 1.0 / nf) {
        return Err(Error::Config(format!(
            "s = {s} must satisfy beta < s < 1/n = {} so that I_n is finite",
            1.0 / nf
        )));
    }
    let control = beta >= 2.0 / nf;
    if !(beta < s || control) {
        return Err(Error::Config(format!(
            "beta = {beta} must lie below s = {s} (window beta < s < 1/n = {}) or be a control run with beta >= 2/n = {}",
            1.0 / nf,
            2.0 / nf
        )));
    }
    let u = make_family(FamilySpec::ground_state_power(s), dom)?;
    let normalized = normalize_to_unit_hardy(&u, dom, spec)?;
    let i_value = hardy_difference(&normalized, dom, spec)?.require()?;
    let params = TrudingerParams {
        epsilon_truncations: Some(epsilons.to_vec()),
        ..TrudingerParams::new(c, beta)
    };
    let rep = trudinger_integral(
        &normalized,
        dom,
        &params,
        &QuadratureSpec::exponential().with_t_max(spec.t_max),
    )?;
    let rows = rep
        .partials
        .iter()
        .enumerate()
        .map(|(k, p): (usize, &PartialIntegral)| BlowupRow {
            epsilon: p.epsilon,
            truncated: p.value,
            growth_ratio: (k > 0).then(|| p.value / rep.partials[k - 1].value),
            hardy_difference: i_value,
        })
        .collect();
    let verdict = match rep.report.status {
        Status::Divergent => Verdict::Divergent,
        Status::Converged => Verdict::Convergent,
        _ => Verdict::Inconclusive,
    };
    Ok(BlowupTable {
        n: dom.n(),
        beta,
        c,
        s,
        rows,
        truncated_total: rep.report.value,
        far_rate: rep.far_rate,
        verdict,
    })
}

/// Families scanned by default in [`gap_region_scan`].
pub fn default_family_grid(n: u32) -> Vec<FamilySpec> {
    let nf = n as f64;
    let mut out: Vec<FamilySpec> = [0.2, 0.5, 0.8, 0.9, 0.98]
        .iter()
        .map(|&f| FamilySpec::ground_state_power(f / nf))
        .collect();
    out.extend(
        [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&l| FamilySpec::moser_plateau(l)),
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCell {
    pub beta: f64,
    pub c: f64,
    /// Largest finite Trudinger integral over the family grid.
    pub max_finite: Option<f64>,
    pub argmax: Option<FamilySpec>,
    pub divergent_witnesses: Vec<FamilySpec>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// Always `"EMPIRICAL"`: these scans carry no theorem.
    pub label: String,
    pub n: u32,
    pub cells: Vec<GapCell>,
}

/// Evaluates one `(beta, c)` cell of the gap scan.
pub fn gap_cell(
    dom: &BallDomain,
    beta: f64,
    c: f64,
    families: &[FamilySpec],
    spec: &QuadratureSpec,
) -> Result<GapCell> {
    let params = TrudingerParams::new(c, beta);
    params.validate()?;
    let mut cell = GapCell {
        beta,
        c,
        max_finite: None,
        argmax: None,
        divergent_witnesses: Vec::new(),
        skipped: Vec::new(),
    };
    for fam in families {
        let u = make_family(*fam, dom)?;
        let (eval, _) = trudinger_objective(&u, dom, &params, spec)?;
        match eval {
            Eval::Finite(v) => {
                if cell.max_finite.is_none_or(|m| v > m) {
                    cell.max_finite = Some(v);
                    cell.argmax = Some(*fam);
                }
            }
            Eval::Divergent => cell.divergent_witnesses.push(*fam),
            Eval::Skipped(msg) => cell.skipped.push(format!("{fam:?}: {msg}")),
        }
    }
    Ok(cell)
}

/// Scans `(beta, c)` over the family grid under `I_n = 1`.
pub fn gap_region_scan(
    dom: &BallDomain,
    beta_grid: &[f64],
    c_grid: &[f64],
    families: &[FamilySpec],
    spec: &QuadratureSpec,
) -> Result<GapReport> {
    if beta_grid.is_empty() || c_grid.is_empty() || families.is_empty() {
        return Err(Error::Config(
            "gap scan grids must be nonempty (beta, c, families)".into(),
        ));
    }
    let mut cells = Vec::with_capacity(beta_grid.len() * c_grid.len());
    for &beta in beta_grid {
        for &c in c_grid {
            cells.push(gap_cell(dom, beta, c, families, spec)?);
        }
    }
    Ok(GapReport {
        label: "EMPIRICAL".into(),
        n: dom.n(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> OptimizeBudget {
        OptimizeBudget {
            max_evaluations: 60,
            step_init: 0.25,
            step_min: 0.02,
            seed: 1,
        }
    }

    #[test]
    fn budget_validation() {
        assert!(OptimizeBudget {
            step_min: 1.0,
            ..quick()
        }
        .validate()
        .is_err());
        assert!(OptimizeBudget {
            max_evaluations: 0,
            ..quick()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn small_c_returns_ball_volume() {
        let d = BallDomain::unit(2).unwrap();
        let r = maximize_trudinger(
            &d,
            &TrudingerParams::new(1e-9, 1.0),
            &MeshSearchSpec::default(),
            &quick(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.objective - std::f64::consts::PI).abs() < 1e-6, "{r:?}");
        assert!((r.constraint_value - 1.0).abs() < 1e-8);
        assert!(r.trace.windows(2).all(|w| w[1].objective >= w[0].objective));
    }

    #[test]
    fn divergent_regime_halts_with_witness() {
        let d = BallDomain::unit(2).unwrap();
        let r = maximize_trudinger(
            &d,
            &TrudingerParams::new(0.2, 0.25),
            &MeshSearchSpec::default(),
            &quick(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(r.outcome, SearchOutcome::DivergentWitness);
        assert!(matches!(
            r.best_profile.family(),
            Some(FamilySpec::GroundStatePower { .. })
        ));
    }

    #[test]
    fn blowup_window_is_enforced() {
        let d = BallDomain::unit(2).unwrap();
        let sp = QuadratureSpec::default();
        let err = blowup_sweep(&d, 0.45, 0.2, 0.4, &[1e-2], &sp).unwrap_err();
        assert!(err.to_string().contains("window"));
        assert!(blowup_sweep(&d, 0.25, 0.2, 0.6, &[1e-2], &sp).is_err());
        let t = blowup_sweep(&d, 1.0, 0.2, 0.4, &[1e-2, 1e-3], &sp).unwrap();
        assert_eq!(t.verdict, Verdict::Convergent);
        assert!(t.rows[0].growth_ratio.is_none());
    }

    #[test]
    fn gap_scan_rejects_empty_grids() {
        let d = BallDomain::unit(2).unwrap();
        let fams = default_family_grid(2);
        assert!(gap_region_scan(&d, &[0.5], &[], &fams, &QuadratureSpec::default()).is_err());
        let rep = gap_region_scan(&d, &[0.5], &[0.05], &fams, &QuadratureSpec::default()).unwrap();
        assert_eq!(rep.label, "EMPIRICAL");
        assert!(rep.cells[0].divergent_witnesses.is_empty());
    }

    #[test]
    fn ratio_sweep_is_deterministic() {
        let d = BallDomain::unit(2).unwrap();
        let space = SearchSpace::MeshSearch {
            sampler: MeshSampler {
                node_count: 5,
                ..Default::default()
            },
            restarts: 2,
        };
        let sp = QuadratureSpec::default();
        let a = minimize_ratio(&d, 2.0, &space, &quick(), &sp).unwrap();
        let b = minimize_ratio(&d, 2.0, &space, &quick(), &sp).unwrap();
        assert_eq!(a, b);
        assert!(a.extremal.objective >= 0.25 - 1e-6);
        assert!(a
            .extremal
            .trace
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective));
    }
}
