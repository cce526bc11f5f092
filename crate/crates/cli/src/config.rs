//! Scenario configuration: one JSON document describing a run.
//!
//! Every field has a default, unknown fields are rejected, and the canonical
//! form is the pretty-printed serialization in declaration order, so
//! parse, canonicalize, parse is a fixed point.

use leray_core::funcspace::{FamilySpec, RadialProfile};
use leray_core::functionals::{series_threshold, TrudingerParams, TrudingerWeight};
use leray_core::geometry::BallDomain;
use leray_core::optimize::{MeshSearchSpec, OptimizeBudget};
use leray_core::quadrature::QuadratureSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Tightest relative tolerance asserted by any invariant suite.
pub const TIGHTEST_INVARIANT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    #[default]
    Verify,
    Constants,
    Functional,
    Optimize,
    Counterexample,
    Gapscan,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub n: u32,
    pub rho: f64,
    pub hardy_scale: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            n: 2,
            rho: 1.0,
            hardy_scale: 1.0,
        }
    }
}

impl DomainConfig {
    pub fn build(&self) -> CliResult<BallDomain> {
        Ok(BallDomain::new(self.n, self.rho, self.hardy_scale)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalConfig {
    pub c: f64,
    pub beta: f64,
    pub weight_kind: TrudingerWeight,
    pub gamma: f64,
    /// Defaults to `n + 1`.
    pub q: Option<f64>,
    /// Exponent of the ground-state power; required by `counterexample`.
    pub s: Option<f64>,
    pub epsilons: Vec<f64>,
    /// Profile for `functional`; overrides `family` when present.
    pub profile: Option<RadialProfile>,
    pub family: FamilySpec,
    /// Rescale the profile to `I_n = 1` before evaluating.
    pub normalize: bool,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self {
            c: 0.2,
            beta: 1.0,
            weight_kind: TrudingerWeight::E2Power,
            gamma: 2.0,
            q: None,
            s: None,
            epsilons: (2..=8).map(|k| 10f64.powi(-k)).collect(),
            profile: None,
            family: FamilySpec::ground_state_power(0.2),
            normalize: true,
        }
    }
}

impl FunctionalConfig {
    pub fn trudinger(&self) -> TrudingerParams {
        TrudingerParams {
            weight_kind: self.weight_kind,
            ..TrudingerParams::new(self.c, self.beta)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random meshes per `(n, rho, R)` for the Hardy suites.
    pub profiles: usize,
    pub dimensions: Vec<u32>,
    /// `(rho, R)` pairs.
    pub domains: Vec<(f64, f64)>,
    pub lq_profiles: usize,
    pub lq_dimensions: Vec<u32>,
    pub transform_profiles: usize,
    pub homogeneity_profiles: usize,
    pub dual_path_profiles: usize,
    pub monotonicity_profiles: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            profiles: 500,
            dimensions: vec![2, 3, 4],
            domains: vec![(1.0, 1.0), (0.5, 2.0)],
            lq_profiles: 200,
            lq_dimensions: vec![2, 3],
            transform_profiles: 100,
            homogeneity_profiles: 50,
            dual_path_profiles: 20,
            monotonicity_profiles: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeTarget {
    /// Largest Trudinger integral under `I_n = 1`.
    #[default]
    Trudinger,
    /// Smallest `I_n / R_gamma`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub target: OptimizeTarget,
    pub budget: OptimizeBudget,
    pub mesh: MeshSearchSpec,
    /// One search per seed.
    pub seeds: Vec<u64>,
    /// Ground-state exponents swept when `target = ratio`, as fractions of `1/n`.
    pub s_fractions: Vec<f64>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            target: OptimizeTarget::Trudinger,
            budget: OptimizeBudget::default(),
            mesh: MeshSearchSpec::default(),
            seeds: vec![0],
            s_fractions: vec![0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998],
        }
    }
}

/// How `c` values of a grid are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CUnits {
    #[default]
    Absolute,
    /// Multiples of the series threshold `A_n`.
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dimensions: Vec<u32>,
    /// `beta` values; `None` selects the gap region `[1/n, 2/n)` at five points.
    pub betas: Option<Vec<f64>>,
    pub cs: Vec<f64>,
    pub c_units: CUnits,
    /// Families evaluated per cell; empty selects the default family grid.
    pub families: Vec<FamilySpec>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dimensions: vec![2],
            betas: None,
            cs: vec![0.25, 0.5, 1.0],
            c_units: CUnits::Threshold,
            families: Vec::new(),
        }
    }
}

impl GridConfig {
    pub fn betas_for(&self, n: u32) -> Vec<f64> {
        match &self.betas {
            Some(b) => b.clone(),
            None => {
                let nf = n as f64;
                (0..5).map(|k| (1.0 + 0.2 * k as f64) / nf).collect()
            }
        }
    }

    pub fn cs_for(&self, n: u32) -> CliResult<Vec<f64>> {
        match self.c_units {
            CUnits::Absolute => Ok(self.cs.clone()),
            CUnits::Threshold => {
                let a = series_threshold(n)?;
                Ok(self.cs.iter().map(|f| f * a).collect())
            }
        }
    }

    pub fn families_for(&self, n: u32) -> Vec<FamilySpec> {
        if self.families.is_empty() {
            leray_core::optimize::default_family_grid(n)
        } else {
            self.families.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub command: Command,
    pub domain: DomainConfig,
    pub functional: FunctionalConfig,
    pub suite: SuiteConfig,
    pub quadrature: QuadratureSpec,
    pub optimize: OptimizeConfig,
    pub grid: GridConfig,
    /// Worker threads; 0 uses one per core.
    pub threads: usize,
    pub output_dir: String,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            command: Command::Verify,
            domain: DomainConfig::default(),
            functional: FunctionalConfig::default(),
            suite: SuiteConfig::default(),
            quadrature: QuadratureSpec::default(),
            optimize: OptimizeConfig::default(),
            grid: GridConfig::default(),
            threads: 0,
            output_dir: "leray-out".into(),
        }
    }
}

fn positive(what: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{what} must be finite and > 0, got {x}"
        )))
    }
}

fn nonempty<T>(what: &str, v: &[T]) -> CliResult<()> {
    if v.is_empty() {
        Err(CliError::Config(format!("{what} must not be empty")))
    } else {
        Ok(())
    }
}

impl ScenarioConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> CliResult<()> {
        self.domain.build()?;
        self.quadrature.validate()?;
        let f = &self.functional;
        self.functional.trudinger().validate()?;
        if !f.gamma.is_finite() {
            return Err(CliError::Config(format!(
                "gamma must be finite, got {}",
                f.gamma
            )));
        }
        if let Some(q) = f.q {
            if !(q > self.domain.n as f64 && q.is_finite()) {
                return Err(CliError::Config(format!(
                    "q must lie in (n, inf) = ({}, inf), got {q}",
                    self.domain.n
                )));
            }
        }
        if let Some(s) = f.s {
            if !s.is_finite() {
                return Err(CliError::Config(format!("s must be finite, got {s}")));
            }
        }
        for &e in &f.epsilons {
            if !(e > 0.0 && e < self.domain.rho) {
                return Err(CliError::Config(format!(
                    "epsilon truncations must lie in (0, rho) = (0, {}), got {e}",
                    self.domain.rho
                )));
            }
        }
        let s = &self.suite;
        for (what, count) in [
            ("suite.profiles", s.profiles),
            ("suite.lq_profiles", s.lq_profiles),
            ("suite.transform_profiles", s.transform_profiles),
            ("suite.homogeneity_profiles", s.homogeneity_profiles),
            ("suite.dual_path_profiles", s.dual_path_profiles),
            ("suite.monotonicity_profiles", s.monotonicity_profiles),
        ] {
            if count == 0 {
                return Err(CliError::Config(format!("{what} must be >= 1")));
            }
        }
        nonempty("suite.dimensions", &s.dimensions)?;
        nonempty("suite.domains", &s.domains)?;
        for &n in s
            .dimensions
            .iter()
            .chain(&s.lq_dimensions)
            .chain(&self.grid.dimensions)
        {
            if !(2..=16).contains(&n) {
                return Err(CliError::Config(format!(
                    "dimensions must lie in 2..=16, got {n}"
                )));
            }
        }
        for &(rho, r) in &s.domains {
            BallDomain::new(2, rho, r)?;
        }
        let o = &self.optimize;
        o.budget.validate()?;
        nonempty("optimize.seeds", &o.seeds)?;
        if o.mesh.node_count < 3 || !(o.mesh.span > 0.0) {
            return Err(CliError::Config(
                "optimize.mesh needs node_count >= 3 and span > 0".into(),
            ));
        }
        for &fr in &o.s_fractions {
            if !(fr.is_finite() && fr < 1.0) {
                return Err(CliError::Config(format!(
                    "optimize.s_fractions must be finite and < 1, got {fr}"
                )));
            }
        }
        let g = &self.grid;
        if let Some(b) = &g.betas {
            for &beta in b {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(CliError::Config(format!(
                        "grid betas must be finite and >= 0, got {beta}"
                    )));
                }
            }
        }
        for &c in &g.cs {
            positive("grid c", c)?;
        }
        if self.output_dir.is_empty() {
            return Err(CliError::Config("output_dir must not be empty".into()));
        }
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.quadrature.rel_tol > TIGHTEST_INVARIANT_TOL {
            out.push(format!(
                "rel_tol = {:e} exceeds the tightest invariant threshold {:e}; verify may report spurious failures",
                self.quadrature.rel_tol, TIGHTEST_INVARIANT_TOL
            ));
        }
        out
    }

    /// Grid must have at least one cell.
    pub fn check_grid(&self) -> CliResult<()> {
        let g = &self.grid;
        nonempty("grid.dimensions", &g.dimensions)?;
        nonempty("grid.cs", &g.cs)?;
        if let Some(b) = &g.betas {
            nonempty("grid.betas", b)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ScenarioConfig::default();
        let text = cfg.canonical_json();
        let back = ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical_json(), text);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg = ScenarioConfig::from_json(r#"{"command": "counterexample", "domain": {"n": 3}}"#)
            .unwrap();
        assert_eq!(cfg.command, Command::Counterexample);
        assert_eq!(cfg.domain.n, 3);
        assert_eq!(cfg.domain.rho, 1.0);
        let again = ScenarioConfig::from_json(&cfg.canonical_json()).unwrap();
        assert_eq!(again.canonical_json(), cfg.canonical_json());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ScenarioConfig::from_json(r#"{"domain": {"n": 1}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"domain": {"rho": 2.0}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"functional": {"c": -1.0}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"functional": {"q": 1.5}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"suite": {"profiles": 0}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"quadrature": {"rel_tol": 0.0}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn loose_tolerance_warns() {
        let cfg = ScenarioConfig::from_json(r#"{"quadrature": {"rel_tol": 0.01}}"#).unwrap();
        assert_eq!(cfg.warnings().len(), 1);
        assert!(ScenarioConfig::default().warnings().is_empty());
    }

    #[test]
    fn gap_preset_betas() {
        let g = GridConfig::default();
        let b = g.betas_for(2);
        assert_eq!(b.len(), 5);
        assert_eq!(b[0], 0.5);
        assert!(b.iter().all(|&x| (0.5..1.0).contains(&x)));
    }
}
