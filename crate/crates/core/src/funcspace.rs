//! Radial trial functions `u(t)` in the log coordinate.
//!
//! Besides plain evaluation, every profile exposes [`RadialProfile::pair`],
//! its value and derivative in `σ = ln t` after division by `t^p`. The
//! functionals integrate in `σ` and beyond, where `t = e^σ` no longer fits in
//! an `f64`; the analytic families therefore implement `pair` directly in `σ`.

use rand_core::RngCore;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::BallDomain;

/// Largest `σ` at which `t = e^σ` is formed explicitly.
const SIGMA_DIRECT: f64 = 700.0;

/// Parameterized analytic families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `scale·min(t - t_b, plateau)`.
    MoserPlateau {
        plateau: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `(t^α - t_b^α)·(1 + ln t)^s`, optionally frozen at `t = cutoff`.
    GroundStatePower {
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
    /// `(t - t_b)^a` up to `t_cap`, constant afterwards.
    PurePower { a: f64, t_cap: f64 },
}

fn one() -> f64 {
    1.0
}

impl FamilySpec {
    pub fn ground_state_power(s: f64) -> Self {
        FamilySpec::GroundStatePower { s, cutoff: None }
    }

    pub fn moser_plateau(plateau: f64) -> Self {
        FamilySpec::MoserPlateau {
            plateau,
            scale: 1.0,
        }
    }

    /// Whether the family has finite Hardy difference in dimension `n`.
    /// Only `ground_state_power` without cutoff can fail (it needs `s < 1/n`).
    pub fn admissible(&self, n: u32) -> bool {
        match *self {
            FamilySpec::GroundStatePower { s, cutoff: None } => s < 1.0 / n as f64,
            _ => true,
        }
    }

    fn validate(&self, n: u32, t_b: f64) -> Result<()> {
        let nf = n as f64;
        match *self {
            FamilySpec::MoserPlateau { plateau, scale } => {
                if !(plateau > 0.0 && plateau.is_finite()) {
                    return Err(Error::Config(format!(
                        "moser_plateau needs plateau length L in (0, inf), got {plateau}"
                    )));
                }
                if !scale.is_finite() {
                    return Err(Error::Config(format!(
                        "moser_plateau scale must be finite, got {scale}"
                    )));
                }
            }
            FamilySpec::GroundStatePower { s, cutoff } => {
                if !s.is_finite() {
                    return Err(Error::Config(format!(
                        "ground_state_power exponent s must be finite, got {s}"
                    )));
                }
                if let Some(c) = cutoff {
                    if !(c > t_b && c.is_finite()) {
                        return Err(Error::Config(format!(
                            "ground_state_power cutoff must lie in ({t_b}, inf), got {c}"
                        )));
                    }
                }
            }
            FamilySpec::PurePower { a, t_cap } => {
                if !(a > 0.0 && (a - 1.0) * nf > -1.0) {
                    return Err(Error::Config(format!(
                        "pure_power exponent a = {a} needs a > 0 and (a-1)·n > -1, i.e. a > {}",
                        1.0 - 1.0 / nf
                    )));
                }
                if !(t_cap > t_b && t_cap.is_finite()) {
                    return Err(Error::Config(format!(
                        "pure_power t_cap must lie in ({t_b}, inf), got {t_cap}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum Representation {
    /// Piecewise linear through `(nodes[k], values[k])`, constant past the
    /// last node (zero when `compact`).
    Mesh {
        nodes: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        compact: bool,
    },
    Analytic {
        family: FamilySpec,
        n: u32,
        t_boundary: f64,
    },
    /// `t^exponent · base(t)`.
    Weighted {
        base: Box<RadialProfile>,
        exponent: f64,
    },
}

/// A radial function of the log coordinate with zero trace at `t_boundary`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct RadialProfile {
    scale: f64,
    repr: Representation,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    #[serde(default = "one")]
    scale: f64,
    #[serde(flatten)]
    repr: Representation,
}

impl TryFrom<ProfileDoc> for RadialProfile {
    type Error = Error;

    fn try_from(doc: ProfileDoc) -> Result<Self> {
        if !doc.scale.is_finite() {
            return Err(Error::Config(format!(
                "profile scale must be finite, got {}",
                doc.scale
            )));
        }
        match &doc.repr {
            Representation::Mesh {
                nodes,
                values,
                compact,
            } => validate_mesh(nodes, values, *compact)?,
            Representation::Analytic {
                family,
                n,
                t_boundary,
            } => {
                if *n < 2 || !(*t_boundary >= 1.0) {
                    return Err(Error::Config(format!(
                        "analytic profile needs n >= 2 and t_boundary >= 1, got n = {n}, t_boundary = {t_boundary}"
                    )));
                }
                family.validate(*n, *t_boundary)?;
            }
            Representation::Weighted { exponent, .. } => {
                if !exponent.is_finite() {
                    return Err(Error::Config(
                        "weighted profile exponent must be finite".into(),
                    ));
                }
            }
        }
        Ok(Self {
            scale: doc.scale,
            repr: doc.repr,
        })
    }
}

impl From<RadialProfile> for ProfileDoc {
    fn from(p: RadialProfile) -> Self {
        Self {
            scale: p.scale,
            repr: p.repr,
        }
    }
}

fn validate_mesh(nodes: &[f64], values: &[f64], compact: bool) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::Config(format!(
            "mesh needs at least 2 nodes, got {}",
            nodes.len()
        )));
    }
    if nodes.len() != values.len() {
        return Err(Error::Config(format!(
            "mesh has {} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if !(nodes[0] >= 1.0) {
        return Err(Error::Config(format!(
            "first mesh node must be >= 1, got {}",
            nodes[0]
        )));
    }
    if nodes.iter().chain(values).any(|x| !x.is_finite()) {
        return Err(Error::Config("mesh nodes and values must be finite".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "mesh nodes must be strictly increasing".into(),
        ));
    }
    if values[0] != 0.0 {
        return Err(Error::Config(format!(
            "mesh value at the boundary must be 0, got {}",
            values[0]
        )));
    }
    if compact && *values.last().expect("nonempty") != 0.0 {
        return Err(Error::Config("compact mesh must end at value 0".into()));
    }
    Ok(())
}

impl RadialProfile {
    pub fn mesh(nodes: Vec<f64>, values: Vec<f64>, compact: bool) -> Result<Self> {
        validate_mesh(&nodes, &values, compact)?;
        Ok(Self {
            scale: 1.0,
            repr: Representation::Mesh {
                nodes,
                values,
                compact,
            },
        })
    }

    /// The zero function on the given domain.
    pub fn zero(domain: &BallDomain) -> Self {
        let t_b = domain.t_boundary();
        Self::mesh(vec![t_b, t_b + 1.0], vec![0.0, 0.0], false).expect("valid mesh")
    }

    /// `t^exponent · base(t)`.
    pub fn weighted(base: RadialProfile, exponent: f64) -> Self {
        Self {
            scale: 1.0,
            repr: Representation::Weighted {
                base: Box::new(base),
                exponent,
            },
        }
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `λ·u`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            scale: self.scale * lambda,
            repr: self.repr.clone(),
        }
    }

    pub fn family(&self) -> Option<&FamilySpec> {
        match &self.repr {
            Representation::Analytic { family, .. } => Some(family),
            Representation::Weighted { base, .. } => base.family(),
            Representation::Mesh { .. } => None,
        }
    }

    /// A positive size with `u / magnitude` of order one; zero only for the
    /// zero function.
    pub fn magnitude(&self) -> f64 {
        let inner = match &self.repr {
            Representation::Mesh { values, .. } => {
                values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
            Representation::Analytic {
                family: FamilySpec::MoserPlateau { scale, .. },
                ..
            } => scale.abs(),
            Representation::Analytic { .. } => 1.0,
            Representation::Weighted { base, .. } => base.magnitude(),
        };
        self.scale.abs() * inner
    }

    /// `false` only for analytic families outside their admissible range.
    pub fn admissible(&self) -> bool {
        match &self.repr {
            Representation::Analytic { family, n, .. } => family.admissible(*n),
            Representation::Weighted { base, .. } => base.admissible(),
            Representation::Mesh { .. } => true,
        }
    }

    pub fn t_boundary(&self) -> f64 {
        match &self.repr {
            Representation::Mesh { nodes, .. } => nodes[0],
            Representation::Analytic { t_boundary, .. } => *t_boundary,
            Representation::Weighted { base, .. } => base.t_boundary(),
        }
    }

    /// Points in `t` where the derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Mesh { nodes, .. } => nodes[1..].to_vec(),
            Representation::Analytic {
                family, t_boundary, ..
            } => match *family {
                FamilySpec::MoserPlateau { plateau, .. } => vec![t_boundary + plateau],
                FamilySpec::GroundStatePower { cutoff, .. } => cutoff.into_iter().collect(),
                FamilySpec::PurePower { t_cap, .. } => vec![t_cap],
            },
            Representation::Weighted { base, .. } => base.breakpoints(),
        }
    }

    /// Whether `u` vanishes identically past its last breakpoint.
    pub fn is_compact(&self) -> bool {
        match &self.repr {
            Representation::Mesh {
                compact, values, ..
            } => *compact || *values.last().expect("nonempty") == 0.0,
            Representation::Weighted { base, .. } => base.is_compact(),
            Representation::Analytic { .. } => self.scale == 0.0,
        }
    }

    /// Whether `u` stays bounded as `t -> ∞`.
    pub fn is_bounded(&self) -> bool {
        match &self.repr {
            Representation::Mesh { .. } => true,
            Representation::Analytic { family, .. } => {
                !matches!(family, FamilySpec::GroundStatePower { cutoff: None, .. })
            }
            Representation::Weighted { base, exponent } => {
                (base.is_bounded() && *exponent <= 0.0) || base.is_compact()
            }
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t >= self.t_boundary() && !t.is_nan() {
            Ok(())
        } else {
            Err(domain("t", t, "[t_boundary, inf)"))
        }
    }

    /// `u(t)`.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.scale * self.raw_value(t))
    }

    /// `du/dt`, the right-hand slope at mesh nodes.
    pub fn slope(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.scale * self.raw_slope(t))
    }

    fn raw_value(&self, t: f64) -> f64 {
        match &self.repr {
            Representation::Mesh {
                nodes,
                values,
                compact,
            } => mesh_value(nodes, values, *compact, t),
            Representation::Analytic {
                family,
                n,
                t_boundary,
            } => family_value(family, *n, *t_boundary, t),
            Representation::Weighted { base, exponent } => {
                let b = base.value(t).unwrap_or(0.0);
                if b == 0.0 {
                    0.0
                } else {
                    t.powf(*exponent) * b
                }
            }
        }
    }

    fn raw_slope(&self, t: f64) -> f64 {
        match &self.repr {
            Representation::Mesh { nodes, values, .. } => mesh_slope(nodes, values, t),
            Representation::Analytic {
                family,
                n,
                t_boundary,
            } => family_slope(family, *n, *t_boundary, t),
            Representation::Weighted { base, exponent } => {
                let b = base.value(t).unwrap_or(0.0);
                let db = base.slope(t).unwrap_or(0.0);
                let e = *exponent;
                let mut out = t.powf(e) * db;
                if b != 0.0 {
                    out += e * t.powf(e - 1.0) * b;
                }
                out
            }
        }
    }

    /// `(w, dw/dσ)` for `w(σ) = e^(-pσ)·u(e^σ)`.
    ///
    /// With `p = (n-1)/n` this is the ground-state ratio `u / E1^((n-1)/n)`.
    pub fn pair(&self, sigma: f64, p: f64) -> (f64, f64) {
        let (w, dw) = self.raw_pair(sigma, p);
        (self.scale * w, self.scale * dw)
    }

    fn raw_pair(&self, sigma: f64, p: f64) -> (f64, f64) {
        match &self.repr {
            Representation::Weighted { base, exponent } => base.pair(sigma, p - exponent),
            Representation::Analytic {
                family: FamilySpec::GroundStatePower { s, cutoff },
                n,
                t_boundary,
            } => {
                let alpha = (*n as f64 - 1.0) / *n as f64;
                let sigma_b = t_boundary.ln();
                if let Some(c) = cutoff {
                    let sigma_c = c.ln();
                    if sigma >= sigma_c {
                        let (wc, _) = gsp_pair(alpha, *s, sigma_b, sigma_c, p);
                        let w = wc * (-p * (sigma - sigma_c)).exp();
                        return (w, -p * w);
                    }
                }
                gsp_pair(alpha, *s, sigma_b, sigma, p)
            }
            Representation::Analytic {
                family: FamilySpec::PurePower { a, t_cap },
                t_boundary,
                ..
            } if sigma < t_cap.ln() => {
                // t - t_b without cancellation near the boundary
                let gap = t_boundary * (sigma - t_boundary.ln()).exp_m1();
                let w = (-p * sigma).exp() * gap.powf(*a);
                let dw = ((1.0 - p) * sigma).exp() * a * gap.powf(a - 1.0) - p * w;
                (w, dw)
            }
            _ => {
                let last = self
                    .breakpoints()
                    .last()
                    .copied()
                    .unwrap_or(self.t_boundary());
                if sigma > SIGMA_DIRECT || sigma > last.ln() {
                    // constant tail
                    let tail = self.raw_value(last.max(self.t_boundary()));
                    if tail == 0.0 {
                        return (0.0, 0.0);
                    }
                    let w = tail * (-p * sigma).exp();
                    return (w, -p * w);
                }
                let t = sigma.exp();
                let w = (-p * sigma).exp() * self.raw_value(t);
                let dw = ((1.0 - p) * sigma).exp() * self.raw_slope(t) - p * w;
                (w, dw)
            }
        }
    }
}

/// `(w, w_σ)` for the ground-state family, computed without forming `t`.
fn gsp_pair(alpha: f64, s: f64, sigma_b: f64, sigma: f64, p: f64) -> (f64, f64) {
    let ell = 1.0 + sigma;
    let lead = ((alpha - p) * sigma).exp();
    let decay = (-alpha * (sigma - sigma_b)).exp();
    let gap = -(-alpha * (sigma - sigma_b)).exp_m1();
    let ls = ell.powf(s);
    let w = lead * gap * ls;
    let dw = (alpha - p) * w + lead * ls * (alpha * decay + gap * s / ell);
    (w, dw)
}

fn mesh_segment(nodes: &[f64], t: f64) -> usize {
    // index k with nodes[k] <= t < nodes[k+1]
    nodes.partition_point(|&x| x <= t).saturating_sub(1)
}

fn mesh_value(nodes: &[f64], values: &[f64], compact: bool, t: f64) -> f64 {
    let m = nodes.len() - 1;
    if t >= nodes[m] {
        return if compact { 0.0 } else { values[m] };
    }
    let k = mesh_segment(nodes, t);
    let h = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
    values[k] + h * (values[k + 1] - values[k])
}

fn mesh_slope(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let m = nodes.len() - 1;
    if t >= nodes[m] {
        return 0.0;
    }
    let k = mesh_segment(nodes, t);
    (values[k + 1] - values[k]) / (nodes[k + 1] - nodes[k])
}

fn family_value(family: &FamilySpec, n: u32, t_b: f64, t: f64) -> f64 {
    let alpha = (n as f64 - 1.0) / n as f64;
    match *family {
        FamilySpec::MoserPlateau { plateau, scale } => scale * (t - t_b).min(plateau),
        FamilySpec::GroundStatePower { s, cutoff } => {
            let t = cutoff.map_or(t, |c| t.min(c));
            (t.powf(alpha) - t_b.powf(alpha)) * (1.0 + t.ln()).powf(s)
        }
        FamilySpec::PurePower { a, t_cap } => (t.min(t_cap) - t_b).powf(a),
    }
}

fn family_slope(family: &FamilySpec, n: u32, t_b: f64, t: f64) -> f64 {
    let alpha = (n as f64 - 1.0) / n as f64;
    match *family {
        FamilySpec::MoserPlateau { plateau, scale } => {
            if t - t_b < plateau {
                scale
            } else {
                0.0
            }
        }
        FamilySpec::GroundStatePower { s, cutoff } => {
            if cutoff.is_some_and(|c| t >= c) {
                return 0.0;
            }
            let ell = 1.0 + t.ln();
            alpha * t.powf(alpha - 1.0) * ell.powf(s)
                + (t.powf(alpha) - t_b.powf(alpha)) * s * ell.powf(s - 1.0) / t
        }
        FamilySpec::PurePower { a, t_cap } => {
            if t >= t_cap {
                0.0
            } else {
                a * (t - t_b).powf(a - 1.0)
            }
        }
    }
}

/// Builds the analytic profile for `spec` on `domain`.
pub fn make_family(spec: FamilySpec, domain: &BallDomain) -> Result<RadialProfile> {
    let t_b = domain.t_boundary();
    spec.validate(domain.n(), t_b)?;
    Ok(RadialProfile {
        scale: 1.0,
        repr: Representation::Analytic {
            family: spec,
            n: domain.n(),
            t_boundary: t_b,
        },
    })
}

/// Generator settings for random mesh profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSampler {
    pub node_count: usize,
    pub amplitude: f64,
    /// Node gaps are drawn uniformly from `[min_gap, max_gap]`.
    pub min_gap: f64,
    pub max_gap: f64,
    /// Force `u = 0` past the last node.
    pub compact: bool,
}

impl Default for MeshSampler {
    fn default() -> Self {
        Self {
            node_count: 8,
            amplitude: 1.0,
            min_gap: 0.1,
            max_gap: 2.0,
            compact: false,
        }
    }
}

fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl MeshSampler {
    pub fn sample(&self, domain: &BallDomain, seed: u64) -> Result<RadialProfile> {
        if self.node_count < 2 {
            return Err(Error::Config(format!(
                "node_count must be >= 2, got {}",
                self.node_count
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if !(self.min_gap > 0.0 && self.max_gap >= self.min_gap && self.max_gap.is_finite()) {
            return Err(Error::Config(
                "mesh gaps need 0 < min_gap <= max_gap < inf".into(),
            ));
        }
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(self.node_count);
        let mut values = Vec::with_capacity(self.node_count);
        let mut t = domain.t_boundary();
        nodes.push(t);
        values.push(0.0);
        for _ in 1..self.node_count {
            t += self.min_gap + (self.max_gap - self.min_gap) * uniform(&mut rng);
            nodes.push(t);
            values.push(self.amplitude * uniform(&mut rng));
        }
        if self.compact {
            *values.last_mut().expect("nonempty") = 0.0;
        }
        RadialProfile::mesh(nodes, values, self.compact)
    }
}

/// Random piecewise-linear profile with nonnegative values in `[0, amplitude]`.
pub fn sample_random_mesh(
    domain: &BallDomain,
    node_count: usize,
    amplitude: f64,
    seed: u64,
) -> Result<RadialProfile> {
    MeshSampler {
        node_count,
        amplitude,
        ..MeshSampler::default()
    }
    .sample(domain, seed)
}

/// Piecewise-linear interpolant of `profile` through the given nodes; the
/// first node must be the profile's boundary.
pub fn interpolate_on_mesh(profile: &RadialProfile, nodes: &[f64]) -> Result<RadialProfile> {
    if nodes.first() != Some(&profile.t_boundary()) {
        return Err(Error::Config(
            "interpolation mesh must start at the profile boundary".into(),
        ));
    }
    let values = nodes
        .iter()
        .map(|&t| profile.value(t))
        .collect::<Result<Vec<_>>>()?;
    RadialProfile::mesh(nodes.to_vec(), values, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit(n: u32) -> BallDomain {
        BallDomain::unit(n).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let d = unit(2);
        let m = make_family(FamilySpec::moser_plateau(2.0), &d).unwrap();
        assert_eq!(m.value(3.0).unwrap(), 2.0);
        assert_eq!(m.slope(1.5).unwrap(), 1.0);
        assert_eq!(m.slope(5.0).unwrap(), 0.0);
        let p = make_family(FamilySpec::PurePower { a: 1.0, t_cap: 3.0 }, &d).unwrap();
        assert_eq!(p.value(1.0).unwrap(), 0.0);
        let q = make_family(FamilySpec::PurePower { a: 2.0, t_cap: 3.0 }, &d).unwrap();
        assert_eq!(q.slope(2.0).unwrap(), 2.0);
        let g = make_family(FamilySpec::ground_state_power(0.4), &d).unwrap();
        assert!((g.value(E).unwrap() - 0.855_992_848_575_463_3).abs() < 1e-14);
        let g0 = make_family(FamilySpec::ground_state_power(0.0), &d).unwrap();
        assert!((g0.slope(4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(m.value(0.5).is_err());
    }

    #[test]
    fn family_validation() {
        let d = unit(2);
        assert!(make_family(FamilySpec::moser_plateau(0.0), &d).is_err());
        let bad = make_family(FamilySpec::PurePower { a: 0.3, t_cap: 3.0 }, &d).unwrap_err();
        assert!(bad.to_string().contains("(a-1)·n > -1"));
        let inadmissible = make_family(FamilySpec::ground_state_power(0.6), &d).unwrap();
        assert!(!inadmissible.admissible());
        assert!(make_family(FamilySpec::ground_state_power(0.4), &d)
            .unwrap()
            .admissible());
    }

    #[test]
    fn pair_matches_direct_evaluation() {
        let d = BallDomain::new(3, 0.5, 1.0).unwrap();
        let alpha = d.alpha();
        let profiles = [
            make_family(FamilySpec::ground_state_power(0.2), &d).unwrap(),
            make_family(
                FamilySpec::GroundStatePower {
                    s: 0.3,
                    cutoff: Some(9.0),
                },
                &d,
            )
            .unwrap(),
            make_family(
                FamilySpec::MoserPlateau {
                    plateau: 3.0,
                    scale: 2.0,
                },
                &d,
            )
            .unwrap(),
            sample_random_mesh(&d, 6, 1.0, 7).unwrap(),
        ];
        for u in &profiles {
            for &t in &[2.0f64, 3.5, 8.0, 40.0] {
                let (w, dw) = u.pair(t.ln(), alpha);
                let direct = u.value(t).unwrap() * t.powf(-alpha);
                let ddirect = t
                    * (u.slope(t).unwrap() * t.powf(-alpha)
                        - alpha * u.value(t).unwrap() * t.powf(-alpha - 1.0));
                assert!(
                    (w - direct).abs() <= 1e-12 * direct.abs().max(1e-300),
                    "{u:?} {t}"
                );
                assert!(
                    (dw - ddirect).abs() <= 1e-10 * ddirect.abs().max(1e-12),
                    "{u:?} {t}"
                );
            }
        }
    }

    #[test]
    fn pair_is_finite_far_out() {
        let d = unit(2);
        let g = make_family(FamilySpec::ground_state_power(0.3), &d).unwrap();
        let (w, dw) = g.pair(1e80, 0.5);
        assert!(w.is_finite() && dw.is_finite());
        let m = sample_random_mesh(&d, 5, 1.0, 1).unwrap();
        assert_eq!(m.pair(1e80, 0.5), (0.0, -0.0));
    }

    #[test]
    fn random_mesh_is_deterministic() {
        let d = unit(2);
        let a = sample_random_mesh(&d, 10, 2.0, 42).unwrap();
        let b = sample_random_mesh(&d, 10, 2.0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_random_mesh(&d, 10, 2.0, 43).unwrap());
        assert_eq!(a.value(1.0).unwrap(), 0.0);
        let z = sample_random_mesh(&d, 2, 0.0, 1).unwrap();
        assert_eq!(z.value(100.0).unwrap(), 0.0);
        assert!(sample_random_mesh(&d, 1, 1.0, 1).is_err());
    }

    #[test]
    fn mesh_right_slope_and_compact_tail() {
        let u = RadialProfile::mesh(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0], true).unwrap();
        assert_eq!(u.slope(2.0).unwrap(), -1.0);
        assert_eq!(u.value(10.0).unwrap(), 0.0);
        assert!(RadialProfile::mesh(vec![1.0, 2.0], vec![0.0, 1.0], true).is_err());
        assert!(RadialProfile::mesh(vec![1.0, 1.0], vec![0.0, 1.0], false).is_err());
        assert!(RadialProfile::mesh(vec![1.0, 2.0], vec![0.5, 1.0], false).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = unit(2);
        let profiles = [
            sample_random_mesh(&d, 7, 1.3, 5).unwrap().scaled(0.1),
            make_family(
                FamilySpec::GroundStatePower {
                    s: 0.4,
                    cutoff: Some(50.0),
                },
                &d,
            )
            .unwrap(),
            RadialProfile::weighted(
                make_family(FamilySpec::moser_plateau(1.0), &d).unwrap(),
                -0.5,
            ),
        ];
        for p in &profiles {
            let text = serde_json::to_string(p).unwrap();
            let back: RadialProfile = serde_json::from_str(&text).unwrap();
            assert_eq!(&back, p);
        }
        let text = serde_json::to_string(&profiles[0]).unwrap();
        assert!(text.contains("\"representation\":\"mesh\""));
        assert!(serde_json::from_str::<RadialProfile>(
            r#"{"representation":"mesh","nodes":[1.0,2.0],"values":[1.0,0.0]}"#
        )
        .is_err());
    }

    #[test]
    fn scaling_is_exact() {
        let d = unit(2);
        let u = sample_random_mesh(&d, 6, 1.0, 11).unwrap();
        let v = u.scaled(3.7);
        for &t in &[1.5, 2.5, 9.0] {
            assert_eq!(v.value(t).unwrap(), 3.7 * u.value(t).unwrap());
        }
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let d = unit(2);
        let g = make_family(FamilySpec::moser_plateau(2.0), &d).unwrap();
        let m = interpolate_on_mesh(&g, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.value(2.5).unwrap(), 1.5);
        assert_eq!(m.value(10.0).unwrap(), 2.0);
    }
}
