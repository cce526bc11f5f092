//! Adaptive quadrature on the semi-infinite log coordinate.
//!
//! Every integral in the crate is reduced to one of a few shapes:
//!
//! * a finite interval, handled by [`integrate`] (global adaptive G7/K15);
//! * `[t_a, ∞)` in the log coordinate with a declared [`TailClass`]
//!   ([`integrate_log`]);
//! * `[σ_a, ∞)` in `σ = ln t` for integrands with slowly decaying
//!   logarithmic tails ([`integrate_log_ladder`]); the far part is mapped to
//!   `w = ln(1 + σ)`, where a power of `E2 = 1 + σ` becomes an exponential
//!   and the remainder past the ladder end has a closed form;
//! * the original radius variable ([`integrate_radius`]), used only as an
//!   independent cross-check;
//! * the unit disc with one integrable point singularity ([`integrate_disc_2d`]).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Far end of the `w = ln(1 + σ)` ladder stage.
pub const LADDER_W_MAX: f64 = 200.0;
/// Width in `σ` of the first ladder stage past the last breakpoint.
pub const LADDER_SIGMA_SPAN: f64 = 40.0;
/// Log coordinate at which [`integrate_radius`] stops refining toward `r = 0`.
pub const RADIUS_T_STOP: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Truncation point in the log coordinate.
    pub t_max: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            t_max: 700.0,
            max_subdivisions: 10_000,
        }
    }
}

impl QuadratureSpec {
    /// Relaxed tolerance for the stiffer exponential integrands.
    pub fn exponential() -> Self {
        Self {
            rel_tol: 1e-8,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::Config(format!(
                "abs_tol must be >= 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Config("max_subdivisions must be >= 1".into()));
        }
        if !(self.t_max > 1.0) || !self.t_max.is_finite() {
            return Err(Error::Config(format!(
                "t_max must be finite and > 1, got {}",
                self.t_max
            )));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Truncated,
    Divergent,
    BudgetExhausted,
}

impl Status {
    fn severity(self) -> u8 {
        match self {
            Status::Converged => 0,
            Status::Truncated => 1,
            Status::BudgetExhausted => 2,
            Status::Divergent => 3,
        }
    }

    /// The worse of two statuses.
    pub fn combine(self, other: Status) -> Status {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }

    pub fn is_converged(self) -> bool {
        self == Status::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    /// Total (or, when divergent, the truncated partial integral).
    pub value: f64,
    pub error_estimate: f64,
    pub tail_bound: f64,
    pub status: Status,
    pub evaluations: usize,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            error_estimate: 0.0,
            tail_bound: 0.0,
            status: Status::Converged,
            evaluations: 0,
        }
    }

    /// `value` if the integral converged.
    pub fn total(&self) -> Option<f64> {
        self.status.is_converged().then_some(self.value)
    }

    fn absorb(&mut self, other: &QuadratureResult) {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
        self.tail_bound += other.tail_bound;
        self.status = self.status.combine(other.status);
        self.evaluations += other.evaluations;
    }

    /// Demotes a nominally converged result whose combined error budget
    /// exceeds four times the tolerance.
    fn settle(mut self, spec: &QuadratureSpec) -> Self {
        if self.status == Status::Converged
            && self.error_estimate + self.tail_bound > 4.0 * spec.tolerance(self.value)
        {
            self.status = Status::Truncated;
        }
        self
    }
}

/// Asymptotic behaviour of an integrand past the truncation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TailClass {
    /// Identically zero past the truncation point.
    Compact,
    /// `|f(t)| <= |f(t_max)|·e^(-rate·(t - t_max))`.
    ExponentialDecay {
        rate: f64,
    },
    /// `f(t) ~ C·t^exponent`.
    PowerDecay {
        exponent: f64,
    },
    ExponentialGrowth,
    /// Power law with the exponent estimated from samples near `t_max`.
    Sampled,
}

// Kronrod 15-point abscissae and weights; every other abscissa is a 7-point
// Gauss node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the refinement order
    // never depends on heap internals.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn sample<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Integrand { at: x })
    }
}

/// One G7/K15 panel with the QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = sample(f, centre)?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = sample(f, centre - dx)?;
        let f2 = sample(f, centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel { a, b, value, error })
}

/// Neumaier-compensated sum in the given order.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Global adaptive integration of `f` over `[a, b]`, splitting first at the
/// given breakpoints (points outside `(a, b)` are ignored).
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Config(format!(
            "integration limits must be finite: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadratureResult::zero());
    }
    if a > b {
        let mut r = integrate(f, b, a, breakpoints, spec)?;
        r.value = -r.value;
        return Ok(r);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    for w in edges.windows(2) {
        heap.push(gk15(f, w[0], w[1])?);
    }
    let mut evaluations = 15 * heap.len();
    let mut subdivisions = heap.len();
    let mut status = Status::Converged;

    loop {
        let value = compensated_sum(heap.iter().chain(done.iter()).map(|p: &Panel| p.value));
        let error: f64 = heap
            .iter()
            .chain(done.iter())
            .map(|p: &Panel| p.error)
            .sum();
        if error <= spec.tolerance(value) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // cannot refine further in floating point
            done.push(worst);
            continue;
        }
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            status = Status::BudgetExhausted;
            break;
        }
        heap.push(gk15(f, worst.a, mid)?);
        heap.push(gk15(f, mid, worst.b)?);
        evaluations += 30;
        subdivisions += 1;
    }

    let mut panels: Vec<Panel> = heap.into_iter().chain(done).collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = compensated_sum(panels.iter().map(|p| p.value));
    let error_estimate = panels.iter().map(|p| p.error).sum();
    if status == Status::Converged && error_estimate > spec.tolerance(value) {
        status = Status::Truncated;
    }
    Ok(QuadratureResult {
        value,
        error_estimate,
        tail_bound: 0.0,
        status,
        evaluations,
    })
}

fn power_tail(f_end: f64, t_end: f64, exponent: f64) -> f64 {
    f_end * t_end / (-exponent - 1.0)
}

fn local_exponent(f1: f64, t1: f64, f2: f64, t2: f64) -> Option<f64> {
    if f1 == 0.0 || f2 == 0.0 || f1.signum() != f2.signum() {
        return None;
    }
    Some((f2 / f1).ln() / (t2 / t1).ln())
}

/// Integrates `f` over `[t_a, ∞)` in the log coordinate: adaptive quadrature
/// on `[t_a, t_max]` plus a tail governed by `tail`.
pub fn integrate_log<F: Fn(f64) -> f64>(
    f: &F,
    t_a: f64,
    breakpoints: &[f64],
    tail: TailClass,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    let t_max = spec.t_max;
    if !(t_max > t_a) {
        return Err(Error::Config(format!(
            "t_max = {t_max} must exceed the lower limit {t_a}"
        )));
    }
    let mut result = integrate(f, t_a, t_max, breakpoints, spec)?;
    match tail {
        TailClass::Compact => {}
        TailClass::ExponentialGrowth => result.status = Status::Divergent,
        TailClass::ExponentialDecay { rate } => {
            if !(rate > 0.0) {
                return Err(Error::Config(format!(
                    "exponential decay rate must be > 0, got {rate}"
                )));
            }
            result.tail_bound = sample(f, t_max)?.abs() / rate;
        }
        TailClass::PowerDecay { exponent } => {
            if exponent >= -1.0 {
                result.status = Status::Divergent;
            } else {
                let f_end = sample(f, t_max)?;
                let estimate = power_tail(f_end, t_max, exponent);
                let f_half = sample(f, 0.5 * t_max)?;
                let observed = local_exponent(f_half, 0.5 * t_max, f_end, t_max);
                result.value += estimate;
                result.tail_bound = match observed {
                    Some(p) if p < -1.0 => (power_tail(f_end, t_max, p) - estimate).abs(),
                    _ if f_end == 0.0 => 0.0,
                    _ => estimate.abs(),
                };
            }
        }
        TailClass::Sampled => {
            let t1 = 0.25 * t_max;
            let t2 = 0.5 * t_max;
            let (f1, f2, f3) = (sample(f, t1)?, sample(f, t2)?, sample(f, t_max)?);
            if f3 != 0.0 {
                match (
                    local_exponent(f1, t1, f2, t2),
                    local_exponent(f2, t2, f3, t_max),
                ) {
                    (_, Some(p)) if p >= -1.0 => result.status = Status::Divergent,
                    (Some(p_near), Some(p_far)) => {
                        let estimate = power_tail(f3, t_max, p_far);
                        result.value += estimate;
                        result.tail_bound = if p_near < -1.0 {
                            (power_tail(f3, t_max, p_near) - estimate).abs()
                        } else {
                            estimate.abs()
                        };
                    }
                    _ => {
                        result.tail_bound = f3.abs() * t_max;
                    }
                }
            }
        }
    }
    Ok(result.settle(spec))
}

/// Integrates `g(σ)` over `[σ_a, ∞)` where `σ = ln t`.
///
/// The first stage covers `[σ_a, σ_s]`, `σ_s` lying [`LADDER_SIGMA_SPAN`]
/// past the last breakpoint. The second stage maps `σ = e^w - 1` and runs to
/// `w = LADDER_W_MAX`. The remainder is closed-form under the sampled model
/// `g(σ)·(1 + σ) ~ C·e^(k·w)`, which is exact for integrands behaving like a
/// power of `E2 = 1 + σ`. A non-negative sampled rate `k` means divergence.
pub fn integrate_log_ladder<G: Fn(f64) -> f64>(
    g: &G,
    sigma_a: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    let last = breakpoints.iter().copied().fold(sigma_a, f64::max);
    let sigma_s = last + LADDER_SIGMA_SPAN;
    let mut result = integrate(g, sigma_a, sigma_s, breakpoints, spec)?;

    let stretched = |w: f64| {
        let v = g(w.exp_m1());
        if v == 0.0 {
            0.0
        } else {
            v * w.exp()
        }
    };
    let w_a = sigma_s.ln_1p();
    let w_end = LADDER_W_MAX;
    let probes = [
        stretched(w_end - 2.0),
        stretched(w_end - 1.0),
        stretched(w_end),
    ];
    if probes.iter().any(|p| !p.is_finite()) {
        result.status = Status::Divergent;
        return Ok(result);
    }
    let rate = |x: f64, y: f64| -> Option<f64> {
        (x != 0.0 && y != 0.0 && x.signum() == y.signum()).then(|| (y / x).ln())
    };
    let k_far = rate(probes[1], probes[2]);
    if let Some(k) = k_far {
        if k >= 0.0 {
            result.status = Status::Divergent;
            return Ok(result);
        }
    }

    let stage = integrate(&stretched, w_a, w_end, &[], spec)?;
    result.absorb(&stage);

    match (rate(probes[0], probes[1]), k_far) {
        (_, None) if probes[2] == 0.0 => {}
        (Some(k_near), Some(k)) => {
            let estimate = probes[2] / -k;
            result.value += estimate;
            result.tail_bound += if k_near < 0.0 {
                (probes[2] / -k_near - estimate).abs()
            } else {
                estimate.abs()
            };
        }
        _ => {
            result.tail_bound += probes[2].abs();
        }
    }
    Ok(result.settle(spec))
}

/// Integrates a radial integrand `f(r)` over `(0, rho]` in the radius
/// variable with dyadic panels accumulating at the origin. Radii in
/// `breakpoints` split the panels that contain them.
///
/// Refinement stops at `E1(r/R) = RADIUS_T_STOP`; below that radius the
/// integrand is modelled from two samples as either `r^(a-1)` or
/// `E1(r/R)^(-q)/r`, whichever the samples indicate.
pub fn integrate_radius<F: Fn(f64) -> f64>(
    f: &F,
    rho: f64,
    hardy_scale: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    if !(rho > 0.0 && hardy_scale >= rho) {
        return Err(Error::Config(format!(
            "radius integration needs 0 < rho <= R, got rho = {rho}, R = {hardy_scale}"
        )));
    }
    let r_stop = hardy_scale * (1.0 - RADIUS_T_STOP).exp();
    let mut result = QuadratureResult::zero();
    let mut hi = rho;
    while hi > r_stop {
        let lo = 0.5 * hi;
        let inner: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi)
            .collect();
        let panel = integrate(f, lo, hi, &inner, spec)?;
        result.absorb(&panel);
        hi = lo;
    }
    let ell = |r: f64| 1.0 + (hardy_scale / r).ln();
    let h = |r: f64| -> Result<f64> { Ok(r * sample(f, r)?) };
    let (r1, r2, r3) = (hi, 0.5 * hi, 0.25 * hi);
    let (h1, h2, h3) = (h(r1)?, h(r2)?, h(r3)?);
    if h1 != 0.0 {
        let tail = |ha: f64, ra: f64, hb: f64, rb: f64| -> Option<f64> {
            if ha == 0.0 || hb == 0.0 || ha.signum() != hb.signum() {
                return None;
            }
            let a = (ha / hb).ln() / (ra / rb).ln();
            if a > 0.5 {
                return Some(ha / a);
            }
            let q = -(hb / ha).ln() / (ell(rb) / ell(ra)).ln();
            (q > 1.0).then(|| ha * ell(ra) / (q - 1.0))
        };
        // a second fit over [ℓ, 2ℓ] exposes drift in the local exponent
        let r_wide = hardy_scale * (1.0 - 2.0 * ell(r1)).exp();
        let wide = tail(h1, r1, h(r_wide)?, r_wide);
        match (tail(h1, r1, h2, r2), tail(h2, r2, h3, r3)) {
            (Some(t), near) => {
                // the second estimate is anchored one panel deeper; add the
                // missing panel before comparing
                let deeper = integrate(f, r2, r1, &[], spec)?.value;
                let mut bound = near.map_or(t.abs(), |t2| (t2 + deeper - t).abs());
                match wide {
                    Some(tw) => {
                        result.value += tw;
                        bound = bound.max(2.0 * (tw - t).abs());
                    }
                    None => result.value += t,
                }
                result.tail_bound += bound;
            }
            (None, _) => result.status = Status::Divergent,
        }
    }
    Ok(result.settle(spec))
}

/// One entry of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialIntegral {
    /// Radius cutoff `ε`.
    pub epsilon: f64,
    /// `E1(ε/R)`, the matching log-coordinate cutoff.
    pub t_cut: f64,
    pub value: f64,
    pub error_estimate: f64,
}

/// Partial integrals of `f` over `[t_a, E1(ε_k/R)]` for each cutoff `ε_k`.
///
/// Cutoffs must be strictly decreasing and lie below the radius `R·e^(1-t_a)`.
/// Segments are accumulated, so the output is nondecreasing whenever `f >= 0`.
pub fn truncated_series<F: Fn(f64) -> f64>(
    f: &F,
    t_a: f64,
    hardy_scale: f64,
    epsilons: &[f64],
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<PartialIntegral>> {
    spec.validate()?;
    let r_a = hardy_scale * (1.0 - t_a).exp();
    for (k, &eps) in epsilons.iter().enumerate() {
        if !(eps > 0.0 && eps < r_a) {
            return Err(Error::Config(format!(
                "cutoff epsilon = {eps} must lie in (0, {r_a})"
            )));
        }
        if k > 0 && !(eps < epsilons[k - 1]) {
            return Err(Error::Config("cutoffs must be strictly decreasing".into()));
        }
    }
    let mut out = Vec::with_capacity(epsilons.len());
    let mut lower = t_a;
    let mut value = 0.0;
    let mut error = 0.0;
    for &eps in epsilons {
        let t_cut = 1.0 + (hardy_scale / eps).ln();
        let seg = integrate(f, lower, t_cut, breakpoints, spec)?;
        value += seg.value;
        error += seg.error_estimate;
        out.push(PartialIntegral {
            epsilon: eps,
            t_cut,
            value,
            error_estimate: error,
        });
        lower = t_cut;
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor-product polar grid on the unit disc: trapezoidal in the angle,
/// Gauss–Legendre along each ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscGrid {
    pub angular: usize,
    pub radial: usize,
}

impl Default for DiscGrid {
    fn default() -> Self {
        Self {
            angular: 64,
            radial: 24,
        }
    }
}

/// Integrates `f` over the unit disc using polar coordinates centred at the
/// declared singular point, which must lie strictly inside the disc. The
/// polar Jacobian absorbs a `|y - x0|^(-1)` singularity.
pub fn integrate_disc_2d<F: Fn([f64; 2]) -> f64>(
    f: &F,
    singular_point: [f64; 2],
    grid: DiscGrid,
) -> Result<f64> {
    let [x0, y0] = singular_point;
    let norm2 = x0 * x0 + y0 * y0;
    if !(norm2 < 1.0) {
        return Err(Error::Config(format!(
            "singular point ({x0}, {y0}) must lie inside the unit disc"
        )));
    }
    if grid.angular < 1 || grid.radial < 1 {
        return Err(Error::Config(
            "disc grid needs at least one node per direction".into(),
        ));
    }
    let (nodes, weights) = gauss_legendre(grid.radial);
    let dtheta = 2.0 * std::f64::consts::PI / grid.angular as f64;
    let mut rows = Vec::with_capacity(grid.angular);
    for j in 0..grid.angular {
        let theta = j as f64 * dtheta;
        let (s, c) = theta.sin_cos();
        let proj = x0 * c + y0 * s;
        let reach = -proj + (proj * proj + 1.0 - norm2).sqrt();
        let half = 0.5 * reach;
        let mut row = Vec::with_capacity(grid.radial);
        for (&x, &w) in nodes.iter().zip(&weights) {
            let rr = half * (x + 1.0);
            let y = [x0 + rr * c, y0 + rr * s];
            let v = f(y);
            if !v.is_finite() {
                return Err(Error::Integrand { at: rr });
            }
            row.push(v * rr * w * half);
        }
        rows.push(compensated_sum(row));
    }
    Ok(compensated_sum(rows) * dtheta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn ball_volume_kernel() {
        let spec = QuadratureSpec::default();
        let r = integrate_log(
            &|t: f64| (3.0 * (1.0 - t)).exp(),
            1.0,
            &[],
            TailClass::ExponentialDecay { rate: 3.0 },
            &spec,
        )
        .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(rel(r.value, 1.0 / 3.0) < 1e-12);
    }

    #[test]
    fn inverse_square_with_power_tail() {
        let spec = QuadratureSpec::default();
        let r = integrate_log(
            &|t: f64| t.powi(-2),
            1.0,
            &[],
            TailClass::PowerDecay { exponent: -2.0 },
            &spec,
        )
        .unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(rel(r.value, 1.0) < 1e-12);
        let s = integrate_log(&|t: f64| t.powi(-2), 1.0, &[], TailClass::Sampled, &spec).unwrap();
        assert!(rel(s.value, 1.0) < 1e-12);
    }

    #[test]
    fn harmonic_is_divergent() {
        let spec = QuadratureSpec::default();
        let r = integrate_log(&|t: f64| 1.0 / t, 1.0, &[], TailClass::Sampled, &spec).unwrap();
        assert_eq!(r.status, Status::Divergent);
        let d = integrate_log(
            &|t: f64| 1.0 / t,
            1.0,
            &[],
            TailClass::PowerDecay { exponent: -1.0 },
            &spec,
        )
        .unwrap();
        assert_eq!(d.status, Status::Divergent);
    }

    #[test]
    fn non_finite_sample_reports_location() {
        let spec = QuadratureSpec::default();
        let err = integrate(
            &|x: f64| if x > 0.5 { f64::NAN } else { 1.0 },
            0.0,
            1.0,
            &[],
            &spec,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integrand { at } if at > 0.5));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let spec = QuadratureSpec {
            max_subdivisions: 2,
            ..QuadratureSpec::default()
        };
        let r = integrate(&|x: f64| (1.0 / x).sin(), 0.01, 1.0, &[], &spec).unwrap();
        assert_eq!(r.status, Status::BudgetExhausted);
    }

    #[test]
    fn ladder_handles_log_power_tails() {
        // ∫_0^∞ (1+σ)^(-1.3) dσ = 1/0.3
        let spec = QuadratureSpec::default();
        let r = integrate_log_ladder(&|s: f64| (1.0 + s).powf(-1.3), 0.0, &[], &spec).unwrap();
        assert_eq!(r.status, Status::Converged, "{r:?}");
        assert!(rel(r.value, 1.0 / 0.3) < 1e-10);
        let d = integrate_log_ladder(&|s: f64| (1.0 + s).powf(-1.0), 0.0, &[], &spec).unwrap();
        assert_eq!(d.status, Status::Divergent);
        let e = integrate_log_ladder(&|s: f64| (-2.0 * s).exp(), 0.0, &[3.0], &spec).unwrap();
        assert_eq!(e.status, Status::Converged);
        assert!(rel(e.value, 0.5) < 1e-12);
    }

    #[test]
    fn radius_examples() {
        let spec = QuadratureSpec::default();
        let a = integrate_radius(&|r: f64| 2.0 * r, 1.0, 1.0, &[], &spec).unwrap();
        assert!(rel(a.value, 1.0) < 1e-12);
        let b = integrate_radius(
            &|r: f64| 1.0 / (r * (1.0 - r.ln()).powi(2)),
            1.0,
            1.0,
            &[],
            &spec,
        )
        .unwrap();
        assert!(rel(b.value, 1.0) < 1e-10, "{b:?}");
        let c =
            integrate_radius(&|r: f64| 1.0 / (r * (1.0 - r.ln())), 1.0, 1.0, &[], &spec).unwrap();
        assert_eq!(c.status, Status::Divergent);
    }

    #[test]
    fn truncated_series_examples() {
        let spec = QuadratureSpec::default();
        let eps: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
        let parts = truncated_series(
            &|t: f64| (2.0 * (1.0 - t)).exp(),
            1.0,
            1.0,
            &eps,
            &[],
            &spec,
        )
        .unwrap();
        for w in parts.windows(2) {
            assert!(w[1].value >= w[0].value);
        }
        assert!(rel(parts.last().unwrap().value, 0.5) < 1e-12);
        assert!(truncated_series(&|_| 1.0, 1.0, 1.0, &[1e-3, 1e-2], &[], &spec).is_err());
        assert!(truncated_series(&|_| 1.0, 1.0, 1.0, &[2.0], &[], &spec).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn disc_examples() {
        let g = DiscGrid::default();
        assert!(rel(integrate_disc_2d(&|_| 1.0, [0.0, 0.0], g).unwrap(), PI) < 1e-12);
        let r = integrate_disc_2d(&|y: [f64; 2]| y[0].hypot(y[1]), [0.0, 0.0], g).unwrap();
        assert!(rel(r, 2.0 * PI / 3.0) < 1e-12);
        let s = integrate_disc_2d(&|y: [f64; 2]| 1.0 / y[0].hypot(y[1]), [0.0, 0.0], g).unwrap();
        assert!(rel(s, 2.0 * PI) < 1e-12);
        // off-centre expansion still covers the disc exactly
        let off = integrate_disc_2d(&|_| 1.0, [0.3, -0.2], g).unwrap();
        assert!(rel(off, PI) < 1e-10);
        assert!(integrate_disc_2d(&|_| 1.0, [1.0, 0.0], g).is_err());
    }
}
