//! Evaluators for the Hardy difference, its ground-state form, remainder
//! terms, exponential Trudinger integrals and weighted `L^q` norms of radial
//! profiles, plus the explicit constants.
//!
//! Radial integrals are reduced with `t = E1(r/R)` and then `σ = ln t`.
//! Writing `u = t^α·w` with `α = (n-1)/n`, the energies become
//!
//! ```text
//! ∫|∇u|^n dx            = n·w_n ∫ |w_σ + α·w|^n dσ
//! α^n ∫|u|^n/(r E1)^n dx = n·w_n α^n ∫ |w|^n dσ
//! ∫|∇v|^n E1^(n-1) dx    = n·w_n ∫ |v_σ|^n dσ
//! ```
//!
//! and the Hardy difference equals `n·w_n ∫ Φ(w_σ, w) dσ` whenever the
//! boundary term `α^(n-1)|w|^n` vanishes at infinity.

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::funcspace::RadialProfile;
use crate::geometry::BallDomain;
use crate::quadrature::{
    integrate, integrate_disc_2d, integrate_log, integrate_log_ladder, integrate_radius,
    truncated_series, DiscGrid, PartialIntegral, QuadratureResult, QuadratureSpec, Status,
    TailClass, LADDER_W_MAX,
};
use crate::weights::T_CAP;

/// Outcome of one functional evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub name: String,
    pub value: f64,
    pub error_estimate: f64,
    pub status: Status,
    pub inputs_digest: String,
}

impl FunctionalReport {
    fn new(name: &str, q: &QuadratureResult, digest: String) -> Self {
        Self {
            name: name.to_string(),
            value: q.value,
            error_estimate: q.error_estimate + q.tail_bound,
            status: q.status,
            inputs_digest: digest,
        }
    }

    /// The value, if it may be used as a total.
    pub fn total(&self) -> Option<f64> {
        self.status.is_converged().then_some(self.value)
    }

    /// The value, or a numerical error naming the functional and its status.
    pub fn require(&self) -> Result<f64> {
        self.total().ok_or_else(|| {
            Error::Numerical(format!(
                "{} did not converge (status {:?})",
                self.name, self.status
            ))
        })
    }
}

/// Hex SHA-256 of the canonical JSON of a functional's inputs.
pub fn inputs_digest(
    name: &str,
    profile: &RadialProfile,
    dom: &BallDomain,
    params: serde_json::Value,
) -> String {
    let doc = json!({ "name": name, "profile": profile, "domain": dom, "params": params });
    let bytes = serde_json::to_vec(&doc).expect("inputs serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn check_boundary(u: &RadialProfile, dom: &BallDomain) -> Result<()> {
    let (a, b) = (u.t_boundary(), dom.t_boundary());
    if (a - b).abs() <= 1e-12 * b {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "profile boundary t = {a} does not match the domain boundary t = {b}"
        )))
    }
}

/// Mesh breakpoints plus unit cuts past `t_b`, widening geometrically after
/// 64 units, so no initial panel spans many decay lengths.
fn decay_cuts(u: &RadialProfile, t_end: f64) -> Vec<f64> {
    let t_b = u.t_boundary();
    let mut cuts = u.breakpoints();
    let mut step = 1.0;
    let mut t = t_b + step;
    while t < t_end {
        cuts.push(t);
        if t - t_b >= 64.0 {
            step *= 2.0;
        }
        t += step;
    }
    cuts
}

fn sigma_breaks(u: &RadialProfile) -> Vec<f64> {
    let sigma_b = u.t_boundary().ln();
    u.breakpoints()
        .into_iter()
        .map(f64::ln)
        .filter(|s| s.is_finite() && *s > sigma_b)
        .collect()
}

/// `n·w_n ∫ g(u, σ) dσ` over `[ln t_b, ∞)` for integrands of degree `n` in
/// `u`. The integral is taken on `u / |u|` and rescaled, so the absolute
/// tolerance floor never dominates small profiles.
fn sigma_integral<G: Fn(&RadialProfile, f64) -> f64>(
    u: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
    g: G,
) -> Result<QuadratureResult> {
    check_boundary(u, dom)?;
    let m = u.magnitude();
    if m == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            tail_bound: 0.0,
            status: Status::Converged,
            evaluations: 0,
        });
    }
    let unit = u.scaled(1.0 / m);
    let mut r = integrate_log_ladder(
        &|s| g(&unit, s),
        u.t_boundary().ln(),
        &sigma_breaks(u),
        spec,
    )?;
    let factor = dom.sphere_area() * m.powi(dom.n() as i32);
    r.value *= factor;
    r.error_estimate *= factor;
    r.tail_bound *= factor;
    Ok(r)
}

/// `|p + αq|^n - |αq|^n - n|αq|^(n-2)(αq)p`, evaluated without cancellation.
///
/// Non-negative by convexity; equals `p²` when `n = 2`.
pub fn ground_state_integrand(p: f64, q: f64, alpha: f64, n: u32) -> f64 {
    let a = alpha * q;
    if a == 0.0 {
        return p.abs().powi(n as i32);
    }
    let x = p / a;
    if x.abs() <= 1.0 {
        // (1+x)^n - 1 - n·x = Σ_{k>=2} C(n,k) x^k
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut xk = 1.0;
        for k in 1..=n {
            binom = binom * (n - k + 1) as f64 / k as f64;
            xk *= x;
            if k >= 2 {
                sum += binom * xk;
            }
        }
        a.abs().powi(n as i32) * sum
    } else {
        let nf = n as f64;
        let val = (p + a).abs().powi(n as i32)
            - a.abs().powi(n as i32)
            - nf * a.abs().powi(n as i32 - 2) * a * p;
        val.max(0.0)
    }
}

/// `∫_Ω |∇u|^n dx`.
pub fn dirichlet_energy(
    u: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    let (n, alpha) = (dom.n(), dom.alpha());
    let r = sigma_integral(u, dom, spec, |u, s| {
        let (w, dw) = u.pair(s, alpha);
        (dw + alpha * w).abs().powi(n as i32)
    })?;
    Ok(FunctionalReport::new(
        "dirichlet_energy",
        &r,
        inputs_digest("dirichlet_energy", u, dom, json!({})),
    ))
}

/// `((n-1)/n)^n ∫_Ω |u|^n / (|x|^n E1^n(|x|/R)) dx`.
pub fn hardy_term(
    u: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    let (n, alpha) = (dom.n(), dom.alpha());
    let c = alpha.powi(n as i32);
    let r = sigma_integral(u, dom, spec, |u, s| {
        c * u.pair(s, alpha).0.abs().powi(n as i32)
    })?;
    Ok(FunctionalReport::new(
        "hardy_term",
        &r,
        inputs_digest("hardy_term", u, dom, json!({})),
    ))
}

/// `∫_Ω |u|^n / (|x|^n E1^n E2^gamma) dx`.
pub fn remainder_term(
    u: &RadialProfile,
    dom: &BallDomain,
    gamma: f64,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    if !gamma.is_finite() {
        return Err(domain("gamma", gamma, "finite"));
    }
    let (n, alpha) = (dom.n(), dom.alpha());
    let r = sigma_integral(u, dom, spec, |u, s| {
        let w = u.pair(s, alpha).0;
        if w == 0.0 {
            0.0
        } else {
            w.abs().powi(n as i32) * (1.0 + s).powf(-gamma)
        }
    })?;
    Ok(FunctionalReport::new(
        "remainder_term",
        &r,
        inputs_digest("remainder_term", u, dom, json!({ "gamma": gamma })),
    ))
}

/// `n·w_n ∫ Φ(w_σ, w) dσ`, the Hardy difference in ground-state form.
pub fn ground_state_energy(
    u: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    let (n, alpha) = (dom.n(), dom.alpha());
    let r = sigma_integral(u, dom, spec, |u, s| {
        let (w, dw) = u.pair(s, alpha);
        ground_state_integrand(dw, w, alpha, n)
    })?;
    Ok(FunctionalReport::new(
        "ground_state_energy",
        &r,
        inputs_digest("ground_state_energy", u, dom, json!({})),
    ))
}

/// The Hardy difference `I_n[u] = ∫|∇u|^n - ((n-1)/n)^n ∫|u|^n/(|x| E1)^n`.
///
/// Computed as the difference of the two terms when both converge. For
/// profiles where they diverge separately (unbounded concentration
/// profiles) the ground-state form is used; it is the continuous extension
/// of `I_n` from compactly supported functions.
pub fn hardy_difference(
    u: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    let digest = inputs_digest("I_n", u, dom, json!({}));
    if u.is_bounded() {
        let d = dirichlet_energy(u, dom, spec)?;
        let h = hardy_term(u, dom, spec)?;
        if d.status.is_converged() && h.status.is_converged() {
            let mut status = Status::Converged;
            let value = d.value - h.value;
            let error = d.error_estimate + h.error_estimate;
            // the difference is judged against the larger term
            if error > 4.0 * (spec.rel_tol * d.value).max(spec.abs_tol) {
                status = Status::Truncated;
            }
            return Ok(FunctionalReport {
                name: "I_n".into(),
                value,
                error_estimate: error,
                status,
                inputs_digest: digest,
            });
        }
    }
    let g = ground_state_energy(u, dom, spec)?;
    Ok(FunctionalReport {
        name: "I_n".into(),
        inputs_digest: digest,
        ..g
    })
}

/// `v = E1^(-(n-1)/n)·u`.
pub fn ground_state_transform(u: &RadialProfile, dom: &BallDomain) -> RadialProfile {
    RadialProfile::weighted(u.clone(), -dom.alpha())
}

/// `J_n[v] = ∫_Ω |∇v|^n E1^(n-1)(|x|/R) dx`.
pub fn weighted_energy(
    v: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    let n = dom.n();
    let r = sigma_integral(v, dom, spec, |v, s| v.pair(s, 0.0).1.abs().powi(n as i32))?;
    Ok(FunctionalReport::new(
        "J_n",
        &r,
        inputs_digest("J_n", v, dom, json!({})),
    ))
}

/// Scales `u` so that `I_n = 1`.
pub fn normalize_to_unit_hardy(
    u: &RadialProfile,
    dom: &BallDomain,
    spec: &QuadratureSpec,
) -> Result<RadialProfile> {
    let i = hardy_difference(u, dom, spec)?;
    let value = i.total().ok_or_else(|| {
        Error::Normalization(format!("I_n did not converge (status {:?})", i.status))
    })?;
    if !(value > 0.0) {
        return Err(Error::Normalization(format!(
            "I_n = {value} is not positive"
        )));
    }
    let lambda = value.powf(-1.0 / dom.dim());
    let scaled = u.scaled(lambda);
    let check = hardy_difference(&scaled, dom, spec)?.require()?;
    if (check - 1.0).abs() > 1e-8 {
        return Err(Error::Normalization(format!(
            "rescaled I_n = {check}, expected 1"
        )));
    }
    Ok(scaled)
}

/// Deflation weight inside the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrudingerWeight {
    /// `E2^β`.
    E2Power,
    /// `E1^β`.
    E1Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrudingerParams {
    pub c: f64,
    pub beta: f64,
    #[serde(default = "default_weight")]
    pub weight_kind: TrudingerWeight,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_truncations: Option<Vec<f64>>,
}

fn default_weight() -> TrudingerWeight {
    TrudingerWeight::E2Power
}

impl TrudingerParams {
    pub fn new(c: f64, beta: f64) -> Self {
        Self {
            c,
            beta,
            weight_kind: TrudingerWeight::E2Power,
            epsilon_truncations: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(domain("c", self.c, "(0, inf)"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(domain("beta", self.beta, "[0, inf)"));
        }
        Ok(())
    }

    fn ln_weight(&self, sigma: f64) -> f64 {
        match self.weight_kind {
            TrudingerWeight::E2Power => sigma.ln_1p(),
            TrudingerWeight::E1Power => sigma,
        }
    }
}

/// Trudinger integral with optional truncated partials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrudingerReport {
    pub report: FunctionalReport,
    /// Largest sampled value of the exponent rate `c·h - n` past `t_max`.
    pub far_rate: f64,
    pub partials: Vec<PartialIntegral>,
}

/// Number of far-field samples in the divergence diagnosis.
const FAR_SAMPLES: usize = 400;
/// Log-integrand level treated as overflow.
const LOG_OVERFLOW: f64 = 700.0;

/// `ln` of the Trudinger integrand (including `n·w_n·R^n`) at `t`.
fn trudinger_log_integrand(
    u: &RadialProfile,
    dom: &BallDomain,
    p: &TrudingerParams,
    t: f64,
) -> Result<f64> {
    let nf = dom.dim();
    let base = dom.sphere_area().ln() + nf * (dom.hardy_scale().ln() + 1.0 - t);
    let val = u.value(t)?.abs();
    if val == 0.0 {
        return Ok(base);
    }
    let ln_w = p.ln_weight(t.ln());
    let x = ((val.ln() - p.beta * ln_w) * nf / (nf - 1.0)).exp();
    Ok(p.c * x + base)
}

/// `∫_Ω exp(c·(|u|/W^β)^(n/(n-1))) dx` with `W = E2` or `E1`.
///
/// The integral runs in `t` up to `spec.t_max`. Past that point the
/// integrand is `exp(t·(c·h(σ) - n) + const)` with
/// `h = (|u|·t^(-α)/W^β)^(n/(n-1))`, and `h` is sampled in `σ` out to
/// `e^LADDER_W_MAX`. The integral is diagnosed divergent when the rate
/// `c·h - n` turns positive or keeps increasing over the last three sampling
/// windows; the reported value is then the partial integral up to `t_max`.
pub fn trudinger_integral(
    u: &RadialProfile,
    dom: &BallDomain,
    params: &TrudingerParams,
    spec: &QuadratureSpec,
) -> Result<TrudingerReport> {
    params.validate()?;
    spec.validate()?;
    check_boundary(u, dom)?;
    let nf = dom.dim();
    let alpha = dom.alpha();
    let t_b = u.t_boundary();
    let t_max = spec.t_max;
    let digest = inputs_digest(
        "trudinger_integral",
        u,
        dom,
        serde_json::to_value(params).expect("params"),
    );

    // near field: scan for overflow before integrating
    let mut t_end = t_max;
    let mut overflow = false;
    let steps = ((t_max - t_b) * 4.0).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = t_b + (t_max - t_b) * k as f64 / steps as f64;
        if trudinger_log_integrand(u, dom, params, t)? > LOG_OVERFLOW {
            overflow = true;
            t_end = (t - (t_max - t_b) / steps as f64).max(t_b);
            break;
        }
    }
    let f = |t: f64| trudinger_log_integrand(u, dom, params, t).map_or(f64::NAN, f64::exp);
    let mut result = integrate(&f, t_b, t_end, &decay_cuts(u, t_end), spec)?;

    // far field: exponent rate c·h(σ) - n
    let ln_h = |sigma: f64| -> f64 {
        let w = u.pair(sigma, alpha).0.abs();
        if w == 0.0 {
            f64::NEG_INFINITY
        } else {
            (w.ln() - params.beta * params.ln_weight(sigma)) * nf / (nf - 1.0)
        }
    };
    let w0 = t_max.ln().ln_1p();
    let dw = (LADDER_W_MAX - w0) / FAR_SAMPLES as f64;
    let samples: Vec<f64> = (0..=FAR_SAMPLES)
        .map(|k| ln_h((w0 + k as f64 * dw).exp_m1()))
        .collect();
    let rate = |lh: f64| params.c * lh.exp() - nf;
    let far_rate = samples
        .iter()
        .map(|&lh| rate(lh))
        .fold(f64::NEG_INFINITY, f64::max);
    let tail_growing = samples.len() >= 4
        && samples[samples.len() - 4..]
            .windows(2)
            .all(|w| w[1].is_finite() && w[1] - w[0] > 1e-6 * dw);

    if overflow || far_rate >= 0.0 || tail_growing {
        result.status = Status::Divergent;
    } else {
        let log_bound =
            dom.sphere_area().ln() + nf * (dom.hardy_scale().ln() + 1.0) + t_max * far_rate;
        result.tail_bound = log_bound.exp() / -far_rate;
        if result.status.is_converged()
            && result.error_estimate + result.tail_bound
                > 4.0 * (spec.rel_tol * result.value).max(spec.abs_tol)
        {
            result.status = Status::Truncated;
        }
    }

    let partials = match &params.epsilon_truncations {
        Some(eps) => trudinger_partials(u, dom, params, eps, spec)?,
        None => Vec::new(),
    };
    Ok(TrudingerReport {
        report: FunctionalReport::new("trudinger_integral", &result, digest),
        far_rate,
        partials,
    })
}

/// Trudinger integral over `{ε_k < |x| < rho}` for each cutoff.
pub fn trudinger_partials(
    u: &RadialProfile,
    dom: &BallDomain,
    params: &TrudingerParams,
    epsilons: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<PartialIntegral>> {
    params.validate()?;
    check_boundary(u, dom)?;
    let f = |t: f64| trudinger_log_integrand(u, dom, params, t).map_or(f64::NAN, f64::exp);
    let t_last = epsilons
        .last()
        .map_or(u.t_boundary(), |e| 1.0 + (dom.hardy_scale() / e).ln());
    truncated_series(
        &f,
        u.t_boundary(),
        dom.hardy_scale(),
        epsilons,
        &decay_cuts(u, t_last),
        spec,
    )
}

/// `(∫_Ω |u / E2^(2/n)|^q dx)^(1/q)` for `q > n`.
pub fn weighted_lq_norm(
    u: &RadialProfile,
    dom: &BallDomain,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<FunctionalReport> {
    let nf = dom.dim();
    if !(q > nf && q.is_finite()) {
        return Err(domain("q", q, "(n, inf)"));
    }
    check_boundary(u, dom)?;
    let m = u.magnitude();
    let unit = u.scaled(if m > 0.0 { 1.0 / m } else { 1.0 });
    let log_scale = dom.sphere_area().ln() + nf * dom.hardy_scale().ln();
    let f = |t: f64| -> f64 {
        match unit.value(t) {
            Ok(v) if v != 0.0 => {
                (q * (v.abs().ln() - (2.0 / nf) * t.ln().ln_1p()) + nf * (1.0 - t) + log_scale)
                    .exp()
            }
            Ok(_) => 0.0,
            Err(_) => f64::NAN,
        }
    };
    let r = integrate_log(
        &f,
        u.t_boundary(),
        &u.breakpoints(),
        TailClass::ExponentialDecay { rate: 0.5 * nf },
        spec,
    )?;
    let value = m * r.value.max(0.0).powf(1.0 / q);
    let error = if r.value > 0.0 {
        value * (r.error_estimate + r.tail_bound) / (q * r.value)
    } else {
        0.0
    };
    Ok(FunctionalReport {
        name: "weighted_lq_norm".into(),
        value,
        error_estimate: error,
        status: r.status,
        inputs_digest: inputs_digest("weighted_lq_norm", u, dom, json!({ "q": q })),
    })
}

fn check_n(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(domain("n", n as f64, "n >= 2"));
    }
    Ok(n as f64)
}

/// `C1(n) = 2^(n-1) - 1`.
pub fn c1(n: u32) -> Result<u64> {
    check_n(n)?;
    if n > 64 {
        return Err(domain("n", n as f64, "2 <= n <= 64"));
    }
    Ok((1u64 << (n - 1)) - 1)
}

/// Critical Hardy constant `((n-1)/n)^n`.
pub fn hardy_constant(n: u32) -> Result<f64> {
    let nf = check_n(n)?;
    Ok(((nf - 1.0) / nf).powi(n as i32))
}

/// Best remainder constant `(1/2)((n-1)/n)^(n-1)`.
pub fn remainder_constant(n: u32) -> Result<f64> {
    let nf = check_n(n)?;
    Ok(0.5 * ((nf - 1.0) / nf).powi(n as i32 - 1))
}

/// `C_n = (1/(n w_n^(1/n)))·[C1^(1/n) + 2^(1/n)·(n/(n-1))^((n-1)/n)·(n+1)/n]`.
pub fn prop31_constant(n: u32) -> Result<f64> {
    let nf = check_n(n)?;
    let wn = crate::geometry::unit_ball_volume(n)?;
    let c1 = c1(n)? as f64;
    let bracket = c1.powf(1.0 / nf)
        + 2f64.powf(1.0 / nf) * (nf / (nf - 1.0)).powf((nf - 1.0) / nf) * (nf + 1.0) / nf;
    Ok(bracket / (nf * wn.powf(1.0 / nf)))
}

/// `A_n = 1/(e·C_n^(n/(n-1)))`.
pub fn series_threshold(n: u32) -> Result<f64> {
    let nf = check_n(n)?;
    let c = prop31_constant(n)?;
    Ok(1.0 / (std::f64::consts::E * c.powf(nf / (nf - 1.0))))
}

/// Natural logs of the terms `(c·C_n^(n/(n-1)))^k (1+k)^(1+k) / k!` for
/// `k = n..=k_max`.
pub fn series_log_terms(n: u32, c: f64, k_max: u32) -> Result<Vec<f64>> {
    let nf = check_n(n)?;
    if !(c > 0.0) {
        return Err(domain("c", c, "(0, inf)"));
    }
    let ln_x = c.ln() + nf / (nf - 1.0) * prop31_constant(n)?.ln();
    let mut ln_fact: f64 = (2..n).map(|j| (j as f64).ln()).sum();
    let mut out = Vec::new();
    for k in n..=k_max {
        let kf = k as f64;
        ln_fact += kf.ln();
        out.push(kf * ln_x + (1.0 + kf) * (1.0 + kf).ln() - ln_fact);
    }
    Ok(out)
}

/// `C_n [1 + q(n-1)/n]^(1-1/n+1/q) vol^(1/q) I^(1/n)`.
pub fn prop31_bound_rhs(n: u32, q: f64, volume: f64, i_value: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(q > nf) {
        return Err(domain("q", q, "(n, inf)"));
    }
    if !(volume > 0.0) {
        return Err(domain("volume", volume, "(0, inf)"));
    }
    if !(i_value >= 0.0) {
        return Err(domain("I_n", i_value, "[0, inf)"));
    }
    Ok(prop31_constant(n)?
        * (1.0 + q * (nf - 1.0) / nf).powf(1.0 - 1.0 / nf + 1.0 / q)
        * volume.powf(1.0 / q)
        * i_value.powf(1.0 / nf))
}

/// `w_n^(1-1/n) (1 + q(n-1)/n)^(1-1/n+1/q) vol^(1/q)`.
pub fn riesz_bound(n: u32, q: f64, volume: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(q > nf) {
        return Err(domain("q", q, "(n, inf)"));
    }
    if !(volume > 0.0) {
        return Err(domain("volume", volume, "(0, inf)"));
    }
    let wn = crate::geometry::unit_ball_volume(n)?;
    Ok(wn.powf(1.0 - 1.0 / nf)
        * (1.0 + q * (nf - 1.0) / nf).powf(1.0 - 1.0 / nf + 1.0 / q)
        * volume.powf(1.0 / q))
}

/// `e^a - a - 1 + (1+b)ln(1+b) - b - ab`; `+∞` when `e^a` overflows.
pub fn young_base_residual(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= 0.0) {
        return Err(domain("a, b", if a >= 0.0 { b } else { a }, "[0, inf)"));
    }
    let ea = a.exp_m1() - a;
    if !ea.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(ea + (1.0 + b) * b.ln_1p() - b - a * b)
}

/// Right side minus left side of
/// `ab <= 2^(n-2)[e^((n-1)a^(1/(n-1))) + 2^(n-2)(1+b)(ln(1+b^(1/(n-1))))^(n-1)]`.
pub fn young_pairing_check(a: f64, b: f64, n: u32) -> Result<f64> {
    let nf = check_n(n)?;
    if !(a >= 0.0) || !(b >= 0.0) {
        return Err(domain("a, b", if a >= 0.0 { b } else { a }, "[0, inf)"));
    }
    let k = 2f64.powi(n as i32 - 2);
    let e = ((nf - 1.0) * a.powf(1.0 / (nf - 1.0))).exp();
    if !e.is_finite() {
        return Ok(f64::INFINITY);
    }
    let l = b.powf(1.0 / (nf - 1.0)).ln_1p().powi(n as i32 - 1);
    let rhs = k * (e + k * (1.0 + b) * l);
    if !rhs.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(rhs - a * b)
}

/// `2^(2(n-2)) ∫_B1 (1+g)(ln(1 + g^(1/(n-1))))^(n-1) dx` with
/// `g = 1/(|x|^n E1^n E2^θ)` and `R = 1`.
pub fn eval_p_b1(n: u32, theta: f64, spec: &QuadratureSpec) -> Result<FunctionalReport> {
    let nf = check_n(n)?;
    if !(theta > 1.0 && theta < 2.0) {
        return Err(domain("theta", theta, "(1, 2)"));
    }
    let dom = BallDomain::unit(n)?;
    let m = nf - 1.0;
    let g = |sigma: f64| -> f64 {
        let ell = 1.0 + sigma;
        let (ln_sp, sp_over_t) = if sigma < 5.0 {
            let t = sigma.exp();
            let y = (nf * (t - 1.0) - nf * sigma - theta * ell.ln()) / m;
            let sp = y.max(0.0) + (-y.abs()).exp().ln_1p();
            (sp.ln(), sp / t)
        } else {
            let et = (-sigma).exp();
            let y_over_t = (nf * (1.0 - et) - et * (nf * sigma + theta * ell.ln())) / m;
            (y_over_t.ln() + sigma, y_over_t)
        };
        let near = (sigma + nf * (1.0 - sigma.exp()) + m * ln_sp).exp();
        let far = ell.powf(-theta) * sp_over_t.powf(m);
        near + far
    };
    let pre = 4f64.powi(n as i32 - 2) * dom.sphere_area();
    let mut r = integrate_log_ladder(&g, 0.0, &[], spec)?;
    r.value *= pre;
    r.error_estimate *= pre;
    r.tail_bound *= pre;
    let digest = inputs_digest(
        "P_B1",
        &RadialProfile::zero(&dom),
        &dom,
        json!({ "theta": theta }),
    );
    Ok(FunctionalReport::new("P_B1", &r, digest))
}

/// Reconstructs `u(x) = (1/(2π)) ∫_D (x-y)·∇u(y)/|x-y|² dy` at each sample
/// point and returns the largest relative deviation. `u` returns the value
/// and gradient.
pub fn green_representation_check<U: Fn([f64; 2]) -> (f64, [f64; 2])>(
    u: &U,
    sample_points: &[[f64; 2]],
    grid: DiscGrid,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in sample_points {
        let recon = green_reconstruction(u, x, grid)?;
        let exact = u(x).0;
        let err = if exact == 0.0 {
            recon.abs()
        } else {
            ((recon - exact) / exact).abs()
        };
        worst = worst.max(err);
    }
    Ok(worst)
}

/// The representation integral at a single point.
pub fn green_reconstruction<U: Fn([f64; 2]) -> (f64, [f64; 2])>(
    u: &U,
    x: [f64; 2],
    grid: DiscGrid,
) -> Result<f64> {
    let f = |y: [f64; 2]| {
        let d = [x[0] - y[0], x[1] - y[1]];
        let g = u(y).1;
        (d[0] * g[0] + d[1] * g[1]) / (d[0] * d[0] + d[1] * d[1])
    };
    Ok(integrate_disc_2d(&f, x, grid)? / (2.0 * std::f64::consts::PI))
}

/// `(1 - |x|²)²` and its gradient.
pub fn bump_2d(x: [f64; 2]) -> (f64, [f64; 2]) {
    let s = 1.0 - x[0] * x[0] - x[1] * x[1];
    (s * s, [-4.0 * s * x[0], -4.0 * s * x[1]])
}

/// Functionals available on the radius-coordinate path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum RadialFunctional {
    DirichletEnergy,
    HardyTerm,
    Remainder { gamma: f64 },
    WeightedEnergy,
    WeightedLq { q: f64 },
    Trudinger { params: TrudingerParams },
}

/// Evaluates `functional` by integrating in the radius `r` instead of the
/// log coordinate. Used only to cross-check the primary evaluators.
pub fn radius_path(
    u: &RadialProfile,
    dom: &BallDomain,
    functional: &RadialFunctional,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    check_boundary(u, dom)?;
    let nf = dom.dim();
    let ni = dom.n() as i32;
    let area = dom.sphere_area();
    let alpha = dom.alpha();
    let big_r = dom.hardy_scale();
    let t_of = |r: f64| {
        if r >= dom.rho() {
            dom.t_boundary()
        } else {
            1.0 + (big_r / r).ln()
        }
    };
    let f = |r: f64| -> f64 {
        let t = t_of(r);
        let (Ok(val), Ok(slope)) = (u.value(t), u.slope(t)) else {
            return f64::NAN;
        };
        match functional {
            RadialFunctional::DirichletEnergy => area * slope.abs().powi(ni) / r,
            RadialFunctional::HardyTerm => area * alpha.powi(ni) * (val.abs() / t).powi(ni) / r,
            RadialFunctional::Remainder { gamma } => {
                area * (val.abs() / t).powi(ni) * (1.0 + t.ln()).powf(-gamma) / r
            }
            RadialFunctional::WeightedEnergy => area * slope.abs().powi(ni) * t.powi(ni - 1) / r,
            RadialFunctional::WeightedLq { q } => {
                area * r.powi(ni - 1) * (val.abs() / (1.0 + t.ln()).powf(2.0 / nf)).powf(*q)
            }
            RadialFunctional::Trudinger { params } => {
                let w = match params.weight_kind {
                    TrudingerWeight::E2Power => 1.0 + t.ln(),
                    TrudingerWeight::E1Power => t,
                };
                let x = (val.abs() / w.powf(params.beta)).powf(nf / (nf - 1.0));
                area * r.powi(ni - 1) * (params.c * x).exp()
            }
        }
    };
    let radii: Vec<f64> = u
        .breakpoints()
        .iter()
        .filter(|&&t| t > dom.t_boundary() && t <= T_CAP)
        .map(|&t| dom.from_log_coordinate(t))
        .collect();
    let mut r = integrate_radius(&f, dom.rho(), big_r, &radii, spec)?;
    if let RadialFunctional::WeightedLq { q } = functional {
        if r.value > 0.0 {
            let norm = r.value.powf(1.0 / q);
            r.error_estimate *= norm / (q * r.value);
            r.tail_bound *= norm / (q * r.value);
            r.value = norm;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_family, sample_random_mesh, FamilySpec};
    use std::f64::consts::{E, PI};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn ramp() -> RadialProfile {
        RadialProfile::mesh(vec![1.0, 2.0], vec![0.0, 1.0], false).unwrap()
    }

    #[test]
    fn zero_profile_gives_zero() {
        let d = BallDomain::unit(3).unwrap();
        let z = RadialProfile::zero(&d);
        assert_eq!(dirichlet_energy(&z, &d, &spec()).unwrap().value, 0.0);
        assert_eq!(hardy_term(&z, &d, &spec()).unwrap().value, 0.0);
        assert_eq!(hardy_difference(&z, &d, &spec()).unwrap().value, 0.0);
        assert_eq!(remainder_term(&z, &d, 2.0, &spec()).unwrap().value, 0.0);
        assert_eq!(weighted_lq_norm(&z, &d, 4.0, &spec()).unwrap().value, 0.0);
        assert!(normalize_to_unit_hardy(&z, &d, &spec()).is_err());
    }

    #[test]
    fn ramp_profile_closed_forms() {
        let d = BallDomain::unit(2).unwrap();
        let u = ramp();
        let e = dirichlet_energy(&u, &d, &spec()).unwrap();
        assert!(rel(e.total().unwrap(), 2.0 * PI) < 1e-12);
        // (π/2)(2 - 2 ln 2)
        let h = hardy_term(&u, &d, &spec()).unwrap();
        assert!(rel(h.total().unwrap(), 0.964_006_563_286_191_1) < 1e-10);
        let i = hardy_difference(&u, &d, &spec()).unwrap();
        assert!(rel(i.total().unwrap(), 5.319_178_743_893_395) < 1e-10);
        let m = make_family(FamilySpec::moser_plateau(3.0), &d).unwrap();
        assert!(rel(dirichlet_energy(&m, &d, &spec()).unwrap().value, 6.0 * PI) < 1e-12);
    }

    #[test]
    fn remainder_at_gamma_zero_is_unweighted_hardy() {
        let d = BallDomain::unit(3).unwrap();
        let u = sample_random_mesh(&d, 6, 1.0, 3).unwrap();
        let r = remainder_term(&u, &d, 0.0, &spec()).unwrap().value;
        let h = hardy_term(&u, &d, &spec()).unwrap().value;
        assert!(rel(r, h / hardy_constant(3).unwrap()) < 1e-10);
    }

    #[test]
    fn ground_state_closed_form() {
        // v = 1 - t^(-1/2), J = π/2
        let d = BallDomain::unit(2).unwrap();
        let u = make_family(FamilySpec::ground_state_power(0.0), &d).unwrap();
        let v = ground_state_transform(&u, &d);
        assert!((v.value(4.0).unwrap() - 0.5).abs() < 1e-15);
        let j = weighted_energy(&v, &d, &spec()).unwrap();
        assert!(rel(j.total().unwrap(), PI / 2.0) < 1e-10, "{j:?}");
        let i = hardy_difference(&u, &d, &spec()).unwrap();
        assert!(rel(i.total().unwrap(), PI / 2.0) < 1e-10);
    }

    #[test]
    fn ground_state_integrand_is_stable() {
        assert_eq!(ground_state_integrand(0.3, 1e10, 0.5, 2), 0.09);
        for n in 2..6 {
            for &(p, q) in &[(0.1, 2.0), (-3.0, 0.5), (1e-9, 1.0), (2.0, 0.0)] {
                assert!(ground_state_integrand(p, q, 0.7, n) >= 0.0);
            }
        }
        let direct = (1.5f64 + 0.7).powi(3) - 0.7f64.powi(3) - 3.0 * 0.7f64.powi(2) * 1.5;
        assert!(rel(ground_state_integrand(1.5, 1.0, 0.7, 3), direct) < 1e-14);
    }

    #[test]
    fn admissibility_threshold_on_remainder() {
        let d = BallDomain::unit(2).unwrap();
        for (s, ok) in [(0.3, true), (0.45, true), (0.55, false), (0.7, false)] {
            let u = make_family(FamilySpec::ground_state_power(s), &d).unwrap();
            let r = remainder_term(&u, &d, 2.0, &spec()).unwrap();
            assert_eq!(r.status.is_converged(), ok, "s = {s}: {r:?}");
            let i = hardy_difference(&u, &d, &spec()).unwrap();
            assert_eq!(i.status.is_converged(), ok, "s = {s}: {i:?}");
        }
    }

    #[test]
    fn normalization_hits_one() {
        let d = BallDomain::unit(2).unwrap();
        let u = ramp().scaled(4.0);
        let i = hardy_difference(&u, &d, &spec()).unwrap().value;
        let v = normalize_to_unit_hardy(&u, &d, &spec()).unwrap();
        assert!(rel(v.scale(), 4.0 * i.powf(-0.5)) < 1e-15);
    }

    #[test]
    fn constants() {
        assert_eq!(c1(2).unwrap(), 1);
        assert_eq!(c1(3).unwrap(), 3);
        assert!(rel(prop31_constant(2).unwrap(), 2.0 / PI.sqrt()) < 1e-15);
        assert!(rel(series_threshold(2).unwrap(), PI / (4.0 * E)) < 1e-14);
        assert!(
            rel(
                prop31_bound_rhs(2, 4.0, PI, 1.0).unwrap(),
                3.424_391_958_533_672
            ) < 1e-14
        );
        assert!(rel(riesz_bound(2, 4.0, PI).unwrap(), 5.379_022_309_970_674) < 1e-14);
        assert_eq!(prop31_bound_rhs(2, 4.0, PI, 0.0).unwrap(), 0.0);
        assert!(prop31_bound_rhs(2, 2.0, PI, 1.0).is_err());
    }

    #[test]
    fn young_examples() {
        for n in 2..5 {
            assert_eq!(
                young_pairing_check(0.0, 0.0, n).unwrap(),
                2f64.powi(n as i32 - 2)
            );
        }
        assert_eq!(young_pairing_check(1e6, 1.0, 2).unwrap(), f64::INFINITY);
        assert_eq!(young_base_residual(0.0, 0.0).unwrap(), 0.0);
        assert!(young_base_residual(-1.0, 0.0).is_err());
    }

    #[test]
    fn trudinger_baseline_and_monotonicity() {
        let d = BallDomain::unit(2).unwrap();
        let z = RadialProfile::zero(&d);
        let sp = QuadratureSpec::exponential();
        let t = trudinger_integral(&z, &d, &TrudingerParams::new(1.0, 1.0), &sp).unwrap();
        assert!(rel(t.report.total().unwrap(), PI) < 1e-8);
        let u = make_family(FamilySpec::moser_plateau(2.0), &d).unwrap();
        let a = trudinger_integral(&u, &d, &TrudingerParams::new(0.5, 1.0), &sp)
            .unwrap()
            .report
            .value;
        let b = trudinger_integral(&u, &d, &TrudingerParams::new(0.8, 1.0), &sp)
            .unwrap()
            .report
            .value;
        let c = trudinger_integral(&u, &d, &TrudingerParams::new(0.8, 1.5), &sp)
            .unwrap()
            .report
            .value;
        assert!(a <= b && c <= b);
        assert!(TrudingerParams::new(0.0, 1.0).validate().is_err());
    }

    #[test]
    fn p_b1_converges() {
        let r = eval_p_b1(2, 1.5, &spec()).unwrap();
        assert_eq!(r.status, Status::Converged, "{r:?}");
        assert!(r.value > 0.0);
        assert!(eval_p_b1(2, 1.0, &spec()).is_err());
    }

    #[test]
    fn green_reconstruction_at_origin() {
        let g = DiscGrid::default();
        let v = green_reconstruction(&bump_2d, [0.0, 0.0], g).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let zero = |_: [f64; 2]| (0.0, [0.0, 0.0]);
        assert_eq!(
            green_representation_check(&zero, &[[0.1, 0.2]], g).unwrap(),
            0.0
        );
    }

    #[test]
    fn radius_path_agrees_on_compact_profiles() {
        let d = BallDomain::new(2, 0.5, 1.0).unwrap();
        let sampler = crate::funcspace::MeshSampler {
            node_count: 6,
            compact: true,
            ..Default::default()
        };
        let u = sampler.sample(&d, 9).unwrap();
        let sp = spec();
        let cases: Vec<(RadialFunctional, f64)> = vec![
            (
                RadialFunctional::DirichletEnergy,
                dirichlet_energy(&u, &d, &sp).unwrap().value,
            ),
            (
                RadialFunctional::HardyTerm,
                hardy_term(&u, &d, &sp).unwrap().value,
            ),
            (
                RadialFunctional::Remainder { gamma: 2.0 },
                remainder_term(&u, &d, 2.0, &sp).unwrap().value,
            ),
            (
                RadialFunctional::WeightedLq { q: 3.0 },
                weighted_lq_norm(&u, &d, 3.0, &sp).unwrap().value,
            ),
        ];
        for (f, log) in cases {
            let rad = radius_path(&u, &d, &f, &sp).unwrap();
            assert!(rel(rad.value, log) < 1e-6, "{f:?}: {} vs {log}", rad.value);
        }
    }

    #[test]
    fn radius_path_tail_bound_covers_slow_tails() {
        let d = BallDomain::unit(2).unwrap();
        let u = make_family(
            FamilySpec::GroundStatePower {
                s: 0.3,
                cutoff: Some(30.0),
            },
            &d,
        )
        .unwrap();
        // mpmath reference for the remainder of this profile
        let exact = 1.791_583_017_106_212_4;
        let log = remainder_term(&u, &d, 2.0, &spec()).unwrap();
        assert!(rel(log.total().unwrap(), exact) < 1e-9);
        let rad =
            radius_path(&u, &d, &RadialFunctional::Remainder { gamma: 2.0 }, &spec()).unwrap();
        assert!((rad.value - exact).abs() <= rad.tail_bound + rad.error_estimate);
    }

    #[test]
    fn digest_changes_with_inputs() {
        let d = BallDomain::unit(2).unwrap();
        let a = inputs_digest("x", &ramp(), &d, json!({}));
        let b = inputs_digest("x", &ramp().scaled(2.0), &d, json!({}));
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
    }
}
