//! Logarithmic weights `E1(s) = log(e/s)` and `E2(s) = log(e·E1(s))` on radius
//! ratios `s = r/R ∈ (0, 1]`, together with the logarithmic coordinate
//! `t = E1(s)` used throughout the crate.
//!
//! In the coordinate `t` the weights are simply `E1 = t` and `E2 = 1 + ln t`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest logarithmic coordinate that is exponentiated back to a radius.
/// Past this point `e^(1-t)` is treated as exactly zero.
pub const T_CAP: f64 = 700.0;

/// A point described both by its logarithmic coordinate and its radius ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPoint {
    pub t: f64,
    pub r_over_r: f64,
}

impl WeightPoint {
    pub fn from_t(t: f64) -> Result<Self> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(domain("t", t, "[1, inf)"));
        }
        Ok(Self {
            t,
            r_over_r: ratio_from_log(t),
        })
    }

    pub fn from_ratio(s: f64) -> Result<Self> {
        Ok(Self {
            t: e1(s)?,
            r_over_r: s,
        })
    }

    /// `E1` at this point.
    pub fn e1(&self) -> f64 {
        self.t
    }

    /// `E2` at this point, evaluated in the log coordinate.
    pub fn e2(&self) -> f64 {
        e2_of_t(self.t)
    }
}

/// `r/R = e^(1-t)`, flushed to zero beyond [`T_CAP`].
pub fn ratio_from_log(t: f64) -> f64 {
    if t > T_CAP {
        0.0
    } else {
        (1.0 - t).exp()
    }
}

/// `E2` written in the log coordinate: `log(e·t) = 1 + ln t`.
#[inline]
pub fn e2_of_t(t: f64) -> f64 {
    1.0 + t.ln()
}

fn check_ratio(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(domain("s", s, "(0, 1]"))
    }
}

/// `E1(s) = log(e/s) = 1 - ln s`.
pub fn e1(s: f64) -> Result<f64> {
    check_ratio(s)?;
    Ok(1.0 - s.ln())
}

/// `E2(s) = log(e·E1(s)) = 1 + ln(1 - ln s)`.
pub fn e2(s: f64) -> Result<f64> {
    check_ratio(s)?;
    // ln(1 + x) with x = -ln s keeps full precision as s -> 1
    Ok(1.0 + (-s.ln()).ln_1p())
}

/// Weight combinations whose radial derivative is needed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    E1,
    E2,
    /// `E1^a · E2^b`.
    E1PowerE2Power {
        a: f64,
        b: f64,
    },
}

impl WeightKind {
    pub fn value(&self, s: f64) -> Result<f64> {
        let l1 = e1(s)?;
        let l2 = e2(s)?;
        Ok(match *self {
            WeightKind::E1 => l1,
            WeightKind::E2 => l2,
            WeightKind::E1PowerE2Power { a, b } => l1.powf(a) * l2.powf(b),
        })
    }
}

/// Analytic derivative `d/ds` of the requested weight, for `0 < s < 1`.
pub fn weight_derivative(kind: WeightKind, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain("s", s, "(0, 1)"));
    }
    if let WeightKind::E1PowerE2Power { a, b } = kind {
        if !a.is_finite() || !b.is_finite() {
            return Err(domain(
                "exponent",
                if a.is_finite() { b } else { a },
                "finite",
            ));
        }
    }
    let l1 = e1(s)?;
    let l2 = e2(s)?;
    let d1 = -1.0 / s;
    Ok(match kind {
        WeightKind::E1 => d1,
        WeightKind::E2 => d1 / l1,
        WeightKind::E1PowerE2Power { a, b } => l1.powf(a) * l2.powf(b) * (d1 / l1) * (a + b / l2),
    })
}

/// The gradient bound
/// `|d/ds (E1^(1-1/n) / E2^(2/n))| <= ((n+1)/n) / (s · E1^(1/n) · E2^(2/n))`
/// evaluated as `(lhs, rhs)`.
pub fn gradient_bound(n: u32, s: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let kind = WeightKind::E1PowerE2Power {
        a: 1.0 - 1.0 / nf,
        b: -2.0 / nf,
    };
    let lhs = weight_derivative(kind, s)?.abs();
    let rhs = ((nf + 1.0) / nf) / (s * e1(s)?.powf(1.0 / nf) * e2(s)?.powf(2.0 / nf));
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn e1_examples() {
        assert_eq!(e1(1.0).unwrap(), 1.0);
        assert!(rel(e1((-1.0f64).exp()).unwrap(), 2.0) < 1e-15);
        assert!(rel(e1(0.5).unwrap(), 1.0 + 2f64.ln()) < 1e-15);
    }

    #[test]
    fn e2_examples() {
        assert_eq!(e2(1.0).unwrap(), 1.0);
        assert!(rel(e2((1.0 - E).exp()).unwrap(), 2.0) < 1e-14);
        // 1 + log(1 + log 2), 40-digit reference
        assert!(rel(e2(0.5).unwrap(), 1.526589034139044481894103) < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_ratios() {
        for s in [0.0, -1.0, 1.5, f64::NAN] {
            assert!(e1(s).is_err());
            assert!(e2(s).is_err());
        }
        assert!(weight_derivative(WeightKind::E1, 1.0).is_err());
        assert!(weight_derivative(WeightKind::E2, 0.0).is_err());
    }

    #[test]
    fn e1_derivative_is_minus_inverse() {
        assert_eq!(weight_derivative(WeightKind::E1, 0.5).unwrap(), -2.0);
    }

    #[test]
    fn gradient_bound_holds_at_tenth() {
        let (lhs, rhs) = gradient_bound(2, 0.1).unwrap();
        assert!(lhs <= rhs);
    }

    #[test]
    fn finite_difference_at_point_three() {
        let kind = WeightKind::E1PowerE2Power { a: 0.5, b: -1.0 };
        let h = 1e-6;
        let fd = (kind.value(0.3 + h).unwrap() - kind.value(0.3 - h).unwrap()) / (2.0 * h);
        let an = weight_derivative(kind, 0.3).unwrap();
        assert!(rel(an, fd) < 1e-6);
    }

    #[test]
    fn log_coordinate_round_trip() {
        for &t in &[1.0, 1.5, 3.0, 10.0, 100.0, 699.0] {
            let p = WeightPoint::from_t(t).unwrap();
            let back = WeightPoint::from_ratio(p.r_over_r).unwrap();
            assert!(rel(back.t, t) <= 1e-14, "t = {t}");
            assert!(rel(p.e2(), e2(p.r_over_r).unwrap()) < 1e-13);
        }
        assert!(WeightPoint::from_t(0.5).is_err());
    }
}
