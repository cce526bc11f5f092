//! Balls centred at the origin, dimensional constants, and the change of
//! variables between the radius `r` and the log coordinate `t = log(e·R/r)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::weights::T_CAP;

/// Volume of the unit ball in `R^n`, `π^(n/2) / Γ(n/2 + 1)`.
///
/// Uses the recursion `w_n = (2π/n)·w_(n-2)` with `w_0 = 1`, `w_1 = 2`.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(domain("n", n as f64, "n >= 1"));
    }
    let mut w = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        w *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    Ok(w)
}

/// The ball of radius `rho` in `R^n` together with the Hardy scale `R >= rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    n: u32,
    rho: f64,
    hardy_scale: f64,
}

impl BallDomain {
    pub fn new(n: u32, rho: f64, hardy_scale: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain("n", n as f64, "n >= 2"));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(domain("rho", rho, "(0, inf)"));
        }
        if !(hardy_scale >= rho) || !hardy_scale.is_finite() {
            return Err(Error::Config(format!(
                "Hardy scale R = {hardy_scale} must satisfy R >= rho = {rho}"
            )));
        }
        Ok(Self {
            n,
            rho,
            hardy_scale,
        })
    }

    /// Unit ball with `R = 1`.
    pub fn unit(n: u32) -> Result<Self> {
        Self::new(n, 1.0, 1.0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn hardy_scale(&self) -> f64 {
        self.hardy_scale
    }

    /// Ground-state exponent `(n-1)/n`.
    pub fn alpha(&self) -> f64 {
        (self.dim() - 1.0) / self.dim()
    }

    pub fn unit_volume(&self) -> f64 {
        unit_ball_volume(self.n).expect("n >= 2")
    }

    /// `n·w_n`, the area of the unit sphere.
    pub fn sphere_area(&self) -> f64 {
        self.dim() * self.unit_volume()
    }

    pub fn volume(&self) -> f64 {
        self.unit_volume() * self.rho.powi(self.n as i32)
    }

    /// `E1(rho/R)`; equals 1 exactly when `rho = R`.
    pub fn t_boundary(&self) -> f64 {
        if self.rho == self.hardy_scale {
            1.0
        } else {
            1.0 + (self.hardy_scale / self.rho).ln()
        }
    }

    pub fn to_log_coordinate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= self.rho) {
            return Err(domain("r", r, "(0, rho]"));
        }
        if r == self.rho {
            return Ok(self.t_boundary());
        }
        Ok(1.0 + (self.hardy_scale / r).ln())
    }

    /// `R·e^(1-t)`; zero past the exponentiation cap.
    pub fn from_log_coordinate(&self, t: f64) -> f64 {
        if t > T_CAP {
            0.0
        } else {
            self.hardy_scale * (1.0 - t).exp()
        }
    }

    /// Jacobian `n·w_n·R^n·e^(n(1-t))` of `dx` for radial integrands in `t`.
    pub fn radial_measure_factor(&self, t: f64) -> f64 {
        let nf = self.dim();
        self.sphere_area() * (nf * (self.hardy_scale.ln() + 1.0 - t)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4).unwrap() - PI * PI / 2.0).abs() < 1e-14);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn log_coordinate_examples() {
        let d = BallDomain::unit(2).unwrap();
        assert_eq!(d.to_log_coordinate(1.0).unwrap(), 1.0);
        assert!((d.to_log_coordinate((-2.0f64).exp()).unwrap() - 3.0).abs() < 1e-15);
        let half = BallDomain::new(2, 0.5, 1.0).unwrap();
        assert!((half.to_log_coordinate(0.5).unwrap() - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!(half.to_log_coordinate(0.7).is_err());
        assert!(half.to_log_coordinate(0.0).is_err());
    }

    #[test]
    fn round_trip_and_monotone() {
        let d = BallDomain::new(3, 0.8, 2.0).unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 1..50 {
            let r = 0.8 * (k as f64 / 50.0).powi(3);
            let t = d.to_log_coordinate(r).unwrap();
            assert!(((d.from_log_coordinate(t) - r) / r).abs() < 1e-14);
            if k > 1 {
                assert!(t < last);
            }
            last = t;
        }
    }

    #[test]
    fn measure_factor_examples() {
        let d = BallDomain::unit(2).unwrap();
        assert!((d.radial_measure_factor(1.0) - 2.0 * PI).abs() < 1e-14);
        assert!((d.radial_measure_factor(2.0) - 2.0 * PI * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(BallDomain::new(1, 1.0, 1.0).is_err());
        assert!(BallDomain::new(2, 1.0, 0.5).is_err());
        assert!(BallDomain::new(2, -1.0, 1.0).is_err());
        let d = BallDomain::new(2, 0.5, 0.5).unwrap();
        assert_eq!(d.t_boundary(), 1.0);
    }
}
