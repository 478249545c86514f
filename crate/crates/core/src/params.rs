//! Coefficients of the delayed system, geometry constants of the domain and
//! the weights of the Lyapunov functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `u_tt - Δu + a u_t(t - tau) = 0` with the boundary
/// feedback `∂u/∂ν = -k u_t` and the energy history weight `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub a: f64,
    pub k: f64,
    pub tau: f64,
    pub xi: f64,
}

impl PhysicalParams {
    pub fn new(a: f64, k: f64, tau: f64, xi: f64) -> Self {
        Self { a, k, tau, xi }
    }

    /// Field invariant violations, empty when valid.
    ///
    /// `conservation` relaxes `k > 0` to `k >= 0` and `tau > 0` to
    /// `tau >= 0` when `a = 0`; it is meant for energy-conservation and
    /// instability demonstration runs only.
    pub fn violations(&self, conservation: bool) -> Vec<String> {
        let mut out = Vec::new();
        if !self.a.is_finite() || self.a < 0.0 {
            out.push("a must be nonnegative".to_string());
        }
        if !self.k.is_finite() || self.k < 0.0 || (!conservation && self.k == 0.0) {
            out.push("k must be positive".to_string());
        }
        let tau_zero_ok = conservation && self.a == 0.0;
        if !self.tau.is_finite() || self.tau < 0.0 || (self.tau == 0.0 && !tau_zero_ok) {
            out.push("tau must be positive".to_string());
        }
        if !self.xi.is_finite() || self.xi <= 0.0 {
            out.push("xi must be positive".to_string());
        }
        out
    }
}

/// Constants describing the domain and the multiplier `m(x) = x - x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    /// Spatial dimension.
    pub n: usize,
    /// `sup |x - x0|` over the domain.
    pub m_inf: f64,
    /// `min m·ν` over the feedback boundary.
    pub delta: f64,
    /// Trace-Poincaré constant: `∫_Γ1 φ² <= cp ∫ |∇φ|²`.
    pub cp: f64,
    /// Poincaré constant: `∫ φ² <= c0p ∫ |∇φ|²`.
    pub c0p: f64,
}

impl GeometryConstants {
    /// Constants of the interval `(0, length)` with the multiplier origin at 0.
    pub fn interval(length: f64) -> Self {
        Self {
            n: 1,
            m_inf: length,
            delta: length,
            cp: length,
            c0p: 4.0 * length * length / (std::f64::consts::PI * std::f64::consts::PI),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push("n must be a positive integer".to_string());
        }
        if !(self.delta > 0.0) {
            out.push("delta must be positive".to_string());
        }
        if !(self.m_inf.is_finite()) || self.delta > self.m_inf {
            out.push("delta must not exceed m_inf".to_string());
        }
        if !(self.cp > 0.0) || !self.cp.is_finite() {
            out.push("cp must be positive".to_string());
        }
        if !(self.c0p > 0.0) || !self.c0p.is_finite() {
            out.push("c0p must be positive".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

/// Weights of the Lyapunov functional `E + γ1·(multiplier term) + γ2·S`,
/// together with the trace-splitting parameter `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovWeights {
    pub gamma1: f64,
    pub gamma2: f64,
    pub epsilon: f64,
}

impl LyapunovWeights {
    /// Zero weights: the functional collapses to the energy.
    pub const ZERO: Self = Self {
        gamma1: 0.0,
        gamma2: 0.0,
        epsilon: 0.0,
    };

    pub fn violations(&self, cp: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.gamma2 > 0.0) {
            out.push("gamma2 must be positive".to_string());
        }
        if !(self.gamma1 > self.gamma2) {
            out.push("gamma1 must exceed gamma2".to_string());
        }
        if !(self.epsilon > 0.0) {
            out.push("epsilon must be positive".to_string());
        }
        if !(1.0 - 0.5 * self.epsilon * cp > 0.0) {
            out.push("epsilon too large: 1 - epsilon*cp/2 must be positive".to_string());
        }
        out
    }
}

/// A configuration that passed [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validated {
    pub params: PhysicalParams,
    pub geom: GeometryConstants,
    pub conservation: bool,
}

/// Checks every field invariant of both records and reports all violations
/// at once.
pub fn validate_params(
    params: PhysicalParams,
    geom: GeometryConstants,
    conservation: bool,
) -> Result<Validated> {
    let mut v = params.violations(conservation);
    v.extend(geom.violations());
    if v.is_empty() {
        Ok(Validated {
            params,
            geom,
            conservation,
        })
    } else {
        Err(Error::InvalidParams(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> GeometryConstants {
        GeometryConstants::interval(1.0)
    }

    fn messages(r: Result<Validated>) -> Vec<String> {
        match r {
            Err(Error::InvalidParams(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn accepts_valid_configuration() {
        let p = PhysicalParams::new(0.05, 1.0, 1.0, 0.1);
        assert!(validate_params(p, unit(), false).is_ok());
    }

    #[test]
    fn zero_gain_needs_conservation_flag() {
        let p = PhysicalParams::new(0.05, 0.0, 1.0, 0.1);
        let msgs = messages(validate_params(p, unit(), false));
        assert_eq!(msgs, vec!["k must be positive".to_string()]);
        assert!(validate_params(p, unit(), true).is_ok());
    }

    #[test]
    fn negative_damping_rejected() {
        let p = PhysicalParams::new(-0.1, 1.0, 1.0, 0.1);
        let msgs = messages(validate_params(p, unit(), false));
        assert_eq!(msgs, vec!["a must be nonnegative".to_string()]);
    }

    #[test]
    fn reports_every_violation() {
        let p = PhysicalParams::new(-1.0, -1.0, 0.0, 0.0);
        let mut g = unit();
        g.delta = 0.0;
        let msgs = messages(validate_params(p, g, false));
        assert_eq!(msgs.len(), 5, "{msgs:?}");
    }

    #[test]
    fn zero_delay_only_without_damping_in_conservation_mode() {
        let p = PhysicalParams::new(0.0, 0.0, 0.0, 1.0);
        assert!(validate_params(p, unit(), true).is_ok());
        let p = PhysicalParams::new(0.1, 0.0, 0.0, 1.0);
        assert!(validate_params(p, unit(), true).is_err());
    }

    #[test]
    fn weight_invariants() {
        let w = LyapunovWeights {
            gamma1: 0.3,
            gamma2: 0.15,
            epsilon: 1.0,
        };
        assert!(w.violations(1.0).is_empty());
        let bad = LyapunovWeights {
            gamma1: 0.1,
            gamma2: 0.2,
            epsilon: 2.0,
        };
        assert_eq!(bad.violations(1.0).len(), 2);
    }
}
