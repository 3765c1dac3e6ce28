//! Closed-form quantities of the adiabatic gas `p(v) = v^-γ` in the scaled
//! frame where the left end state is `v₋ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProfileSolution;
use crate::quad;

/// Relative tolerance of the Lyapunov-function quadrature.
pub const LYAPUNOV_REL_TOL: f64 = 1e-10;

/// Pressure law `p(v) = v^-γ` and its first two derivatives.
pub fn pressure(v: f64, gamma: f64) -> Result<(f64, f64, f64)> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("specific volume must be positive, got {v}")));
    }
    if !(gamma >= 1.0) {
        return Err(Error::domain(format!("adiabatic exponent must be >= 1, got {gamma}")));
    }
    let p = v.powf(-gamma);
    Ok((p, -gamma * p / v, gamma * (gamma + 1.0) * p / (v * v)))
}

/// Rankine–Hugoniot speed parameter `a = (1 - v₊)/(v₊^-γ - 1)`.
pub fn rankine_hugoniot(v_plus: f64, gamma: f64) -> Result<f64> {
    if !(v_plus > 0.0 && v_plus < 1.0) {
        return Err(Error::domain(format!("need 0 < v_plus < 1, got {v_plus}")));
    }
    let (p_plus, _, _) = pressure(v_plus, gamma)?;
    // expm1 keeps the weak-shock limit accurate
    let denom = (-gamma * v_plus.ln()).exp_m1();
    debug_assert!((denom - (p_plus - 1.0)).abs() <= 1e-12 * p_plus);
    Ok((1.0 - v_plus) / denom)
}

/// Critical capillarity `d* = 1/(4(1 - aγ))` separating monotone from
/// oscillatory profiles.
pub fn critical_capillarity(a: f64, gamma: f64) -> Result<f64> {
    if !(a >= 0.0) || a * gamma >= 1.0 {
        return Err(Error::domain(format!(
            "non-Lax data: a*gamma = {} must lie in [0, 1)",
            a * gamma
        )));
    }
    Ok(0.25 / (1.0 - a * gamma))
}

/// Scaled physical parameters plus the derived shock quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub gamma: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub d: f64,
    pub a: f64,
    pub epsilon: f64,
    pub d_star: f64,
    pub mach: f64,
}

impl GasParams {
    pub fn new(gamma: f64, v_plus: f64, d: f64) -> Result<Self> {
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be >= 1, got {gamma}")));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("capillarity d must be positive, got {d}")));
        }
        let a = rankine_hugoniot(v_plus, gamma)?;
        let d_star = critical_capillarity(a, gamma)?;
        Ok(Self {
            gamma,
            v_plus,
            v_minus: 1.0,
            d,
            a,
            epsilon: 1.0 - v_plus,
            d_star,
            mach: 1.0 / (gamma * a).sqrt(),
        })
    }

    /// Accepts an explicit left state, which must be exactly 1: every
    /// downstream constant assumes the `v₋ = 1` scaling.
    pub fn with_end_states(gamma: f64, v_plus: f64, v_minus: f64, d: f64) -> Result<Self> {
        if v_minus != 1.0 {
            return Err(Error::domain(format!(
                "v_minus must be 1 in the scaled frame, got {v_minus}"
            )));
        }
        Self::new(gamma, v_plus, d)
    }

    pub fn with_d(&self, d: f64) -> Result<Self> {
        Self::new(self.gamma, self.v_plus, d)
    }

    pub fn pressure(&self, v: f64) -> Result<(f64, f64, f64)> {
        pressure(v, self.gamma)
    }

    pub fn is_monotone_regime(&self) -> bool {
        self.d <= self.d_star
    }

    /// `φ(v) = v (v - v₋ + a (p(v) - p(v₋)))`.
    pub fn phi(&self, v: f64) -> f64 {
        v * self.phi_over_v(v)
    }

    pub(crate) fn phi_over_v(&self, v: f64) -> f64 {
        v - 1.0 + self.a * (v.powf(-self.gamma) - 1.0)
    }

    /// `φ'(v)`; at the end states this reduces to `v (1 + a p'(v))`.
    pub fn phi_prime(&self, v: f64) -> f64 {
        let p = v.powf(-self.gamma);
        self.phi_over_v(v) + v * (1.0 - self.a * self.gamma * p / v)
    }

    /// Lyapunov function `E(v, w) = ½w² - (1/d) ∫_v^{v₋} φ(s)/s ds`.
    pub fn lyapunov_e(&self, v: f64, w: f64) -> Result<f64> {
        if !(v > 0.0) {
            return Err(Error::domain(format!("specific volume must be positive, got {v}")));
        }
        let q = quad::integrate(
            |s| self.phi_over_v(s),
            v,
            1.0,
            LYAPUNOV_REL_TOL,
            1e-15 * (1.0 - v).abs(),
        )?;
        Ok(0.5 * w * w - q.value / self.d)
    }

    /// Coefficient `f(v̂) = -a p'(v̂) - v̂ₓ/v̂²` of the linearized problem.
    pub fn f_coeff(&self, v_hat: f64, v_hat_x: f64) -> f64 {
        self.a * self.gamma * v_hat.powf(-self.gamma - 1.0) - v_hat_x / (v_hat * v_hat)
    }
}

/// High-frequency bound constants for a computed profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfBound {
    /// `C = sup |f(v̂) v̂|` over the profile.
    pub c: f64,
    /// `3 + 12C/5`
    pub bound: f64,
    /// Contour radius, `max(12, bound)`.
    pub radius: f64,
    /// Set when `C > γ`, which a correct adiabatic profile never produces.
    pub exceeds_gamma: bool,
}

pub const BASE_RADIUS: f64 = 12.0;

pub fn hf_bound_from_samples(params: &GasParams, v: &[f64], w: &[f64]) -> HfBound {
    let c = v
        .iter()
        .zip(w)
        .map(|(&v, &w)| (params.f_coeff(v, w) * v).abs())
        .fold(0.0, f64::max);
    let bound = 3.0 + 12.0 * c / 5.0;
    HfBound {
        c,
        bound,
        radius: bound.max(BASE_RADIUS),
        exceeds_gamma: c > params.gamma,
    }
}

pub fn hf_bound(profile: &ProfileSolution) -> HfBound {
    hf_bound_from_samples(&profile.params, &profile.v_hat, &profile.w_hat)
}
