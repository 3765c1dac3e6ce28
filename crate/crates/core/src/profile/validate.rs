//! A-posteriori checks on a computed profile.

use serde::{Deserialize, Serialize};

use super::{hermite, ProfileSolution};
use crate::error::Result;
use crate::gas::{hf_bound, HfBound};
use crate::quad;

/// Slack added to `ε²/4` when testing the derivative bound.
pub const SLOPE_BOUND_SLACK: f64 = 1e-8;
/// Resampling factor for the interpolated slope maximum.
pub const RESAMPLE: usize = 10;
/// Absolute slack for the monotonicity of `E` along the orbit.
pub const LYAPUNOV_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Largest `|v̂ₓ|` at the nodes.
    pub sup_slope: f64,
    /// Largest `|v̂ₓ|` of the interpolant on a tenfold resampling.
    pub sup_slope_resampled: f64,
    /// `ε²/4`.
    pub slope_bound: f64,
    pub slope_bound_ok: bool,
    pub argmax_x: f64,
    /// Nearest point where the orbit crosses the nullcline `w = φ(v)`.
    pub nullcline_x: f64,
    /// Spacing of the grid around the argmax.
    pub local_spacing: f64,
    pub argmax_on_nullcline: bool,
    /// Largest decrease of `E` between consecutive nodes (0 when monotone).
    pub lyapunov_violation: f64,
    pub lyapunov_monotone: bool,
    pub residual_norm: f64,
    pub residual_ok: bool,
    pub endpoint_errors: (f64, f64),
    pub endpoint_ok: bool,
    pub hf: HfBound,
}

impl ValidationReport {
    /// Numerical soundness of the profile: residual, truncation, Lyapunov
    /// monotonicity and the extremum location. The derivative bound is
    /// reported separately in `slope_bound_ok`.
    pub fn numerically_valid(&self) -> bool {
        self.residual_ok && self.endpoint_ok && self.lyapunov_monotone && self.argmax_on_nullcline
    }
}

pub fn validate(profile: &ProfileSolution) -> Result<ValidationReport> {
    validate_with(profile, 1e-8, 1e-6)
}

pub fn validate_with(
    profile: &ProfileSolution,
    residual_tol: f64,
    endpoint_tol: f64,
) -> Result<ValidationReport> {
    let p = &profile.params;
    let n = profile.len();
    let (imax, sup_slope) = profile.max_abs_slope();
    let mut sup_slope_resampled = sup_slope;
    for i in 0..n - 1 {
        let h = profile.grid[i + 1] - profile.grid[i];
        for k in 1..RESAMPLE {
            let t = k as f64 / RESAMPLE as f64;
            let w = hermite(
                profile.w_hat[i],
                profile.v_hat_xx[i],
                profile.w_hat[i + 1],
                profile.v_hat_xx[i + 1],
                h,
                t,
            );
            sup_slope_resampled = sup_slope_resampled.max(w.abs());
        }
    }
    let slope_bound = 0.25 * p.epsilon * p.epsilon;

    let argmax_x = profile.grid[imax];
    let g: Vec<f64> = profile
        .v_hat
        .iter()
        .zip(&profile.w_hat)
        .map(|(&v, &w)| w - p.phi(v))
        .collect();
    let nullcline_x = (0..n - 1)
        .filter(|&i| g[i] == 0.0 || g[i] * g[i + 1] < 0.0)
        .map(|i| {
            let (x0, x1) = (profile.grid[i], profile.grid[i + 1]);
            if g[i] == 0.0 {
                x0
            } else {
                x0 + (x1 - x0) * g[i] / (g[i] - g[i + 1])
            }
        })
        .min_by(|a, b| (a - argmax_x).abs().total_cmp(&(b - argmax_x).abs()))
        .unwrap_or(f64::NAN);
    let local_spacing = {
        let left = if imax > 0 { argmax_x - profile.grid[imax - 1] } else { 0.0 };
        let right = if imax + 1 < n { profile.grid[imax + 1] - argmax_x } else { 0.0 };
        left.max(right)
    };
    let argmax_on_nullcline = sup_slope == 0.0 || (nullcline_x - argmax_x).abs() <= local_spacing;

    let lyapunov_violation = lyapunov_violation(profile)?;

    Ok(ValidationReport {
        sup_slope,
        sup_slope_resampled,
        slope_bound,
        slope_bound_ok: sup_slope_resampled <= slope_bound + SLOPE_BOUND_SLACK,
        argmax_x,
        nullcline_x,
        local_spacing,
        argmax_on_nullcline,
        lyapunov_violation,
        lyapunov_monotone: lyapunov_violation == 0.0,
        residual_norm: profile.residual_norm,
        residual_ok: profile.residual_norm <= residual_tol,
        endpoint_errors: profile.endpoint_errors,
        endpoint_ok: profile.endpoint_errors.0 <= endpoint_tol
            && profile.endpoint_errors.1 <= endpoint_tol,
        hf: hf_bound(profile),
    })
}

/// `E` is non-decreasing in `x` along a connecting orbit, since
/// `dE/dx = w²/(d v)`. Returns the largest decrease between consecutive nodes
/// beyond the slack.
fn lyapunov_violation(profile: &ProfileSolution) -> Result<f64> {
    let p = &profile.params;
    let mut e_prev = p.lyapunov_e(profile.v_hat[0], profile.w_hat[0])?;
    let mut integral = e_prev - 0.5 * profile.w_hat[0].powi(2);
    let mut worst: f64 = 0.0;
    for i in 1..profile.len() {
        let (v0, v1) = (profile.v_hat[i - 1], profile.v_hat[i]);
        if v0 != v1 {
            // the integrand cancels catastrophically near v₋, so the floor scales with
            // the interval rather than the value
            let q = quad::integrate(|s| p.phi_over_v(s), v0, v1, 1e-12, 1e-14 * (v1 - v0).abs())?;
            integral += q.value / p.d;
        }
        let e = 0.5 * profile.w_hat[i].powi(2) + integral;
        let slack = LYAPUNOV_SLACK + 1e-10 * e.abs().max(e_prev.abs());
        if e < e_prev - slack {
            worst = worst.max(e_prev - e);
        }
        e_prev = e;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasParams;

    #[test]
    fn constant_state_has_zero_slope() {
        let p = GasParams::new(1.4, 0.5, 0.3).unwrap();
        let prof = ProfileSolution::constant_state(p, -5.0, 5.0, 21);
        let r = validate(&prof).unwrap();
        assert_eq!(r.sup_slope, 0.0);
        assert_eq!(r.sup_slope_resampled, 0.0);
        assert!(r.slope_bound_ok && r.lyapunov_monotone && r.argmax_on_nullcline);
    }

    #[test]
    fn lyapunov_increment_matches_direct_evaluation() {
        let p = GasParams::new(5.0 / 3.0, 0.1, 0.2).unwrap();
        let (v0, v1) = (0.9, 0.4);
        let direct = p.lyapunov_e(v1, 0.0).unwrap() - p.lyapunov_e(v0, 0.0).unwrap();
        let q = quad::integrate(|s| p.phi_over_v(s), v0, v1, 1e-12, 1e-300).unwrap();
        assert!((direct - q.value / p.d).abs() < 1e-10);
    }
}
