//! Rescaled integrations of the lifted system toward the matching point `x*`.
//!
//! Through a strong shock layer the rescaled 2-forms legitimately change size
//! by many orders of magnitude, which an absolute tolerance cannot follow.
//! The solution is therefore carried in polar form `V = e^σ U`:
//!
//! ```text
//! ρ = U* M U / |U|²,    U' = M U - ρ U,    σ' = ρ,
//! ```
//!
//! which conserves `|U|` exactly and makes `e^σ U` a solution of `V' = M V`.
//! Normalizing the rate by `|U|²` matters: with `ρ = U* M U` the sphere
//! `|U| = 1` is invariant but repelling in one integration direction.

use nalgebra::{SVector, Vector6};
use num_complex::Complex64;

use super::lift::BASIS;
use super::modes::eigenvalues4;
use super::system::{End, EvansSystem};
use crate::error::{Error, Result};
use crate::ode::{dopri5_capped, Control, OdeStats};

type C = Complex64;

/// Admissible range of `|V(x)| / |V(start)|` while the profile is still at
/// its end state.
pub const NORM_GUARD: (f64, f64) = (1e-4, 1e4);
/// The far field is where `|v̂ - v±| ≤ FAR_FIELD · ε`.
pub const FAR_FIELD: f64 = 1e-3;

/// `|z h|` kept below this on the end-state spectra, inside the real
/// stability interval of Dormand–Prince.
const STABLE_STEP: f64 = 2.5;

/// Result of one rescaled integration.
#[derive(Debug, Clone, Copy)]
pub struct Evolved {
    /// `V(x*) = e^σ U(x*)`; may under- or overflow for extreme layers.
    pub value: Vector6<C>,
    /// `U(x*)`, scaled by the initial norm.
    pub direction: Vector6<C>,
    /// `σ(x*)`.
    pub log_scale: C,
    /// `ln |V(x*)| - ln |V(start)|`.
    pub log_growth: f64,
    pub stats: OdeStats,
}

/// Step cap keeping the explicit scheme stable on the decaying modes. Without
/// it the error control accepts steps far outside the stability region while
/// the solution sits on the tracked mode, and roundoff in the other modes is
/// amplified up to the tolerance.
fn step_cap(system: &EvansSystem, lambda: C, spectrum: impl Fn(C) -> C) -> Result<f64> {
    let mut spread: f64 = 0.0;
    for end in [End::Minus, End::Plus] {
        let ev = eigenvalues4(&system.end_matrix(end, lambda))?;
        for (i, j) in BASIS {
            spread = spread.max(spectrum(ev[i] + ev[j]).norm());
        }
    }
    Ok(if spread > 0.0 { STABLE_STEP / spread } else { f64::INFINITY })
}

/// Integrates `V' = M(x) V` from `x0` to `x*` in polar form, enforcing the norm
/// guard on the far field next to `end`.
fn integrate<F>(
    system: &EvansSystem,
    lambda: C,
    end: End,
    v0: Vector6<C>,
    max_step: f64,
    rhs: F,
) -> Result<Evolved>
where
    F: Fn(f64, &Vector6<C>) -> Vector6<C>,
{
    let x0 = match end {
        End::Minus => system.l_minus(),
        End::Plus => system.l_plus(),
    };
    let n0 = v0.norm();
    let mut y0 = SVector::<C, 7>::zeros();
    y0.fixed_rows_mut::<6>(0).copy_from(&(v0 / C::new(n0, 0.0)));
    let polar = |x: f64, y: &SVector<C, 7>| -> SVector<C, 7> {
        let u: Vector6<C> = y.fixed_rows::<6>(0).into_owned();
        let mu = rhs(x, &u);
        let rate = u.dotc(&mu) / C::new(u.norm_squared(), 0.0);
        let mut out = SVector::<C, 7>::zeros();
        out.fixed_rows_mut::<6>(0).copy_from(&(mu - u * rate));
        out[6] = rate;
        out
    };
    let v_end = system.end_value(end);
    let far = FAR_FIELD * system.params.epsilon;
    let (lo, hi) = (NORM_GUARD.0.ln(), NORM_GUARD.1.ln());
    let mut tripped: Option<f64> = None;
    let sol = dopri5_capped(polar, x0, y0, system.match_point, system.tolerances, max_step, |x, y, _| {
        if (system.profile.eval(x).0 - v_end).abs() > far {
            return Control::Continue;
        }
        let u: Vector6<C> = y.fixed_rows::<6>(0).into_owned();
        let log_ratio = y[6].re + u.norm().ln();
        if !(lo..=hi).contains(&log_ratio) {
            tripped = Some(log_ratio.exp());
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if let Some(ratio) = tripped {
        return Err(Error::NormGuard { lambda, ratio });
    }
    let u: Vector6<C> = sol.y.fixed_rows::<6>(0).into_owned();
    let sigma = sol.y[6];
    if !(sigma.re.is_finite() && sigma.im.is_finite()) {
        return Err(Error::NormGuard {
            lambda,
            ratio: f64::NAN,
        });
    }
    let direction = u * C::new(n0, 0.0);
    Ok(Evolved {
        value: direction * sigma.exp(),
        direction,
        log_scale: sigma,
        log_growth: sigma.re + u.norm().ln(),
        stats: sol.stats,
    })
}

/// `V' = (A⁽²⁾(x, λ) - μ⁻) V` from `L₋` to `x*`, started on `r_minus`.
pub fn evolve_unstable(lambda: C, system: &EvansSystem, mu_minus: C, r_minus: Vector6<C>) -> Result<Evolved> {
    let cap = step_cap(system, lambda, |s| s - mu_minus)?;
    integrate(system, lambda, End::Minus, r_minus, cap, |x, v| {
        system.lifted(x, lambda) * v - v * mu_minus
    })
}

/// Adjoint `Ṽ' = (-(A⁽²⁾)ᵀ(x, λ) - μ̃₊) Ṽ` from `L₊` to `x*`, started on
/// `r_tilde_plus`.
pub fn evolve_adjoint(
    lambda: C,
    system: &EvansSystem,
    mu_tilde_plus: C,
    r_tilde_plus: Vector6<C>,
) -> Result<Evolved> {
    let cap = step_cap(system, lambda, |s| s + mu_tilde_plus)?;
    integrate(system, lambda, End::Plus, r_tilde_plus, cap, |x, v| {
        -(system.lifted(x, lambda).transpose() * v) - v * mu_tilde_plus
    })
}

/// Forward stable 2-form `V' = (A⁽²⁾(x, λ) - μ₊) V` from `L₊` to `x*`.
pub fn evolve_stable(lambda: C, system: &EvansSystem, mu_plus: C, r_plus: Vector6<C>) -> Result<Evolved> {
    let cap = step_cap(system, lambda, |s| s - mu_plus)?;
    integrate(system, lambda, End::Plus, r_plus, cap, |x, v| {
        system.lifted(x, lambda) * v - v * mu_plus
    })
}
