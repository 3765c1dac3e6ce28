//! Adjoint compound-matrix Evans function `D₊(λ) = W̃₊(0) · W₋(0)`.
//!
//! Both 2-forms are integrated in rescaled form toward a matching point `x*`
//! (default 0). Since `W̃₊ · W₋` is constant in `x`, matching at `x*` and
//! multiplying by `exp((μ₋ + μ̃₊) x*)` gives the same `D₊`. Their initial
//! vectors are analytic in `λ`: each is normalized once at the real point
//! `base_point` and carried to `λ` by Kato transport, first along the real
//! axis and then along the circle `|λ| = const`. Conjugate paths give
//! conjugate vectors, so `D₊(λ̄) = conj D₊(λ)`.

pub mod evolve;
pub mod kato;
pub mod lift;
pub mod modes;
pub mod scan;
pub mod system;

use nalgebra::Vector6;
use num_complex::Complex64;

use crate::error::Result;
use crate::ode::OdeStats;

pub use evolve::{evolve_adjoint, evolve_stable, evolve_unstable, Evolved};
pub use kato::{kato_second_order, kato_transport};
pub use lift::{lift_exterior, wedge, wedge_vectors};
pub use modes::{check_splitting, dominant_modes, DominantModes, Track};
pub use scan::{real_axis_scan, ScanReport};
pub use system::{coefficient_matrix, End, EvansSystem};

use kato::{normalize_real_positive, spectral_data};
use modes::{tracked_derivative, tracked_family};

type C = Complex64;

/// Largest angular step of the polygon approximating the circular part of a
/// transport path.
const ARC_STEP: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct EvansEvaluation {
    pub lambda: C,
    /// `D₊(λ)`; underflows to 0 when `ln|D₊|` is below about -745.
    pub value: C,
    /// `ln D₊(λ)`: real part `ln|D₊|`, imaginary part the phase in `(-π, π]`.
    pub log_value: C,
    /// Rescaled 2-forms at the matching point.
    pub w_minus_at_match: Vector6<C>,
    pub w_tilde_plus_at_match: Vector6<C>,
    pub stats_minus: OdeStats,
    pub stats_plus: OdeStats,
    /// `ln(|W₋(x*)| / |r₋|)` and `ln(|W̃₊(x*)| / |r̃₊|)`.
    pub log_growth: (f64, f64),
}

impl EvansEvaluation {
    pub fn stats(&self) -> OdeStats {
        self.stats_minus + self.stats_plus
    }
}

/// Analytically continued initial data at one `λ`.
#[derive(Debug, Clone)]
pub struct TransportedModes {
    pub lambda: C,
    pub mu_minus: C,
    pub r_minus: Vector6<C>,
    pub mu_tilde_plus: C,
    pub r_tilde_plus: Vector6<C>,
}

/// Vertices from the real point `base` to `λ`: along the real axis to `|λ|`,
/// then along the circle. `base` itself is not included.
pub fn transport_path(base: f64, lambda: C) -> Vec<C> {
    let r = lambda.norm();
    let theta = lambda.arg();
    let mut path = Vec::new();
    if r != base {
        path.push(C::new(r, 0.0));
    }
    let n = (theta.abs() / ARC_STEP).ceil() as usize;
    for k in 1..n {
        path.push(C::from_polar(r, theta * k as f64 / n as f64));
    }
    if n > 0 {
        path.push(lambda);
    }
    path
}

fn track_along(system: &EvansSystem, track: Track, path: &[C]) -> Result<Vec<Vector6<C>>> {
    let base = C::new(system.base_point, 0.0);
    let (m0, mu0) = tracked_family(system, track, base)?;
    let r0 = normalize_real_positive(&spectral_data(&m0, mu0)?.right);
    let mut full = Vec::with_capacity(path.len() + 1);
    full.push(base);
    full.extend_from_slice(path);
    let out = kato_transport(
        &full,
        |l| tracked_family(system, track, l),
        |_| tracked_derivative(system, track),
        r0,
        system.kato_tol,
    )?;
    Ok(out[1..].to_vec())
}

/// Transports the unstable mode at `-∞` and the adjoint mode at `+∞` from
/// `base_point` along the polygon `base_point, path[0], path[1], …`, checking
/// consistent splitting at every vertex.
pub fn transported_modes(system: &EvansSystem, path: &[C]) -> Result<Vec<TransportedModes>> {
    for &l in path {
        check_splitting(system, l)?;
    }
    let minus = track_along(system, Track::MinusUnstable, path)?;
    let plus = track_along(system, Track::PlusAdjoint, path)?;
    path.iter()
        .zip(minus)
        .zip(plus)
        .map(|((&lambda, r_minus), r_tilde_plus)| {
            let (_, mu_minus) = tracked_family(system, Track::MinusUnstable, lambda)?;
            let (_, mu_plus) = tracked_family(system, Track::PlusAdjoint, lambda)?;
            Ok(TransportedModes {
                lambda,
                mu_minus,
                r_minus,
                mu_tilde_plus: -mu_plus,
                r_tilde_plus,
            })
        })
        .collect()
}

/// `ln(a · b)` for two polar-form solutions, with the phase wrapped to
/// `(-π, π]`.
fn log_pairing(a: &Evolved, b: &Evolved, shift: C) -> C {
    let l = a.direction.dot(&b.direction).ln() + a.log_scale + b.log_scale + shift;
    C::new(l.re, C::from_polar(1.0, l.im).arg())
}

/// Evaluates `D₊` from already transported initial data.
pub fn evaluate_modes(system: &EvansSystem, modes: &TransportedModes) -> Result<EvansEvaluation> {
    let lambda = modes.lambda;
    let minus = evolve_unstable(lambda, system, modes.mu_minus, modes.r_minus)?;
    let plus = evolve_adjoint(lambda, system, modes.mu_tilde_plus, modes.r_tilde_plus)?;
    let shift = (modes.mu_minus + modes.mu_tilde_plus) * system.match_point;
    let log_value = log_pairing(&plus, &minus, shift);
    Ok(EvansEvaluation {
        lambda,
        value: log_value.exp(),
        log_value,
        w_minus_at_match: minus.value,
        w_tilde_plus_at_match: plus.value,
        stats_minus: minus.stats,
        stats_plus: plus.stats,
        log_growth: (minus.log_growth, plus.log_growth),
    })
}

/// `D₊(λ)` for a single `λ` in the closed right half-plane.
pub fn evans(lambda: C, system: &EvansSystem) -> Result<EvansEvaluation> {
    let path = transport_path(system.base_point, lambda);
    let modes = if path.is_empty() {
        transported_modes(system, &[lambda])?
    } else {
        transported_modes(system, &path)?
    };
    evaluate_modes(system, modes.last().expect("non-empty path"))
}

/// Forward-only compound-matrix Evans function: the unstable 2-form from
/// `-∞` wedged with the stable 2-form from `+∞` at the matching point. It differs from
/// [`evans`] by a nonvanishing analytic factor.
///
/// Returns `ln` of the value, as [`EvansEvaluation::log_value`].
pub fn evans_forward(lambda: C, system: &EvansSystem) -> Result<C> {
    let mut path = transport_path(system.base_point, lambda);
    if path.is_empty() {
        path.push(lambda);
    }
    for &l in &path {
        check_splitting(system, l)?;
    }
    let r_minus = *track_along(system, Track::MinusUnstable, &path)?.last().unwrap();
    let r_plus = *track_along(system, Track::PlusStable, &path)?.last().unwrap();
    let (_, mu_minus) = tracked_family(system, Track::MinusUnstable, lambda)?;
    let (_, mu_plus) = tracked_family(system, Track::PlusStable, lambda)?;
    let minus = evolve_unstable(lambda, system, mu_minus, r_minus)?;
    let plus = evolve_stable(lambda, system, mu_plus, r_plus)?;
    let l = wedge(&minus.direction, &plus.direction).ln() + minus.log_scale + plus.log_scale;
    Ok(C::new(l.re, C::from_polar(1.0, l.im).arg()))
}
