//! The linearized integrated eigenvalue problem as a first-order system
//! `W' = A(x, λ) W` with `W = (u, v, v', v'')`.

use std::sync::Arc;

use nalgebra::{Matrix4, Matrix6};
use num_complex::Complex64;

use super::lift::lift_exterior;
use crate::gas::GasParams;
use crate::ode::Tolerances;
use crate::profile::ProfileSolution;

/// Which end of the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Minus,
    Plus,
}

/// `h₀ = 1 + a p'(v̂) + v̂ₓ/v̂²`, so that `h = h₀ - λ/v̂`.
pub fn h_base(params: &GasParams, v_hat: f64, v_hat_x: f64) -> f64 {
    let dp = -params.gamma * v_hat.powf(-params.gamma - 1.0);
    1.0 + params.a * dp + v_hat_x / (v_hat * v_hat)
}

/// Coefficient matrix at a profile point `(v̂, v̂ₓ)`.
///
/// The last row follows from solving the second integrated equation for
/// `v'''`: `d v''' = -λu - λv - h v' + v''/v̂`.
pub fn coefficient_matrix(
    params: &GasParams,
    v_hat: f64,
    v_hat_x: f64,
    lambda: Complex64,
) -> Matrix4<Complex64> {
    let d = params.d;
    let h = h_base(params, v_hat, v_hat_x) - lambda / v_hat;
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(
        z, lambda, one, z,
        z, z, one, z,
        z, z, z, one,
        -lambda / d, -lambda / d, -h / d, Complex64::new(1.0 / (d * v_hat), 0.0),
    )
}

/// `∂A/∂λ`, which does not depend on `λ`.
pub fn coefficient_derivative(params: &GasParams, v_hat: f64) -> Matrix4<Complex64> {
    let d = params.d;
    let mut m = Matrix4::zeros();
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0 / d, 0.0);
    m[(3, 1)] = Complex64::new(-1.0 / d, 0.0);
    m[(3, 2)] = Complex64::new(1.0 / (d * v_hat), 0.0);
    m
}

/// Variant with the last row negated, `(λ/d, λ/d, h/d, -(d v̂)⁻¹)`. It
/// equals [`coefficient_matrix`] with `d` replaced by `-d`, and is the
/// convention under which [`flipped_lifted_matrix`] is written.
pub fn flipped_coefficient_matrix(
    params: &GasParams,
    v_hat: f64,
    v_hat_x: f64,
    lambda: Complex64,
) -> Matrix4<Complex64> {
    let d = params.d;
    let h = h_base(params, v_hat, v_hat_x) - lambda / v_hat;
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(
        z, lambda, one, z,
        z, z, one, z,
        z, z, z, one,
        lambda / d, lambda / d, h / d, Complex64::new(-1.0 / (d * v_hat), 0.0),
    )
}

/// Closed form of the lift of [`flipped_coefficient_matrix`], entry by entry.
pub fn flipped_lifted_matrix(
    params: &GasParams,
    v_hat: f64,
    v_hat_x: f64,
    lambda: Complex64,
) -> Matrix6<Complex64> {
    let d = params.d;
    let h = h_base(params, v_hat, v_hat_x) - lambda / v_hat;
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let q = Complex64::new(-1.0 / (d * v_hat), 0.0);
    Matrix6::new(
        z, one, z, -one, z, z,
        z, z, one, lambda, z, z,
        lambda / d, h / d, q, z, lambda, one,
        z, z, z, z, one, z,
        -lambda / d, z, z, h / d, q, one,
        z, -lambda / d, z, -lambda / d, z, q,
    )
}

/// Shared, immutable data for Evans-function evaluations on one profile.
#[derive(Debug, Clone)]
pub struct EvansSystem {
    pub profile: Arc<ProfileSolution>,
    pub params: GasParams,
    /// Tolerances of the two `x`-integrations.
    pub tolerances: Tolerances,
    /// Real point where analytic eigenvector fields are normalized; every
    /// evaluation transports from here.
    pub base_point: f64,
    /// Relative tolerance of the Kato transport.
    pub kato_tol: f64,
    /// Point where the two integrations meet.
    pub match_point: f64,
}

impl EvansSystem {
    pub fn new(profile: ProfileSolution) -> Self {
        Self::from_shared(Arc::new(profile))
    }

    pub fn from_shared(profile: Arc<ProfileSolution>) -> Self {
        let params = profile.params;
        Self {
            profile,
            params,
            tolerances: Tolerances::new(1e-6, 1e-8),
            base_point: crate::gas::BASE_RADIUS,
            kato_tol: 1e-11,
            match_point: 0.0,
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tolerances = tol;
        self
    }

    pub fn with_base_point(mut self, base: f64) -> Self {
        self.base_point = base;
        self
    }

    pub fn with_match_point(mut self, x: f64) -> Self {
        self.match_point = x;
        self
    }

    pub fn l_minus(&self) -> f64 {
        self.profile.l_minus()
    }

    pub fn l_plus(&self) -> f64 {
        self.profile.l_plus()
    }

    /// `A(x, λ)` from the profile interpolant.
    pub fn build_a(&self, x: f64, lambda: Complex64) -> Matrix4<Complex64> {
        let (v, w) = self.profile.eval(x);
        coefficient_matrix(&self.params, v, w, lambda)
    }

    pub fn lifted(&self, x: f64, lambda: Complex64) -> Matrix6<Complex64> {
        lift_exterior(&self.build_a(x, lambda))
    }

    pub fn end_value(&self, end: End) -> f64 {
        match end {
            End::Minus => self.params.v_minus,
            End::Plus => self.params.v_plus,
        }
    }

    /// `A±(λ)` at the exact end states.
    pub fn end_matrix(&self, end: End, lambda: Complex64) -> Matrix4<Complex64> {
        coefficient_matrix(&self.params, self.end_value(end), 0.0, lambda)
    }

    pub fn end_lifted(&self, end: End, lambda: Complex64) -> Matrix6<Complex64> {
        lift_exterior(&self.end_matrix(end, lambda))
    }

    pub fn end_lifted_derivative(&self, end: End) -> Matrix6<Complex64> {
        lift_exterior(&coefficient_derivative(&self.params, self.end_value(end)))
    }
}
