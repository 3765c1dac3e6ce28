//! Heteroclinic shock profiles of the capillarity model.
//!
//! The profile satisfies the first-order system
//!
//! ```text
//! v' = w
//! w' = (w - φ(v)) / (d v)
//! ```
//!
//! and connects the unstable node/spiral `(v₋, 0)` at `x → -∞` to the saddle
//! `(v₊, 0)` at `x → +∞`.

mod bvp;
mod shoot;
mod validate;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParams;

pub use bvp::{solve_profile, solve_profile_default, MeshOptions};
pub use shoot::{shoot_profile_oracle, sup_distance, ShootOptions};
pub use validate::{validate, validate_with, ValidationReport};

/// Positive slopes above this count as a loss of monotonicity.
pub const MONOTONE_SLOPE_TOL: f64 = 1e-10;

/// Default truncation `L± = ±25`.
pub const DEFAULT_HALF_WIDTH: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Monotone,
    Oscillatory,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Monotone => f.write_str("monotone"),
            Classification::Oscillatory => f.write_str("oscillatory"),
        }
    }
}

/// Right-hand side of the profile system.
pub fn profile_rhs(v: f64, w: f64, params: &GasParams) -> Result<(f64, f64)> {
    if !(v > 0.0) {
        return Err(Error::domain(format!("profile orbit reached v = {v}")));
    }
    Ok((w, (w - params.phi(v)) / (params.d * v)))
}

#[inline]
pub(crate) fn rhs_unchecked(params: &GasParams, v: f64, w: f64) -> f64 {
    (w - params.phi(v)) / (params.d * v)
}

/// Linearization of the profile system at one of its two fixed points.
#[derive(Debug, Clone, Copy)]
pub struct Linearization {
    pub jacobian: Matrix2<f64>,
    /// Ordered by decreasing real part.
    pub eigenvalues: [Complex64; 2],
    /// Unit eigenvectors `(1, μ)/|(1, μ)|`.
    pub eigenvectors: [Vector2<Complex64>; 2],
}

impl Linearization {
    pub fn trace(&self) -> f64 {
        self.jacobian.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.jacobian.determinant()
    }

    pub fn discriminant(&self) -> f64 {
        let t = self.trace();
        t * t - 4.0 * self.determinant()
    }
}

pub fn endpoint_linearization(v_e: f64, params: &GasParams) -> Result<Linearization> {
    if v_e != params.v_plus && v_e != params.v_minus {
        return Err(Error::domain(format!(
            "{v_e} is not an end state ({} or {})",
            params.v_plus, params.v_minus
        )));
    }
    let (_, dp, _) = params.pressure(v_e)?;
    let c = -(1.0 + params.a * dp) / params.d;
    let b = 1.0 / (params.d * v_e);
    let jacobian = Matrix2::new(0.0, 1.0, c, b);
    // μ² - bμ - c = 0
    let disc = Complex64::new(b * b + 4.0 * c, 0.0).sqrt();
    let mut eigenvalues = [(b + disc) / 2.0, (b - disc) / 2.0];
    eigenvalues.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    let eigenvectors = eigenvalues.map(|mu| {
        let v = Vector2::new(Complex64::new(1.0, 0.0), mu);
        v / Complex64::new(v.norm(), 0.0)
    });
    Ok(Linearization {
        jacobian,
        eigenvalues,
        eigenvectors,
    })
}

/// Computed shock layer on a truncated grid together with a piecewise-cubic
/// Hermite interpolant of `(v̂, v̂ₓ)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub params: GasParams,
    pub grid: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub w_hat: Vec<f64>,
    /// Second derivative taken from the ODE right-hand side.
    pub v_hat_xx: Vec<f64>,
    pub classification: Classification,
    pub residual_norm: f64,
    /// `|v̂(L₋) - v₋|` and `|v̂(L₊) - v₊|`.
    pub endpoint_errors: (f64, f64),
}

impl ProfileSolution {
    pub(crate) fn from_nodes(
        params: GasParams,
        grid: Vec<f64>,
        v_hat: Vec<f64>,
        w_hat: Vec<f64>,
        residual_norm: f64,
    ) -> Self {
        debug_assert!(grid.windows(2).all(|p| p[0] < p[1]));
        let v_hat_xx = v_hat
            .iter()
            .zip(&w_hat)
            .map(|(&v, &w)| rhs_unchecked(&params, v, w))
            .collect();
        let classification = detect_classification(&w_hat);
        let endpoint_errors = (
            (v_hat[0] - params.v_minus).abs(),
            (v_hat[v_hat.len() - 1] - params.v_plus).abs(),
        );
        Self {
            params,
            grid,
            v_hat,
            w_hat,
            v_hat_xx,
            classification,
            residual_norm,
            endpoint_errors,
        }
    }

    /// Constant state `v̂ ≡ v₋`; the degenerate zero-amplitude profile.
    pub fn constant_state(params: GasParams, l_minus: f64, l_plus: f64, nodes: usize) -> Self {
        let n = nodes.max(2);
        let grid = (0..n)
            .map(|i| l_minus + (l_plus - l_minus) * i as f64 / (n - 1) as f64)
            .collect();
        Self::from_nodes(params, grid, vec![1.0; n], vec![0.0; n], 0.0)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn l_minus(&self) -> f64 {
        self.grid[0]
    }

    pub fn l_plus(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.grid.len();
        match self.grid.binary_search_by(|g| g.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Evaluates `(v̂, v̂ₓ)` at `x`, clamped to the end values outside the
    /// grid.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return (self.v_hat[0], self.w_hat[0]);
        }
        if x >= self.grid[n - 1] {
            return (self.v_hat[n - 1], self.w_hat[n - 1]);
        }
        let i = self.locate(x);
        let h = self.grid[i + 1] - self.grid[i];
        let t = (x - self.grid[i]) / h;
        let v = hermite(self.v_hat[i], self.w_hat[i], self.v_hat[i + 1], self.w_hat[i + 1], h, t);
        let w = hermite(
            self.w_hat[i],
            self.v_hat_xx[i],
            self.w_hat[i + 1],
            self.v_hat_xx[i + 1],
            h,
            t,
        );
        (v, w)
    }

    /// Derivative of the `v̂` interpolant; consistent with `eval(x).1` up to
    /// interpolation error.
    pub fn eval_v_derivative(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] || x >= self.grid[n - 1] {
            return self.eval(x).1;
        }
        let i = self.locate(x);
        let h = self.grid[i + 1] - self.grid[i];
        let t = (x - self.grid[i]) / h;
        hermite_derivative(self.v_hat[i], self.w_hat[i], self.v_hat[i + 1], self.w_hat[i + 1], h, t)
    }

    pub fn max_abs_slope(&self) -> (usize, f64) {
        self.w_hat
            .iter()
            .enumerate()
            .map(|(i, w)| (i, w.abs()))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc })
    }
}

pub(crate) fn detect_classification(w_hat: &[f64]) -> Classification {
    if w_hat.iter().all(|&w| w <= MONOTONE_SLOPE_TOL) {
        Classification::Monotone
    } else {
        Classification::Oscillatory
    }
}

/// Largest overshoot ratio per half-turn of the spiral at `v₋`, below which
/// an oscillation cannot be seen at double precision.
const RESOLVABLE_OVERSHOOT: f64 = 1e-6;

/// Checks the grid verdict against the `d ≤ d*` predicate.
///
/// A disagreement is reported as `resolvable = false` when `d` is so close
/// above `d*` that the spiral at `v₋` damps by more than
/// `RESOLVABLE_OVERSHOOT` per half-turn.
pub fn classify(profile: &ProfileSolution) -> Result<Classification> {
    let detected = detect_classification(&profile.w_hat);
    let p = &profile.params;
    let predicted = if p.is_monotone_regime() {
        Classification::Monotone
    } else {
        Classification::Oscillatory
    };
    if detected == predicted {
        return Ok(detected);
    }
    let resolvable = match endpoint_linearization(p.v_minus, p) {
        Ok(lin) if lin.eigenvalues[0].im.abs() > 0.0 => {
            let mu = lin.eigenvalues[0];
            (-std::f64::consts::PI * mu.re / mu.im.abs()).exp() > RESOLVABLE_OVERSHOOT
        }
        _ => true,
    };
    Err(Error::ClassificationMismatch {
        detected,
        predicted,
        resolvable,
    })
}

#[inline]
pub(crate) fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

#[inline]
pub(crate) fn hermite_derivative(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (3.0 * t2 - 2.0 * t) * d1
}
