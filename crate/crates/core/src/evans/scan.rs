//! Evans function on the positive real axis.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::system::EvansSystem;
use super::{evaluate_modes, transported_modes};
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    /// Sample points, from `R` down to the lower end.
    pub lambdas: Vec<f64>,
    /// `ln |D₊|` at each sample.
    pub log_abs: Vec<f64>,
    /// `arg D₊` relative to the value at `R`, in `(-π, π]`. On the real axis
    /// it is 0 or π up to rounding.
    pub phase: Vec<f64>,
    /// Consecutive index pairs across which the aligned real part changes
    /// sign.
    pub sign_changes: Vec<(usize, usize)>,
    /// `min |D₊|`; 0 when it underflows, see `min_ln_abs`.
    pub min_abs: f64,
    pub min_ln_abs: f64,
    pub argmin: f64,
}

impl ScanReport {
    pub fn has_crossing(&self) -> bool {
        !self.sign_changes.is_empty()
    }
}

/// Chebyshev–Lobatto points on `[lo, hi]`, ordered from `hi` down to `lo`.
pub fn chebyshev_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    (0..n)
        .map(|k| {
            let c = (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            lo + 0.5 * (hi - lo) * (1.0 + c)
        })
        .collect()
}

/// Evaluates `D₊` at `n` Chebyshev-spaced points of `[lo, radius]` and
/// reports sign changes of the phase-aligned real part.
pub fn real_axis_scan(system: &EvansSystem, lo: f64, radius: f64, n: usize) -> Result<ScanReport> {
    if !(lo > 0.0 && lo < radius) || n == 0 {
        return Err(Error::domain(format!(
            "real-axis scan needs 0 < lo < R and n > 0 (lo = {lo}, R = {radius}, n = {n})"
        )));
    }
    let lambdas = chebyshev_points(lo, radius, n);
    let path: Vec<C> = lambdas.iter().map(|&l| C::new(l, 0.0)).collect();
    let modes = transported_modes(system, &path)?;
    let values = modes
        .par_iter()
        .map(|m| evaluate_modes(system, m).map(|e| e.log_value))
        .collect::<Result<Vec<_>>>()?;
    let phase: Vec<f64> = values
        .iter()
        .map(|v| C::from_polar(1.0, v.im - values[0].im).arg())
        .collect();
    let sign_changes = (0..n.saturating_sub(1))
        .filter(|&i| phase[i].cos().signum() != phase[i + 1].cos().signum())
        .map(|i| (i, i + 1))
        .collect();
    let (imin, min_ln_abs) = values
        .iter()
        .map(|v| v.re)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    Ok(ScanReport {
        argmin: lambdas[imin],
        lambdas,
        log_abs: values.iter().map(|v| v.re).collect(),
        phase,
        sign_changes,
        min_abs: min_ln_abs.exp(),
        min_ln_abs,
    })
}
