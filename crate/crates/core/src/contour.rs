//! Closed contour around the right half-disk and winding numbers of the
//! Evans function along it.
//!
//! Points are addressed by a parameter `s ∈ [0, 4)`, positively oriented:
//!
//! * `[0, 1)`: arc from `R` up to `δ + iT`, with `T = √(R² - δ²)`;
//! * `[1, 2)`: vertical segment `Re λ = δ` down to `δ`;
//! * `[2, 3)`: on down to `δ - iT`;
//! * `[3, 4)`: arc back to `R`.
//!
//! `s` and `4 - s` are complex conjugates.
//!
//! Values are handled as logarithms `ln D = ln|D| + i arg D`, since `|D₊|`
//! can leave the range of `f64` for strong layers; evaluators passed to
//! [`winding_number`] return `ln D`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evans::{evaluate_modes, evans, transported_modes, EvansSystem};

type C = Complex64;

/// Smallest `|D|` accepted on the contour, relative to the larger `|D|` of
/// the neighbouring samples.
pub const NEAR_ZERO: f64 = 1e-12;
/// Largest distance of the accumulated phase from an integer multiple of 2π.
pub const INTEGER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius: f64,
    /// Samples on the first-quadrant arc, both ends included.
    pub n_arc: usize,
    /// Samples on the segment `Re λ = δ` above the real axis, excluding its
    /// top (shared with the arc) and including `δ`.
    pub n_imag: usize,
    pub origin_offset: f64,
    /// Phase increments at or above this are bisected.
    pub max_phase: f64,
    pub max_depth: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            radius: crate::gas::BASE_RADIUS,
            n_arc: 40,
            n_imag: 30,
            origin_offset: 1e-4,
            max_phase: PI / 2.0,
            max_depth: 12,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.origin_offset >= 0.0 && self.origin_offset < self.radius) {
            return Err(Error::domain(format!(
                "contour needs 0 <= origin_offset < radius (got {} and {})",
                self.origin_offset, self.radius
            )));
        }
        if self.n_arc < 2 || self.n_imag < 2 {
            return Err(Error::domain("contour needs n_arc >= 2 and n_imag >= 2"));
        }
        if !(self.max_phase > 0.0 && self.max_phase <= PI) {
            return Err(Error::domain("max_phase must lie in (0, pi]"));
        }
        Ok(())
    }

    fn top(&self) -> f64 {
        (self.radius * self.radius - self.origin_offset * self.origin_offset).sqrt()
    }

    /// Point with parameter `s`, taken modulo 4.
    pub fn point(&self, s: f64) -> C {
        let s = s.rem_euclid(4.0);
        if s > 2.0 {
            return self.point(4.0 - s).conj();
        }
        let (r, delta, t) = (self.radius, self.origin_offset, self.top());
        if s < 1.0 {
            C::from_polar(r, s * t.atan2(delta))
        } else {
            C::new(delta, t * (2.0 - s))
        }
    }

    /// Parameters of the first-quadrant samples, from `R` to `δ`.
    pub fn first_quadrant_params(&self) -> Vec<f64> {
        let arc = (0..self.n_arc).map(|k| k as f64 / (self.n_arc - 1) as f64);
        let line = (1..=self.n_imag).map(|k| 1.0 + k as f64 / self.n_imag as f64);
        arc.chain(line).collect()
    }

    /// Parameters of the whole closed contour: the first quadrant followed by
    /// the reflections of its interior points. The real-axis points are not
    /// repeated.
    pub fn full_params(&self) -> Vec<f64> {
        let q1 = self.first_quadrant_params();
        let n = q1.len();
        let mut out = q1.clone();
        out.extend(q1[1..n - 1].iter().rev().map(|s| 4.0 - s));
        out
    }
}

/// First-quadrant samples of the contour.
pub fn first_quadrant(spec: &ContourSpec) -> Vec<C> {
    spec.first_quadrant_params().iter().map(|&s| spec.point(s)).collect()
}

/// The whole closed contour, in order; the last point connects back to the
/// first.
pub fn build_contour(spec: &ContourSpec) -> Vec<C> {
    let q1 = first_quadrant(spec);
    let n = q1.len();
    let mut out = q1.clone();
    out.extend(q1[1..n - 1].iter().rev().map(|l| l.conj()));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSample {
    pub s: f64,
    pub lambda: C,
    /// `ln D(λ)`.
    pub log_value: C,
}

impl ContourSample {
    /// `D(λ)`, which may underflow to 0.
    pub fn value(&self) -> C {
        self.log_value.exp()
    }
}

/// Extends values on the first-quadrant samples (from `R` to `δ`) to the
/// closed contour by `D(λ̄) = conj D(λ)`.
pub fn conjugate_extend(first_quadrant: &[ContourSample]) -> Vec<ContourSample> {
    let n = first_quadrant.len();
    let mut out = first_quadrant.to_vec();
    if n > 2 {
        out.extend(first_quadrant[1..n - 1].iter().rev().map(|p| ContourSample {
            s: 4.0 - p.s,
            lambda: p.lambda.conj(),
            log_value: p.log_value.conj(),
        }));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourResult {
    /// Closed, ordered samples after refinement.
    pub samples: Vec<ContourSample>,
    /// `arg(D[k+1]/D[k])` in `(-π, π]`; the last entry closes the loop.
    pub phase_increments: Vec<f64>,
    pub winding: i64,
    pub refinements_used: usize,
    /// Smallest `|D|`; 0 if it underflows, see `min_ln_abs_d`.
    pub min_abs_d: f64,
    pub min_ln_abs_d: f64,
}

/// Principal value of `arg(b / a)` from the logarithms.
fn increment(a: C, b: C) -> f64 {
    C::from_polar(1.0, b.im - a.im).arg()
}

fn check_modulus(p: &ContourSample, ln_scale: f64) -> Result<()> {
    let l = p.log_value.re;
    if !(l >= NEAR_ZERO.ln() + ln_scale) {
        return Err(Error::NearZero {
            lambda: p.lambda,
            modulus: l.exp(),
        });
    }
    Ok(())
}

/// Winding number of the values on a closed, ordered sample list, bisecting
/// in `s` wherever a phase increment reaches `spec.max_phase`. New points are
/// evaluated in parallel, one refinement round at a time.
pub fn winding_number<F>(spec: &ContourSpec, samples: Vec<ContourSample>, eval: F) -> Result<ContourResult>
where
    F: Fn(C) -> Result<C> + Sync,
{
    if samples.len() < 2 {
        return Err(Error::domain("a closed contour needs at least two samples"));
    }
    let n0 = samples.len();
    (0..n0).try_for_each(|k| {
        let prev = samples[(k + n0 - 1) % n0].log_value.re;
        let next = samples[(k + 1) % n0].log_value.re;
        check_modulus(&samples[k], prev.max(next))
    })?;
    // depth of the segment starting at each sample
    let mut points: Vec<(ContourSample, usize)> = samples.into_iter().map(|p| (p, 0)).collect();
    let mut refinements = 0;
    loop {
        let n = points.len();
        let split: Vec<usize> = (0..n)
            .filter(|&k| {
                let (a, depth) = points[k];
                let b = points[(k + 1) % n].0;
                depth < spec.max_depth && increment(a.log_value, b.log_value).abs() >= spec.max_phase
            })
            .collect();
        if split.is_empty() {
            break;
        }
        let mids = split
            .par_iter()
            .map(|&k| {
                let (pa, pb) = (points[k].0, points[(k + 1) % n].0);
                let a = pa.s;
                let mut b = pb.s;
                if b <= a {
                    b += 4.0;
                }
                let s = (0.5 * (a + b)).rem_euclid(4.0);
                let lambda = spec.point(s);
                let p = ContourSample {
                    s,
                    lambda,
                    log_value: eval(lambda)?,
                };
                check_modulus(&p, pa.log_value.re.max(pb.log_value.re))?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        refinements += mids.len();
        let mut next = Vec::with_capacity(n + mids.len());
        let mut m = split.iter().zip(mids).peekable();
        for (k, &(p, depth)) in points.iter().enumerate() {
            match m.peek() {
                Some((&j, _)) if j == k => {
                    let (_, mid) = m.next().unwrap();
                    next.push((p, depth + 1));
                    next.push((mid, depth + 1));
                }
                _ => next.push((p, depth)),
            }
        }
        points = next;
    }
    let n = points.len();
    let increments: Vec<f64> = (0..n)
        .map(|k| increment(points[k].0.log_value, points[(k + 1) % n].0.log_value))
        .collect();
    if let Some(k) = (0..n).find(|&k| increments[k].abs() >= PI * (1.0 - 1e-12)) {
        return Err(Error::UnresolvedPhase {
            lambda: points[k].0.lambda,
            increment: increments[k],
            depth: points[k].1,
        });
    }
    let total: f64 = increments.iter().sum::<f64>() / (2.0 * PI);
    let winding = total.round();
    if (total - winding).abs() > INTEGER_TOL {
        return Err(Error::domain(format!("accumulated phase {total} is not an integer winding")));
    }
    let min_ln_abs_d = points.iter().map(|p| p.0.log_value.re).fold(f64::INFINITY, f64::min);
    Ok(ContourResult {
        samples: points.into_iter().map(|p| p.0).collect(),
        phase_increments: increments,
        winding: winding as i64,
        refinements_used: refinements,
        min_abs_d: min_ln_abs_d.exp(),
        min_ln_abs_d,
    })
}

/// Winding number of an arbitrary evaluator on the full contour, every
/// sample evaluated directly.
pub fn contour_winding<F>(spec: &ContourSpec, eval: F) -> Result<ContourResult>
where
    F: Fn(C) -> Result<C> + Sync,
{
    spec.validate()?;
    let samples = spec
        .full_params()
        .par_iter()
        .map(|&s| {
            let lambda = spec.point(s);
            Ok(ContourSample {
                s,
                lambda,
                log_value: eval(lambda)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    winding_number(spec, samples, eval)
}

/// Evans function on the first quadrant: eigenvectors transported once along
/// the samples, then the integrations run in parallel.
pub fn evans_first_quadrant(system: &EvansSystem, spec: &ContourSpec) -> Result<Vec<ContourSample>> {
    spec.validate()?;
    let params = spec.first_quadrant_params();
    let lambdas: Vec<C> = params.iter().map(|&s| spec.point(s)).collect();
    let modes = transported_modes(system, &lambdas)?;
    modes
        .par_iter()
        .zip(params)
        .map(|(m, s)| {
            Ok(ContourSample {
                s,
                lambda: m.lambda,
                log_value: evaluate_modes(system, m)?.log_value,
            })
        })
        .collect()
}

/// Winding number of `D₊` around the contour: first-quadrant evaluation,
/// conjugate extension, and refinement with standalone evaluations.
pub fn evans_contour(system: &EvansSystem, spec: &ContourSpec) -> Result<ContourResult> {
    let q1 = evans_first_quadrant(system, spec)?;
    winding_number(spec, conjugate_extend(&q1), |l| evans(l, system).map(|e| e.log_value))
}
