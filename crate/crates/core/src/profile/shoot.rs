//! Independent profile construction by backward shooting from the saddle.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::bvp::continuous_residuals;
use super::{endpoint_linearization, hermite, rhs_unchecked, ProfileSolution};
use crate::error::{Error, Result};
use crate::gas::GasParams;
use crate::ode::{dopri5_capped, Control, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Distance from `(v₊, 0)` of the starting point on the stable direction.
    pub offset: f64,
    /// Integration stops once within this distance of `(v₋, 0)`.
    pub capture: f64,
    pub tolerances: Tolerances,
    pub max_step: f64,
    /// Give up after integrating over this length of `x`.
    pub max_length: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            offset: 1e-8,
            capture: 1e-6,
            tolerances: Tolerances::new(1e-14, 1e-12),
            max_step: 0.05,
            max_length: 1e5,
        }
    }
}

/// Integrates the profile ODE backward from the saddle's stable manifold
/// until the orbit reaches `(v₋, 0)`, shifts `x` so that `v̂(0)` is the
/// midpoint of the end states, and extends the right tail to `l_plus` with
/// the linearized decay.
pub fn shoot_profile_oracle(
    params: &GasParams,
    l_plus: f64,
    opts: &ShootOptions,
) -> Result<ProfileSolution> {
    let saddle = endpoint_linearization(params.v_plus, params)?;
    let mu_s = saddle.eigenvalues[1].re;
    let dir = Vector2::new(saddle.eigenvectors[1][0].re, saddle.eigenvectors[1][1].re);
    let start = Vector2::new(params.v_plus, 0.0) + dir * opts.offset;
    let target = Vector2::new(params.v_minus, 0.0);
    let (lo, hi) = (0.5 * params.v_plus, 2.0 * params.v_minus);

    let mut nodes = vec![(0.0, start)];
    let mut escaped = None;
    let captured = (start - target).norm() < opts.capture;
    if !captured {
        let sol = dopri5_capped(
            |_, y: &Vector2<f64>| Vector2::new(y[1], rhs_unchecked(params, y[0].max(1e-300), y[1])),
            0.0,
            start,
            -opts.max_length,
            opts.tolerances,
            opts.max_step,
            |x, y, _| {
                if !(y[0] >= lo && y[0] <= hi) || !y[1].is_finite() {
                    escaped = Some(*y);
                    return Control::Stop;
                }
                nodes.push((x, *y));
                if (y - target).norm() < opts.capture {
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )?;
        if let Some(y) = escaped {
            return Err(Error::OrbitEscaped { v: y[0], w: y[1] });
        }
        if !sol.stopped {
            return Err(Error::Integration {
                x: sol.x,
                reason: "orbit did not reach the left end state".into(),
            });
        }
    }
    nodes.reverse();
    let mut x: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let mut v: Vec<f64> = nodes.iter().map(|n| n.1[0]).collect();
    let mut w: Vec<f64> = nodes.iter().map(|n| n.1[1]).collect();

    let mid = 0.5 * (params.v_plus + params.v_minus);
    if let Some(x0) = last_crossing(&x, &v, &w, mid) {
        x.iter_mut().for_each(|xi| *xi -= x0);
    }

    let x_start = *x.last().expect("at least the starting node");
    if x_start < l_plus {
        let n = ((l_plus - x_start) / opts.max_step).ceil().max(1.0) as usize;
        for i in 1..=n {
            let xi = x_start + (l_plus - x_start) * i as f64 / n as f64;
            let decay = (mu_s * (xi - x_start)).exp();
            x.push(xi);
            v.push(params.v_plus + (start[0] - params.v_plus) * decay);
            w.push(start[1] * decay);
        }
    } else if let Some(k) = x.iter().position(|&xi| xi >= l_plus) {
        let keep = (k + 1).max(2);
        x.truncate(keep);
        v.truncate(keep);
        w.truncate(keep);
    }

    let residual = continuous_residuals(params, &x, &v, &w)
        .into_iter()
        .fold(0.0, f64::max);
    Ok(ProfileSolution::from_nodes(*params, x, v, w, residual))
}

/// Position of the crossing `v = level` with the largest `x`, located on the
/// cubic interpolant.
fn last_crossing(x: &[f64], v: &[f64], w: &[f64], level: f64) -> Option<f64> {
    let i = (0..x.len().saturating_sub(1))
        .rev()
        .find(|&i| (v[i] - level) * (v[i + 1] - level) <= 0.0)?;
    let h = x[i + 1] - x[i];
    let s = |t: f64| hermite(v[i], w[i], v[i + 1], w[i + 1], h, t) - level;
    let (mut a, mut b) = (0.0, 1.0);
    let fa = s(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (s(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Some(x[i] + 0.5 * (a + b) * h)
}

/// Largest `|v̂_a - v̂_b|` over the nodes of both profiles inside their common
/// domain.
pub fn sup_distance(a: &ProfileSolution, b: &ProfileSolution) -> f64 {
    let lo = a.l_minus().max(b.l_minus());
    let hi = a.l_plus().min(b.l_plus());
    a.grid
        .iter()
        .chain(&b.grid)
        .filter(|&&x| x >= lo && x <= hi)
        .map(|&x| (a.eval(x).0 - b.eval(x).0).abs())
        .fold(0.0, f64::max)
}
