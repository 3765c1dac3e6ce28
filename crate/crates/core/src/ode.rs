//! Dormand–Prince 5(4) integrator with embedded error control, generic over
//! real and complex fixed-size state vectors.

use nalgebra::{ComplexField, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerances {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn halved(self) -> Self {
        Self::new(0.5 * self.abs, 0.5 * self.rel)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new(1e-6, 1e-8)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::Add for OdeStats {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            steps: self.steps + o.steps,
            rejected: self.rejected + o.rejected,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Solution<T: ComplexField, const N: usize> {
    pub x: f64,
    pub y: SVector<T, N>,
    pub stats: OdeStats,
    pub stopped: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

fn scale<T: ComplexField<RealField = f64>, const N: usize>(
    v: &SVector<T, N>,
    s: f64,
) -> SVector<T, N> {
    v.map(|c| c.scale(s))
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// `observer` is called after every accepted step with `(x, y, y')` and may
/// stop the integration early.
pub fn dopri5<T, const N: usize, F, O>(
    f: F,
    x0: f64,
    y0: SVector<T, N>,
    x1: f64,
    tol: Tolerances,
    observer: O,
) -> Result<Solution<T, N>>
where
    T: ComplexField<RealField = f64> + Copy,
    F: FnMut(f64, &SVector<T, N>) -> SVector<T, N>,
    O: FnMut(f64, &SVector<T, N>, &SVector<T, N>) -> Control,
{
    dopri5_capped(f, x0, y0, x1, tol, f64::INFINITY, observer)
}

/// As [`dopri5`], with step lengths never exceeding `max_step`.
pub fn dopri5_capped<T, const N: usize, F, O>(
    mut f: F,
    x0: f64,
    y0: SVector<T, N>,
    x1: f64,
    tol: Tolerances,
    max_step: f64,
    mut observer: O,
) -> Result<Solution<T, N>>
where
    T: ComplexField<RealField = f64> + Copy,
    F: FnMut(f64, &SVector<T, N>) -> SVector<T, N>,
    O: FnMut(f64, &SVector<T, N>, &SVector<T, N>) -> Control,
{
    let mut stats = OdeStats::default();
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(Solution {
            x: x0,
            y: y0,
            stats,
            stopped: false,
        });
    }
    let dir = span.signum();
    let err_norm = |e: &SVector<T, N>, y: &SVector<T, N>, yn: &SVector<T, N>| -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..N {
            let sc = tol.abs.max(tol.rel * y[i].modulus().max(yn[i].modulus()));
            m = m.max(e[i].modulus() / sc);
        }
        m
    };

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    stats.evaluations += 1;

    // Hairer's starting-step heuristic
    let mut h = {
        let d0 = y.iter().map(|c| c.modulus()).fold(0.0, f64::max);
        let d1 = k1.iter().map(|c| c.modulus()).fold(0.0, f64::max);
        let sc = tol.abs.max(tol.rel * d0);
        let h0 = if d1 <= 1e-300 { 1e-6 } else { 0.01 * sc.max(d0) / d1 };
        h0.min(span.abs()).min(max_step).max(1e-12)
    };

    loop {
        if stats.steps + stats.rejected > MAX_STEPS {
            return Err(Error::Integration {
                x,
                reason: "step budget exhausted".into(),
            });
        }
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;
        let k2 = f(x + C2 * hs, &(y + scale(&k1, hs * A21)));
        let k3 = f(x + C3 * hs, &(y + scale(&k1, hs * A31) + scale(&k2, hs * A32)));
        let k4 = f(
            x + C4 * hs,
            &(y + scale(&k1, hs * A41) + scale(&k2, hs * A42) + scale(&k3, hs * A43)),
        );
        let k5 = f(
            x + C5 * hs,
            &(y + scale(&k1, hs * A51)
                + scale(&k2, hs * A52)
                + scale(&k3, hs * A53)
                + scale(&k4, hs * A54)),
        );
        let k6 = f(
            x + hs,
            &(y + scale(&k1, hs * A61)
                + scale(&k2, hs * A62)
                + scale(&k3, hs * A63)
                + scale(&k4, hs * A64)
                + scale(&k5, hs * A65)),
        );
        let y_new = y
            + scale(&k1, hs * B1)
            + scale(&k3, hs * B3)
            + scale(&k4, hs * B4)
            + scale(&k5, hs * B5)
            + scale(&k6, hs * B6);
        let x_new = if last { x1 } else { x + hs };
        let k7 = f(x_new, &y_new);
        stats.evaluations += 6;

        let e = scale(&k1, hs * E1)
            + scale(&k3, hs * E3)
            + scale(&k4, hs * E4)
            + scale(&k5, hs * E5)
            + scale(&k6, hs * E6)
            + scale(&k7, hs * E7);
        let err = err_norm(&e, &y, &y_new);
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            if h < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::Integration {
                    x,
                    reason: "non-finite state".into(),
                });
            }
            continue;
        }
        if err <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            stats.steps += 1;
            if observer(x, &y, &k1) == Control::Stop {
                return Ok(Solution {
                    x,
                    y,
                    stats,
                    stopped: true,
                });
            }
            if last {
                return Ok(Solution {
                    x,
                    y,
                    stats,
                    stopped: false,
                });
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::Integration {
                    x,
                    reason: "step size underflow".into(),
                });
            }
        }
    }
}
