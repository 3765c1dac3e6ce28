//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` by global adaptive bisection until the summed
/// error estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = kronrod(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                estimate: error,
                evaluations,
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}
