//! Second exterior power `Λ²(ℂ⁴) ≅ ℂ⁶` in the lexicographic basis
//! `e₁∧e₂, e₁∧e₃, e₁∧e₄, e₂∧e₃, e₂∧e₄, e₃∧e₄`.

use nalgebra::{Matrix4, Matrix6, Vector4, Vector6};
use num_complex::Complex64;

/// Index pairs of the basis 2-forms (zero-based).
pub const BASIS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Induced action on 2-forms: `A⁽²⁾(eₖ∧eₗ) = (A eₖ)∧eₗ + eₖ∧(A eₗ)`.
pub fn lift_exterior(a: &Matrix4<Complex64>) -> Matrix6<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    Matrix6::from_fn(|r, c| {
        let (i, j) = BASIS[r];
        let (k, l) = BASIS[c];
        let mut s = zero;
        if j == l {
            s += a[(i, k)];
        }
        if i == l {
            s -= a[(j, k)];
        }
        if i == k {
            s += a[(j, l)];
        }
        if j == k {
            s -= a[(i, l)];
        }
        s
    })
}

/// Components of `u ∧ v` in the lexicographic basis.
pub fn wedge_vectors(u: &Vector4<Complex64>, v: &Vector4<Complex64>) -> Vector6<Complex64> {
    Vector6::from_fn(|r, _| {
        let (i, j) = BASIS[r];
        u[i] * v[j] - u[j] * v[i]
    })
}

/// The 4-form `α ∧ β` of two 2-forms, as the coefficient of `e₁∧e₂∧e₃∧e₄`.
pub fn wedge(alpha: &Vector6<Complex64>, beta: &Vector6<Complex64>) -> Complex64 {
    alpha[0] * beta[5] - alpha[1] * beta[4] + alpha[2] * beta[3] + alpha[3] * beta[2]
        - alpha[4] * beta[1]
        + alpha[5] * beta[0]
}
