//! End-state spectra, consistent splitting and the dominant 2-form modes.

use nalgebra::{Matrix4, Matrix6, Schur, Vector6};
use num_complex::Complex64;

use super::kato::{normalize_real_positive, spectral_data};
use super::lift::BASIS;
use super::system::{End, EvansSystem};
use crate::error::{Error, Result};

type C = Complex64;

/// Smallest admissible distance between the tracked eigenvalue of the
/// lifted end matrix and the rest of its spectrum.
pub const MIN_GAP: f64 = 1e-8;

/// Eigenvalues of a 4×4 complex matrix from its complex Schur form, sorted by
/// decreasing real part.
pub fn eigenvalues4(a: &Matrix4<C>) -> Result<[C; 4]> {
    let ev = Schur::try_new(*a, f64::EPSILON, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::domain("Schur iteration failed on an end-state matrix"))?;
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    Ok(out)
}

/// Which simple mode of a lifted end matrix is followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Track {
    /// Largest-real-part eigenvalue of `A⁽²⁾₋`: the unstable 2-form at `-∞`.
    MinusUnstable,
    /// Largest-real-part eigenvalue of `(A⁽²⁾₊)ᵀ`. The eigenvector is the
    /// dual of the stable 2-form: `r̃ · α` is proportional to `α ∧ r₃₄`.
    PlusAdjoint,
    /// Smallest-real-part eigenvalue of `A⁽²⁾₊`: the stable 2-form at `+∞`.
    PlusStable,
}

impl Track {
    fn end(self) -> End {
        match self {
            Track::MinusUnstable => End::Minus,
            Track::PlusAdjoint | Track::PlusStable => End::Plus,
        }
    }
}

/// Pair sums `μᵢ + μⱼ` in basis order.
fn pair_sums(ev: &[C; 4]) -> [C; 6] {
    BASIS.map(|(i, j)| ev[i] + ev[j])
}

/// Tracked eigenvalue of the selected mode with its distance to the other
/// five pair sums.
pub fn tracked_eigenvalue(system: &EvansSystem, track: Track, lambda: C) -> Result<(C, f64)> {
    let ev = eigenvalues4(&system.end_matrix(track.end(), lambda))?;
    let sums = pair_sums(&ev);
    // sorted eigenvalues: (0,1) is the top pair, (2,3) the bottom pair
    let k = match track {
        Track::MinusUnstable | Track::PlusAdjoint => 0,
        Track::PlusStable => 5,
    };
    let mu = sums[k];
    let gap = sums
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, s)| (s - mu).norm())
        .fold(f64::INFINITY, f64::min);
    Ok((mu, gap))
}

/// Matrix whose eigenvector is transported for `track`, with its tracked
/// eigenvalue. Fails when the eigenvalue is not simple.
pub fn tracked_family(system: &EvansSystem, track: Track, lambda: C) -> Result<(Matrix6<C>, C)> {
    let (mu, gap) = tracked_eigenvalue(system, track, lambda)?;
    if gap < MIN_GAP {
        return Err(Error::Degenerate { lambda, gap });
    }
    let m = system.end_lifted(track.end(), lambda);
    Ok(match track {
        Track::PlusAdjoint => (m.transpose(), mu),
        _ => (m, mu),
    })
}

pub fn tracked_derivative(system: &EvansSystem, track: Track) -> Matrix6<C> {
    let d = system.end_lifted_derivative(track.end());
    match track {
        Track::PlusAdjoint => d.transpose(),
        _ => d,
    }
}

/// Counts `(unstable at -∞, stable at +∞)` and fails unless both are 2.
pub fn check_splitting(system: &EvansSystem, lambda: C) -> Result<([C; 4], [C; 4])> {
    let minus = eigenvalues4(&system.end_matrix(End::Minus, lambda))?;
    let plus = eigenvalues4(&system.end_matrix(End::Plus, lambda))?;
    let unstable_minus = minus.iter().filter(|m| m.re > 0.0).count();
    let stable_plus = plus.iter().filter(|m| m.re < 0.0).count();
    if unstable_minus != 2 || stable_plus != 2 {
        return Err(Error::Splitting {
            lambda,
            unstable_minus,
            stable_plus,
        });
    }
    Ok((minus, plus))
}

/// Growth rates and initial vectors of the two rescaled integrations.
#[derive(Debug, Clone)]
pub struct DominantModes {
    /// Largest-real-part eigenvalue of `A⁽²⁾₋`.
    pub mu_minus: C,
    pub r_minus: Vector6<C>,
    /// Eigenvalue of `-(A⁽²⁾₊)ᵀ` followed by the adjoint integration from
    /// `+∞`; it is the fastest growing mode as `x` decreases.
    pub mu_tilde_plus: C,
    pub r_tilde_plus: Vector6<C>,
    pub gap_minus: f64,
    pub gap_plus: f64,
}

/// Dominant modes at `λ` with eigenvectors normalized to unit length and a
/// real positive largest component. The normalization is not analytic in
/// `λ`; Evans evaluations use [`super::transported_modes`] instead.
pub fn dominant_modes(lambda: C, system: &EvansSystem) -> Result<DominantModes> {
    check_splitting(system, lambda)?;
    let (m_minus, mu_minus) = tracked_family(system, Track::MinusUnstable, lambda)?;
    let (m_plus, mu_plus) = tracked_family(system, Track::PlusAdjoint, lambda)?;
    let (_, gap_minus) = tracked_eigenvalue(system, Track::MinusUnstable, lambda)?;
    let (_, gap_plus) = tracked_eigenvalue(system, Track::PlusAdjoint, lambda)?;
    let r_minus = normalize_real_positive(&spectral_data(&m_minus, mu_minus)?.right);
    let r_tilde_plus = normalize_real_positive(&spectral_data(&m_plus, mu_plus)?.right);
    Ok(DominantModes {
        mu_minus,
        r_minus,
        mu_tilde_plus: -mu_plus,
        r_tilde_plus,
        gap_minus,
        gap_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evans::lift::wedge;
    use crate::gas::GasParams;
    use crate::profile::ProfileSolution;

    fn constant_system() -> EvansSystem {
        let p = GasParams::new(1.4, 0.25, 0.45).unwrap();
        EvansSystem::new(ProfileSolution::constant_state(p, -10.0, 10.0, 11))
    }

    #[test]
    fn mu_minus_is_sum_of_two_unstable_roots() {
        let sys = constant_system();
        let lam = C::new(1.5, 2.0);
        let ev = eigenvalues4(&sys.end_matrix(End::Minus, lam)).unwrap();
        // roots of det(A - μ) = 0 via the characteristic polynomial
        let a = sys.end_matrix(End::Minus, lam);
        for mu in ev {
            let det = (a - Matrix4::identity() * mu).determinant();
            assert!(det.norm() < 1e-9, "{det}");
        }
        let m = dominant_modes(lam, &sys).unwrap();
        assert!((m.mu_minus - (ev[0] + ev[1])).norm() < 1e-12);
        let lifted = sys.end_lifted(End::Minus, lam);
        assert!((lifted * m.r_minus - m.r_minus * m.mu_minus).norm() < 1e-9);
        let adj = -sys.end_lifted(End::Plus, lam).transpose();
        assert!((adj * m.r_tilde_plus - m.r_tilde_plus * m.mu_tilde_plus).norm() < 1e-9);
    }

    #[test]
    fn splitting_on_the_right_half_plane() {
        let sys = constant_system();
        for lam in [C::new(1e-4, 0.0), C::new(12.0, 0.0), C::new(0.0, 12.0), C::new(3.0, -7.0)] {
            check_splitting(&sys, lam).unwrap();
        }
    }

    #[test]
    fn simple_dominant_modes_at_twelve_i() {
        let sys = constant_system();
        let m = dominant_modes(C::new(0.0, 12.0), &sys).unwrap();
        assert!(m.gap_minus >= MIN_GAP && m.gap_plus >= MIN_GAP);
    }

    #[test]
    fn adjoint_vector_is_dual_of_stable_form() {
        // r̃ pairs to zero with every eigen-2-form of A⁽²⁾₊ except the
        // unstable one, exactly like wedging with the stable form
        let sys = constant_system();
        let lam = C::new(0.8, -0.3);
        let m = dominant_modes(lam, &sys).unwrap();
        let (stable_mu, _) = tracked_eigenvalue(&sys, Track::PlusStable, lam).unwrap();
        let lifted = sys.end_lifted(End::Plus, lam);
        let r_stable = spectral_data(&lifted, stable_mu).unwrap().right;
        let ev = eigenvalues4(&sys.end_matrix(End::Plus, lam)).unwrap();
        let mut ratios = Vec::new();
        for (k, mu) in pair_sums(&ev).iter().enumerate() {
            let r = spectral_data(&lifted, *mu).unwrap().right;
            let pairing = m.r_tilde_plus.dot(&r);
            let w = wedge(&r, &r_stable);
            if k == 0 {
                assert!(pairing.norm() > 1e-3 && w.norm() > 1e-3);
                ratios.push(pairing / w);
            } else {
                assert!(pairing.norm() < 1e-8 && w.norm() < 1e-8);
            }
        }
        // proportionality on generic 2-forms
        for s in [0.3, -1.7] {
            let a = Vector6::from_fn(|i, _| C::new(s + i as f64, 0.5 * i as f64 - s));
            ratios.push(m.r_tilde_plus.dot(&a) / wedge(&a, &r_stable));
        }
        for r in &ratios[1..] {
            assert!((r - ratios[0]).norm() < 1e-8 * ratios[0].norm());
        }
    }
}
