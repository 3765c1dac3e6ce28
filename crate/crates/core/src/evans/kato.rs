//! Analytic continuation of a simple eigenvector along a path in `λ` by
//! integrating Kato's transport equation `r' = -S(λ) M'(λ) r`, where `S` is
//! the reduced resolvent of the tracked eigenvalue.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Projector data of a simple eigenvalue.
#[derive(Debug, Clone)]
pub struct Spectral<const N: usize> {
    pub mu: C,
    pub right: SVector<C, N>,
    pub left: SVector<C, N>,
    /// `P = r lᵀ / (lᵀ r)`.
    pub projector: SMatrix<C, N, N>,
    /// `S = (M - μ + P)⁻¹ (I - P)`.
    pub reduced_resolvent: SMatrix<C, N, N>,
}

/// Dense LU factorization with partial pivoting for small complex matrices.
struct Lu<const N: usize> {
    lu: SMatrix<C, N, N>,
    perm: [usize; N],
}

impl<const N: usize> Lu<N> {
    fn new(m: &SMatrix<C, N, N>) -> Option<Self> {
        let mut lu = *m;
        let mut perm = [0; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        for k in 0..N {
            let p = (k..N).max_by(|&a, &b| lu[(a, k)].norm().total_cmp(&lu[(b, k)].norm()))?;
            let pivot = lu[(p, k)];
            if pivot.norm() == 0.0 || !pivot.norm().is_finite() {
                return None;
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            for i in k + 1..N {
                let f = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = f;
                for j in k + 1..N {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Some(Self { lu, perm })
    }

    fn solve_vec(&self, b: &SVector<C, N>) -> SVector<C, N> {
        let mut x = SVector::<C, N>::from_fn(|i, _| b[self.perm[i]]);
        for i in 0..N {
            for j in 0..i {
                let t = self.lu[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..N).rev() {
            for j in i + 1..N {
                let t = self.lu[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    fn solve(&self, b: &SMatrix<C, N, N>) -> SMatrix<C, N, N> {
        let mut out = SMatrix::<C, N, N>::zeros();
        for j in 0..N {
            out.set_column(j, &self.solve_vec(&b.column(j).into_owned()));
        }
        out
    }
}

fn seed<const N: usize>() -> SVector<C, N> {
    SVector::from_fn(|i, _| C::new(1.0 + 0.37 * i as f64 + 0.11 * (i as f64 + 1.0).sqrt(), 0.0))
}

/// Eigenvector of `m` for the (approximate) eigenvalue `mu` by shifted
/// inverse iteration.
pub fn inverse_iteration<const N: usize>(m: &SMatrix<C, N, N>, mu: C) -> Result<SVector<C, N>> {
    let scale = 1.0 + mu.norm() + m.norm();
    let mut eta = 1e-13 * scale;
    for _ in 0..6 {
        let shifted = m - SMatrix::<C, N, N>::identity() * (mu + C::new(eta, 0.0));
        let Some(lu) = Lu::new(&shifted) else {
            eta *= 1e3;
            continue;
        };
        let mut x = seed::<N>();
        let mut ok = true;
        for _ in 0..3 {
            match Some(lu.solve_vec(&x)) {
                Some(y) if y.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => {
                    let n = y.norm();
                    if n == 0.0 {
                        ok = false;
                        break;
                    }
                    x = y / C::new(n, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(x);
        }
        eta *= 1e3;
    }
    Err(Error::Degenerate { lambda: mu, gap: 0.0 })
}

/// Scales `v` to unit norm with its largest-modulus component real and
/// positive.
pub fn normalize_real_positive<const N: usize>(v: &SVector<C, N>) -> SVector<C, N> {
    let k = (0..N).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).unwrap_or(0);
    let phase = v[k] / C::new(v[k].norm(), 0.0);
    let out = v / phase;
    out / C::new(out.norm(), 0.0)
}

pub fn spectral_data<const N: usize>(m: &SMatrix<C, N, N>, mu: C) -> Result<Spectral<N>> {
    let right = inverse_iteration(m, mu)?;
    let left = inverse_iteration(&m.transpose(), mu)?;
    let pairing = left.dot(&right);
    if pairing.norm() < 1e-14 {
        return Err(Error::Degenerate { lambda: mu, gap: pairing.norm() });
    }
    let projector = (right * left.transpose()) / pairing;
    let id = SMatrix::<C, N, N>::identity();
    let shifted = m - id * mu + projector;
    let reduced_resolvent = Lu::new(&shifted)
        .ok_or(Error::Degenerate { lambda: mu, gap: 0.0 })?
        .solve(&(id - projector));
    Ok(Spectral {
        mu,
        right,
        left,
        projector,
        reduced_resolvent,
    })
}

/// Transports `r0` along the polygonal path through `path`, returning the
/// continued eigenvector at every vertex.
///
/// `family(λ)` returns the matrix and its tracked simple eigenvalue;
/// `derivative(λ)` returns `∂M/∂λ`. Each straight segment is integrated by
/// classical Runge–Kutta with step doubling at relative tolerance `tol`.
pub fn kato_transport<const N: usize, F, G>(
    path: &[C],
    family: F,
    derivative: G,
    r0: SVector<C, N>,
    tol: f64,
) -> Result<Vec<SVector<C, N>>>
where
    F: Fn(C) -> Result<(SMatrix<C, N, N>, C)>,
    G: Fn(C) -> SMatrix<C, N, N>,
{
    let Some(&first) = path.first() else {
        return Ok(Vec::new());
    };
    let spectral = |lam: C| -> Result<Spectral<N>> {
        let (m, mu) = family(lam)?;
        spectral_data(&m, mu)
    };
    let mut current = spectral(first)?;
    let mut r = current.projector * r0;
    let mut out = Vec::with_capacity(path.len());
    out.push(r);
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let delta = b - a;
        let rhs = |t: f64, r: &SVector<C, N>, pre: Option<&Spectral<N>>| -> Result<SVector<C, N>> {
            let owned;
            let s = match pre {
                Some(s) => s,
                None => {
                    owned = spectral(a + delta * t)?;
                    &owned
                }
            };
            Ok(-(s.reduced_resolvent * (derivative(a + delta * t) * r)) * delta)
        };
        let rk4 = |t: f64, h: f64, r: &SVector<C, N>, k1: SVector<C, N>| -> Result<SVector<C, N>> {
            let hc = C::new(h, 0.0);
            let k2 = rhs(t + 0.5 * h, &(r + k1 * (hc * 0.5)), None)?;
            let k3 = rhs(t + 0.5 * h, &(r + k2 * (hc * 0.5)), None)?;
            let k4 = rhs(t + h, &(r + k3 * hc), None)?;
            Ok(r + (k1 + (k2 + k3) * C::new(2.0, 0.0) + k4) * (hc / 6.0))
        };
        let mut t = 0.0;
        let mut h: f64 = 1.0;
        let mut steps = 0usize;
        while t < 1.0 {
            steps += 1;
            if steps > 200_000 {
                return Err(Error::Degenerate {
                    lambda: a + delta * t,
                    gap: h,
                });
            }
            h = h.min(1.0 - t);
            let k1 = rhs(t, &r, Some(&current))?;
            let full = rk4(t, h, &r, k1)?;
            let mid = rk4(t, 0.5 * h, &r, k1)?;
            let k1m = rhs(t + 0.5 * h, &mid, None)?;
            let half = rk4(t + 0.5 * h, 0.5 * h, &mid, k1m)?;
            let err = (half - full).norm() / half.norm().max(1e-300);
            if err <= tol || h < 1e-12 {
                let next = (half * C::new(16.0, 0.0) - full) / C::new(15.0, 0.0);
                t += h;
                let lam = if t >= 1.0 { b } else { a + delta * t };
                current = spectral(lam)?;
                r = current.projector * next;
                let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) };
                h *= grow;
            } else {
                h *= (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Second-order discrete transport `r_{j+1} = [I + ½ P_{j+1}(I - P_j)] P_{j+1} r_j`
/// on the vertices of `path`. Cheaper than [`kato_transport`] but only
/// accurate to second order in the vertex spacing.
pub fn kato_second_order<const N: usize, F>(
    path: &[C],
    family: F,
    r0: SVector<C, N>,
) -> Result<Vec<SVector<C, N>>>
where
    F: Fn(C) -> Result<(SMatrix<C, N, N>, C)>,
{
    let mut out = Vec::with_capacity(path.len());
    let Some(&first) = path.first() else {
        return Ok(out);
    };
    let (m, mu) = family(first)?;
    let mut p_prev = spectral_data(&m, mu)?.projector;
    let mut r = p_prev * r0;
    out.push(r);
    let id = SMatrix::<C, N, N>::identity();
    for &lam in &path[1..] {
        let (m, mu) = family(lam)?;
        let p = spectral_data(&m, mu)?.projector;
        r = (id + p * (id - p_prev) * C::new(0.5, 0.0)) * (p * r);
        out.push(r);
        p_prev = p;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn constant_family_keeps_vector() {
        let m = Matrix3::new(
            c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0),
            c(0.3, 0.0), c(0.0, 0.0), c(0.2, 0.0),
        );
        let mu = m.complex_eigenvalues_like();
        let spec = spectral_data(&m, mu).unwrap();
        let path = [c(0.0, 0.0), c(1.0, 1.0), c(2.0, -0.5)];
        let out = kato_transport(&path, |_| Ok((m, mu)), |_| Matrix3::zeros(), spec.right, 1e-12).unwrap();
        for r in &out {
            assert!((r - spec.right).norm() < 1e-12);
        }
    }

    trait TopEigen {
        fn complex_eigenvalues_like(&self) -> C;
    }

    impl TopEigen for Matrix3<C> {
        fn complex_eigenvalues_like(&self) -> C {
            let schur = nalgebra::Schur::new(*self);
            let ev = schur.eigenvalues().unwrap();
            *ev.iter().max_by(|a, b| a.re.total_cmp(&b.re)).unwrap()
        }
    }

    #[test]
    fn diagonal_family_tracks_first_axis() {
        let fam = |l: C| Ok((Matrix2::new(l, c(0.0, 0.0), c(0.0, 0.0), -l), l));
        let der = |_| Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        let path = [c(1.0, 0.0), c(1.0, 1.0), c(0.5, 2.0), c(2.0, 0.0)];
        let e1 = Vector2::new(c(1.0, 0.0), c(0.0, 0.0));
        let out = kato_transport(&path, fam, der, e1, 1e-12).unwrap();
        for r in &out {
            assert!((r - e1).norm() < 1e-12);
        }
    }

    #[test]
    fn rotating_eigenvector_matches_closed_form() {
        // M(λ) = [[0, 1], [λ, 0]] has eigenvalue √λ with eigenvector
        // (1, √λ) up to an analytic scalar; Kato's field has the form
        // c(λ)(1, √λ) with lᵀr' = 0.
        let fam = |l: C| Ok((Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), l, c(0.0, 0.0)), l.sqrt()));
        let der = |_| Matrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let path: Vec<C> = (0..=20).map(|k| c(4.0, 0.0) * C::from_polar(1.0, 0.05 * k as f64)).collect();
        let r0 = Vector2::new(c(1.0, 0.0), c(2.0, 0.0));
        let out = kato_transport(&path, fam, der, r0, 1e-12).unwrap();
        for (lam, r) in path.iter().zip(&out) {
            let s = lam.sqrt();
            // direction
            assert!((r[1] / r[0] - s).norm() < 1e-9);
            // Kato scaling for this family: r₀ ∝ λ^{-1/4}
            let expected = (lam / c(4.0, 0.0)).powf(-0.25);
            assert!((r[0] - expected).norm() < 1e-8, "{} vs {}", r[0], expected);
        }
    }

    #[test]
    fn second_order_update_converges_to_kato() {
        let fam = |l: C| Ok((Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), l, c(0.0, 0.0)), l.sqrt()));
        let der = |_| Matrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let r0 = Vector2::new(c(1.0, 0.0), c(2.0, 0.0));
        let end = c(4.0, 0.0) * C::from_polar(1.0, 1.0);
        let exact = *kato_transport(&[c(4.0, 0.0), end], fam, der, r0, 1e-12).unwrap().last().unwrap();
        let errs: Vec<f64> = [100, 200]
            .iter()
            .map(|&n| {
                let path: Vec<C> = (0..=n)
                    .map(|k| c(4.0, 0.0) * C::from_polar(1.0, k as f64 / n as f64))
                    .collect();
                (kato_second_order(&path, fam, r0).unwrap().last().unwrap() - exact).norm()
            })
            .collect();
        assert!(errs[1] < 1e-4);
        let ratio = errs[0] / errs[1];
        // at least second order in the vertex spacing
        assert!(ratio > 3.5, "{ratio}");
    }

    #[test]
    fn projector_is_idempotent() {
        let m = Matrix3::from_fn(|i, j| c((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.2));
        let mu = m.complex_eigenvalues_like();
        let s = spectral_data(&m, mu).unwrap();
        assert!((s.projector * s.projector - s.projector).norm() < 1e-10);
        assert!((m * s.right - s.right * mu).norm() < 1e-10);
        let id = Matrix3::<C>::identity();
        // S (M - μ) = I - P
        assert!((s.reduced_resolvent * (m - id * mu) - (id - s.projector)).norm() < 1e-9);
        let v = Vector3::new(c(0.0, 0.0), c(0.0, 3.0), c(0.0, 0.0));
        assert!((normalize_real_positive(&v) - Vector3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))).norm() < 1e-15);
    }
}
