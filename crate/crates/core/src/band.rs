//! Banded LU factorization with partial pivoting, for the block-bidiagonal
//! Jacobians of the collocation solver.

/// Square matrix with `kl` sub- and `ku` super-diagonals. Storage reserves an
/// extra `kl` super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Panics if `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Factorizes in place and solves `A x = b`. Returns `None` for a
    /// numerically singular matrix.
    pub fn solve(mut self, b: &mut [f64]) -> Option<()> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let reach = ku + kl;
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 || best < f64::EPSILON * 1e-6 * scale {
                return None;
            }
            piv[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let c = self.idx(p, j);
                    self.data.swap(a, c);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let m = self.data[ik] / pivot;
                self.data[ik] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= m * kj;
                    }
                }
            }
        }
        // forward substitution with the unit lower factor
        for k in 0..n {
            if piv[k] != k {
                b.swap(k, piv[k]);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
        Some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn dense(b: &BandMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(b.dim(), b.dim(), |i, j| b.get(i, j))
    }

    #[test]
    fn tridiagonal_system() {
        let n = 6;
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
            }
        }
        let mut b = vec![1.0; n];
        m.solve(&mut b).unwrap();
        // x_i = (i+1)(n-i)/2
        for (i, x) in b.iter().enumerate() {
            let exact = ((i + 1) * (n - i)) as f64 / 2.0;
            assert!((x - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let m = BandMatrix::zeros(3, 1, 1);
        let mut b = vec![1.0; 3];
        assert!(m.solve(&mut b).is_none());
    }

    proptest! {
        #[test]
        fn matches_dense_solve(seed in proptest::collection::vec(-1.0f64..1.0, 20 * 6)) {
            let (n, kl, ku) = (20, 2, 3);
            let mut m = BandMatrix::zeros(n, kl, ku);
            let mut it = seed.iter();
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    m.set(i, j, *it.next().unwrap());
                }
            }
            let a = dense(&m);
            prop_assume!(a.clone().lu().determinant().abs() > 1e-6);
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let exact = a.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            let mut b = rhs;
            m.solve(&mut b).unwrap();
            for i in 0..n {
                prop_assert!((b[i] - exact[i]).abs() < 1e-8 * (1.0 + exact[i].abs()));
            }
        }
    }
}
