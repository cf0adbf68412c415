//! Banded LU factorization with partial pivoting, used for the Newton
//! linearizations (tridiagonal in 1-D, block-banded on polar grids).

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` keeps columns `i - kl ..= i + kl + ku`; the extra `kl` columns hold
/// fill-in produced by row interchanges.
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
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        // column j sits at position j - (i - kl) of row i
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            return 0.0;
        }
        self.data[self.offset(i, j)]
    }

    /// `y = A x` (before factorization).
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Factorizes in place and solves `A x = b`.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        let span = self.kl + self.ku;
        let mut scale = 0.0f64;
        for v in &self.data {
            scale = scale.max(v.abs());
        }
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + span).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= f64::EPSILON * scale * 1e-3 || best == 0.0 {
                return Err(Error::Domain(format!("singular banded system at pivot {k}")));
            }
            if piv != k {
                for j in k..=last_col {
                    let (a, b) = (self.offset(k, j), self.offset(piv, j));
                    self.data.swap(a, b);
                }
                x.swap(k, piv);
            }
            let pivot = self.data[self.offset(k, k)];
            for i in k + 1..=last_row {
                let oi = self.offset(i, k);
                let factor = self.data[oi] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[oi] = 0.0;
                let ok = self.offset(k, k);
                let len = last_col - k;
                // row k ends before row i starts its column k (kl >= 1 here)
                let (head, tail) = self.data.split_at_mut(oi);
                for (t, u) in tail[1..=len].iter_mut().zip(&head[ok + 1..=ok + len]) {
                    *t -= factor * u;
                }
                x[i] -= factor * x[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + span).min(n - 1);
            let ok = self.offset(k, k);
            let mut acc = x[k];
            for d in 1..=(last_col - k) {
                acc -= self.data[ok + d] * x[k + d];
            }
            x[k] = acc / self.data[ok];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn pivots_on_zero_diagonal() {
        // [[0, 1, 0], [1, 0, 1], [0, 1, 2]] needs a row swap
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 2, 1.0);
        a.add(2, 1, 1.0);
        a.add(2, 2, 2.0);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn wide_band_nonsymmetric() {
        let n = 40;
        let (kl, ku) = (5, 3);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = ((i * 31 + j * 17) % 11) as f64 - 5.0;
                a.add(i, j, v + if i == j { 0.5 } else { 0.0 });
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let b = a.mul_vec(&x_true);
        let x = a.clone().solve(&b).unwrap();
        let r = a.mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn singular_detected() {
        let a = BandMatrix::zeros(3, 1, 1);
        assert!(a.solve(&[1.0, 1.0, 1.0]).is_err());
    }
}
