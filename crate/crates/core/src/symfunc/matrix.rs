use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{arg_err, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

/// Dense symmetric real matrix of dimension `1..=MAX_DIM`, stored inline.
///
/// Every constructor symmetrizes, so `get(i, j) == get(j, i)` holds exactly.
#[derive(Clone, Copy, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: [f64; MAX_DIM * MAX_DIM],
}

impl SymMatrix {
    fn check_dim(n: usize) -> Result<()> {
        if n == 0 || n > MAX_DIM {
            return arg_err(format!("matrix dimension {n} outside 1..={MAX_DIM}"));
        }
        Ok(())
    }

    /// # Panics
    /// If `n` is outside `1..=MAX_DIM`.
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "matrix dimension {n} outside 1..={MAX_DIM}");
        SymMatrix { n, a: [0.0; MAX_DIM * MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            s.a[i * MAX_DIM + i] = 1.0;
        }
        s
    }

    /// Builds `(f(i,j) + f(j,i)) / 2`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = if i == j { f(i, i) } else { 0.5 * (f(i, j) + f(j, i)) };
                s.a[i * MAX_DIM + j] = v;
                s.a[j * MAX_DIM + i] = v;
            }
        }
        s
    }

    /// Square rows, symmetrized.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        Self::check_dim(n)?;
        if rows.iter().any(|r| r.len() != n) {
            return arg_err("matrix rows must all have length equal to the row count");
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return arg_err("matrix entries must be finite");
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::check_dim(d.len())?;
        let mut s = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            s.a[i * MAX_DIM + i] = v;
        }
        Ok(s)
    }

    pub(crate) fn from_general(n: usize, m: &[f64]) -> Self {
        Self::from_fn(n, |i, j| m[i * n + j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        self.a[i * MAX_DIM + j]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n, "index out of range");
        self.a[i * MAX_DIM + j] = v;
        self.a[j * MAX_DIM + i] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = *self;
        out.a.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// # Panics
    /// On dimension mismatch.
    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = *self;
        out.a.iter_mut().zip(other.a.iter()).for_each(|(x, y)| *x += y);
        out
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Product with another matrix that commutes with `self` (for instance a
    /// power of it), so the result is symmetric.
    pub(crate) fn mul_sym(&self, other: &SymMatrix) -> Self {
        let n = self.n;
        Self::from_general(n, &self.mul_general(other))
    }

    /// Row-major `n x n` product `self * other`.
    pub(crate) fn mul_general(&self, other: &SymMatrix) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Quadratic form `x^T S y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self.get(i, j) * y[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Submatrix with row and column `i` removed.
    ///
    /// # Panics
    /// If `n == 1` or `i >= n`.
    pub fn delete(&self, i: usize) -> Self {
        assert!(self.n > 1 && i < self.n);
        let idx: Vec<usize> = (0..self.n).filter(|&k| k != i).collect();
        Self::from_fn(self.n - 1, |a, b| self.get(idx[a], idx[b]))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.a[0]];
        }
        let m = DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix").field("n", &self.n).field("rows", &self.to_rows()).finish()
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_symmetrizes() {
        let s = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![4.0, 5.0]]).unwrap();
        assert_eq!(s.get(0, 1), 3.0);
        assert_eq!(s.get(1, 0), 3.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SymMatrix::from_rows(&[]).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymMatrix::from_diagonal(&[1.0; 9]).is_err());
        assert!(SymMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn delete_and_eigenvalues() {
        let s = SymMatrix::from_diagonal(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.eigenvalues(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.delete(1), SymMatrix::from_diagonal(&[3.0, 2.0]).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, -2.0]]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, "[[1.0,0.5],[0.5,-2.0]]");
        assert_eq!(serde_json::from_str::<SymMatrix>(&text).unwrap(), s);
    }
}
