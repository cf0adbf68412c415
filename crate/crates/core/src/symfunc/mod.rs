//! Matrix-level kernel: m-traces, their gradients, deleted traces, Hessian
//! quotients and the Garding cone `K_m`.
//!
//! `T_m(S)` is the sum of the `m x m` principal minors of `S`, equivalently the
//! elementary symmetric polynomial of order `m` of the eigenvalues of `S`.

mod matrix;
pub mod sampling;

pub use matrix::{SymMatrix, MAX_DIM};

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};

/// Binomial coefficient `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Algorithm used to evaluate all m-traces of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMethod {
    /// Symmetric eigensolve followed by the elementary-symmetric recursion.
    #[default]
    Eigen,
    /// Faddeev-LeVerrier recursion on matrix powers; no eigensolve.
    FaddeevLeVerrier,
}

/// All m-traces `T_0..T_n` of one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceVector {
    pub values: Vec<f64>,
}

impl TraceVector {
    /// Trace of order `m`; zero above the matrix dimension.
    pub fn get(&self, m: usize) -> f64 {
        self.values.get(m).copied().unwrap_or(0.0)
    }

    pub fn dim(&self) -> usize {
        self.values.len() - 1
    }
}

/// Outcome of a Garding cone membership test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub m: usize,
    pub member: bool,
    /// Smallest order `p <= m` with `T_p(S)` at or below the threshold.
    pub first_failure: Option<usize>,
    /// `min_{1 <= p <= m} T_p(S)`.
    pub margin: f64,
    pub threshold: f64,
}

/// Elementary symmetric polynomials `e_0..e_n` of `lambda`.
///
/// Uses the product recursion `e_k <- e_k + x * e_{k-1}`, which only adds
/// products of inputs and avoids the cancellation of power-sum identities.
pub fn elementary_symmetric(lambda: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; lambda.len() + 1];
    e[0] = 1.0;
    for (j, &x) in lambda.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// `S_m(lambda)`, the elementary symmetric polynomial of order `m`.
pub fn m_trace_from_eigenvalues(lambda: &[f64], m: usize) -> Result<f64> {
    if lambda.is_empty() {
        return arg_err("empty eigenvalue sequence");
    }
    if m > lambda.len() {
        return arg_err(format!("order {m} exceeds length {}", lambda.len()));
    }
    Ok(elementary_symmetric(lambda)[m])
}

fn check_order(s: &SymMatrix, m: usize) -> Result<()> {
    if m > s.dim() {
        return arg_err(format!("order {m} exceeds dimension {}", s.dim()));
    }
    Ok(())
}

/// All traces `T_0(S)..T_n(S)` by the requested method.
pub fn traces_with(s: &SymMatrix, method: TraceMethod) -> TraceVector {
    let n = s.dim();
    let values = match (n, method) {
        (1, _) => vec![1.0, s.get(0, 0)],
        (2, _) => {
            let (a, b, c) = (s.get(0, 0), s.get(0, 1), s.get(1, 1));
            vec![1.0, a + c, a * c - b * b]
        }
        (_, TraceMethod::Eigen) => elementary_symmetric(&s.eigenvalues()),
        (_, TraceMethod::FaddeevLeVerrier) => faddeev_leverrier(s),
    };
    TraceVector { values }
}

/// All traces `T_0(S)..T_n(S)` by the default (eigenvalue) route.
pub fn traces(s: &SymMatrix) -> TraceVector {
    traces_with(s, TraceMethod::Eigen)
}

// Characteristic polynomial det(tI - S) = sum_k c_k t^{n-k}, c_k = (-1)^k T_k.
fn faddeev_leverrier(s: &SymMatrix) -> Vec<f64> {
    let n = s.dim();
    let mut out = vec![1.0; n + 1];
    let mut m_k = SymMatrix::zeros(n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        // M_k = S M_{k-1} + c_{k-1} I, with M_0 = 0.
        let mut next = s.mul_general(&m_k);
        for i in 0..n {
            next[i * n + i] += c_prev;
        }
        // c_k = -tr(S M_k) / k
        let mut tr = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr += s.get(i, j) * next[j * n + i];
            }
        }
        let c_k = -tr / k as f64;
        out[k] = if k % 2 == 0 { c_k } else { -c_k };
        m_k = SymMatrix::from_general(n, &next);
        c_prev = c_k;
    }
    out
}

/// `T_m(S)`, the sum of all `m`-order principal minors.
pub fn m_trace(s: &SymMatrix, m: usize) -> Result<f64> {
    check_order(s, m)?;
    if m == 0 {
        return Ok(1.0);
    }
    Ok(traces(s).get(m))
}

/// Gradient `T_m^{ij}(S) = dT_m / ds_ij`.
///
/// Evaluated through the polynomial identity
/// `T_m^{ij} = sum_{k<m} (-1)^k T_{m-1-k}(S) (S^k)_{ij}`.
pub fn m_trace_gradient(s: &SymMatrix, m: usize) -> Result<SymMatrix> {
    check_order(s, m)?;
    Ok(gradient_from_traces(s, &traces(s), m))
}

pub(crate) fn gradient_from_traces(s: &SymMatrix, t: &TraceVector, m: usize) -> SymMatrix {
    let n = s.dim();
    if m == 0 {
        return SymMatrix::zeros(n);
    }
    if n == 2 && m == 2 {
        return SymMatrix::from_fn(2, |i, j| {
            if i == j {
                s.get(1 - i, 1 - i)
            } else {
                -s.get(i, j)
            }
        });
    }
    let mut out = SymMatrix::identity(n).scaled(t.get(m - 1));
    let mut power = SymMatrix::identity(n);
    for k in 1..m {
        power = power.mul_sym(s);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&power.scaled(sign * t.get(m - 1 - k)));
    }
    out
}

/// `T_{m-1;i}(S)`: the (m-1)-trace of `S` with row and column `i` deleted.
pub fn deleted_trace(s: &SymMatrix, m: usize, i: usize) -> Result<f64> {
    if m == 0 {
        return arg_err("deleted trace needs order m >= 1");
    }
    check_order(s, m)?;
    if i >= s.dim() {
        return arg_err(format!("index {i} out of range for dimension {}", s.dim()));
    }
    if m == 1 {
        return Ok(1.0);
    }
    let sub = s.delete(i);
    Ok(traces(&sub).get(m - 1))
}

/// Strictness threshold `1e-12 * max(1, ||S||_inf)^m` for the open cone.
pub fn cone_threshold(s: &SymMatrix, m: usize) -> f64 {
    1e-12 * s.inf_norm().max(1.0).powi(m as i32)
}

/// Membership of `S` in `K_m = {T_p(S) > 0, p = 1..m}`.
pub fn cone_membership(s: &SymMatrix, m: usize) -> Result<ConeVerdict> {
    if m == 0 {
        return arg_err("cone order must be >= 1");
    }
    check_order(s, m)?;
    Ok(verdict_from_traces(&traces(s), m, cone_threshold(s, m)))
}

pub(crate) fn verdict_from_traces(t: &TraceVector, m: usize, threshold: f64) -> ConeVerdict {
    let mut margin = f64::INFINITY;
    let mut first_failure = None;
    for p in 1..=m {
        let v = t.get(p);
        margin = margin.min(v);
        if first_failure.is_none() && !(v > threshold) {
            first_failure = Some(p);
        }
    }
    ConeVerdict {
        m,
        member: first_failure.is_none(),
        first_failure,
        margin,
        threshold,
    }
}

fn check_quotient_orders(s: &SymMatrix, m: usize, l: usize) -> Result<()> {
    if l >= m {
        return arg_err(format!("quotient needs l < m (got l={l}, m={m})"));
    }
    check_order(s, m)
}

fn require_cone(s: &SymMatrix, m: usize) -> Result<TraceVector> {
    let t = traces(s);
    let v = verdict_from_traces(&t, m, cone_threshold(s, m));
    if !v.member {
        return Err(Error::Domain(format!(
            "matrix not in K_{m}: T_{} = {:e}",
            v.first_failure.unwrap_or(m),
            v.margin
        )));
    }
    Ok(t)
}

/// Hessian quotient `T_{m,l}(S) = T_m(S) / T_l(S)` on `K_m`.
pub fn quotient(s: &SymMatrix, m: usize, l: usize) -> Result<f64> {
    check_quotient_orders(s, m, l)?;
    let t = require_cone(s, m)?;
    Ok(t.get(m) / t.get(l))
}

/// Gradient of the quotient: `(T_m^{ij} T_l - T_m T_l^{ij}) / T_l^2`.
pub fn quotient_gradient(s: &SymMatrix, m: usize, l: usize) -> Result<SymMatrix> {
    check_quotient_orders(s, m, l)?;
    let t = require_cone(s, m)?;
    let (tm, tl) = (t.get(m), t.get(l));
    let gm = gradient_from_traces(s, &t, m);
    let gl = gradient_from_traces(s, &t, l);
    Ok(gm.scaled(1.0 / tl).add(&gl.scaled(-tm / (tl * tl))))
}

/// `(T_l / C(n,l))^{1/l} - (T_m / C(n,m))^{1/m}`; nonnegative on `K_m`.
pub fn maclaurin_margin(s: &SymMatrix, l: usize, m: usize) -> Result<f64> {
    if l == 0 {
        return arg_err("Maclaurin margin needs l >= 1");
    }
    check_quotient_orders(s, m, l)?;
    let t = require_cone(s, m)?;
    let n = s.dim();
    let root = |p: usize| -> Result<f64> {
        let v = t.get(p) / binomial(n, p);
        if !(v > 0.0) {
            return Err(Error::Domain(format!("T_{p} <= 0 inside root")));
        }
        Ok((v.ln() / p as f64).exp())
    };
    Ok(root(l)? - root(m)?)
}

/// `T_{m,l}(S + S0) - T_{m,l}(S)` for nonzero positive semidefinite `S0`.
pub fn monotonicity_margin(s: &SymMatrix, s0: &SymMatrix, m: usize, l: usize) -> Result<f64> {
    if s.dim() != s0.dim() {
        return arg_err("dimension mismatch between S and S0");
    }
    let norm = s0.inf_norm();
    if norm == 0.0 {
        return arg_err("S0 must be nonzero");
    }
    let min_eig = s0.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-12 * norm.max(1.0) {
        return arg_err(format!("S0 is not positive semidefinite (min eigenvalue {min_eig:e})"));
    }
    let base = quotient(s, m, l)?;
    let shifted = quotient(&s.add(s0), m, l)?;
    Ok(shifted - base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SymMatrix {
        SymMatrix::from_diagonal(d).unwrap()
    }

    // brute-force sum of principal minors by cofactor expansion
    fn det(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        if n == 0 {
            return 1.0;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][j] * det(&minor)
            })
            .sum()
    }

    fn minor_sum(s: &SymMatrix, m: usize) -> f64 {
        let n = s.dim();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| s.get(i, j)).collect()).collect();
            total += det(&sub);
        }
        total
    }

    #[test]
    fn trace_examples() {
        let s = diag(&[1.0, 2.0, 3.0]);
        assert_eq!(m_trace(&s, 0).unwrap(), 1.0);
        assert!((m_trace(&SymMatrix::identity(4), 2).unwrap() - 6.0).abs() < 1e-12);
        assert!((m_trace(&s, 2).unwrap() - 11.0).abs() < 1e-12);
        assert!((minor_sum(&s, 2) - 11.0).abs() < 1e-12);
        assert!(m_trace(&s, 4).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(m_trace_from_eigenvalues(&[1.0, 1.0, 1.0], 2).unwrap(), 3.0);
        assert_eq!(m_trace_from_eigenvalues(&[1.0, 2.0, 3.0], 3).unwrap(), 6.0);
        assert_eq!(m_trace_from_eigenvalues(&[2.0, -1.0, 4.0], 2).unwrap(), 2.0);
        assert!(m_trace_from_eigenvalues(&[1.0, 2.0], 3).is_err());
        assert!(m_trace_from_eigenvalues(&[], 0).is_err());
    }

    #[test]
    fn methods_agree_on_dense_matrix() {
        let s = SymMatrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + if i == j { 0.7 } else { 0.0 });
        let a = traces_with(&s, TraceMethod::Eigen);
        let b = traces_with(&s, TraceMethod::FaddeevLeVerrier);
        for m in 0..=5 {
            let oracle = minor_sum(&s, m);
            assert!((a.get(m) - oracle).abs() < 1e-10 * (1.0 + oracle.abs()), "eigen m={m}");
            assert!((b.get(m) - oracle).abs() < 1e-10 * (1.0 + oracle.abs()), "fl m={m}");
        }
    }

    #[test]
    fn gradient_examples() {
        let g = m_trace_gradient(&diag(&[1.0, 2.0, 3.0]), 1).unwrap();
        assert_eq!(g, SymMatrix::identity(3));
        let s = SymMatrix::from_rows(&[vec![1.5, 0.4], vec![0.4, -2.0]]).unwrap();
        let g = m_trace_gradient(&s, 2).unwrap();
        assert_eq!((g.get(0, 0), g.get(0, 1), g.get(1, 1)), (-2.0, -0.4, 1.5));
        let g = m_trace_gradient(&SymMatrix::identity(3), 2).unwrap();
        assert!(g.add(&SymMatrix::identity(3).scaled(-2.0)).inf_norm() < 1e-14);
        assert_eq!(m_trace_gradient(&s, 0).unwrap(), SymMatrix::zeros(2));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = SymMatrix::from_fn(4, |i, j| 1.0 / (1.0 + i as f64 + j as f64) + if i == j { 1.0 } else { 0.0 });
        for m in 1..=4 {
            let g = m_trace_gradient(&s, m).unwrap();
            let fd = |h: f64| {
                let mut err: f64 = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        // perturb s_ij alone (s_ji held fixed) through the symmetric split
                        let bump = if i == j { h } else { h / 2.0 };
                        let mut plus = s;
                        plus.set(i, j, s.get(i, j) + bump);
                        let mut minus = s;
                        minus.set(i, j, s.get(i, j) - bump);
                        let d = (m_trace(&plus, m).unwrap() - m_trace(&minus, m).unwrap()) / (2.0 * h);
                        err = err.max((d - g.get(i, j)).abs());
                    }
                }
                err
            };
            let (e1, e2) = (fd(1e-3), fd(5e-4));
            assert!(e1 < 1e-5, "m={m} err={e1}");
            // polynomial of degree m: the error is O(h^2) or at roundoff
            assert!(e2 <= e1 * 0.3 + 1e-9, "m={m} {e1} {e2}");
        }
    }

    #[test]
    fn deleted_trace_examples() {
        let s = diag(&[1.0, 2.0, 3.0]);
        assert!((deleted_trace(&s, 2, 0).unwrap() - 5.0).abs() < 1e-14);
        assert!((deleted_trace(&s, 3, 1).unwrap() - 3.0).abs() < 1e-14);
        for m in 1..=5 {
            let v = deleted_trace(&SymMatrix::identity(5), m, 2).unwrap();
            assert!((v - binomial(4, m - 1)).abs() < 1e-12);
        }
        assert!(deleted_trace(&s, 2, 3).is_err());
        let g = m_trace_gradient(&s, 3).unwrap();
        for i in 0..3 {
            assert!((g.get(i, i) - deleted_trace(&s, 3, i).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_examples() {
        for m in 1..=4 {
            let v = cone_membership(&SymMatrix::identity(4), m).unwrap();
            assert!(v.member);
            assert!(v.margin >= binomial(4, 1).min(binomial(4, m)) - v.threshold);
        }
        let v = cone_membership(&diag(&[-1.0, 3.0]), 2).unwrap();
        assert!(!v.member);
        assert_eq!(v.first_failure, Some(2));
        assert!((v.margin + 3.0).abs() < 1e-14);
        let v = cone_membership(&diag(&[2.0, 2.0, -1.0]), 2).unwrap();
        assert!(!v.member);
        assert_eq!(v.first_failure, Some(2));
    }

    #[test]
    fn quotient_examples() {
        let s = diag(&[1.0, 2.0, 3.0]);
        assert!((quotient(&SymMatrix::identity(3), 2, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((quotient(&s, 2, 1).unwrap() - 11.0 / 6.0).abs() < 1e-14);
        assert!((quotient(&s, 2, 0).unwrap() - 11.0).abs() < 1e-12);
        assert!(matches!(quotient(&diag(&[-1.0, 3.0]), 2, 1), Err(Error::Domain(_))));
        assert!(quotient(&s, 1, 1).is_err());
    }

    #[test]
    fn quotient_gradient_examples() {
        let g = quotient_gradient(&SymMatrix::identity(3), 2, 1).unwrap();
        assert!(g.add(&SymMatrix::identity(3).scaled(-1.0 / 3.0)).inf_norm() < 1e-14);
        let s = diag(&[1.0, 2.0, 3.0]);
        let g0 = quotient_gradient(&s, 2, 0).unwrap();
        assert!(g0.add(&m_trace_gradient(&s, 2).unwrap().scaled(-1.0)).inf_norm() < 1e-14);

        let s = SymMatrix::from_rows(&[vec![2.0, 0.3, 0.1], vec![0.3, 1.0, -0.2], vec![0.1, -0.2, 1.5]]).unwrap();
        let g = quotient_gradient(&s, 3, 1).unwrap();
        let h = 1e-4;
        for i in 0..3 {
            let mut p = s;
            p.set(i, i, s.get(i, i) + h);
            let mut q = s;
            q.set(i, i, s.get(i, i) - h);
            let d = (quotient(&p, 3, 1).unwrap() - quotient(&q, 3, 1).unwrap()) / (2.0 * h);
            assert!((d - g.get(i, i)).abs() < 1e-7);
        }
    }

    #[test]
    fn maclaurin_examples() {
        assert!(maclaurin_margin(&SymMatrix::identity(4), 1, 3).unwrap().abs() < 1e-14);
        let v = maclaurin_margin(&diag(&[1.0, 2.0, 3.0]), 1, 2).unwrap();
        assert!((v - (2.0 - (11.0f64 / 3.0).sqrt())).abs() < 1e-14);
        assert!((v - 0.0851).abs() < 1e-4);
        assert!(maclaurin_margin(&diag(&[1.0, -5.0, 1.0]), 1, 2).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let s = diag(&[1.0, 2.0, 3.0]);
        let v = monotonicity_margin(&s, &SymMatrix::identity(3), 2, 1).unwrap();
        assert!((v - (26.0 / 9.0 - 11.0 / 6.0)).abs() < 1e-13);
        let small = monotonicity_margin(&s, &SymMatrix::identity(3).scaled(1e-9), 2, 1).unwrap();
        assert!(small > 0.0 && small < 1e-8);
        assert!(monotonicity_margin(&s, &diag(&[1.0, -1.0, 0.0]), 2, 1).is_err());
        assert!(monotonicity_margin(&s, &SymMatrix::zeros(3), 2, 1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(8, 4), 70.0);
    }
}
