//! Quadrature on balls (radial shells) and polar tensor grids.
//!
//! The radial factor uses product integration: on each panel of three nodes
//! the integrand is replaced by its quadratic interpolant and integrated
//! exactly against the Jacobian weight `r^d`. Integrands that are quadratic in
//! `r` (times the Jacobian) are therefore integrated exactly.

use serde::{Deserialize, Serialize};

/// Which layout a rule was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    RadialShell,
    PolarTensor,
}

/// Per-node weights of a volume quadrature (units of length^n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Pairwise sum of `weights[i] * f[i]`, fixed order.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.weights.len());
        let terms: Vec<f64> = self.weights.iter().zip(f).map(|(w, v)| w * v).collect();
        pairwise_sum(&terms)
    }

    pub fn volume(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

const GL6: [(f64, f64); 6] = [
    (-0.932_469_514_203_152_1, 0.171_324_492_379_170_4),
    (-0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (-0.238_619_186_083_196_9, 0.467_913_934_572_691_0),
    (0.238_619_186_083_196_9, 0.467_913_934_572_691_0),
    (0.661_209_386_466_264_5, 0.360_761_573_048_138_6),
    (0.932_469_514_203_152_1, 0.171_324_492_379_170_4),
];

// Integrates L_k(t) * (r0 + h t)^d over t in [t0, t1], where L_k is the
// quadratic Lagrange basis on t = 0, 1, 2. Exact for d <= 9.
fn panel_weights(r0: f64, h: f64, d: i32, t0: f64, t1: f64) -> [f64; 3] {
    let mut w = [0.0; 3];
    let half = 0.5 * (t1 - t0);
    let mid = 0.5 * (t1 + t0);
    for (x, gw) in GL6 {
        let t = mid + half * x;
        let jac = (r0 + h * t).powi(d) * h * half * gw;
        w[0] += jac * (t - 1.0) * (t - 2.0) / 2.0;
        w[1] += jac * -t * (t - 2.0);
        w[2] += jac * t * (t - 1.0) / 2.0;
    }
    w
}

/// Weights for `int_0^R f(r) r^d dr` on `nodes` equispaced points `r_i = i R / (nodes-1)`.
///
/// # Panics
/// If `nodes < 3`.
pub fn radial_weights(radius: f64, nodes: usize, d: u32) -> Vec<f64> {
    assert!(nodes >= 3, "need at least three radial nodes");
    let h = radius / (nodes - 1) as f64;
    let intervals = nodes - 1;
    let mut w = vec![0.0; nodes];
    let mut s = 0;
    while s + 2 <= intervals {
        let pw = panel_weights(s as f64 * h, h, d as i32, 0.0, 2.0);
        for k in 0..3 {
            w[s + k] += pw[k];
        }
        s += 2;
    }
    if s < intervals {
        // odd interval count: last interval from the quadratic through the last three nodes
        let start = intervals - 2;
        let pw = panel_weights(start as f64 * h, h, d as i32, 1.0, 2.0);
        for k in 0..3 {
            w[start + k] += pw[k];
        }
    }
    w
}

/// Surface area of the unit sphere `S^{n-1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

// Gamma(n/2) for positive integer n.
fn gamma_half(n: usize) -> f64 {
    let mut g = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

/// Volume of the ball of radius `r` in `R^n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_sphere_area(n) * r.powi(n as i32) / n as f64
}
