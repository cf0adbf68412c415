//! Domains with analytic boundary p-curvature, the (m-1)-convexity gate, and
//! pointwise m-admissibility certification of discrete functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::field::{GridFunction2D, RadialFunction, Space, RADIAL_MIN_NODES};
use crate::symfunc::{binomial, cone_threshold, traces, verdict_from_traces, SymMatrix};

/// Number of boundary parameters sampled by the convexity gate.
pub const BOUNDARY_SAMPLES: usize = 256;

/// Bounded domain with analytic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    /// Ball of radius `R` in `R^n`.
    Ball {
        n: usize,
        #[serde(rename = "R")]
        radius: f64,
    },
    /// Disc of radius `R`, i.e. `Ball { n: 2, .. }`.
    Disc {
        #[serde(rename = "R")]
        radius: f64,
    },
    /// Ellipse `x^2/a^2 + y^2/b^2 < 1`.
    Ellipse {
        a: f64,
        b: f64,
    },
}

impl Domain {
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        let d = Domain::Ball { n, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(radius: f64) -> Result<Self> {
        let d = Domain::Disc { radius };
        d.validate()?;
        Ok(d)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        let d = Domain::Ellipse { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            Domain::Ball { n, radius } => {
                if !(2..=crate::symfunc::MAX_DIM).contains(&n) {
                    return arg_err(format!("ball dimension {n} outside 2..={}", crate::symfunc::MAX_DIM));
                }
                if !positive(radius) {
                    return arg_err("radius must be positive");
                }
            }
            Domain::Disc { radius } => {
                if !positive(radius) {
                    return arg_err("radius must be positive");
                }
            }
            Domain::Ellipse { a, b } => {
                if !positive(a) || !positive(b) {
                    return arg_err("ellipse semi-axes must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Ball { n, .. } => n,
            _ => 2,
        }
    }

    /// Semi-axes of the polar map `(rho, theta) -> (a rho cos, b rho sin)`;
    /// `None` for balls in dimension other than two.
    pub fn polar_axes(&self) -> Option<(f64, f64)> {
        match *self {
            Domain::Disc { radius } => Some((radius, radius)),
            Domain::Ball { n: 2, radius } => Some((radius, radius)),
            Domain::Ellipse { a, b } => Some((a, b)),
            Domain::Ball { .. } => None,
        }
    }

    /// Radius for rotationally symmetric domains.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            Domain::Ball { radius, .. } | Domain::Disc { radius } => Some(radius),
            Domain::Ellipse { a, b } if a == b => Some(a),
            Domain::Ellipse { .. } => None,
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Ball { n, radius } => crate::field::quadrature::ball_volume(n, radius),
            Domain::Disc { radius } => PI * radius * radius,
            Domain::Ellipse { a, b } => PI * a * b,
        }
    }
}

/// Samples of `k_p[dOmega]` along the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub p: usize,
    /// `(boundary parameter, k_p)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub min_value: f64,
}

/// `k_p[dOmega](t)`: the p-th elementary symmetric function of the principal
/// curvatures at boundary parameter `t` (angle in 2-D, ignored for balls).
pub fn boundary_curvature(domain: &Domain, p: usize, t: f64) -> Result<f64> {
    domain.validate()?;
    let n = domain.dim();
    if p > n - 1 {
        return arg_err(format!("curvature order {p} exceeds n-1 = {}", n - 1));
    }
    if p == 0 {
        return Ok(1.0);
    }
    Ok(match *domain {
        Domain::Ball { n, radius } => binomial(n - 1, p) * radius.powi(-(p as i32)),
        Domain::Disc { radius } => 1.0 / radius,
        Domain::Ellipse { a, b } => {
            let (s, c) = t.sin_cos();
            a * b / (a * a * s * s + b * b * c * c).powf(1.5)
        }
    })
}

pub fn curvature_profile(domain: &Domain, p: usize, samples: usize) -> Result<CurvatureProfile> {
    let samples = samples.max(1);
    let pts = (0..samples)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            boundary_curvature(domain, p, t).map(|v| (t, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_value = pts.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    Ok(CurvatureProfile { p, samples: pts, min_value })
}

/// The solvability gate `k_{m-1}[dOmega] > 0`, with its minimum over
/// [`BOUNDARY_SAMPLES`] boundary points.
pub fn is_boundary_m_convex(domain: &Domain, m: usize) -> Result<(bool, f64)> {
    if m == 0 || m > domain.dim() {
        return arg_err(format!("order m={m} outside 1..={}", domain.dim()));
    }
    let profile = curvature_profile(domain, m - 1, BOUNDARY_SAMPLES)?;
    Ok((profile.min_value > 0.0, profile.min_value))
}

/// Result of certifying `u in K_m` node by node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub m: usize,
    pub admissible: bool,
    /// Interior node attaining the smallest `T_p[u]`.
    pub worst_node: usize,
    pub worst_order: usize,
    pub worst_value: f64,
    /// `max u` over the domain when the boundary data vanish, else `None`.
    pub max_value: Option<f64>,
    /// `true` when the boundary data vanish and `u <= 0` fails.
    pub sign_violation: bool,
}

/// Boundary values below this magnitude count as zero Dirichlet data.
pub const ZERO_BOUNDARY_TOL: f64 = 1e-12;

fn certify(hessians: &[(usize, SymMatrix)], m: usize, values: &[f64], boundary_max_abs: f64) -> AdmissibilityReport {
    let mut worst = (0usize, 1usize, f64::INFINITY);
    let mut all_in = true;
    for &(node, ref h) in hessians {
        let t = traces(h);
        let v = verdict_from_traces(&t, m, cone_threshold(h, m));
        if !v.member {
            all_in = false;
        }
        for p in 1..=m {
            if t.get(p) < worst.2 {
                worst = (node, p, t.get(p));
            }
        }
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let zero_boundary = boundary_max_abs <= ZERO_BOUNDARY_TOL * scale;
    let max_value = zero_boundary.then(|| values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let sign_violation = max_value.is_some_and(|mx| mx > 1e-12 * scale);
    AdmissibilityReport {
        m,
        admissible: all_in && !sign_violation,
        worst_node: worst.0,
        worst_order: worst.1,
        worst_value: worst.2,
        max_value,
        sign_violation,
    }
}

/// Pointwise certificate for a 2-D grid function at interior nodes.
pub fn grid_admissibility(u: &GridFunction2D, m: usize) -> Result<AdmissibilityReport> {
    if m == 0 || m > 2 {
        return arg_err(format!("order m={m} outside 1..=2 for planar grids"));
    }
    let grid = u.grid();
    let h = crate::field::grid_hessian(u)?;
    let interior: Vec<(usize, SymMatrix)> = (0..grid.node_count())
        .filter(|&k| grid.is_interior(k))
        .map(|k| (k, h[k]))
        .collect();
    Ok(certify(&interior, m, u.values(), u.boundary_max_abs()))
}

/// Pointwise certificate for the radial function `w(|x|)` on a ball in `R^n`.
pub fn radial_admissibility(w: &RadialFunction, n: usize, m: usize) -> Result<AdmissibilityReport> {
    if m == 0 || m > n {
        return arg_err(format!("order m={m} outside 1..={n}"));
    }
    if w.len() < RADIAL_MIN_NODES {
        return arg_err(format!("radial grid needs at least {RADIAL_MIN_NODES} nodes"));
    }
    let last = w.len() - 1;
    let interior: Vec<(usize, SymMatrix)> = (0..last).map(|i| (i, w.hessian_at(i, n))).collect();
    Ok(certify(&interior, m, w.values(), w.values()[last].abs()))
}

/// Pointwise certificate for any discretized function, at the interior
/// nodes of its space.
pub fn admissibility<S: Space>(space: &S, u: &S::Function, m: usize) -> Result<AdmissibilityReport> {
    let n = space.dim();
    if m == 0 || m > n {
        return arg_err(format!("order m={m} outside 1..={n}"));
    }
    let h = space.hessians(u)?;
    let interior: Vec<(usize, SymMatrix)> =
        (0..space.node_count()).filter(|&k| space.is_interior(k)).map(|k| (k, h[k])).collect();
    Ok(certify(&interior, m, &space.node_values(u)?, space.boundary_max_abs(u)))
}
