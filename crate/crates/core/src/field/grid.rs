//! Mapped polar tensor grids `x = a rho cos(theta)`, `y = b rho sin(theta)`
//! over discs and ellipses, with second-order Cartesian derivative stencils.
//!
//! Node layout: the pole is node 0, then rings `i = 1..Nr-1` of `Ntheta`
//! nodes each. Inside a ring the angles are interleaved
//! (`0, 1, Nt-1, 2, Nt-2, ...`) so that periodic neighbours are at most two
//! positions apart (four for the five-point angular stencils); with
//! ring-major ordering every stencil stays within `2 Ntheta + 4` of the
//! diagonal. The boundary ring comes last,
//! so the interior unknowns are the leading `1 + (Nr-2) Ntheta` nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use super::quadrature::{radial_weights, QuadratureKind, QuadratureRule};
use super::Space;
use crate::cones::Domain;
use crate::error::{arg_err, Result};
use crate::symfunc::{m_trace, SymMatrix};

pub const GRID_MIN_NR: usize = 5;
pub const GRID_MIN_NTHETA: usize = 8;

/// Stencil weights for `(u_x, u_y, u_xx, u_xy, u_yy)`.
pub type Weights = [f64; 5];

/// Per-node Cartesian Hessians (2x2).
pub type HessianField = Vec<SymMatrix>;

#[derive(Debug)]
pub struct PolarGrid {
    domain: Domain,
    a: f64,
    b: f64,
    nr: usize,
    ntheta: usize,
    stencils: Vec<Vec<(usize, Weights)>>,
    rule: QuadratureRule,
}

fn interleave(j: usize, nt: usize) -> usize {
    if j == 0 {
        0
    } else if j <= nt / 2 {
        2 * j - 1
    } else {
        2 * (nt - j)
    }
}

impl PolarGrid {
    /// Grid with `nr` radial levels (pole and boundary included) and `ntheta` angles.
    pub fn new(domain: Domain, nr: usize, ntheta: usize) -> Result<Arc<Self>> {
        domain.validate()?;
        let Some((a, b)) = domain.polar_axes() else {
            return arg_err("polar grids need a planar domain (disc or ellipse)");
        };
        if nr < GRID_MIN_NR || ntheta < GRID_MIN_NTHETA || ntheta % 2 == 1 {
            return arg_err(format!(
                "grid {nr}x{ntheta} invalid: need Nr >= {GRID_MIN_NR} and even Ntheta >= {GRID_MIN_NTHETA}"
            ));
        }
        let mut grid = PolarGrid {
            domain,
            a,
            b,
            nr,
            ntheta,
            stencils: Vec::new(),
            rule: QuadratureRule { kind: QuadratureKind::PolarTensor, weights: Vec::new() },
        };
        grid.stencils = (0..grid.node_count()).map(|k| grid.build_stencil(k)).collect();
        grid.rule.weights = grid.build_weights();
        Ok(Arc::new(grid))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn axes(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn node_count(&self) -> usize {
        1 + (self.nr - 1) * self.ntheta
    }

    /// Number of interior nodes; they occupy indices `0..unknown_count()`.
    pub fn unknown_count(&self) -> usize {
        1 + (self.nr - 2) * self.ntheta
    }

    /// Half-bandwidth of every stencil restricted to interior nodes.
    pub fn bandwidth(&self) -> usize {
        2 * self.ntheta + 4
    }

    pub fn rho_step(&self) -> f64 {
        1.0 / (self.nr - 1) as f64
    }

    pub fn theta_step(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    /// Index of ring `i`, angle `j` (any `j` for the pole).
    pub fn index(&self, i: usize, j: usize) -> usize {
        if i == 0 {
            0
        } else {
            1 + (i - 1) * self.ntheta + interleave(j % self.ntheta, self.ntheta)
        }
    }

    /// `(ring, angle)` of node `k`.
    pub fn ring_angle(&self, k: usize) -> (usize, usize) {
        if k == 0 {
            return (0, 0);
        }
        let i = 1 + (k - 1) / self.ntheta;
        let p = (k - 1) % self.ntheta;
        let j = if p == 0 {
            0
        } else if p % 2 == 1 {
            (p + 1) / 2
        } else {
            self.ntheta - p / 2
        };
        (i, j)
    }

    /// `(rho, theta)` of node `k`, `rho` in `[0, 1]`.
    pub fn polar(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ring_angle(k);
        (i as f64 * self.rho_step(), j as f64 * self.theta_step())
    }

    pub fn cartesian(&self, k: usize) -> (f64, f64) {
        let (rho, t) = self.polar(k);
        (self.a * rho * t.cos(), self.b * rho * t.sin())
    }

    pub fn is_interior(&self, k: usize) -> bool {
        k < self.unknown_count()
    }

    pub fn stencil(&self, k: usize) -> &[(usize, Weights)] {
        &self.stencils[k]
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.rule
    }

    fn build_weights(&self) -> Vec<f64> {
        let wr = radial_weights(1.0, self.nr, 1);
        let dt = self.theta_step();
        let ab = self.a * self.b;
        (0..self.node_count())
            .map(|k| {
                let (i, _) = self.ring_angle(k);
                if i == 0 {
                    ab * wr[0] * 2.0 * PI
                } else {
                    ab * wr[i] * dt
                }
            })
            .collect()
    }

    /// Five-point periodic weights `([p1, p2], [a1, a2])` for
    /// `u_theta ~ sum_k p_k (u_{j+k} - u_{j-k})` and
    /// `u_thetatheta ~ sum_k a_k (u_{j+k} - 2 u_j + u_{j-k})`, chosen exact on
    /// the Fourier modes 1 and 2. Hessians of quadratics are then exact, and
    /// the angular error of the degree-one modes, which is amplified by
    /// `1/rho` near the pole, vanishes.
    fn theta_weights(&self) -> ([f64; 2], [f64; 2]) {
        let dt = self.theta_step();
        let (s1, s2, s4) = (dt.sin(), (2.0 * dt).sin(), (4.0 * dt).sin());
        // 2 (p1 sin(k dt) + p2 sin(2 k dt)) = k for k = 1, 2
        let det = s1 * s4 - s2 * s2;
        let p1 = 0.5 * (s4 - 2.0 * s2) / det;
        let p2 = 0.5 * (2.0 * s1 - s2) / det;
        // 2 a1 (cos(k dt) - 1) + 2 a2 (cos(2 k dt) - 1) = -k^2, k = 1, 2
        let cm = |x: f64| -2.0 * (0.5 * x).sin().powi(2);
        let (c1, c2, c4) = (cm(dt), cm(2.0 * dt), cm(4.0 * dt));
        let det = c1 * c4 - c2 * c2;
        let a1 = 0.5 * (-c4 + 4.0 * c2) / det;
        let a2 = 0.5 * (-4.0 * c1 + c2) / det;
        ([p1, p2], [a1, a2])
    }

    fn build_stencil(&self, k: usize) -> Vec<(usize, Weights)> {
        let (i, j) = self.ring_angle(k);
        let nt = self.ntheta;
        let h = self.rho_step();
        let (a, b) = (self.a, self.b);
        let mut out: Vec<(usize, Weights)> = Vec::new();
        if i == 0 {
            // Fourier coefficients of rings 1 and 2 give the Taylor data at
            // the pole; combining both rings cancels the next radial power
            // (rho^3 for the gradient, rho^4 for the Hessian)
            let inv = 1.0 / nt as f64;
            let pole = -2.0 * 15.0 / (12.0 * h * h);
            out.push((0, [0.0, 0.0, pole / (a * a), 0.0, pole / (b * b)]));
            for (ring, f, g) in [(1, 16.0, 8.0), (2, -1.0, -1.0)] {
                let f = 2.0 * f / (12.0 * h * h);
                let g = g / (6.0 * h);
                for jj in 0..nt {
                    let t = jj as f64 * self.theta_step();
                    let (c1, s1) = (2.0 * inv * t.cos(), 2.0 * inv * t.sin());
                    let (c2, s2) = (2.0 * inv * (2.0 * t).cos(), 2.0 * inv * (2.0 * t).sin());
                    out.push((
                        self.index(ring, jj),
                        [
                            g * c1 / a,
                            g * s1 / b,
                            f * (inv + c2) / (a * a),
                            f * s2 / (a * b),
                            f * (inv - c2) / (b * b),
                        ],
                    ));
                }
            }
            return out;
        }
        // polar weights (u_rho, u_theta, u_rhorho, u_rhotheta, u_thetatheta)
        let dt = self.theta_step();
        let mut polar: Vec<(usize, Weights)> = Vec::new();
        let mut put = |node: usize, slot: usize, w: f64| {
            let mut e = [0.0; 5];
            e[slot] = w;
            polar.push((node, e));
        };
        let boundary = i == self.nr - 1;
        let (d1, d2) = self.theta_weights();
        for (off, w) in [(1, d1[0]), (2, d1[1])] {
            put(self.index(i, j + off), 1, w);
            put(self.index(i, j + nt - off), 1, -w);
        }
        put(self.index(i, j), 4, -2.0 * (d2[0] + d2[1]));
        for (off, w) in [(1, d2[0]), (2, d2[1])] {
            put(self.index(i, j + off), 4, w);
            put(self.index(i, j + nt - off), 4, w);
        }
        // u_rho and u_rhotheta enter the Hessian divided by rho, so near the
        // pole their truncation error is amplified by 1/rho; they use wider
        // stencils (fourth order inside, third order next to the boundary).
        // Ring 1 reaches through the pole with u(-h, theta) = u(h, theta + pi).
        let rho_pts: Vec<(usize, usize, f64)> = if boundary {
            vec![(i, j, 1.5 / h), (i - 1, j, -2.0 / h), (i - 2, j, 0.5 / h)]
        } else if i == self.nr - 2 {
            let c = 1.0 / (6.0 * h);
            vec![(i - 2, j, c), (i - 1, j, -6.0 * c), (i, j, 3.0 * c), (i + 1, j, 2.0 * c)]
        } else {
            let c = 1.0 / (12.0 * h);
            let far = if i == 1 { (1, (j + nt / 2) % nt) } else { (i - 2, j) };
            vec![(far.0, far.1, c), (i - 1, j, -8.0 * c), (i + 1, j, 8.0 * c), (i + 2, j, -c)]
        };
        for (ring, jj, w) in rho_pts {
            put(self.index(ring, jj), 0, w);
            for (off, v) in [(1, d1[0]), (2, d1[1])] {
                put(self.index(ring, jj + off), 3, w * v);
                put(self.index(ring, jj + nt - off), 3, -w * v);
            }
        }
        if boundary {
            for (d, w) in [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)] {
                put(self.index(i - d, j), 2, w / (h * h));
            }
        } else {
            put(self.index(i + 1, j), 2, 1.0 / (h * h));
            put(self.index(i, j), 2, -2.0 / (h * h));
            put(self.index(i - 1, j), 2, 1.0 / (h * h));
        }
        let rho = i as f64 * h;
        let t = j as f64 * dt;
        let (s, c) = t.sin_cos();
        let det = a * b * rho;
        // K = J^{-1}, rows (rho, theta), columns (x, y)
        let kk = [[b * rho * c / det, a * rho * s / det], [-b * s / det, a * c / det]];
        let xi_xx = [[0.0, -a * s], [-a * s, -a * rho * c]];
        let xi_yy = [[0.0, b * c], [b * c, -b * rho * s]];
        for (node, p) in polar {
            let gx = kk[0][0] * p[0] + kk[1][0] * p[1];
            let gy = kk[0][1] * p[0] + kk[1][1] * p[1];
            let d2 = [[p[2], p[3]], [p[3], p[4]]];
            let mut m = [[0.0; 2]; 2];
            for r in 0..2 {
                for q in 0..2 {
                    m[r][q] = d2[r][q] - gx * xi_xx[r][q] - gy * xi_yy[r][q];
                }
            }
            let hcart = |x: usize, y: usize| {
                let mut acc = 0.0;
                for r in 0..2 {
                    for q in 0..2 {
                        acc += kk[r][x] * m[r][q] * kk[q][y];
                    }
                }
                acc
            };
            out.push((node, [gx, gy, hcart(0, 0), hcart(0, 1), hcart(1, 1)]));
        }
        out.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, Weights)> = Vec::with_capacity(out.len());
        for (node, w) in out {
            match merged.last_mut() {
                Some(last) if last.0 == node => {
                    for q in 0..5 {
                        last.1[q] += w[q];
                    }
                }
                _ => merged.push((node, w)),
            }
        }
        merged
    }

    /// `(u_x, u_y, u_xx, u_xy, u_yy)` of nodal values at node `k`.
    pub fn derivatives_at(&self, values: &[f64], k: usize) -> Weights {
        let mut d = [0.0; 5];
        for (node, w) in &self.stencils[k] {
            let v = values[*node];
            for q in 0..5 {
                d[q] += w[q] * v;
            }
        }
        d
    }
}

/// Scalar field on a [`PolarGrid`]; the boundary ring holds the Dirichlet data.
#[derive(Debug, Clone)]
pub struct GridFunction2D {
    grid: Arc<PolarGrid>,
    values: Vec<f64>,
}

impl PartialEq for GridFunction2D {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) && self.values == other.values
    }
}

impl GridFunction2D {
    pub fn new(grid: &Arc<PolarGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return arg_err(format!("expected {} grid values, got {}", grid.node_count(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return arg_err("grid values must be finite");
        }
        Ok(GridFunction2D { grid: Arc::clone(grid), values })
    }

    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        GridFunction2D { grid: Arc::clone(grid), values: vec![0.0; grid.node_count()] }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let (x, y) = grid.cartesian(k);
                f(x, y)
            })
            .collect();
        GridFunction2D { grid: Arc::clone(grid), values }
    }

    /// Samples `f(rho, theta)` at every node (`rho` in `[0, 1]`).
    pub fn from_polar_fn(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let (r, t) = grid.polar(k);
                f(r, t)
            })
            .collect();
        GridFunction2D { grid: Arc::clone(grid), values }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn boundary_max_abs(&self) -> f64 {
        self.values[self.grid.unknown_count()..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction2D { grid: Arc::clone(&self.grid), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn same_grid(&self, other: &GridFunction2D) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.domain == other.grid.domain
                && self.grid.nr == other.grid.nr
                && self.grid.ntheta == other.grid.ntheta)
    }

    pub fn lin_comb(&self, s: f64, t: f64, other: &GridFunction2D) -> Result<Self> {
        if !self.same_grid(other) {
            return arg_err("grid functions live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(u, v)| s * u + t * v).collect();
        Ok(GridFunction2D { grid: Arc::clone(&self.grid), values })
    }

    /// Discrete gradient `(u_x, u_y)` at every node.
    pub fn gradient(&self) -> Vec<[f64; 2]> {
        (0..self.grid.node_count())
            .map(|k| {
                let d = self.grid.derivatives_at(&self.values, k);
                [d[0], d[1]]
            })
            .collect()
    }
}

/// Cartesian Hessian at every node (one-sided in `rho` on the boundary ring).
pub fn grid_hessian(u: &GridFunction2D) -> Result<HessianField> {
    let g = u.grid();
    Ok((0..g.node_count())
        .map(|k| {
            let d = g.derivatives_at(u.values(), k);
            SymMatrix::from_fn(2, |i, j| match (i, j) {
                (0, 0) => d[2],
                (1, 1) => d[4],
                _ => d[3],
            })
        })
        .collect())
}

/// Node-wise `T_m` of the grid Hessian.
pub fn m_hessian_field(u: &GridFunction2D, m: usize) -> Result<GridFunction2D> {
    if m == 0 || m > 2 {
        return arg_err(format!("order m={m} outside 1..=2 for planar grids"));
    }
    let values = grid_hessian(u)?.iter().map(|h| m_trace(h, m)).collect::<Result<Vec<_>>>()?;
    Ok(GridFunction2D { grid: Arc::clone(u.grid()), values })
}

impl Space for Arc<PolarGrid> {
    type Function = GridFunction2D;

    fn dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Domain {
        self.as_ref().domain
    }

    fn node_count(&self) -> usize {
        self.as_ref().node_count()
    }

    fn quadrature(&self) -> &QuadratureRule {
        &self.as_ref().rule
    }

    // the angular stencils are exact on the low Fourier modes, so the radial
    // step governs the truncation error
    fn mesh_width(&self) -> f64 {
        let (a, b) = self.axes();
        a.max(b) * self.rho_step()
    }

    fn is_interior(&self, node: usize) -> bool {
        self.as_ref().is_interior(node)
    }

    fn hessians(&self, u: &GridFunction2D) -> Result<Vec<SymMatrix>> {
        self.check(u)?;
        grid_hessian(u)
    }

    fn node_values(&self, u: &GridFunction2D) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(u.values.clone())
    }

    fn integrate_against(&self, u: &GridFunction2D, weight: &[f64]) -> Result<f64> {
        self.check(u)?;
        let f: Vec<f64> = u.values.iter().zip(weight).map(|(a, b)| a * b).collect();
        Ok(self.rule.integrate(&f))
    }

    fn gradient_form(&self, a: &[SymMatrix], u: &GridFunction2D, v: &GridFunction2D) -> Result<Vec<f64>> {
        self.check(u)?;
        self.check(v)?;
        let gu = u.gradient();
        let gv = v.gradient();
        Ok((0..self.node_count()).map(|k| a[k].bilinear(&gu[k], &gv[k])).collect())
    }

    fn boundary_max_abs(&self, u: &GridFunction2D) -> f64 {
        u.boundary_max_abs()
    }

    fn lin_comb(&self, s: f64, u: &GridFunction2D, t: f64, v: &GridFunction2D) -> Result<GridFunction2D> {
        self.check(u)?;
        u.lin_comb(s, t, v)
    }

    fn describe(&self) -> String {
        let (a, b) = self.axes();
        format!("polar grid a={a} b={b} Nr={} Ntheta={}", self.nr, self.ntheta)
    }
}

trait CheckGrid {
    fn check(&self, u: &GridFunction2D) -> Result<()>;
}

impl CheckGrid for Arc<PolarGrid> {
    fn check(&self, u: &GridFunction2D) -> Result<()> {
        if Arc::ptr_eq(self, &u.grid)
            || (self.domain == u.grid.domain && self.nr == u.grid.nr && self.ntheta == u.grid.ntheta)
        {
            Ok(())
        } else {
            arg_err("grid function does not belong to this grid")
        }
    }
}
