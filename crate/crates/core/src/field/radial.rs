//! Radial profiles `w(r)` on `[0, R]` and functions on balls built from them.

use serde::{Deserialize, Serialize};

use super::quadrature::{radial_weights, unit_sphere_area, QuadratureKind, QuadratureRule};
use super::Space;
use crate::cones::Domain;
use crate::error::{arg_err, Result};
use crate::symfunc::{binomial, SymMatrix};

/// Smallest node count accepted for radial profiles.
pub const RADIAL_MIN_NODES: usize = 9;

/// Values of a radial profile at `r_i = i R / (N - 1)`, `i = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    radius: f64,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(radius: f64, values: Vec<f64>) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return arg_err("radius must be positive");
        }
        if values.len() < RADIAL_MIN_NODES {
            return arg_err(format!(
                "radial profile needs at least {RADIAL_MIN_NODES} nodes, got {}",
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return arg_err("radial profile values must be finite");
        }
        Ok(RadialFunction { radius, values })
    }

    pub fn from_fn(radius: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = radius / (nodes.max(2) - 1) as f64;
        Self::new(radius, (0..nodes).map(|i| f(i as f64 * h)).collect())
    }

    pub fn zeros_like(&self) -> Self {
        RadialFunction { radius: self.radius, values: vec![0.0; self.values.len()] }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        self.radius / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        RadialFunction { radius: self.radius, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn same_grid(&self, other: &RadialFunction) -> bool {
        self.len() == other.len() && self.radius == other.radius
    }

    /// `s * self + t * other`.
    pub fn lin_comb(&self, s: f64, t: f64, other: &RadialFunction) -> Result<Self> {
        if !self.same_grid(other) {
            return arg_err("radial profiles live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| s * a + t * b).collect();
        Ok(RadialFunction { radius: self.radius, values })
    }

    /// First and second derivatives at every node, for the profile of a
    /// spherical-harmonic term of the given parity (`true` = even extension
    /// through `r = 0`).
    ///
    /// Central differences inside, second-order one-sided at `r = R`, and the
    /// ghost value `f(-h) = +-f(h)` at the pole.
    pub fn derivatives(&self, even: bool) -> (Vec<f64>, Vec<f64>) {
        let f = &self.values;
        let n = f.len();
        let h = self.step();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        let ghost = if even { f[1] } else { -f[1] };
        d1[0] = (f[1] - ghost) / (2.0 * h);
        d2[0] = (f[1] - 2.0 * f[0] + ghost) / (h * h);
        for i in 1..n - 1 {
            d1[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
            d2[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
        }
        let k = n - 1;
        d1[k] = (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * h);
        d2[k] = (2.0 * f[k] - 5.0 * f[k - 1] + 4.0 * f[k - 2] - f[k - 3]) / (h * h);
        (d1, d2)
    }

    /// Hessian eigenvalues `(w'', w'/r)` at each node, with the pole limit
    /// `w'/r -> w''(0)`.
    pub fn radial_eigenvalues(&self) -> Vec<(f64, f64)> {
        let (d1, d2) = self.derivatives(true);
        let h = self.step();
        (0..self.len())
            .map(|i| {
                let q = if i == 0 { d2[0] } else { d1[i] / (i as f64 * h) };
                (d2[i], q)
            })
            .collect()
    }

    /// Hessian of `w(|x|)` in the frame `(e_r, tangential...)` at node `i`.
    pub fn hessian_at(&self, i: usize, n: usize) -> SymMatrix {
        let (d1, d2) = self.derivatives(true);
        let h = self.step();
        let q = if i == 0 { d2[0] } else { d1[i] / (i as f64 * h) };
        let mut diag = vec![q; n];
        diag[0] = d2[i];
        SymMatrix::from_diagonal(&diag).expect("dimension checked by caller")
    }

    pub(crate) fn hessians(&self, n: usize) -> Vec<SymMatrix> {
        self.radial_eigenvalues()
            .into_iter()
            .map(|(d2, q)| {
                let mut diag = vec![q; n];
                diag[0] = d2;
                SymMatrix::from_diagonal(&diag).expect("dimension checked by caller")
            })
            .collect()
    }
}

/// `T_m[w](r) = C(n-1,m-1) w'' (w'/r)^{m-1} + C(n-1,m) (w'/r)^m` at every node.
pub fn radial_m_hessian(w: &RadialFunction, n: usize, m: usize) -> Result<RadialFunction> {
    if n < 1 || n > crate::symfunc::MAX_DIM {
        return arg_err(format!("dimension {n} unsupported"));
    }
    if m > n {
        return arg_err(format!("order m={m} exceeds dimension n={n}"));
    }
    let values = w
        .radial_eigenvalues()
        .into_iter()
        .map(|(d2, q)| radial_trace(n, m, d2, q))
        .collect();
    RadialFunction::new(w.radius(), values)
}

/// `T_m` of `diag(d2, q, ..., q)` in dimension `n`.
pub fn radial_trace(n: usize, m: usize, d2: f64, q: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    binomial(n - 1, m - 1) * d2 * q.powi(m as i32 - 1) + binomial(n - 1, m) * q.powi(m as i32)
}

/// One spherical-harmonic term `f(r) Y_k(x/|x|)` with `Y_k` normalized so that
/// its mean square over the sphere is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub degree: usize,
    pub profile: RadialFunction,
}

/// Function on a ball written as a finite sum of harmonic terms. Terms of
/// distinct degree are orthogonal in `L^2` and in every radially weighted
/// Dirichlet form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFunction {
    pub terms: Vec<HarmonicTerm>,
}

impl BallFunction {
    pub fn radial(profile: RadialFunction) -> Self {
        BallFunction { terms: vec![HarmonicTerm { degree: 0, profile }] }
    }

    pub fn with_term(mut self, degree: usize, profile: RadialFunction) -> Self {
        self.terms.push(HarmonicTerm { degree, profile });
        self
    }

    pub fn is_radial(&self) -> bool {
        self.terms.iter().all(|t| t.degree == 0)
    }

    fn degree_part(&self, degree: usize, like: &RadialFunction) -> Option<RadialFunction> {
        let mut acc: Option<RadialFunction> = None;
        for t in self.terms.iter().filter(|t| t.degree == degree) {
            acc = Some(match acc {
                None => t.profile.clone(),
                Some(a) => a.lin_comb(1.0, 1.0, &t.profile).unwrap_or_else(|_| like.zeros_like()),
            });
        }
        acc
    }

    /// Sum of the degree-0 profiles; `None` if there is no radial part.
    pub fn radial_part(&self) -> Option<RadialFunction> {
        let first = &self.terms.first()?.profile;
        self.degree_part(0, first)
    }

    fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.iter().map(|t| t.degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

impl From<RadialFunction> for BallFunction {
    fn from(f: RadialFunction) -> Self {
        BallFunction::radial(f)
    }
}

/// Ball of radius `R` in `R^n`, discretized radially with `N` nodes.
#[derive(Debug, Clone)]
pub struct BallSpace {
    n: usize,
    radius: f64,
    nodes: usize,
    rule: QuadratureRule,
}

impl BallSpace {
    pub fn new(n: usize, radius: f64, nodes: usize) -> Result<Self> {
        Domain::ball(n, radius)?;
        if nodes < RADIAL_MIN_NODES {
            return arg_err(format!("radial grid needs at least {RADIAL_MIN_NODES} nodes"));
        }
        let area = unit_sphere_area(n);
        let weights = radial_weights(radius, nodes, n as u32 - 1).into_iter().map(|w| w * area).collect();
        Ok(BallSpace { n, radius, nodes, rule: QuadratureRule { kind: QuadratureKind::RadialShell, weights } })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn profile(&self, f: impl Fn(f64) -> f64) -> RadialFunction {
        RadialFunction::from_fn(self.radius, self.nodes, f).expect("grid validated at construction")
    }

    /// Radial function `f(|x|)` on this ball.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> BallFunction {
        BallFunction::radial(self.profile(f))
    }

    fn check(&self, u: &BallFunction) -> Result<()> {
        for t in &u.terms {
            if t.profile.len() != self.nodes || t.profile.radius() != self.radius {
                return arg_err("function profile does not match the ball discretization");
            }
        }
        Ok(())
    }

    fn radial_of(&self, u: &BallFunction) -> Result<RadialFunction> {
        self.check(u)?;
        if !u.is_radial() {
            return arg_err("pointwise Hessians need a radial function");
        }
        Ok(u.radial_part().unwrap_or_else(|| self.profile(|_| 0.0)))
    }
}

impl Space for BallSpace {
    type Function = BallFunction;

    fn dim(&self) -> usize {
        self.n
    }

    fn domain(&self) -> Domain {
        Domain::Ball { n: self.n, radius: self.radius }
    }

    fn node_count(&self) -> usize {
        self.nodes
    }

    fn quadrature(&self) -> &QuadratureRule {
        &self.rule
    }

    fn mesh_width(&self) -> f64 {
        self.radius / (self.nodes - 1) as f64
    }

    fn is_interior(&self, node: usize) -> bool {
        node + 1 < self.nodes
    }

    fn hessians(&self, u: &BallFunction) -> Result<Vec<SymMatrix>> {
        Ok(self.radial_of(u)?.hessians(self.n))
    }

    fn node_values(&self, u: &BallFunction) -> Result<Vec<f64>> {
        Ok(self.radial_of(u)?.into_values())
    }

    fn integrate_against(&self, u: &BallFunction, weight: &[f64]) -> Result<f64> {
        self.check(u)?;
        // only the degree-0 part survives angular integration against a radial weight
        let Some(f) = u.radial_part() else { return Ok(0.0) };
        let g: Vec<f64> = f.values().iter().zip(weight).map(|(a, b)| a * b).collect();
        Ok(self.rule.integrate(&g))
    }

    fn gradient_form(&self, a: &[SymMatrix], u: &BallFunction, v: &BallFunction) -> Result<Vec<f64>> {
        self.check(u)?;
        self.check(v)?;
        let n = self.n as f64;
        let h = self.mesh_width();
        let zero = self.profile(|_| 0.0);
        let mut out = vec![0.0; self.nodes];
        for k in u.degrees() {
            let (Some(fu), Some(fv)) = (u.degree_part(k, &zero), v.degree_part(k, &zero)) else {
                continue;
            };
            let even = k % 2 == 0;
            let (du, _) = fu.derivatives(even);
            let (dv, _) = fv.derivatives(even);
            let lap = (k as f64) * (k as f64 + n - 2.0);
            for i in 0..self.nodes {
                let radial = a[i].get(0, 0) * du[i] * dv[i];
                let tangential = if k == 0 {
                    0.0
                } else {
                    let (qu, qv) = if i == 0 {
                        if k == 1 {
                            (du[0], dv[0])
                        } else {
                            (0.0, 0.0)
                        }
                    } else {
                        let r = i as f64 * h;
                        (fu.values()[i] / r, fv.values()[i] / r)
                    };
                    a[i].get(1, 1) * lap * qu * qv
                };
                out[i] += radial + tangential;
            }
        }
        Ok(out)
    }

    fn boundary_max_abs(&self, u: &BallFunction) -> f64 {
        u.terms.iter().map(|t| t.profile.values()[t.profile.len() - 1].abs()).fold(0.0, f64::max)
    }

    fn lin_comb(&self, s: f64, u: &BallFunction, t: f64, v: &BallFunction) -> Result<BallFunction> {
        self.check(u)?;
        self.check(v)?;
        let mut terms: Vec<HarmonicTerm> = u
            .terms
            .iter()
            .map(|x| HarmonicTerm { degree: x.degree, profile: x.profile.scaled(s) })
            .collect();
        terms.extend(v.terms.iter().map(|x| HarmonicTerm { degree: x.degree, profile: x.profile.scaled(t) }));
        // merge equal degrees so repeated combinations do not grow the term list
        let merged = BallFunction { terms };
        let zero = self.profile(|_| 0.0);
        let terms = merged
            .degrees()
            .into_iter()
            .filter_map(|k| merged.degree_part(k, &zero).map(|profile| HarmonicTerm { degree: k, profile }))
            .collect();
        Ok(BallFunction { terms })
    }

    fn describe(&self) -> String {
        format!("ball n={} R={} radial nodes={}", self.n, self.radius, self.nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_profiles() {
        assert!(RadialFunction::from_fn(1.0, 8, |r| r).is_err());
        assert!(RadialFunction::new(0.0, vec![0.0; 9]).is_err());
        assert!(RadialFunction::new(1.0, vec![f64::NAN; 9]).is_err());
    }

    #[test]
    fn quadratic_m_hessian_is_constant() {
        let a = 0.8;
        let w = RadialFunction::from_fn(2.0, 17, |r| a * (r * r - 4.0) / 2.0).unwrap();
        for n in 2..=5 {
            for m in 0..=n {
                let t = radial_m_hessian(&w, n, m).unwrap();
                let expect = binomial(n, m) * a.powi(m as i32);
                for v in t.values() {
                    assert!((v - expect).abs() < 1e-11 * (1.0 + expect), "n={n} m={m} {v} vs {expect}");
                }
            }
        }
        assert!(radial_m_hessian(&w, 3, 4).is_err());
    }

    #[test]
    fn laplacian_normalization() {
        let n = 4;
        let w = RadialFunction::from_fn(1.0, 21, |r| (r * r - 1.0) / (2.0 * n as f64)).unwrap();
        let t = radial_m_hessian(&w, n, 1).unwrap();
        assert!(t.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn second_order_on_quartic() {
        // w = r^4: T_1 in n=3 is 12 r^2 + 2*4 r^2 = 20 r^2
        let err = |nodes: usize| {
            let w = RadialFunction::from_fn(1.0, nodes, |r| r.powi(4)).unwrap();
            let t = radial_m_hessian(&w, 3, 1).unwrap();
            w.nodes().iter().zip(t.values()).map(|(r, v)| (v - 20.0 * r * r).abs()).fold(0.0, f64::max)
        };
        let ratio = err(33) / err(65);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn ball_space_volume() {
        let s = BallSpace::new(3, 1.0, 65).unwrap();
        let vol = s.quadrature().volume();
        assert!((vol - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn harmonic_dirichlet_form() {
        // u = r Y_1 with Y_1 = sqrt(3) x1/r is sqrt(3) x1: int |grad u|^2 = 3 |B| = 4 pi
        let s = BallSpace::new(3, 1.0, 33).unwrap();
        let u = BallFunction { terms: vec![HarmonicTerm { degree: 1, profile: s.profile(|r| r) }] };
        let id = vec![SymMatrix::identity(3); s.node_count()];
        let g = s.gradient_form(&id, &u, &u).unwrap();
        let val = s.integrate(&g);
        assert!((val - 4.0 * std::f64::consts::PI).abs() < 1e-10, "{val}");
        assert_eq!(s.integrate_against(&u, &vec![1.0; 33]).unwrap(), 0.0);
        assert!(s.hessians(&u).is_err());
    }
}
