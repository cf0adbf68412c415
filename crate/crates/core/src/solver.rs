//! Dirichlet problems with zero boundary data for `T_m[w] = psi T_l[w]`.
//!
//! Three routes: the closed-form quadratic on balls for `psi = 1`, damped
//! Newton on the radial ODE, and damped Newton on polar grids in the plane.
//! Every solver returns the nonpositive branch and certifies it in `K_m`.

use serde::{Deserialize, Serialize};

use crate::band::BandMatrix;
use crate::cones::{admissibility, is_boundary_m_convex, radial_admissibility, AdmissibilityReport, Domain};
use crate::error::{arg_err, Error, Result};
use crate::field::{GridFunction2D, PolarGrid, RadialFunction, Space, RADIAL_MIN_NODES};
use crate::symfunc::{binomial, m_trace_gradient, traces, SymMatrix};

/// Largest `max |T_m[w] - T_l[w]|` accepted from a claimed quotient solution.
pub const QUOTIENT_RESIDUAL_TOL: f64 = 1e-6;

/// Right-hand side `psi > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rhs {
    Constant { value: f64 },
    /// `c0 + c2 |x|^2`.
    RadialQuadratic { c0: f64, c2: f64 },
    /// `c0 + c1 x_1`; planar domains only.
    Tilted { c0: f64, c1: f64 },
}

impl Rhs {
    pub fn constant(value: f64) -> Self {
        Rhs::Constant { value }
    }

    /// Value at a point with first coordinate `x` and norm `r`.
    pub fn at(&self, x: f64, r: f64) -> f64 {
        match *self {
            Rhs::Constant { value } => value,
            Rhs::RadialQuadratic { c0, c2 } => c0 + c2 * r * r,
            Rhs::Tilted { c0, c1 } => c0 + c1 * x,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, Rhs::Tilted { .. })
    }

    /// Infimum over a domain whose points satisfy `|x_1| <= a`, `|x| <= r_max`.
    fn infimum(&self, a: f64, r_max: f64) -> f64 {
        match *self {
            Rhs::Constant { value } => value,
            Rhs::RadialQuadratic { c0, c2 } => c0.min(c0 + c2 * r_max * r_max),
            Rhs::Tilted { c0, c1 } => c0 - c1.abs() * a,
        }
    }
}

/// `T_m[w] = psi T_l[w]` in `domain`, `w = 0` on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletProblem {
    pub domain: Domain,
    pub m: usize,
    pub l: usize,
    pub rhs: Rhs,
}

impl DirichletProblem {
    /// Validates the orders, the sign of `psi` and the boundary convexity
    /// gate `k_{m-1}[boundary] > 0`.
    pub fn new(domain: Domain, m: usize, l: usize, rhs: Rhs) -> Result<Self> {
        domain.validate()?;
        let n = domain.dim();
        if m == 0 || m > n || l >= m {
            return arg_err(format!("need 0 <= l < m <= n (got n={n}, m={m}, l={l})"));
        }
        let (a, r_max) = match domain {
            Domain::Ball { radius, .. } | Domain::Disc { radius } => (radius, radius),
            Domain::Ellipse { a, b } => (a, a.max(b)),
        };
        if !rhs.is_radial() && domain.polar_axes().is_none() {
            return arg_err("a non-radial right-hand side needs a planar domain");
        }
        let inf = rhs.infimum(a, r_max);
        if !(inf > 0.0) {
            return arg_err(format!("right-hand side must be positive (infimum {inf})"));
        }
        let (convex, margin) = is_boundary_m_convex(&domain, m)?;
        if !convex {
            return Err(Error::ConvexityGate { order: m - 1, margin });
        }
        Ok(DirichletProblem { domain, m, l, rhs })
    }
}

/// Damped Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once `max |F| <= tol`.
    pub tol: f64,
    pub max_steps: usize,
    pub max_halvings: usize,
    /// Iterates must keep `T_p > cone_margin` at interior nodes, `p <= m`.
    pub cone_margin: f64,
    /// Multiplier on the quadratic initial iterate.
    pub initial_scale: f64,
}

impl NewtonOptions {
    pub fn radial() -> Self {
        NewtonOptions { tol: 1e-9, max_steps: 100, max_halvings: 30, cone_margin: 1e-10, initial_scale: 1.0 }
    }

    pub fn grid() -> Self {
        NewtonOptions { tol: 1e-7, ..Self::radial() }
    }
}

/// Solver output. The returned `w` is the nonpositive solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletSolution<F> {
    pub w: F,
    pub residual_inf: f64,
    pub iterations: usize,
    /// `max |F|` before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    pub admissibility: AdmissibilityReport,
    pub max_value: f64,
}

/// `a` such that `a (|x|^2 - R^2) / 2` solves `T_m = T_l` on any ball in `R^n`.
pub fn quadratic_coefficient(n: usize, m: usize, l: usize) -> Result<f64> {
    if m == 0 || m > n || l >= m {
        return arg_err(format!("need 0 <= l < m <= n (got n={n}, m={m}, l={l})"));
    }
    Ok((binomial(n, l) / binomial(n, m)).powf(1.0 / (m - l) as f64))
}

/// Closed-form solution `w = a (r^2 - R^2) / 2` of `T_m[w] = T_l[w]` on the
/// ball of radius `R`, sampled at `nodes` radii. The ansatz is substituted
/// back into the radial operator before it is returned.
pub fn solve_radial_quadratic(n: usize, m: usize, l: usize, radius: f64, nodes: usize) -> Result<(f64, RadialFunction)> {
    Domain::ball(n, radius)?;
    let a = quadratic_coefficient(n, m, l)?;
    let w = RadialFunction::from_fn(radius, nodes, |r| a * (r * r - radius * radius) / 2.0)?;
    let mut worst: f64 = 0.0;
    for (d2, q) in w.radial_eigenvalues() {
        let tm = crate::field::radial_trace(n, m, d2, q);
        let tl = crate::field::radial_trace(n, l, d2, q);
        worst = worst.max((tm / tl - 1.0).abs());
    }
    // second differences of O(1) values lose about eps / h^2 to cancellation
    let h = w.step() / radius;
    if worst > 1e-10f64.max(32.0 * f64::EPSILON / (h * h)) {
        return Err(Error::Domain(format!("quadratic ansatz fails T_m/T_l = 1 (error {worst:e})")));
    }
    Ok((a, w))
}

/// `max |T_m[w] - T_l[w]|` over interior nodes.
pub fn quotient_solution_residual<S: Space>(space: &S, w: &S::Function, m: usize, l: usize) -> Result<f64> {
    if l >= m || m > space.dim() {
        return arg_err(format!("need l < m <= n (got m={m}, l={l})"));
    }
    let h = space.hessians(w)?;
    let mut worst: f64 = 0.0;
    for k in (0..space.node_count()).filter(|&k| space.is_interior(k)) {
        let t = traces(&h[k]);
        worst = worst.max((t.get(m) - t.get(l)).abs());
    }
    Ok(worst)
}

// T_p(diag(d2, q, ..., q)) and its partial derivatives in d2 and q.
fn radial_trace_parts(n: usize, p: usize, d2: f64, q: f64) -> (f64, f64, f64) {
    if p == 0 {
        return (1.0, 0.0, 0.0);
    }
    let c1 = binomial(n - 1, p - 1);
    let c2 = binomial(n - 1, p);
    let qp1 = q.powi(p as i32 - 1);
    let value = c1 * d2 * qp1 + c2 * qp1 * q;
    let dd2 = c1 * qp1;
    let dq = if p >= 2 { c1 * (p - 1) as f64 * d2 * q.powi(p as i32 - 2) } else { 0.0 } + c2 * p as f64 * qp1;
    (value, dd2, dq)
}

struct RadialSystem<'a> {
    n: usize,
    m: usize,
    l: usize,
    h: f64,
    psi: &'a [f64],
}

impl RadialSystem<'_> {
    // (d2, q) at node i, and their weights on (w_{i-1}, w_i, w_{i+1})
    fn stencil(&self, w: &[f64], i: usize) -> (f64, f64, [f64; 3], [f64; 3]) {
        let h2 = self.h * self.h;
        let at = |j: usize| if j < w.len() { w[j] } else { 0.0 };
        if i == 0 {
            let d2 = 2.0 * (at(1) - at(0)) / h2;
            let c = [0.0, -2.0 / h2, 2.0 / h2];
            (d2, d2, c, c)
        } else {
            let d2 = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / h2;
            let r = i as f64 * self.h;
            let q = (at(i + 1) - at(i - 1)) / (2.0 * self.h * r);
            let s = 1.0 / (2.0 * self.h * r);
            (d2, q, [1.0 / h2, -2.0 / h2, 1.0 / h2], [-s, 0.0, s])
        }
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        (0..w.len())
            .map(|i| {
                let (d2, q, _, _) = self.stencil(w, i);
                radial_trace_parts(self.n, self.m, d2, q).0 - self.psi[i] * radial_trace_parts(self.n, self.l, d2, q).0
            })
            .collect()
    }

    fn min_trace(&self, w: &[f64]) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..w.len() {
            let (d2, q, _, _) = self.stencil(w, i);
            for p in 1..=self.m {
                worst = worst.min(radial_trace_parts(self.n, p, d2, q).0);
            }
        }
        worst
    }

    fn jacobian(&self, w: &[f64]) -> BandMatrix {
        let k = w.len();
        let mut jac = BandMatrix::zeros(k, 1, 1);
        for i in 0..k {
            let (d2, q, cd, cq) = self.stencil(w, i);
            let (_, md, mq) = radial_trace_parts(self.n, self.m, d2, q);
            let (_, ld, lq) = radial_trace_parts(self.n, self.l, d2, q);
            let (fd, fq) = (md - self.psi[i] * ld, mq - self.psi[i] * lq);
            for (s, (a, b)) in cd.iter().zip(&cq).enumerate() {
                let Some(j) = (i + s).checked_sub(1) else { continue };
                if j < k {
                    jac.add(i, j, fd * a + fq * b);
                }
            }
        }
        jac
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

// Damped Newton shared by both discretizations. `eval` returns the residual
// and the smallest interior trace of orders 1..=m.
fn damped_newton(
    mut u: Vec<f64>,
    opts: &NewtonOptions,
    order: usize,
    eval: impl Fn(&[f64]) -> (Vec<f64>, f64),
    solve: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut f, margin) = eval(&u);
    if !(margin > opts.cone_margin) {
        return Err(Error::ConeExit { order, margin });
    }
    let mut r = max_abs(&f);
    let mut history = vec![r];
    for step in 0..opts.max_steps {
        if r <= opts.tol {
            break;
        }
        let neg: Vec<f64> = f.iter().map(|x| -x).collect();
        let delta = solve(&u, &neg)?;
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut last_margin = margin;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let (ft, mt) = eval(&trial);
            last_margin = mt;
            let rt = max_abs(&ft);
            if mt > opts.cone_margin && rt < r {
                accepted = Some((trial, ft, rt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, ft, rt)) = accepted else {
            if !(last_margin > opts.cone_margin) {
                return Err(Error::ConeExit { order, margin: last_margin });
            }
            return Err(Error::Convergence { iterations: step, residual: r });
        };
        log::debug!("newton step {}: residual {rt:e}, step length {alpha}", step + 1);
        u = trial;
        f = ft;
        r = rt;
        history.push(r);
    }
    if r > opts.tol {
        return Err(Error::Convergence { iterations: history.len() - 1, residual: r });
    }
    Ok((u, history))
}

fn check_branch(max_value: f64, scale: f64) -> Result<()> {
    if max_value > 1e-12 * scale.max(1.0) {
        return Err(Error::Domain(format!("solution left the nonpositive branch (max w = {max_value:e})")));
    }
    Ok(())
}

fn radial_newton(problem: &DirichletProblem, psi: &[f64], nodes: usize, opts: &NewtonOptions) -> Result<DirichletSolution<RadialFunction>> {
    let Domain::Ball { n, radius } = problem.domain else {
        return arg_err("radial solves need a ball");
    };
    if nodes < RADIAL_MIN_NODES {
        return arg_err(format!("radial grid needs at least {RADIAL_MIN_NODES} nodes"));
    }
    let (m, l) = (problem.m, problem.l);
    let h = radius / (nodes - 1) as f64;
    let k = nodes - 1;
    let sys = RadialSystem { n, m, l, h, psi: &psi[..k] };
    let mean = psi.iter().sum::<f64>() / psi.len() as f64;
    let a = (mean * binomial(n, l) / binomial(n, m)).powf(1.0 / (m - l) as f64) * opts.initial_scale;
    let init: Vec<f64> = (0..k).map(|i| {
        let r = i as f64 * h;
        a * (r * r - radius * radius) / 2.0
    }).collect();
    let (u, history) = damped_newton(
        init,
        opts,
        m,
        |u| (sys.residual(u), sys.min_trace(u)),
        |u, rhs| sys.jacobian(u).solve(rhs),
    )?;
    let mut values = u;
    values.push(0.0);
    let w = RadialFunction::new(radius, values)?;
    let report = radial_admissibility(&w, n, m)?;
    if !report.admissible {
        return Err(Error::ConeExit { order: m, margin: report.worst_value });
    }
    let max_value = w.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check_branch(max_value, max_abs(w.values()))?;
    Ok(DirichletSolution {
        w,
        residual_inf: *history.last().expect("history starts with the initial residual"),
        iterations: history.len() - 1,
        residual_history: history,
        admissibility: report,
        max_value,
    })
}

/// Solves the radial ODE
/// `C(n-1,m-1) w'' (w'/r)^{m-1} + C(n-1,m) (w'/r)^m = psi(r)`, `w'(0) = 0`,
/// `w(R) = 0` on `N` nodes.
pub fn solve_radial_ode(
    n: usize,
    m: usize,
    psi: impl Fn(f64) -> f64,
    radius: f64,
    nodes: usize,
    opts: &NewtonOptions,
) -> Result<DirichletSolution<RadialFunction>> {
    let domain = Domain::ball(n, radius)?;
    let problem = DirichletProblem::new(domain, m, 0, Rhs::constant(1.0))?;
    let h = radius / nodes.max(2).saturating_sub(1) as f64;
    let values: Vec<f64> = (0..nodes).map(|i| psi(i as f64 * h)).collect();
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return arg_err(format!("psi must be positive, psi({}) = {v}", i as f64 * h));
    }
    radial_newton(&problem, &values, nodes, opts)
}

/// Radial solve of a problem on a ball with a radial right-hand side; `l > 0`
/// is allowed.
pub fn solve_radial(problem: &DirichletProblem, nodes: usize, opts: &NewtonOptions) -> Result<DirichletSolution<RadialFunction>> {
    let Domain::Ball { radius, .. } = problem.domain else {
        return arg_err("radial solves need a ball");
    };
    if !problem.rhs.is_radial() {
        return arg_err("radial solves need a radial right-hand side");
    }
    let h = radius / nodes.max(2).saturating_sub(1) as f64;
    let psi: Vec<f64> = (0..nodes).map(|i| problem.rhs.at(i as f64 * h, i as f64 * h)).collect();
    radial_newton(problem, &psi, nodes, opts)
}

// Scale c of the initial iterate c (rho^2 - 1) / 2 on a grid with axes (a, b):
// its Hessian is diag(c/a^2, c/b^2), and c is chosen so that T_m = psi T_l.
fn grid_initial_scale(m: usize, l: usize, a: f64, b: f64, psi: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    match (m, l) {
        (1, 0) => psi / (1.0 / a2 + 1.0 / b2),
        (2, 0) => psi.sqrt() * a * b,
        _ => psi * (a2 + b2),
    }
}

/// Damped Newton for `T_m[w] = psi T_l[w]`, `m <= 2`, on a polar grid with
/// `nr x ntheta` nodes. Ellipses are accepted but not covered by any
/// convergence guarantee.
pub fn solve_grid_newton(
    problem: &DirichletProblem,
    nr: usize,
    ntheta: usize,
    opts: &NewtonOptions,
) -> Result<DirichletSolution<GridFunction2D>> {
    let (m, l) = (problem.m, problem.l);
    if problem.domain.dim() != 2 {
        return arg_err("grid solves need a planar domain");
    }
    let grid = PolarGrid::new(problem.domain, nr, ntheta)?;
    let (a, b) = grid.axes();
    let nu = grid.unknown_count();
    let psi: Vec<f64> = (0..nu)
        .map(|k| {
            let (x, y) = grid.cartesian(k);
            problem.rhs.at(x, x.hypot(y))
        })
        .collect();
    let mean = psi.iter().sum::<f64>() / nu as f64;
    let c = grid_initial_scale(m, l, a, b, mean) * opts.initial_scale;
    let init: Vec<f64> = (0..nu)
        .map(|k| {
            let rho = grid.polar(k).0;
            c * (rho * rho - 1.0) / 2.0
        })
        .collect();
    let full = |u: &[f64]| {
        let mut v = u.to_vec();
        v.resize(grid.node_count(), 0.0);
        v
    };
    let hessian = |v: &[f64], k: usize| {
        let d = grid.derivatives_at(v, k);
        SymMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => d[2],
            (1, 1) => d[4],
            _ => d[3],
        })
    };
    let eval = |u: &[f64]| {
        let v = full(u);
        let mut f = Vec::with_capacity(nu);
        let mut margin = f64::INFINITY;
        for k in 0..nu {
            let t = traces(&hessian(&v, k));
            f.push(t.get(m) - psi[k] * t.get(l));
            for p in 1..=m {
                margin = margin.min(t.get(p));
            }
        }
        (f, margin)
    };
    let solve = |u: &[f64], rhs: &[f64]| {
        let v = full(u);
        let bw = grid.bandwidth();
        let mut jac = BandMatrix::zeros(nu, bw, bw);
        for k in 0..nu {
            let hk = hessian(&v, k);
            let mut g = m_trace_gradient(&hk, m)?;
            if l > 0 {
                g = g.add(&m_trace_gradient(&hk, l)?.scaled(-psi[k]));
            }
            let (gxx, gxy, gyy) = (g.get(0, 0), g.get(0, 1), g.get(1, 1));
            for (j, w) in grid.stencil(k) {
                if *j < nu {
                    jac.add(k, *j, gxx * w[2] + 2.0 * gxy * w[3] + gyy * w[4]);
                }
            }
        }
        jac.solve(rhs)
    };
    let (u, history) = damped_newton(init, opts, m, eval, solve)?;
    let w = GridFunction2D::new(&grid, full(&u))?;
    let report = admissibility(&grid, &w, m)?;
    if !report.admissible {
        return Err(Error::ConeExit { order: m, margin: report.worst_value });
    }
    let max_value = w.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check_branch(max_value, max_abs(w.values()))?;
    Ok(DirichletSolution {
        w,
        residual_inf: *history.last().expect("history starts with the initial residual"),
        iterations: history.len() - 1,
        residual_history: history,
        admissibility: report,
        max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BallSpace;

    #[test]
    fn quadratic_table() {
        for (n, m, l, a, w0) in [(3, 1, 0, 1.0 / 3.0, -1.0 / 6.0), (3, 2, 1, 1.0, -0.5), (3, 3, 2, 3.0, -1.5)] {
            let (got, w) = solve_radial_quadratic(n, m, l, 1.0, 33).unwrap();
            assert!((got - a).abs() < 1e-14);
            assert!((w.values()[0] - w0).abs() < 1e-14);
        }
        assert!(solve_radial_quadratic(3, 2, 2, 1.0, 33).is_err());
        assert!(solve_radial_quadratic(3, 4, 0, 1.0, 33).is_err());
    }

    #[test]
    fn quotient_residual_detects_scaling() {
        let space = BallSpace::new(3, 1.0, 33).unwrap();
        let (_, w) = solve_radial_quadratic(3, 2, 1, 1.0, 33).unwrap();
        let w = crate::field::BallFunction::radial(w);
        assert!(quotient_solution_residual(&space, &w, 2, 1).unwrap() < 1e-10);
        let w2 = space.lin_comb(2.0, &w, 0.0, &w).unwrap();
        // T_2 scales by 4, T_1 by 2: T_2 - T_1 = 12 - 6
        assert!((quotient_solution_residual(&space, &w2, 2, 1).unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn radial_ode_reproduces_quadratics() {
        for n in 2..=4 {
            for m in 1..=n {
                let sol = solve_radial_ode(n, m, |_| 1.0, 1.0, 65, &NewtonOptions::radial()).unwrap();
                let (_, exact) = solve_radial_quadratic(n, m, 0, 1.0, 65).unwrap();
                let err = max_abs(&sol.w.lin_comb(1.0, -1.0, &exact).unwrap().into_values());
                assert!(err < 1e-8, "n={n} m={m} err={err}");
                assert!(sol.residual_inf <= 1e-9);
            }
        }
        let poisson = solve_radial_ode(2, 1, |_| 1.0, 1.0, 33, &NewtonOptions::radial()).unwrap();
        for (i, v) in poisson.w.values().iter().enumerate() {
            let r = poisson.w.node(i);
            assert!((v - (r * r - 1.0) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_ode_nonconstant_rhs() {
        let opts = NewtonOptions { initial_scale: 0.5, ..NewtonOptions::radial() };
        let sol = solve_radial_ode(3, 2, |r| 1.0 + r * r, 1.0, 129, &opts).unwrap();
        assert!(sol.residual_inf <= 1e-9);
        assert!(sol.admissibility.admissible);
        assert!(sol.max_value <= 0.0);
        assert!(sol.iterations > 1);
        assert!(solve_radial_ode(3, 2, |r| r - 0.5, 1.0, 33, &opts).is_err());
    }

    #[test]
    fn grid_quotient_quadratic() {
        let p = DirichletProblem::new(Domain::disc(1.0).unwrap(), 2, 1, Rhs::constant(1.0)).unwrap();
        let opts = NewtonOptions { initial_scale: 0.7, ..NewtonOptions::grid() };
        let sol = solve_grid_newton(&p, 17, 16, &opts).unwrap();
        let g = sol.w.grid();
        for k in 0..g.node_count() {
            let (x, y) = g.cartesian(k);
            assert!((sol.w.values()[k] - (x * x + y * y - 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn problem_validation() {
        let disc = Domain::disc(1.0).unwrap();
        assert!(DirichletProblem::new(disc, 3, 0, Rhs::constant(1.0)).is_err());
        assert!(DirichletProblem::new(disc, 2, 0, Rhs::constant(-1.0)).is_err());
        assert!(DirichletProblem::new(disc, 2, 0, Rhs::Tilted { c0: 1.0, c1: 2.0 }).is_err());
        assert!(DirichletProblem::new(disc, 2, 0, Rhs::Tilted { c0: 1.0, c1: 0.1 }).is_ok());
        let ball = Domain::ball(3, 1.0).unwrap();
        assert!(DirichletProblem::new(ball, 2, 0, Rhs::Tilted { c0: 1.0, c1: 0.1 }).is_err());
    }
}
