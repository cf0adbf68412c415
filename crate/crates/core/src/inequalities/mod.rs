//! Margin reports for the Poincare-type and isoperimetric inequalities of
//! Hessian integrals, evaluated on concrete discrete functions.
//!
//! Every report is oriented so that `margin >= 0` means the inequality holds;
//! the verdict allows `-tolerance`, where the tolerance budgets mesh and
//! solver error explicitly (see [`ToleranceModel`]).

mod samples;
mod suites;

pub use samples::Sampling;
pub use suites::{applies, default_configs, maclaurin_suite, run_suite, run_suites, Extremals, SuiteOptions};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cones::admissibility;
use crate::error::{arg_err, Error, Result};
use crate::field::Space;
use crate::integrals::{gradient_field, hessian_integral, integral, require_zero_boundary, trace_field};
use crate::solver::{quotient_solution_residual, QUOTIENT_RESIDUAL_TOL};
use crate::symfunc::SymMatrix;

/// Which inequality a report instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    Maclaurin,
    Monotonicity,
    Ellipticity,
    Poincare,
    Isoperimetric,
    Composition,
    Anpo,
    ZeroL,
    P2,
    Dilation,
    W2,
}

impl InequalityKind {
    /// The function-space inequalities, in suite order.
    pub const SPACE_CHECKS: [InequalityKind; 8] = [
        InequalityKind::Poincare,
        InequalityKind::Isoperimetric,
        InequalityKind::Composition,
        InequalityKind::Anpo,
        InequalityKind::ZeroL,
        InequalityKind::P2,
        InequalityKind::Dilation,
        InequalityKind::W2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InequalityKind::Maclaurin => "maclaurin",
            InequalityKind::Monotonicity => "monotonicity",
            InequalityKind::Ellipticity => "ellipticity",
            InequalityKind::Poincare => "poincare",
            InequalityKind::Isoperimetric => "isoperimetric",
            InequalityKind::Composition => "composition",
            InequalityKind::Anpo => "anpo",
            InequalityKind::ZeroL => "zero_l",
            InequalityKind::P2 => "p2",
            InequalityKind::Dilation => "dilation",
            InequalityKind::W2 => "w2",
        }
    }
}

impl FromStr for InequalityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            InequalityKind::Maclaurin,
            InequalityKind::Monotonicity,
            InequalityKind::Ellipticity,
        ]
        .into_iter()
        .chain(InequalityKind::SPACE_CHECKS)
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Argument(format!("unknown inequality {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Which side of the inequality is the larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    LhsAtLeastRhs,
    LhsAtMostRhs,
}

/// Tolerance `(c_mesh h^2 + c_residual r + floor) max(1, |lhs|, |rhs|)` for a
/// mesh width `h` and solver residual `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceModel {
    pub c_mesh: f64,
    pub c_residual: f64,
    pub floor: f64,
}

impl Default for ToleranceModel {
    fn default() -> Self {
        ToleranceModel { c_mesh: 0.1, c_residual: 10.0, floor: 1e-10 }
    }
}

impl ToleranceModel {
    pub fn tolerance(&self, h: f64, residual: f64, lhs: f64, rhs: f64) -> f64 {
        (self.c_mesh * h * h + self.c_residual * residual + self.floor) * 1f64.max(lhs.abs()).max(rhs.abs())
    }
}

/// One evaluated inequality instance.
///
/// `verdict` is `pass` iff `margin >= -tolerance`; dilation reports also
/// require the ratio invariance recorded in `aux`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: InequalityKind,
    pub m: usize,
    pub l: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub inputs: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aux: BTreeMap<String, f64>,
}

impl InequalityReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: InequalityKind,
        m: usize,
        l: Option<usize>,
        lhs: f64,
        rhs: f64,
        orientation: Orientation,
        tolerance: f64,
        inputs: String,
    ) -> Self {
        let margin = match orientation {
            Orientation::LhsAtLeastRhs => lhs - rhs,
            Orientation::LhsAtMostRhs => rhs - lhs,
        };
        let verdict = if margin >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        InequalityReport { name, m, l, lhs, rhs, margin, tolerance, verdict, inputs, aux: BTreeMap::new() }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Tolerance divided by the scale `max(1, |lhs|, |rhs|)`.
    pub fn relative_tolerance(&self) -> f64 {
        self.tolerance / 1f64.max(self.lhs.abs()).max(self.rhs.abs())
    }

    fn with_aux(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }
}

/// CSV summary with columns `name,m,l,lhs,rhs,margin,verdict`.
pub fn reports_to_csv(reports: &[InequalityReport]) -> String {
    let mut s = String::from("name,m,l,lhs,rhs,margin,verdict\n");
    for r in reports {
        let l = r.l.map(|l| l.to_string()).unwrap_or_default();
        let v = if r.passed() { "pass" } else { "fail" };
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.name.name(), r.m, l, r.lhs, r.rhs, r.margin, v);
    }
    s
}

/// Residual of a claimed extremal; refuses anything that does not solve
/// `T_m[w] = T_l[w]` to [`QUOTIENT_RESIDUAL_TOL`].
fn extremal_residual<S: Space>(space: &S, w: &S::Function, m: usize, l: usize) -> Result<f64> {
    require_zero_boundary(space, w, "w")?;
    let r = quotient_solution_residual(space, w, m, l)?;
    if r > QUOTIENT_RESIDUAL_TOL {
        return arg_err(format!("w does not solve T_{m}[w] = T_{l}[w] (residual {r:e})"));
    }
    Ok(r)
}

fn require_admissible<S: Space>(space: &S, u: &S::Function, m: usize) -> Result<()> {
    require_zero_boundary(space, u, "u")?;
    let rep = admissibility(space, u, m)?;
    if !rep.admissible {
        return Err(Error::Domain(format!(
            "u is not in the cone K_{m} with zero boundary data (T_{} = {:e} at node {})",
            rep.worst_order, rep.worst_value, rep.worst_node
        )));
    }
    Ok(())
}

fn tol<S: Space>(space: &S, residual: f64, lhs: f64, rhs: f64) -> f64 {
    ToleranceModel::default().tolerance(space.mesh_width(), residual, lhs, rhs)
}

/// `<u, v>_p` with weight `T_p^{ij}[w]`; zero for `p = 0`.
fn inner<S: Space>(space: &S, a: &[SymMatrix], u: &S::Function, v: &S::Function) -> Result<f64> {
    Ok(space.integrate(&space.gradient_form(a, u, v)?))
}

/// `(I_m[u]/I_m[w])^{1/(m+1)} >= (I_l[u]/I_l[w])^{1/(l+1)}` for `u` in the
/// cone with zero boundary data.
pub fn check_poincare<S: Space>(space: &S, u: &S::Function, w: &S::Function, m: usize, l: usize) -> Result<InequalityReport> {
    let res = extremal_residual(space, w, m, l)?;
    require_admissible(space, u, m)?;
    let (imu, ilu) = (hessian_integral(space, u, m)?, hessian_integral(space, u, l)?);
    let (imw, ilw) = (hessian_integral(space, w, m)?, hessian_integral(space, w, l)?);
    let lhs = (imu / imw).powf(1.0 / (m + 1) as f64);
    let rhs = (ilu / ilw).powf(1.0 / (l + 1) as f64);
    Ok(InequalityReport::new(
        InequalityKind::Poincare,
        m,
        Some(l),
        lhs,
        rhs,
        Orientation::LhsAtLeastRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    ))
}

/// `I_m[u] >= I_m[w]^{(l-m)/(l+1)}` after rescaling `u` to `I_l[u] = 1`.
pub fn check_isoperimetric<S: Space>(
    space: &S,
    u: &S::Function,
    w: &S::Function,
    m: usize,
    l: usize,
) -> Result<InequalityReport> {
    let res = extremal_residual(space, w, m, l)?;
    require_admissible(space, u, m)?;
    let ilu = hessian_integral(space, u, l)?;
    if !(ilu > 0.0) {
        return Err(Error::Domain(format!("I_{l}[u] = {ilu:e} cannot be normalized")));
    }
    // I_p is (p+1)-homogeneous, so mu u has I_l = 1 for this mu
    let mu = ilu.powf(-1.0 / (l + 1) as f64);
    let lhs = mu.powi(m as i32 + 1) * hessian_integral(space, u, m)?;
    let rhs = hessian_integral(space, w, m)?.powf((l as f64 - m as f64) / (l + 1) as f64);
    Ok(InequalityReport::new(
        InequalityKind::Isoperimetric,
        m,
        Some(l),
        lhs,
        rhs,
        Orientation::LhsAtLeastRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    )
    .with_aux("scale", mu))
}

/// Composition of the sharp constants `c_{m,l} >= c_{m,p} c_{p,l}` with
/// `c_{m,l} = I_m[w_{m,l}]^{1/(m+1) - 1/(l+1)}`, written as
/// `I_m[w_ml]^{m-l} <= I_m[w_mp]^{(l+1)(m-p)/(p+1)} I_l[w_pl]^{(m+1)(p-l)/(p+1)}`.
///
/// Raising the constant relation to the negative power `-(m+1)(l+1)` turns
/// it into an upper bound on `I_m[w_ml]^{m-l}`; on balls both sides agree.
#[allow(clippy::too_many_arguments)]
pub fn check_composition<S: Space>(
    space: &S,
    w_ml: &S::Function,
    w_mp: &S::Function,
    w_pl: &S::Function,
    m: usize,
    p: usize,
    l: usize,
) -> Result<InequalityReport> {
    if !(l < p && p < m) {
        return arg_err(format!("composition needs l < p < m (got m={m}, p={p}, l={l})"));
    }
    let res = extremal_residual(space, w_ml, m, l)?
        .max(extremal_residual(space, w_mp, m, p)?)
        .max(extremal_residual(space, w_pl, p, l)?);
    let (m_, p_, l_) = (m as f64, p as f64, l as f64);
    let lhs = hessian_integral(space, w_ml, m)?.powf(m_ - l_);
    let rhs = hessian_integral(space, w_mp, m)?.powf((l_ + 1.0) * (m_ - p_) / (p_ + 1.0))
        * hessian_integral(space, w_pl, l)?.powf((m_ + 1.0) * (p_ - l_) / (p_ + 1.0));
    Ok(InequalityReport::new(
        InequalityKind::Composition,
        m,
        Some(l),
        lhs,
        rhs,
        Orientation::LhsAtMostRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    )
    .with_aux("p", p_))
}

/// `((m-l)/I_m[w]) (int u T_m[w])^2 + <u,u>_l <= <u,u>_m` for any `u` with
/// zero boundary data.
pub fn check_anpo<S: Space>(space: &S, u: &S::Function, w: &S::Function, m: usize, l: usize) -> Result<InequalityReport> {
    let res = extremal_residual(space, w, m, l)?;
    require_zero_boundary(space, u, "u")?;
    let im = hessian_integral(space, w, m)?;
    let moment = space.integrate_against(u, &trace_field(space, w, m)?)?;
    let uul = if l == 0 { 0.0 } else { inner(space, &gradient_field(space, w, l)?, u, u)? };
    let uum = inner(space, &gradient_field(space, w, m)?, u, u)?;
    let lhs = (m - l) as f64 / im * moment * moment + uul;
    let rhs = uum;
    Ok(InequalityReport::new(
        InequalityKind::Anpo,
        m,
        Some(l),
        lhs,
        rhs,
        Orientation::LhsAtMostRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    ))
}

/// `m (int u)^2 <= (int -w_m) <u,u>_m` where `T_m[w_m] = 1`.
pub fn check_zero_l<S: Space>(space: &S, u: &S::Function, w_m: &S::Function, m: usize) -> Result<InequalityReport> {
    let res = extremal_residual(space, w_m, m, 0)?;
    require_zero_boundary(space, u, "u")?;
    let mean = integral(space, u)?;
    let lhs = m as f64 * mean * mean;
    let rhs = -integral(space, w_m)? * inner(space, &gradient_field(space, w_m, m)?, u, u)?;
    Ok(InequalityReport::new(
        InequalityKind::ZeroL,
        m,
        Some(0),
        lhs,
        rhs,
        Orientation::LhsAtMostRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    ))
}

/// Cofactor matrix `(-1)^{i+j} det(S without row i, column j)`, the gradient
/// of `det` computed from minors rather than from m-trace recursions.
pub fn cofactor(s: &SymMatrix) -> SymMatrix {
    let n = s.dim();
    if n == 1 {
        return SymMatrix::identity(1);
    }
    let full = DMatrix::from_fn(n, n, |i, j| s.get(i, j));
    SymMatrix::from_fn(n, |i, j| {
        let minor = full.clone().remove_row(i).remove_column(j);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// `((n-1)/int |w_x|^2) (int u Lap w)^2 + int |u_x|^2 <= int cof(w_xx)^{ij} u_i u_j`
/// for `T_n[w] = T_1[w]`, `w <= 0`.
pub fn check_p2<S: Space>(space: &S, u: &S::Function, w: &S::Function) -> Result<InequalityReport> {
    let n = space.dim();
    let res = extremal_residual(space, w, n, 1)?;
    require_zero_boundary(space, u, "u")?;
    let hess = space.hessians(w)?;
    let ident: Vec<SymMatrix> = hess.iter().map(|h| SymMatrix::identity(h.dim())).collect();
    let cof: Vec<SymMatrix> = hess.iter().map(cofactor).collect();
    let energy = inner(space, &ident, w, w)?;
    let lap: Vec<f64> = hess.iter().map(|h| (0..h.dim()).map(|i| h.get(i, i)).sum()).collect();
    let moment = space.integrate_against(u, &lap)?;
    let lhs = (n - 1) as f64 / energy * moment * moment + inner(space, &ident, u, u)?;
    let rhs = inner(space, &cof, u, u)?;
    Ok(InequalityReport::new(
        InequalityKind::P2,
        n,
        Some(1),
        lhs,
        rhs,
        Orientation::LhsAtMostRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    ))
}

/// Largest relative change of a dilation-normalized ratio accepted as
/// invariance.
pub const DILATION_RATIO_TOL: f64 = 1e-10;

// (<u,w>_l/<w,w>_l, <u,w>_m/<w,w>_m, l <u,u>_l/<w,w>_l, m <u,u>_m/<w,w>_m).
// For l = 0 the first ratio is its limit -int u / I_0[w] and the third is 0.
fn dilation_ratios<S: Space>(space: &S, u: &S::Function, w: &S::Function, m: usize, l: usize) -> Result<[f64; 4]> {
    let am = gradient_field(space, w, m)?;
    let wwm = inner(space, &am, w, w)?;
    let (rl, ql) = if l == 0 {
        (-integral(space, u)? / hessian_integral(space, w, 0)?, 0.0)
    } else {
        let al = gradient_field(space, w, l)?;
        let wwl = inner(space, &al, w, w)?;
        (inner(space, &al, u, w)? / wwl, l as f64 * inner(space, &al, u, u)? / wwl)
    };
    Ok([rl, inner(space, &am, u, w)? / wwm, ql, m as f64 * inner(space, &am, u, u)? / wwm])
}

/// Dilation-invariant form
/// `(m-l) (<u,w>_l/<w,w>_l)(<u,w>_m/<w,w>_m) <= m <u,u>_m/<w,w>_m - l <u,u>_l/<w,w>_l`,
/// together with the invariance of every ratio under `w -> mu w` once the
/// ratios are multiplied by `mu` (mixed) or `mu^2` (pure in `u`).
pub fn check_dilation_invariance<S: Space>(
    space: &S,
    u: &S::Function,
    w: &S::Function,
    m: usize,
    l: usize,
    mu: f64,
) -> Result<InequalityReport> {
    if !(mu > 0.0) {
        return arg_err(format!("dilation factor must be positive, got {mu}"));
    }
    let res = extremal_residual(space, w, m, l)?;
    require_zero_boundary(space, u, "u")?;
    let base = dilation_ratios(space, u, w, m, l)?;
    let wmu = space.lin_comb(mu, w, 0.0, w)?;
    let scaled = dilation_ratios(space, u, &wmu, m, l)?;
    let norm = [mu, mu, mu * mu, mu * mu];
    let mut deviation: f64 = 0.0;
    for k in 0..4 {
        let d = (scaled[k] * norm[k] - base[k]).abs();
        deviation = deviation.max(if base[k] == 0.0 { d } else { d / base[k].abs() });
    }
    let lhs = (m - l) as f64 * base[0] * base[1];
    let rhs = base[3] - base[2];
    let mut rep = InequalityReport::new(
        InequalityKind::Dilation,
        m,
        Some(l),
        lhs,
        rhs,
        Orientation::LhsAtMostRhs,
        tol(space, res, lhs, rhs),
        space.describe(),
    )
    .with_aux("mu", mu)
    .with_aux("ratio_deviation", deviation);
    if deviation > DILATION_RATIO_TOL {
        rep.verdict = Verdict::Fail;
    }
    Ok(rep)
}

/// `T_p[w_ml] > 1` for `1 <= p <= m-1` and `w_ml <= w_m0` at interior nodes.
/// `lhs` is the smallest trace, `rhs = 1`, and the margin is the smaller of
/// `lhs - 1` and `min (w_m0 - w_ml)`.
pub fn check_w2<S: Space>(space: &S, w_ml: &S::Function, w_m0: &S::Function, m: usize, l: usize) -> Result<InequalityReport> {
    if !(1 <= l && l < m) {
        return arg_err(format!("need 1 <= l <= m-1 (got m={m}, l={l})"));
    }
    let res = extremal_residual(space, w_ml, m, l)?.max(extremal_residual(space, w_m0, m, 0)?);
    let hess = space.hessians(w_ml)?;
    let a = space.node_values(w_ml)?;
    let b = space.node_values(w_m0)?;
    let mut min_trace = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    for k in (0..space.node_count()).filter(|&k| space.is_interior(k)) {
        let t = crate::symfunc::traces(&hess[k]);
        for p in 1..m {
            min_trace = min_trace.min(t.get(p));
        }
        min_gap = min_gap.min(b[k] - a[k]);
    }
    let mut rep = InequalityReport::new(
        InequalityKind::W2,
        m,
        Some(l),
        min_trace,
        1.0,
        Orientation::LhsAtLeastRhs,
        tol(space, res, min_trace, 1.0),
        space.describe(),
    )
    .with_aux("min_trace", min_trace)
    .with_aux("min_gap", min_gap);
    rep.margin = rep.margin.min(min_gap);
    rep.verdict = if rep.margin >= -rep.tolerance { Verdict::Pass } else { Verdict::Fail };
    Ok(rep)
}
