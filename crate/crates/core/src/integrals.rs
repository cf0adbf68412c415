//! Hessian integrals `I_m[u] = int (-u) T_m[u] dx`, the quotient functional
//! `J_{m,l}[u] = I_m[u]^{1/(m+1)} / I_l[u]^{1/(l+1)}`, their first and second
//! variations, and the weighted inner products
//! `<u, v>_p = int T_p^{ij}[w] u_i v_j dx`.
//!
//! Every quantity is generic over [`Space`], so the same code runs on radial
//! profiles over balls and on polar grids over discs.

use serde::{Deserialize, Serialize};

use crate::cones::{admissibility, ZERO_BOUNDARY_TOL};
use crate::error::{arg_err, Error, Result};
use crate::field::Space;
use crate::solver::{quotient_solution_residual, QUOTIENT_RESIDUAL_TOL};
use crate::symfunc::{m_trace, m_trace_gradient, SymMatrix};

/// Default step of the numeric variations.
pub const VARIATION_STEP: f64 = 1e-4;

fn check_order<S: Space>(space: &S, m: usize) -> Result<()> {
    if m > space.dim() {
        return arg_err(format!("order m={m} exceeds dimension n={}", space.dim()));
    }
    Ok(())
}

fn check_orders<S: Space>(space: &S, m: usize, l: usize) -> Result<()> {
    if l >= m {
        return arg_err(format!("need l < m (got l={l}, m={m})"));
    }
    check_order(space, m)
}

pub(crate) fn require_zero_boundary<S: Space>(space: &S, u: &S::Function, what: &str) -> Result<()> {
    let b = space.boundary_max_abs(u);
    if b > ZERO_BOUNDARY_TOL {
        return arg_err(format!("{what} must vanish on the boundary (max |boundary value| = {b:e})"));
    }
    Ok(())
}

/// `T_p[u]` at every node.
pub fn trace_field<S: Space>(space: &S, u: &S::Function, p: usize) -> Result<Vec<f64>> {
    check_order(space, p)?;
    space.hessians(u)?.iter().map(|h| m_trace(h, p)).collect()
}

/// `T_p^{ij}[u]` at every node (the zero matrix for `p = 0`).
pub fn gradient_field<S: Space>(space: &S, u: &S::Function, p: usize) -> Result<Vec<SymMatrix>> {
    check_order(space, p)?;
    space
        .hessians(u)?
        .iter()
        .map(|h| if p == 0 { Ok(SymMatrix::zeros(h.dim())) } else { m_trace_gradient(h, p) })
        .collect()
}

/// `int u dx`.
pub fn integral<S: Space>(space: &S, u: &S::Function) -> Result<f64> {
    space.integrate_against(u, &vec![1.0; space.node_count()])
}

/// `I_m[u] = int (-u) T_m[u] dx`; `I_0[u] = -int u dx`.
pub fn hessian_integral<S: Space>(space: &S, u: &S::Function, m: usize) -> Result<f64> {
    require_zero_boundary(space, u, "u")?;
    let t = trace_field(space, u, m)?;
    Ok(-space.integrate_against(u, &t)?)
}

/// `<u, v>_p = int T_p^{ij}[w] u_i v_j dx`. For `p = 1` this is the
/// Dirichlet inner product.
pub fn weighted_inner_product<S: Space>(
    space: &S,
    u: &S::Function,
    v: &S::Function,
    p: usize,
    w: &S::Function,
) -> Result<f64> {
    if p == 0 {
        return arg_err("inner products are defined for p >= 1");
    }
    let a = gradient_field(space, w, p)?;
    Ok(space.integrate(&space.gradient_form(&a, u, v)?))
}

/// Name of a recorded functional value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalKind {
    #[serde(rename = "I_m")]
    HessianIntegral,
    #[serde(rename = "J_ml")]
    Quotient,
    #[serde(rename = "dI")]
    FirstVariation,
    #[serde(rename = "d2I")]
    SecondVariationI,
    #[serde(rename = "d2J")]
    SecondVariationJ,
    #[serde(rename = "inner_p")]
    InnerProduct,
}

/// A functional evaluated on a concrete discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub name: FunctionalKind,
    pub value: f64,
    pub m: usize,
    pub l: Option<usize>,
    pub grid_spec: String,
    /// Whether the argument was certified m-admissible; `None` when the
    /// functional does not depend on admissibility.
    pub admissible: Option<bool>,
}

/// [`hessian_integral`] together with an admissibility flag. The value
/// exists for any `u` with zero boundary data, but it is guaranteed to be
/// nonnegative only when the flag is set.
pub fn evaluate_hessian_integral<S: Space>(space: &S, u: &S::Function, m: usize) -> Result<FunctionalValue> {
    let value = hessian_integral(space, u, m)?;
    let admissible = if m == 0 { None } else { Some(admissibility(space, u, m)?.admissible) };
    Ok(FunctionalValue {
        name: FunctionalKind::HessianIntegral,
        value,
        m,
        l: None,
        grid_spec: space.describe(),
        admissible,
    })
}

/// `J_{m,l}[u] = I_m[u]^{1/(m+1)} / I_l[u]^{1/(l+1)}`.
pub fn functional_j<S: Space>(space: &S, u: &S::Function, m: usize, l: usize) -> Result<f64> {
    check_orders(space, m, l)?;
    let im = hessian_integral(space, u, m)?;
    let il = hessian_integral(space, u, l)?;
    if !(il > 0.0) {
        return Err(Error::Domain(format!("I_{l}[u] = {il:e} is not positive")));
    }
    if im < 0.0 {
        return Err(Error::Domain(format!("I_{m}[u] = {im:e} is negative")));
    }
    Ok(im.powf(1.0 / (m + 1) as f64) / il.powf(1.0 / (l + 1) as f64))
}

/// [`functional_j`] as a recorded value, flagged by admissibility of order `m`.
pub fn evaluate_functional_j<S: Space>(space: &S, u: &S::Function, m: usize, l: usize) -> Result<FunctionalValue> {
    let value = functional_j(space, u, m, l)?;
    Ok(FunctionalValue {
        name: FunctionalKind::Quotient,
        value,
        m,
        l: Some(l),
        grid_spec: space.describe(),
        admissible: Some(admissibility(space, u, m)?.admissible),
    })
}

/// Both evaluations of `d/dt I_m[u + t h]` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstVariation {
    /// Central difference with step `eps`.
    pub direct: f64,
    /// Central difference with step `eps / 2`.
    pub direct_half: f64,
    /// Richardson combination of the two differences.
    pub extrapolated: f64,
    /// `-(m+1) int h T_m[u] dx`.
    pub identity: f64,
}

fn perturbed<S: Space>(space: &S, u: &S::Function, h: &S::Function, t: f64) -> Result<S::Function> {
    space.lin_comb(1.0, u, t, h)
}

fn central_difference<S: Space>(
    space: &S,
    u: &S::Function,
    h: &S::Function,
    eps: f64,
    f: &impl Fn(&S::Function) -> Result<f64>,
) -> Result<f64> {
    let plus = f(&perturbed(space, u, h, eps)?)?;
    let minus = f(&perturbed(space, u, h, -eps)?)?;
    Ok((plus - minus) / (2.0 * eps))
}

fn second_difference<S: Space>(
    space: &S,
    u: &S::Function,
    h: &S::Function,
    eps: f64,
    f: &impl Fn(&S::Function) -> Result<f64>,
) -> Result<f64> {
    let plus = f(&perturbed(space, u, h, eps)?)?;
    let mid = f(u)?;
    let minus = f(&perturbed(space, u, h, -eps)?)?;
    Ok((plus - 2.0 * mid + minus) / (eps * eps))
}

/// First variation of `I_m` at `u` in direction `h`, by symmetric differences
/// and by the integrated-by-parts form.
pub fn first_variation_i<S: Space>(
    space: &S,
    u: &S::Function,
    h: &S::Function,
    m: usize,
    eps: f64,
) -> Result<FirstVariation> {
    require_zero_boundary(space, h, "the direction h")?;
    let f = |v: &S::Function| hessian_integral(space, v, m);
    let direct = central_difference(space, u, h, eps, &f)?;
    let direct_half = central_difference(space, u, h, 0.5 * eps, &f)?;
    let t = trace_field(space, u, m)?;
    let identity = -((m + 1) as f64) * space.integrate_against(h, &t)?;
    Ok(FirstVariation { direct, direct_half, extrapolated: (4.0 * direct_half - direct) / 3.0, identity })
}

/// A second variation evaluated analytically and by a second difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondVariation {
    pub analytic: f64,
    pub numeric: f64,
}

/// `(m+1) int T_m^{ij}[u] h_i h_j dx`, cross-checked by the second difference
/// of `t -> I_m[u + t h]`.
pub fn second_variation_i<S: Space>(
    space: &S,
    u: &S::Function,
    h: &S::Function,
    m: usize,
    eps: f64,
) -> Result<SecondVariation> {
    require_zero_boundary(space, h, "the direction h")?;
    if m == 0 {
        return Ok(SecondVariation { analytic: 0.0, numeric: 0.0 });
    }
    let a = gradient_field(space, u, m)?;
    let analytic = (m + 1) as f64 * space.integrate(&space.gradient_form(&a, h, h)?);
    let numeric = second_difference(space, u, h, eps, &|v| hessian_integral(space, v, m))?;
    Ok(SecondVariation { analytic, numeric })
}

/// Second variation of `J_{m,l}` at a quotient solution `w`:
/// `(J/I) [ ((l-m)/I) (int h T_m[w])^2 + int (T_m^{ij} - T_l^{ij})[w] h_i h_j ]`
/// with `I = I_m[w]`, cross-checked by the second difference of
/// `t -> J_{m,l}[w + t h]`.
pub fn second_variation_j<S: Space>(
    space: &S,
    w: &S::Function,
    h: &S::Function,
    m: usize,
    l: usize,
    eps: f64,
) -> Result<SecondVariation> {
    check_orders(space, m, l)?;
    require_zero_boundary(space, h, "the direction h")?;
    let res = quotient_solution_residual(space, w, m, l)?;
    if res > QUOTIENT_RESIDUAL_TOL {
        return arg_err(format!("w does not solve T_m[w] = T_l[w] (residual {res:e})"));
    }
    let im = hessian_integral(space, w, m)?;
    let j = functional_j(space, w, m, l)?;
    let tm = trace_field(space, w, m)?;
    let moment = space.integrate_against(h, &tm)?;
    let am = gradient_field(space, w, m)?;
    let al = gradient_field(space, w, l)?;
    let diff: Vec<SymMatrix> = am.iter().zip(&al).map(|(a, b)| a.add(&b.scaled(-1.0))).collect();
    let form = space.integrate(&space.gradient_form(&diff, h, h)?);
    let analytic = j / im * ((l as f64 - m as f64) / im * moment * moment + form);
    let numeric = second_difference(space, w, h, eps, &|v| functional_j(space, v, m, l))?;
    Ok(SecondVariation { analytic, numeric })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Domain;
    use crate::field::{BallSpace, GridFunction2D, PolarGrid};
    use crate::symfunc::binomial;
    use std::f64::consts::PI;

    #[test]
    fn quadratic_integral_closed_form() {
        let space = BallSpace::new(3, 1.0, 129).unwrap();
        let a = 3f64.powf(-0.5);
        let w = space.function(|r| a * (r * r - 1.0) / 2.0);
        let exact = binomial(3, 2) * a.powi(3) * (4.0 * PI / 3.0) / 5.0;
        let got = hessian_integral(&space, &w, 2).unwrap();
        assert!((got - exact).abs() < 1e-12 * exact, "{got} {exact}");
        assert!((exact - 0.48368).abs() < 1e-5);
        let zero = space.function(|_| 0.0);
        assert_eq!(hessian_integral(&space, &zero, 2).unwrap(), 0.0);
        let lifted = space.function(|r| r * r);
        assert!(hessian_integral(&space, &lifted, 1).is_err());
    }

    #[test]
    fn homogeneity() {
        let space = BallSpace::new(3, 1.0, 65).unwrap();
        let u = space.function(|r| (r * r - 1.0) * (1.0 + 0.3 * r * r));
        for m in 1..=3 {
            let base = hessian_integral(&space, &u, m).unwrap();
            for mu in [0.5, 2.0, 7.0] {
                let scaled = space.lin_comb(mu, &u, 0.0, &u).unwrap();
                let v = hessian_integral(&space, &scaled, m).unwrap();
                assert!((v - mu.powi(m as i32 + 1) * base).abs() < 1e-10 * v.abs());
            }
        }
        let j = functional_j(&space, &u, 2, 0).unwrap();
        let scaled = space.lin_comb(3.0, &u, 0.0, &u).unwrap();
        assert!((functional_j(&space, &scaled, 2, 0).unwrap() - j).abs() < 1e-10 * j);
        assert!(functional_j(&space, &u, 1, 1).is_err());
    }

    #[test]
    fn j_golden_value() {
        let space = BallSpace::new(3, 1.0, 129).unwrap();
        let a = 3f64.powf(-0.5);
        let w = space.function(|r| a * (r * r - 1.0) / 2.0);
        let i = hessian_integral(&space, &w, 2).unwrap();
        let j = functional_j(&space, &w, 2, 0).unwrap();
        assert!((j - i.powf(1.0 / 3.0 - 1.0)).abs() < 1e-12);
        assert!((j - 1.6233).abs() < 1e-3, "{j}");
        let v = evaluate_functional_j(&space, &w, 2, 0).unwrap();
        assert_eq!(v.admissible, Some(true));
    }

    #[test]
    fn inner_product_p1_is_dirichlet() {
        let g = PolarGrid::new(Domain::disc(1.0).unwrap(), 33, 32).unwrap();
        let w = GridFunction2D::from_fn(&g, |x, y| 0.5 * (x * x + y * y - 1.0));
        let u = GridFunction2D::from_fn(&g, |x, y| (1.0 - x * x - y * y) * (1.0 + x));
        let v = GridFunction2D::from_fn(&g, |x, y| (1.0 - x * x - y * y) * y * y);
        let uv = weighted_inner_product(&g, &u, &v, 1, &w).unwrap();
        let vu = weighted_inner_product(&g, &v, &u, 1, &w).unwrap();
        assert!((uv - vu).abs() < 1e-12);
        let gu = u.gradient();
        let gv = v.gradient();
        let dot: Vec<f64> = gu.iter().zip(&gv).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).collect();
        assert!((g.integrate(&dot) - uv).abs() < 1e-12);
        assert!(weighted_inner_product(&g, &u, &u, 2, &w).unwrap() > 0.0);
    }

    #[test]
    fn zero_direction_variations_vanish() {
        let space = BallSpace::new(3, 1.0, 33).unwrap();
        let w = space.function(|r| 0.5 * (r * r - 1.0));
        let h = space.function(|_| 0.0);
        let fv = first_variation_i(&space, &w, &h, 2, VARIATION_STEP).unwrap();
        assert_eq!((fv.direct, fv.identity), (0.0, 0.0));
        let sv = second_variation_i(&space, &w, &h, 2, VARIATION_STEP).unwrap();
        assert_eq!(sv.analytic, 0.0);
        assert!(sv.numeric.abs() < 1e-6);
    }

    #[test]
    fn second_variation_laplacian_case() {
        // m = 1: (m+1) int T_1^{ij} h_i h_j = 2 int |h_x|^2
        let g = PolarGrid::new(Domain::disc(1.0).unwrap(), 33, 32).unwrap();
        let u = GridFunction2D::from_fn(&g, |x, y| x * x + y * y - 1.0);
        let h = GridFunction2D::from_fn(&g, |x, y| (1.0 - x * x - y * y) * (x + 0.5));
        let sv = second_variation_i(&g, &u, &h, 1, VARIATION_STEP).unwrap();
        let dir = weighted_inner_product(&g, &h, &h, 1, &u).unwrap();
        assert!((sv.analytic - 2.0 * dir).abs() < 1e-12);
        // the discrete operator is self-adjoint only up to O(h^2)
        assert!((sv.numeric - sv.analytic).abs() < 1e-3 * sv.analytic, "{} {}", sv.numeric, sv.analytic);
    }
}
