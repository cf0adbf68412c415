//! Discrete checks of the divergence structure of m-Hessian operators, and
//! the m-curvature of a graph.
//!
//! Fluxes are formed node by node from the discrete Hessian and then
//! differentiated again with the same stencils, so the residuals measure how
//! far the discrete operator is from its divergence form. Residuals are taken
//! over nodes whose flux stencils avoid the boundary ring: boundary fluxes use
//! one-sided Hessians whose different truncation constant would otherwise
//! turn an O(h^2) flux error into an O(h) derivative error.

use std::sync::Arc;

use super::grid::{grid_hessian, GridFunction2D};
use super::radial::{radial_trace, RadialFunction};
use crate::error::{arg_err, Result};
use crate::symfunc::{binomial, m_trace, m_trace_gradient, SymMatrix};

fn check_order(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return arg_err(format!("order m={m} outside 1..={n}"));
    }
    Ok(())
}

// Interior nodes whose first-derivative stencils use interior values only.
fn deep_interior(u: &GridFunction2D) -> impl Iterator<Item = usize> + '_ {
    let g = u.grid();
    (0..g.unknown_count()).filter(move |&k| g.ring_angle(k).0 + 4 <= g.nr())
}

fn divergence(u: &GridFunction2D, fx: &[f64], fy: &[f64]) -> Vec<f64> {
    let g = u.grid();
    (0..g.node_count())
        .map(|k| g.derivatives_at(fx, k)[0] + g.derivatives_at(fy, k)[1])
        .collect()
}

/// `max |T_m[u] - (1/m) d_i(u_j T_m^{ij}[u])|` over interior grid nodes.
pub fn divergence_identity_residual(u: &GridFunction2D, m: usize) -> Result<f64> {
    check_order(m, 2)?;
    let g = u.grid();
    let hess = grid_hessian(u)?;
    let grad = u.gradient();
    let mut fx = vec![0.0; g.node_count()];
    let mut fy = vec![0.0; g.node_count()];
    let mut tm = vec![0.0; g.node_count()];
    for k in 0..g.node_count() {
        let t = m_trace_gradient(&hess[k], m)?;
        fx[k] = t.get(0, 0) * grad[k][0] + t.get(0, 1) * grad[k][1];
        fy[k] = t.get(1, 0) * grad[k][0] + t.get(1, 1) * grad[k][1];
        tm[k] = m_trace(&hess[k], m)?;
    }
    let div = divergence(u, &fx, &fy);
    Ok(deep_interior(u).map(|k| (tm[k] - div[k] / m as f64).abs()).fold(0.0, f64::max))
}

/// Radial form of [`divergence_identity_residual`] for `w(|x|)` in `R^n`.
///
/// The flux `u_j T_m^{ij}` is the radial field `C(n-1,m-1) w' (w'/r)^{m-1} e_r`,
/// whose divergence is `F' + (n-1) F / r` (`n F'(0)` at the pole).
pub fn radial_divergence_identity_residual(w: &RadialFunction, n: usize, m: usize) -> Result<f64> {
    check_order(m, n)?;
    let eig = w.radial_eigenvalues();
    let (d1, _) = w.derivatives(true);
    let c = binomial(n - 1, m - 1);
    let flux: Vec<f64> = eig.iter().zip(&d1).map(|((_, q), dw)| c * dw * q.powi(m as i32 - 1)).collect();
    let flux = RadialFunction::new(w.radius(), flux)?;
    let (df, _) = flux.derivatives(false);
    let mut worst: f64 = 0.0;
    for i in 0..w.len() - 2 {
        let div = if i == 0 { n as f64 * df[0] } else { df[i] + (n - 1) as f64 * flux.values()[i] / w.node(i) };
        let (d2, q) = eig[i];
        worst = worst.max((radial_trace(n, m, d2, q) - div / m as f64).abs());
    }
    Ok(worst)
}

/// `max_j max |sum_i d_i T_m^{ij}[u]|` over interior grid nodes.
pub fn cofactor_divergence_residual(u: &GridFunction2D, m: usize) -> Result<f64> {
    check_order(m, 2)?;
    let grads = grid_hessian(u)?.iter().map(|h| m_trace_gradient(h, m)).collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for j in 0..2 {
        let fx: Vec<f64> = grads.iter().map(|t| t.get(0, j)).collect();
        let fy: Vec<f64> = grads.iter().map(|t| t.get(1, j)).collect();
        let div = divergence(u, &fx, &fy);
        worst = deep_interior(u).fold(worst, |a, k| a.max(div[k].abs()));
    }
    Ok(worst)
}

/// `T_m(v_x)` for the normalized gradient `v = u_x / sqrt(1 + |u_x|^2)`: the
/// m-curvature of the graph of `u`.
pub fn graph_curvature(u: &GridFunction2D, m: usize) -> Result<GridFunction2D> {
    check_order(m, 2)?;
    let g = u.grid();
    let grad = u.gradient();
    let (vx, vy): (Vec<f64>, Vec<f64>) = grad
        .iter()
        .map(|p| {
            let s = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
            (p[0] / s, p[1] / s)
        })
        .unzip();
    let values = (0..g.node_count())
        .map(|k| {
            let dx = g.derivatives_at(&vx, k);
            let dy = g.derivatives_at(&vy, k);
            let jac = SymMatrix::from_fn(2, |i, j| match (i, j) {
                (0, 0) => dx[0],
                (1, 1) => dy[1],
                _ => 0.5 * (dx[1] + dy[0]),
            });
            m_trace(&jac, m)
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction2D::new(&Arc::clone(g), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Domain;
    use crate::field::PolarGrid;

    #[test]
    fn radial_quadratic_exact() {
        for n in 2..=6 {
            let w = RadialFunction::from_fn(1.3, 17, |r| 0.7 * (r * r - 1.69) / 2.0).unwrap();
            for m in 1..=n {
                let r = radial_divergence_identity_residual(&w, n, m).unwrap();
                assert!(r < 1e-11, "n={n} m={m} residual {r}");
            }
        }
    }

    #[test]
    fn grid_bowl_exact() {
        let g = PolarGrid::new(Domain::disc(1.0).unwrap(), 17, 32).unwrap();
        let u = GridFunction2D::from_fn(&g, |x, y| 0.5 * (x * x + y * y));
        for m in 1..=2 {
            assert!(divergence_identity_residual(&u, m).unwrap() < 1e-9);
            assert!(cofactor_divergence_residual(&u, m).unwrap() < 1e-9);
        }
        assert!(divergence_identity_residual(&u, 3).is_err());
    }

    #[test]
    fn graph_curvature_examples() {
        let g = PolarGrid::new(Domain::disc(1.0).unwrap(), 33, 64).unwrap();
        let flat = GridFunction2D::zeros(&g);
        assert!(graph_curvature(&flat, 2).unwrap().values().iter().all(|v| *v == 0.0));
        let rho: f64 = 2.0;
        let cap = GridFunction2D::from_fn(&g, |x, y| -(rho * rho - x * x - y * y).sqrt());
        let k1 = graph_curvature(&cap, 1).unwrap();
        let k2 = graph_curvature(&cap, 2).unwrap();
        // one-sided stencils on the rim are less accurate; stay away from it
        for k in (0..g.node_count()).filter(|&k| g.ring_angle(k).0 + 4 <= g.nr()) {
            assert!((k1.values()[k] - 2.0 / rho).abs() < 1e-3, "{k} {}", k1.values()[k]);
            assert!((k2.values()[k] - 1.0 / (rho * rho)).abs() < 1e-3);
        }
    }
}
