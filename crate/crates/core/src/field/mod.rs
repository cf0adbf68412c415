//! Discrete function spaces: radial profiles on balls and mapped polar grids
//! on planar domains, with finite-difference Hessians and m-Hessian fields.

mod grid;
mod identities;
pub mod io;
pub mod quadrature;
mod radial;

pub use grid::{
    grid_hessian, m_hessian_field, GridFunction2D, HessianField, PolarGrid, Weights, GRID_MIN_NR, GRID_MIN_NTHETA,
};
pub use identities::{
    cofactor_divergence_residual, divergence_identity_residual, graph_curvature, radial_divergence_identity_residual,
};
pub use quadrature::{QuadratureKind, QuadratureRule};
pub use radial::{
    radial_m_hessian, radial_trace, BallFunction, BallSpace, HarmonicTerm, RadialFunction, RADIAL_MIN_NODES,
};

use crate::cones::Domain;
use crate::error::Result;
use crate::symfunc::SymMatrix;

/// A discretized domain together with its function type.
///
/// Everything the integrals and inequality checks need goes through this
/// trait, so they run unchanged on balls (radial nodes) and on polar grids.
pub trait Space {
    type Function: Clone;

    fn dim(&self) -> usize;
    fn domain(&self) -> Domain;
    fn node_count(&self) -> usize;
    fn quadrature(&self) -> &QuadratureRule;
    /// Characteristic mesh width, used by tolerance budgets.
    fn mesh_width(&self) -> f64;
    fn is_interior(&self, node: usize) -> bool;
    /// Hessian at every node, in a frame where `T_p^{ij}` contracts with
    /// [`Space::gradient_form`].
    fn hessians(&self, u: &Self::Function) -> Result<Vec<SymMatrix>>;
    fn node_values(&self, u: &Self::Function) -> Result<Vec<f64>>;
    /// `int u * weight dx` for a nodal weight that is radial on balls.
    fn integrate_against(&self, u: &Self::Function, weight: &[f64]) -> Result<f64>;
    /// Nodal integrand of `A^{ij} u_i v_j`. On balls it is averaged over
    /// spheres, so only its integral is meaningful there.
    fn gradient_form(&self, a: &[SymMatrix], u: &Self::Function, v: &Self::Function) -> Result<Vec<f64>>;
    fn boundary_max_abs(&self, u: &Self::Function) -> f64;
    fn lin_comb(&self, s: f64, u: &Self::Function, t: f64, v: &Self::Function) -> Result<Self::Function>;
    /// Short human-readable description of the discretization.
    fn describe(&self) -> String;

    fn integrate(&self, f: &[f64]) -> f64 {
        self.quadrature().integrate(f)
    }
}
