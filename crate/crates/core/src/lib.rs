//! m-Hessian operators: m-traces of symmetric matrices, Garding cones,
//! discrete Hessian fields, Hessian integrals, Dirichlet solvers for
//! m-Hessian and Hessian-quotient equations, and numerical checks of the
//! associated sharp inequalities.

pub mod band;
pub mod cones;
pub mod error;
pub mod field;
pub mod inequalities;
pub mod integrals;
pub mod solver;
pub mod symfunc;

pub use cones::{AdmissibilityReport, Domain};
pub use error::{Error, Result};
pub use inequalities::{InequalityKind, InequalityReport, Verdict};
pub use integrals::FunctionalValue;
pub use solver::{DirichletProblem, DirichletSolution, NewtonOptions, Rhs};
pub use field::{BallFunction, BallSpace, GridFunction2D, PolarGrid, RadialFunction, Space};
pub use symfunc::{ConeVerdict, SymMatrix, TraceVector};
