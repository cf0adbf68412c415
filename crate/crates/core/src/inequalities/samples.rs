//! Extremals and random test functions for each discretization.
//!
//! Admissible samples are radial profiles `u' = r g(r)` with `g` a random
//! even polynomial, tilted on planar grids, kept only if they pass the cone
//! certificate. Smooth samples are truncated harmonic sums that vanish on
//! the boundary.

use std::sync::Arc;

use rand::Rng;

use crate::cones::admissibility;
use crate::error::{Error, Result};
use crate::field::{BallFunction, BallSpace, GridFunction2D, PolarGrid, Space};
use crate::solver::{solve_grid_newton, solve_radial_quadratic, DirichletProblem, NewtonOptions, Rhs};

/// Attempts per admissible sample before giving up.
const MAX_ATTEMPTS: usize = 1000;

/// Highest harmonic degree in smooth samples.
const MAX_DEGREE: usize = 3;

pub trait Sampling: Space + Sized {
    /// The nonpositive solution of `T_m[w] = T_l[w]`, `w = 0` on the boundary.
    fn extremal(&self, m: usize, l: usize) -> Result<Self::Function>;

    /// Candidate that vanishes on the boundary and is usually in `K_m`.
    fn admissible_candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Function;

    /// Smooth function with zero boundary data, no cone condition.
    fn random_smooth<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Function;

    /// Rejection-filtered sample of the cone `K_m` with zero boundary data.
    fn random_admissible<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Result<Self::Function> {
        for _ in 0..MAX_ATTEMPTS {
            let u = self.admissible_candidate(rng);
            if admissibility(self, &u, m)?.admissible {
                return Ok(u);
            }
        }
        Err(Error::Domain(format!("no admissible sample for m={m} after {MAX_ATTEMPTS} attempts")))
    }
}

// coefficients of g(s) = sum c_k s^{2k}; c_0 > 0 keeps the center strictly convex
fn profile_coefficients<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [rng.random_range(0.2..2.0), rng.random_range(-0.5..1.5), rng.random_range(-0.5..1.5)]
}

// u(s) with u'(s) = s g(s), u(1) = 0, in the unit variable s = r/R
fn profile_value(c: &[f64; 3], s: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, ck)| {
            let p = 2 * k as i32 + 2;
            ck * (s.powi(p) - 1.0) / p as f64
        })
        .sum()
}

impl Sampling for BallSpace {
    fn extremal(&self, m: usize, l: usize) -> Result<BallFunction> {
        let (_, w) = solve_radial_quadratic(self.dim(), m, l, self.radius(), self.nodes())?;
        Ok(BallFunction::radial(w))
    }

    fn admissible_candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> BallFunction {
        let c = profile_coefficients(rng);
        let r2 = self.radius() * self.radius();
        let radius = self.radius();
        self.function(|r| r2 * profile_value(&c, r / radius))
    }

    fn random_smooth<R: Rng + ?Sized>(&self, rng: &mut R) -> BallFunction {
        let radius = self.radius();
        let mut u = self.function(|_| 0.0);
        u.terms.clear();
        for k in 0..=MAX_DEGREE {
            let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let profile = self.profile(|r| {
                let s = r / radius;
                s.powi(k as i32) * (1.0 - s * s) * (a + b * s * s)
            });
            u = u.with_term(k, profile);
        }
        u
    }
}

impl Sampling for Arc<PolarGrid> {
    fn extremal(&self, m: usize, l: usize) -> Result<GridFunction2D> {
        let problem = DirichletProblem::new(self.domain(), m, l, Rhs::constant(1.0))?;
        let sol = solve_grid_newton(&problem, self.nr(), self.ntheta(), &NewtonOptions::grid())?;
        GridFunction2D::new(self, sol.w.values().to_vec())
    }

    fn admissible_candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction2D {
        let c = profile_coefficients(rng);
        let tilt = rng.random_range(-0.3..0.3);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let (a, b) = self.axes();
        let scale = a * b;
        GridFunction2D::from_polar_fn(self, |rho, theta| {
            scale * profile_value(&c, rho) * (1.0 + tilt * rho * (theta - phase).cos())
        })
    }

    fn random_smooth<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction2D {
        let c: Vec<f64> = (0..2 * MAX_DEGREE + 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        GridFunction2D::from_polar_fn(self, |rho, theta| {
            let mut f = c[0];
            for k in 1..=MAX_DEGREE {
                let rk = rho.powi(k as i32);
                f += rk * (c[2 * k - 1] * (k as f64 * theta).cos() + c[2 * k] * (k as f64 * theta).sin());
            }
            (1.0 - rho * rho) * f
        })
    }
}
