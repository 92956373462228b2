//! Stochastic calculus on finite-dimensional truncations of nilpotent Lie groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`] – nilpotent Lie algebras given by structure constants in an
//!   orthonormal basis, their constructors and axiom checks.
//! * [`bchd`] – the Baker–Campbell–Hausdorff–Dynkin group law, path length and a
//!   Riemannian distance upper bound.
//! * [`combinatorics`] – permutation descents, Strichartz coefficients, the
//!   Itô/Stratonovich multi-indices, simplex polynomials and contraction operators.
//! * [`stochastic`] – Brownian paths, discrete iterated Itô integrals and the
//!   group Brownian motion built from them.
//! * [`geometry`] – Ricci curvature of the left-invariant metric and gradients of
//!   cylinder polynomials.
//! * [`experiments`] – Monte Carlo verification of the Harnack and log-Sobolev
//!   inequalities, projection convergence and closed-form moment checks.

pub mod algebra;
pub mod bchd;
pub mod combinatorics;
mod error;
pub mod experiments;
pub mod geometry;
pub mod stochastic;

pub use algebra::LieAlgebra;
pub use bchd::{BchdLaw, GroupElement};
pub use error::{Error, Result};

/// Tolerance used for all exact algebraic identities in double precision.
pub const ALGEBRA_TOL: f64 = 1e-12;
