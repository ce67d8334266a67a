//! Numerics for the monomial weight `x^A = |x₁|^{A₁}⋯|xₙ|^{Aₙ}` on ℝⁿ_*:
//! sharp constants, weighted quadrature, isoperimetric comparisons,
//! symmetric decreasing rearrangement, Sobolev/Morrey/Trudinger checks and a
//! cut-cell Neumann solver.

pub mod corpus;
pub mod error;
pub mod exec;
pub mod function;
pub mod inequalities;
pub mod integrals;
pub mod isoperimetry;
pub mod neumann;
pub mod quadrature;
pub mod rearrangement;
pub mod region;
pub mod report;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
pub use exec::Exec;
pub use weights::WeightVector;
