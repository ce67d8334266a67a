//! Weighted Neumann problem `div(x^A ∇u) = b x^A`, `∂u/∂ν = 1` on planar
//! domains kept away from the coordinate axes.
//!
//! Cell-centered finite volumes on a Cartesian grid with cut cells: the
//! boundary is the marching-squares polygon of a level set, face
//! coefficients are weighted wet-face lengths, and the compatibility
//! constant is `b = P_h/m_h` of that polygon.

mod domain;
mod export;
mod solver;

pub use domain::{BoundarySegment, Cell, GridDomain2D, Shape2D, AXIS_MARGIN};
pub use export::{decode_mask, encode_mask, grid_function_csv, DomainExport};
pub use solver::{
    ball_solution_certificate, compatibility_report, compatibility_tolerance, convergence_order, flux_apply,
    operator_apply, operator_apply_with, solve_neumann, solve_neumann_with, weighted_inner, NeumannSolution,
    SolverOptions, SOLVER_REL_TOL,
};
