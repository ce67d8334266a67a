//! Sobolev, Morrey, Trudinger and change-of-variables inequalities with
//! the weight `x^A`, evaluated by quadrature and checked against the
//! sharp or empirical constants.

pub mod cov;
pub mod morrey;
pub mod sobolev;
pub mod trudinger;

pub use cov::{cov_constants, cov_pipeline_agreement, cov_verify, CovConstants, Transported, COV_PIPELINE_TOL};
pub use morrey::{
    chaining_check, envelope_from_ratios, holder_exponent, holder_seminorm, morrey_check, morrey_potential_bound,
    morrey_quotient, sample_pairs, shape_diameter, sup_bound_check, sup_ratio, Envelope, MorreyQuotient,
    PotentialBound,
};
pub use sobolev::{extremal_function, sobolev_check, sobolev_norms, sobolev_quotient, sobolev_quotient_with, SOBOLEV_TOL};
pub use trudinger::{
    growth_c0, log_family_ln_functional, series_bound, series_criterion, trudinger_check, trudinger_exponent,
    trudinger_functional, trudinger_functional_with_exponent, SeriesCriterion,
};
