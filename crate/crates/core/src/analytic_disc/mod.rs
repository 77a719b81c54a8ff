//! Polynomial analytic discs into `C^n`, the domains they are certified
//! against, preimage sets and closed-form Green function values.

pub mod disc;
pub mod domain;
pub mod green;

pub use disc::{AnalyticDisc, PreimageSet, DEFAULT_RANGE_GRID, PREIMAGE_TOL};
pub use domain::{Domain, Monomial, Point};
pub use green::{
    contractibility_from_values, contractibility_lower_bound, green_disc_oracle, green_oracle,
    green_polydisc_oracle, poletsky_value, GreenMethod, GreenQuery, GreenValue,
};
