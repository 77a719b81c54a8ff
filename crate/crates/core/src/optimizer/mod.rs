//! Derivative-free search over polynomial discs for Green-function upper
//! bounds.

mod gap;
mod nelder_mead;
mod search;

pub use gap::{bidisc_grid_pairs, product_gap_report, write_gap_csv, GapRow, GAP_FLOOR};
pub use search::{upper_bound_search, DiscParametrization, OptimizerConfig, UpperBoundResult, SLOT_MAX_MODULUS};
