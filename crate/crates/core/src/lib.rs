pub mod analytic_disc;
pub mod disc_algebra;
pub mod error;
pub mod optimizer;
pub mod poly;
pub mod proof_pipeline;

pub use error::{Error, Result};
