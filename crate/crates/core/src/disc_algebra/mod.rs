//! Möbius maps, finite Blaschke products, coverings of the (punctured) disc
//! and lifts through Blaschke products.

pub mod blaschke;
pub mod covering;
pub mod jensen;
pub mod lift;
pub mod mobius;

pub use blaschke::{BlaschkeProduct, CriticalData, Decritalized, Perturbed, Zero};
pub use covering::{covering_map, polar_grid, CoveringKind, CoveringMap};
pub use jensen::{circle_log_mean, jensen_certificate, jensen_mean, JensenCertificate};
pub use lift::{lift, IntegratorSettings, LiftedMap};
pub use mobius::{DiscPoint, MobiusAut};
