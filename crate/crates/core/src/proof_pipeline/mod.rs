//! Product-disc construction: from one disc per factor beating a level `N`,
//! build a certified disc into the product beating the same level.

pub mod certificate;
pub mod factor;
pub mod pipeline;
pub mod verify;

pub use certificate::{
    Gamma, GammaDescription, PipelineConfig, ProductDiscCertificate, RadiusPolicy, StageRecord,
    Tolerances,
};
pub use factor::{
    equalize_products, move_preimages, reduce_to_minimal, simplify_multiplicities, FactorDiscData,
    NormalizationReport, ReductionRecord, SimplificationRecord,
};
pub use pipeline::{run_pipeline, schedule_radius, PipelineInput};
pub use verify::{verify_certificate, verify_certificate_with, Check, VerificationReport};
