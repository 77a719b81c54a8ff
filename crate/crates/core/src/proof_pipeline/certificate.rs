use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::factor::{NormalizationReport, ReductionRecord, SimplificationRecord};
use crate::analytic_disc::{AnalyticDisc, Domain, Point};
use crate::disc_algebra::{lift, BlaschkeProduct, CoveringMap, DiscPoint, IntegratorSettings, JensenCertificate, LiftedMap};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusPolicy {
    /// Smallest `k` for which the Jensen bound holds at `r = 1 − 2^{−k}`.
    FirstValid,
    /// Exactly `r = 1 − 2^{−k}`.
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub delta: f64,
    pub radius_policy: RadiusPolicy,
    pub max_radius_index: u32,
    pub branch: usize,
    pub integrator: IntegratorSettings,
    pub range_grid: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            delta: 1e-6,
            radius_policy: RadiusPolicy::FirstValid,
            max_radius_index: 20,
            branch: 0,
            integrator: IntegratorSettings::default(),
            range_grid: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub basepoint: f64,
    pub preimage: f64,
    pub lift_residual: f64,
    pub jensen_consistency: f64,
    pub identity: f64,
    /// Relative agreement required between recorded and recomputed values.
    pub replay: f64,
    pub zero_match: f64,
    pub margin_rays: usize,
    pub margin_radii: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            basepoint: 1e-8,
            preimage: 1e-6,
            lift_residual: 1e-6,
            jensen_consistency: 1e-6,
            identity: 1e-7,
            replay: 1e-9,
            zero_match: 1e-8,
            margin_rays: 32,
            margin_radii: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecritalizationRecord {
    pub factor: u8,
    pub changed: bool,
    pub delta_used: f64,
    pub basepoint_residual: f64,
    pub separation: f64,
    pub zeros: Vec<Complex64>,
    pub range_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringRecord {
    pub critical_values: Vec<Complex64>,
    pub basepoint_value: Complex64,
    /// Distance from the basepoint value to the nearest critical value.
    pub basepoint_clearance: Option<f64>,
    pub branch: usize,
    pub mu: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub factor: u8,
    pub grid_residual: f64,
    pub reach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusAttempt {
    pub index: u32,
    pub radius: f64,
    pub gap: f64,
    pub zero_count: usize,
    pub identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyRecord {
    pub basepoint_residual: f64,
    pub preimage_residual: f64,
    pub min_margin: f64,
    pub jensen_consistency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageRecord {
    Shortcut { factor: u8, value: f64 },
    Simplification {
        factor: u8,
        #[serde(flatten)]
        record: SimplificationRecord,
    },
    Reduction {
        factor: u8,
        #[serde(flatten)]
        record: ReductionRecord,
    },
    Normalization(NormalizationReport),
    Decritalization(DecritalizationRecord),
    Covering(CoveringRecord),
    Lift(LiftRecord),
    Radius { chosen: RadiusAttempt, attempts: Vec<RadiusAttempt> },
    Assembly(AssemblyRecord),
}

/// Everything needed to evaluate the product disc `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaDescription {
    /// `γ(λ) = (φ₁(ψ₁(rλ)), φ₂(ψ₂(rλ)))` with `B_i ∘ ψ_i = π`.
    Composed {
        discs: [AnalyticDisc; 2],
        blaschke: [BlaschkeProduct; 2],
        covering: CoveringMap,
        integrator: IntegratorSettings,
        radius: f64,
        radius_index: u32,
    },
    /// A polynomial disc into the product, used when one factor's pole is
    /// its base point.
    Polynomial { disc: AnalyticDisc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDiscCertificate {
    pub level: f64,
    pub domains: [Domain; 2],
    /// `(a₁, b₁)`.
    pub pole: [Point; 2],
    /// `(a₂, b₂)`.
    pub base: [Point; 2],
    pub inputs: [AnalyticDisc; 2],
    pub config: PipelineConfig,
    pub tolerances: Tolerances,
    pub stages: Vec<StageRecord>,
    pub gamma: GammaDescription,
    /// Preimages of the pole under `γ`, repeated by multiplicity.
    pub gamma_zeros: Vec<DiscPoint>,
    pub achieved: f64,
    pub jensen: Option<JensenCertificate>,
}

impl ProductDiscCertificate {
    pub fn product_domain(&self) -> Domain {
        Domain::product(self.domains.to_vec())
    }

    pub fn product_pole(&self) -> Point {
        self.pole.concat()
    }

    pub fn product_base(&self) -> Point {
        self.base.concat()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Evaluable form of [`GammaDescription`].
pub enum Gamma {
    Composed {
        discs: [AnalyticDisc; 2],
        lifts: [LiftedMap; 2],
        radius: f64,
    },
    Polynomial(AnalyticDisc),
}

impl Gamma {
    pub fn build(desc: &GammaDescription) -> Result<Gamma> {
        match desc {
            GammaDescription::Composed {
                discs,
                blaschke,
                covering,
                integrator,
                radius,
                ..
            } => {
                let l1 = lift(&blaschke[0], covering, *integrator)?;
                let l2 = lift(&blaschke[1], covering, *integrator)?;
                Ok(Gamma::Composed {
                    discs: discs.clone(),
                    lifts: [l1, l2],
                    radius: *radius,
                })
            }
            GammaDescription::Polynomial { disc } => Ok(Gamma::Polynomial(disc.clone())),
        }
    }

    pub fn eval(&self, lambda: Complex64) -> Result<Point> {
        match self {
            Gamma::Composed { discs, lifts, radius } => {
                let mut out = discs[0].eval(lifts[0].eval(lambda * *radius)?);
                out.extend(discs[1].eval(lifts[1].eval(lambda * *radius)?));
                Ok(out)
            }
            Gamma::Polynomial(disc) => Ok(disc.eval(lambda)),
        }
    }

    /// Values at `fractions[i]·end` along one ray.
    pub fn eval_ray(&self, end: Complex64, fractions: &[f64]) -> Result<Vec<Point>> {
        match self {
            Gamma::Composed { discs, lifts, radius } => {
                let first = lifts[0].eval_ray(end * *radius, fractions)?;
                let second = lifts[1].eval_ray(end * *radius, fractions)?;
                Ok(first
                    .into_iter()
                    .zip(second)
                    .map(|(p, q)| {
                        let mut out = discs[0].eval(p);
                        out.extend(discs[1].eval(q));
                        out
                    })
                    .collect())
            }
            Gamma::Polynomial(disc) => Ok(fractions.iter().map(|f| disc.eval(end * *f)).collect()),
        }
    }

    /// Smallest domain margin of `γ` over the origin and a polar grid of
    /// `rays × radii` points of the closed unit disc.
    pub fn min_margin(&self, domain: &Domain, rays: usize, radii: usize) -> Result<f64> {
        let fractions: Vec<f64> = (1..=radii).map(|j| j as f64 / radii as f64).collect();
        let mut worst = domain.margin(&self.eval(Complex64::new(0.0, 0.0))?)?;
        for k in 0..rays {
            let end = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / rays as f64);
            for p in self.eval_ray(end, &fractions)? {
                worst = worst.min(domain.margin(&p)?);
            }
        }
        Ok(worst)
    }
}
