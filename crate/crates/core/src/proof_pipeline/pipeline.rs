use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::certificate::{
    AssemblyRecord, CoveringRecord, DecritalizationRecord, Gamma, GammaDescription, LiftRecord,
    PipelineConfig, ProductDiscCertificate, RadiusAttempt, RadiusPolicy, StageRecord, Tolerances,
};
use super::factor::{
    equalize_products, max_distance, move_preimages, reduce_to_minimal, simplify_multiplicities,
    FactorDiscData,
};
use crate::analytic_disc::{AnalyticDisc, Domain, Point, PREIMAGE_TOL};
use crate::disc_algebra::{covering_map, lift, BlaschkeProduct, CoveringMap, DiscPoint, JensenCertificate};
use crate::error::{Error, Result};
use crate::poly::cluster;

const CRITICAL_VALUE_MERGE: f64 = 1e-9;
const DECRITALIZE_ATTEMPTS: usize = 8;
pub const LIFT_GRID: (usize, usize) = (64, 32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineInput {
    pub domains: [Domain; 2],
    /// `(a₁, b₁)`.
    pub pole: [Point; 2],
    /// `(a₂, b₂)`.
    pub base: [Point; 2],
    pub level: f64,
    pub discs: [AnalyticDisc; 2],
}

impl PipelineInput {
    pub fn product_domain(&self) -> Domain {
        Domain::product(self.domains.to_vec())
    }
}

fn admit(input: &PipelineInput, config: &PipelineConfig) -> Result<[FactorDiscData; 2]> {
    let n = input.level;
    if !(n > 0.0 && n <= 1.0) {
        return Err(Error::InvalidLevel(n));
    }
    let mut out = Vec::with_capacity(2);
    for i in 0..2 {
        input.domains[i].validate()?;
        if input.discs[i].dimension() != input.domains[i].dimension() {
            return Err(Error::DimensionMismatch {
                expected: input.domains[i].dimension(),
                got: input.discs[i].dimension(),
            });
        }
        input.discs[i].certify_range(&input.domains[i], config.range_grid)?;
        out.push(FactorDiscData::new(
            input.discs[i].clone(),
            input.pole[i].clone(),
            input.base[i].clone(),
        )?);
    }
    let worst = out[0].value.max(out[1].value);
    if !(worst < n) {
        return Err(Error::Precondition(format!(
            "level {n} must exceed both factor values (largest is {worst})"
        )));
    }
    Ok([out.remove(0), out.remove(0)])
}

/// Builds a disc `γ` into `D₁ × D₂` with `γ(0) = (a₂, b₂)` whose preimages of
/// `(a₁, b₁)` have modulus product below the level, starting from one disc
/// per factor that already beats the level.
pub fn run_pipeline(input: &PipelineInput, config: &PipelineConfig) -> Result<ProductDiscCertificate> {
    let data = admit(input, config)?;
    let tolerances = Tolerances::default();
    for i in 0..2 {
        if max_distance(&input.pole[i], &input.base[i])? == 0.0 {
            return shortcut(input, config, tolerances, &data, i);
        }
    }
    let mut stages = Vec::new();

    let mut factors = Vec::with_capacity(2);
    for (i, d) in data.iter().enumerate() {
        let (simple, record) = simplify_multiplicities(d, &input.domains[i], config.delta)?;
        stages.push(StageRecord::Simplification {
            factor: i as u8 + 1,
            record,
        });
        let (minimal, record) = reduce_to_minimal(&simple, input.level)?;
        stages.push(StageRecord::Reduction {
            factor: i as u8 + 1,
            record,
        });
        factors.push(minimal);
    }
    let (d1, d2, report) = equalize_products(&factors[0], &factors[1])?;
    stages.push(StageRecord::Normalization(report));
    let mut factors = [d1, d2];

    let mut blaschke = Vec::with_capacity(2);
    for (i, f) in factors.iter_mut().enumerate() {
        let b = BlaschkeProduct::from_points(&f.zero_points())?;
        let (b_hat, record) = decritalize_factor(f, &b, &input.domains[i], config, i as u8 + 1)?;
        stages.push(StageRecord::Decritalization(record));
        blaschke.push(b_hat);
    }
    let blaschke: [BlaschkeProduct; 2] = [blaschke.remove(0), blaschke.remove(0)];
    let c = blaschke[0].eval(Complex64::new(0.0, 0.0));
    let c_gap = (c - blaschke[1].eval(Complex64::new(0.0, 0.0))).norm();
    if c_gap > 1e-10 {
        return Err(Error::Verification(format!(
            "Blaschke products disagree at the origin by {c_gap:e}"
        )));
    }

    let critical: Vec<Complex64> = blaschke
        .iter()
        .flat_map(|b| b.critical_data().values)
        .collect();
    let critical_values: Vec<Complex64> = cluster(&critical, CRITICAL_VALUE_MERGE)
        .into_iter()
        .map(|(v, _)| v)
        .collect();
    let clearance = critical_values
        .iter()
        .map(|v| (v - c).norm())
        .min_by(f64::total_cmp);
    if critical_values.len() >= 2 {
        return Err(Error::UnsupportedCovering {
            punctures: critical_values.len(),
        });
    }
    let punctures = critical_values
        .iter()
        .map(|&v| DiscPoint::new(v))
        .collect::<Result<Vec<_>>>()?;
    let pi = covering_map(&punctures, c, config.branch)?;
    stages.push(StageRecord::Covering(CoveringRecord {
        critical_values: critical_values.clone(),
        basepoint_value: c,
        basepoint_clearance: clearance,
        branch: pi.branch,
        mu: pi.mu,
    }));

    let (chosen, attempts, jensen) = radius_search(&pi, input.level, config)?;
    let radius = chosen.radius;

    for (i, b) in blaschke.iter().enumerate() {
        let psi = lift(b, &pi, config.integrator)?;
        let (grid_residual, reach) = psi.grid_residual(LIFT_GRID.0, LIFT_GRID.1, radius)?;
        if grid_residual > tolerances.lift_residual {
            return Err(Error::Verification(format!(
                "lift {} misses the covering by {grid_residual:e}",
                i + 1
            )));
        }
        stages.push(StageRecord::Lift(LiftRecord {
            factor: i as u8 + 1,
            grid_residual,
            reach,
        }));
    }
    stages.push(StageRecord::Radius {
        chosen: chosen.clone(),
        attempts,
    });

    let gamma = GammaDescription::Composed {
        discs: [factors[0].disc.clone(), factors[1].disc.clone()],
        blaschke: blaschke.clone(),
        covering: pi,
        integrator: config.integrator,
        radius,
        radius_index: chosen.index,
    };
    let gamma_zeros = jensen.interior_zeros.clone();
    let achieved = jensen.zero_product();
    let evaluator = Gamma::build(&gamma)?;
    let assembly = assemble(input, &evaluator, &gamma_zeros, achieved, Some(&jensen), &tolerances)?;
    stages.push(StageRecord::Assembly(assembly));
    Ok(ProductDiscCertificate {
        level: input.level,
        domains: input.domains.clone(),
        pole: input.pole.clone(),
        base: input.base.clone(),
        inputs: input.discs.clone(),
        config: config.clone(),
        tolerances,
        stages,
        gamma,
        gamma_zeros,
        achieved,
        jensen: Some(jensen),
    })
}

/// Replaces `B` by its decritalized form and moves the disc's preimages to
/// the new zeros so that they keep matching.
fn decritalize_factor(
    f: &mut FactorDiscData,
    b: &BlaschkeProduct,
    domain: &Domain,
    config: &PipelineConfig,
    factor: u8,
) -> Result<(BlaschkeProduct, DecritalizationRecord)> {
    let mut delta = config.delta;
    let mut last = String::new();
    for _ in 0..DECRITALIZE_ATTEMPTS {
        let dec = b.decritalize(delta)?;
        if !dec.changed {
            let margin = f.disc.certify_range(domain, config.range_grid)?;
            let record = DecritalizationRecord {
                factor,
                changed: false,
                delta_used: dec.delta_used,
                basepoint_residual: dec.basepoint_residual,
                separation: dec.separation,
                zeros: f.zero_points(),
                range_margin: margin,
            };
            return Ok((dec.product, record));
        }
        let old = f.zero_points();
        let new = dec.product.zero_list();
        let from = match_points(&new, &old);
        let (disc, _) = move_preimages(&f.disc, &f.pole, &from, &new)?;
        match disc.certify_range(domain, config.range_grid) {
            Ok(margin) => {
                let base_gap = max_distance(&disc.center(), &f.base)?;
                if base_gap > 1e-10 {
                    return Err(Error::PerturbationFailure(format!(
                        "moving preimages shifted the base point by {base_gap:e}"
                    )));
                }
                let mut updated = FactorDiscData::new(disc, f.pole.clone(), f.base.clone())?;
                if updated.zero_count() != new.len() {
                    return Err(Error::PerturbationFailure(
                        "moved disc gained or lost preimages".into(),
                    ));
                }
                updated.zeros.entries = new
                    .iter()
                    .map(|&z| {
                        Ok(crate::disc_algebra::Zero {
                            point: DiscPoint::new(z)?,
                            mult: 1,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                updated.value = updated.zeros.product();
                *f = updated;
                let record = DecritalizationRecord {
                    factor,
                    changed: true,
                    delta_used: dec.delta_used,
                    basepoint_residual: dec.basepoint_residual,
                    separation: dec.separation,
                    zeros: new,
                    range_margin: margin,
                };
                return Ok((dec.product, record));
            }
            Err(Error::InfeasibleDisc { margin, .. }) => {
                last = format!("range margin {margin:e} at delta {delta:e}");
                delta *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::PerturbationFailure(last))
}

/// For each target, the nearest still unused source point, assigned in
/// order of increasing distance.
fn match_points(targets: &[Complex64], sources: &[Complex64]) -> Vec<Complex64> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        for (j, s) in sources.iter().enumerate() {
            pairs.push(((t - s).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut out = vec![None; targets.len()];
    let mut used = vec![false; sources.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(sources[j]);
            used[j] = true;
        }
    }
    out.into_iter().map(|s| s.unwrap_or_default()).collect()
}

pub fn schedule_radius(index: u32) -> f64 {
    1.0 - 0.5f64.powi(index as i32)
}

fn attempt(pi: &CoveringMap, index: u32, level: f64) -> Result<(RadiusAttempt, JensenCertificate)> {
    let r = schedule_radius(index);
    let cert = match pi.jensen_certificate(r, level.ln()) {
        Err(Error::RadiusNudge { .. }) => pi.jensen_certificate(r * (1.0 - 1e-9), level.ln())?,
        other => other?,
    };
    let record = RadiusAttempt {
        index,
        radius: cert.radius,
        gap: cert.gap(),
        zero_count: cert.interior_zeros.len(),
        identity_residual: cert.identity_residual,
    };
    Ok((record, cert))
}

fn radius_search(
    pi: &CoveringMap,
    level: f64,
    config: &PipelineConfig,
) -> Result<(RadiusAttempt, Vec<RadiusAttempt>, JensenCertificate)> {
    let indices: Vec<u32> = match config.radius_policy {
        RadiusPolicy::FirstValid => (1..=config.max_radius_index).collect(),
        RadiusPolicy::Fixed(k) => vec![k],
    };
    let mut attempts = Vec::new();
    for &k in &indices {
        if k == 0 {
            return Err(Error::Precondition("radius index must be positive".into()));
        }
        let (record, cert) = attempt(pi, k, level)?;
        attempts.push(record.clone());
        if cert.is_valid() {
            return Ok((record, attempts, cert));
        }
    }
    Err(Error::RadiusSearchExhausted {
        max_index: indices.last().copied().unwrap_or(0),
    })
}

/// Checks `γ(0)`, `γ` at the recorded zeros, the range of `γ` and the Jensen
/// consistency of the achieved value.
pub(crate) fn assemble(
    input: &PipelineInput,
    gamma: &Gamma,
    zeros: &[DiscPoint],
    achieved: f64,
    jensen: Option<&JensenCertificate>,
    tol: &Tolerances,
) -> Result<AssemblyRecord> {
    let pole = input.pole.concat();
    let base = input.base.concat();
    let basepoint_residual = max_distance(&gamma.eval(Complex64::new(0.0, 0.0))?, &base)?;
    let mut preimage_residual: f64 = 0.0;
    for z in zeros {
        preimage_residual = preimage_residual.max(max_distance(&gamma.eval(z.value())?, &pole)?);
    }
    let min_margin = gamma.min_margin(&input.product_domain(), tol.margin_rays, tol.margin_radii)?;
    let jensen_consistency = jensen.map_or(0.0, |j| (achieved - j.gap().exp()).abs());
    let record = AssemblyRecord {
        basepoint_residual,
        preimage_residual,
        min_margin,
        jensen_consistency,
    };
    let failures = [
        (basepoint_residual <= tol.basepoint, "gamma(0) misses the base point"),
        (preimage_residual <= tol.preimage, "gamma misses the pole at a recorded zero"),
        (min_margin > 0.0, "gamma leaves the product domain"),
        (jensen_consistency <= tol.jensen_consistency, "achieved value disagrees with the Jensen gap"),
        (achieved < input.level, "achieved value does not beat the level"),
    ];
    if let Some((_, why)) = failures.iter().find(|(ok, _)| !ok) {
        return Err(Error::Verification(format!("{why}: {record:?}")));
    }
    Ok(record)
}

/// A factor whose pole is its base point has Green value zero; the other
/// factor's disc paired with the constant pole coordinate already beats the
/// level.
fn shortcut(
    input: &PipelineInput,
    config: &PipelineConfig,
    tolerances: Tolerances,
    data: &[FactorDiscData; 2],
    degenerate: usize,
) -> Result<ProductDiscCertificate> {
    let other = 1 - degenerate;
    let constant = AnalyticDisc::constant(&input.pole[degenerate])?;
    let disc = if degenerate == 0 {
        constant.concat(&input.discs[1])
    } else {
        input.discs[0].concat(&constant)
    };
    let set = disc.preimages(&input.pole.concat(), PREIMAGE_TOL)?;
    let gamma_zeros = set
        .points()
        .into_iter()
        .map(DiscPoint::new)
        .collect::<Result<Vec<_>>>()?;
    let achieved = set.product();
    let gamma = GammaDescription::Polynomial { disc };
    let evaluator = Gamma::build(&gamma)?;
    let assembly = assemble(input, &evaluator, &gamma_zeros, achieved, None, &tolerances)?;
    Ok(ProductDiscCertificate {
        level: input.level,
        domains: input.domains.clone(),
        pole: input.pole.clone(),
        base: input.base.clone(),
        inputs: input.discs.clone(),
        config: config.clone(),
        tolerances,
        stages: vec![
            StageRecord::Shortcut {
                factor: degenerate as u8 + 1,
                value: data[other].value,
            },
            StageRecord::Assembly(assembly),
        ],
        gamma,
        gamma_zeros,
        achieved,
        jensen: None,
    })
}
