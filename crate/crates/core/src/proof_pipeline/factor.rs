//! Stages acting on a single factor disc: splitting multiple preimages,
//! dropping outer preimages while the level is still beaten, and matching
//! the preimage products of the two factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic_disc::{AnalyticDisc, Domain, Point, PreimageSet, DEFAULT_RANGE_GRID, PREIMAGE_TOL};
use crate::disc_algebra::blaschke::split_points;
use crate::disc_algebra::{DiscPoint, Zero};
use crate::error::{Error, Result};

pub const BASEPOINT_TOL: f64 = 1e-10;
pub const INTERPOLATION_TOL: f64 = 1e-9;
const MIN_DELTA: f64 = 1e-14;
/// Relative modulus difference below which preimages are treated as one
/// block during reduction.
pub const TIE_TOL: f64 = 1e-12;

/// A factor disc together with its pole, base and preimages of the pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDiscData {
    pub disc: AnalyticDisc,
    pub pole: Point,
    pub base: Point,
    pub zeros: PreimageSet,
    /// `∏ |ζ_j|^{mult}`.
    pub value: f64,
}

impl FactorDiscData {
    pub fn new(disc: AnalyticDisc, pole: Point, base: Point) -> Result<Self> {
        let gap = max_distance(&disc.center(), &base)?;
        if gap > BASEPOINT_TOL {
            return Err(Error::Precondition(format!(
                "disc does not pass through the base point (|phi(0) - z| = {gap:e})"
            )));
        }
        let zeros = disc.preimages(&pole, PREIMAGE_TOL)?;
        if zeros.entries.is_empty() {
            return Err(Error::NotAttained);
        }
        let value = zeros.product();
        Ok(FactorDiscData {
            disc,
            pole,
            base,
            zeros,
            value,
        })
    }

    /// Same disc data with the preimages replaced by a known list.
    fn with_zeros(disc: AnalyticDisc, pole: Point, base: Point, points: &[Complex64]) -> Result<Self> {
        let mut residual: f64 = 0.0;
        let mut entries = Vec::with_capacity(points.len());
        for &p in points {
            residual = residual.max(max_distance(&disc.eval(p), &pole)?);
            entries.push(Zero {
                point: DiscPoint::new(p)?,
                mult: 1,
            });
        }
        let zeros = PreimageSet {
            target: pole.clone(),
            entries,
            residual,
        };
        let value = zeros.product();
        Ok(FactorDiscData {
            disc,
            pole,
            base,
            zeros,
            value,
        })
    }

    /// Preimages repeated by multiplicity.
    pub fn zero_points(&self) -> Vec<Complex64> {
        self.zeros.points()
    }

    /// `∏ ζ_j` with multiplicity.
    pub fn complex_product(&self) -> Complex64 {
        self.zero_points().iter().product()
    }

    pub fn zero_count(&self) -> usize {
        self.zeros.count()
    }
}

pub(crate) fn max_distance(x: &[Complex64], y: &[Complex64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// `φ̃ = (φ − a)·∏(λ − to_j)/∏(λ − from_j)·∏from_j/∏to_j + a`.
///
/// `from` must be preimages of `a` (with repetition for multiplicity), none
/// at the origin. The correction factor equals one at `λ = 0`, so `φ̃(0) =
/// φ(0)`, and `φ̃(to_j) = a`. Returns the new disc and the largest deflation
/// remainder relative to the coordinate scale.
pub fn move_preimages(
    phi: &AnalyticDisc,
    a: &[Complex64],
    from: &[Complex64],
    to: &[Complex64],
) -> Result<(AnalyticDisc, f64)> {
    if from.len() != to.len() {
        return Err(Error::DimensionMismatch {
            expected: from.len(),
            got: to.len(),
        });
    }
    if from.iter().chain(to).any(|z| z.norm() == 0.0) {
        return Err(Error::DegenerateInput(
            "a preimage at the origin makes the normalising factor vanish".into(),
        ));
    }
    let kappa: Complex64 = from.iter().product::<Complex64>() / to.iter().product::<Complex64>();
    let mut remainder: f64 = 0.0;
    let mut coords = Vec::with_capacity(phi.dimension());
    for (p, &ak) in phi.coords().iter().zip(a) {
        let mut q = p.clone();
        q.coeffs[0] -= ak;
        let scale = q.scale().max(f64::MIN_POSITIVE);
        for &root in from {
            let (quotient, rem) = q.deflate(root);
            remainder = remainder.max(rem.norm() / scale);
            q = quotient;
        }
        for &root in to {
            q = q.mul(&crate::poly::Poly::linear_root(root));
        }
        let mut q = q.scaled(kappa);
        q.coeffs[0] += ak;
        q.coeffs.truncate(p.coeffs.len().max(1));
        coords.push(q);
    }
    Ok((AnalyticDisc::new(coords)?, remainder))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplificationRecord {
    pub changed: bool,
    pub delta_used: f64,
    pub zeros_before: Vec<Zero>,
    pub zeros_after: Vec<Complex64>,
    pub max_shift: f64,
    pub basepoint_residual: f64,
    pub interpolation_residual: f64,
    pub deflation_remainder: f64,
    pub range_margin: f64,
}

/// Splits every multiple preimage of the pole into simple ones within
/// `delta`, keeping `φ(0)` fixed. `delta` shrinks tenfold while the
/// perturbed disc fails its range certificate.
pub fn simplify_multiplicities(
    data: &FactorDiscData,
    domain: &Domain,
    delta: f64,
) -> Result<(FactorDiscData, SimplificationRecord)> {
    if !(delta > 0.0) {
        return Err(Error::DegenerateInput(format!("delta = {delta}")));
    }
    let points: Vec<(Complex64, u32)> = data
        .zeros
        .entries
        .iter()
        .map(|z| (z.point.value(), z.mult))
        .collect();
    if points.iter().any(|(p, _)| p.norm() == 0.0) {
        return Err(Error::DegenerateInput(
            "pole is attained at the origin; the Green value is zero".into(),
        ));
    }
    let from = data.zero_points();
    let mut delta = delta;
    let mut last = String::new();
    while delta >= MIN_DELTA {
        let split = split_points(&points, delta, None)?;
        if !split.changed {
            let margin = data.disc.certify_range(domain, DEFAULT_RANGE_GRID)?;
            let record = SimplificationRecord {
                changed: false,
                delta_used: split.delta_used,
                zeros_before: data.zeros.entries.clone(),
                zeros_after: from.clone(),
                max_shift: 0.0,
                basepoint_residual: 0.0,
                interpolation_residual: data.zeros.residual,
                deflation_remainder: 0.0,
                range_margin: margin,
            };
            return Ok((data.clone(), record));
        }
        let to = split.points;
        let (disc, remainder) = move_preimages(&data.disc, &data.pole, &from, &to)?;
        let basepoint_residual = max_distance(&disc.center(), &data.base)?;
        let interpolation_residual = to
            .iter()
            .map(|&p| max_distance(&disc.eval(p), &data.pole))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if basepoint_residual > BASEPOINT_TOL || interpolation_residual > INTERPOLATION_TOL {
            return Err(Error::PerturbationFailure(format!(
                "basepoint residual {basepoint_residual:e}, interpolation residual {interpolation_residual:e}"
            )));
        }
        match disc.certify_range(domain, DEFAULT_RANGE_GRID) {
            Ok(margin) => {
                let max_shift = from
                    .iter()
                    .zip(&to)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                let record = SimplificationRecord {
                    changed: true,
                    delta_used: split.delta_used,
                    zeros_before: data.zeros.entries.clone(),
                    zeros_after: to.clone(),
                    max_shift,
                    basepoint_residual,
                    interpolation_residual,
                    deflation_remainder: remainder,
                    range_margin: margin,
                };
                let out = FactorDiscData::with_zeros(disc, data.pole.clone(), data.base.clone(), &to)?;
                return Ok((out, record));
            }
            Err(Error::InfeasibleDisc { margin, .. }) => {
                last = format!("range margin {margin:e} at delta {:e}", split.delta_used);
                delta = split.delta_used * 0.1;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::PerturbationFailure(last))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionStep {
    /// Modulus `ρ` of the dropped block; the disc becomes `λ ↦ φ(ρλ)`.
    pub scale: f64,
    pub dropped: usize,
    pub value_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRecord {
    pub value_before: f64,
    pub value_after: f64,
    pub steps: Vec<ReductionStep>,
    pub zero_count: usize,
    /// `∏|ζ_j| − N·|ζ_ν|^ν`, non-negative at a minimal configuration.
    pub minimality_slack: f64,
}

/// Blocks of equal modulus, innermost first, as `(modulus, count)`.
fn modulus_blocks(points: &[Complex64]) -> Vec<(f64, usize)> {
    let mut moduli: Vec<f64> = points.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for m in moduli {
        match blocks.last_mut() {
            Some((rho, count)) if (m - *rho).abs() <= TIE_TOL * m.max(*rho) => *count += 1,
            _ => blocks.push((m, 1)),
        }
    }
    blocks
}

/// Rescales the disc by the modulus of its outermost preimage block while
/// the remaining preimages still beat the level `N`. Ties in modulus are
/// dropped together.
pub fn reduce_to_minimal(data: &FactorDiscData, level: f64) -> Result<(FactorDiscData, ReductionRecord)> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::InvalidLevel(level));
    }
    if !(data.value < level) {
        return Err(Error::Precondition(format!(
            "factor value {} does not beat the level {level}",
            data.value
        )));
    }
    let mut current = data.clone();
    let mut steps = Vec::new();
    loop {
        let points = current.zero_points();
        let blocks = modulus_blocks(&points);
        let Some(&(rho, dropped)) = blocks.last() else {
            return Err(Error::NotAttained);
        };
        if blocks.len() < 2 {
            break;
        }
        let inner: Vec<Complex64> = points
            .iter()
            .filter(|z| (z.norm() - rho).abs() > TIE_TOL * rho)
            .map(|z| z / rho)
            .collect();
        let rescaled_value: f64 = inner.iter().map(|z| z.norm()).product();
        if !(rescaled_value < level) {
            break;
        }
        let disc = current.disc.precompose_scale(Complex64::new(rho, 0.0));
        current = FactorDiscData::with_zeros(disc, current.pole.clone(), current.base.clone(), &inner)?;
        steps.push(ReductionStep {
            scale: rho,
            dropped,
            value_after: current.value,
        });
    }
    let count = current.zero_count();
    let outer = current
        .zero_points()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let record = ReductionRecord {
        value_before: data.value,
        value_after: current.value,
        steps,
        zero_count: count,
        minimality_slack: current.value - level * outer.powi(count as i32),
    };
    Ok((current, record))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub t: f64,
    pub theta: f64,
    /// Which factor (1 or 2) was precomposed with `λ ↦ t e^{iθ} λ`.
    pub scaled_factor: u8,
    pub products_before: [Complex64; 2],
    pub product_after: Complex64,
    pub residual: f64,
}

/// Precomposes the factor with the smaller preimage product by
/// `λ ↦ t e^{iθ} λ` so that both complex preimage products coincide.
pub fn equalize_products(
    d1: &FactorDiscData,
    d2: &FactorDiscData,
) -> Result<(FactorDiscData, FactorDiscData, NormalizationReport)> {
    if d1.zeros.entries.is_empty() || d2.zeros.entries.is_empty() {
        return Err(Error::NotAttained);
    }
    let products = [d1.complex_product(), d2.complex_product()];
    let swap = products[0].norm() > products[1].norm();
    let (small, large) = if swap { (d2, d1) } else { (d1, d2) };
    let (p_small, p_large) = (small.complex_product(), large.complex_product());
    let nu = small.zero_count() as i32;
    let t = (p_small.norm() / p_large.norm()).powf(1.0 / nu as f64);
    let scaled_product = p_small / t.powi(nu);
    let mut theta = -(p_large / scaled_product).arg() / nu as f64;
    theta = theta.rem_euclid(std::f64::consts::TAU);
    let s = Complex64::from_polar(t, theta);
    let moved: Vec<Complex64> = small.zero_points().iter().map(|z| z / s).collect();
    let disc = small.disc.precompose_scale(s);
    let rescaled = FactorDiscData::with_zeros(disc, small.pole.clone(), small.base.clone(), &moved)?;
    let product_after = rescaled.complex_product();
    let residual = (product_after - p_large).norm();
    let report = NormalizationReport {
        t,
        theta,
        scaled_factor: if swap { 2 } else { 1 },
        products_before: products,
        product_after: p_large,
        residual,
    };
    if swap {
        Ok((large.clone(), rescaled, report))
    } else {
        Ok((rescaled, large.clone(), report))
    }
}
