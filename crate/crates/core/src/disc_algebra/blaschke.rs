use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mobius::{check_unimodular, DiscPoint, INTERIOR_MARGIN};
use crate::error::{Error, Result};
use crate::poly::{cluster, Poly};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Roots produced by the companion matrix closer than this are treated as
/// one multiple root.
pub const ROOT_CLUSTER_RADIUS: f64 = 1e-7;
/// Roots within this distance of the unit circle are boundary roots and are
/// never reported as interior zeros.
pub const BOUNDARY_TOL: f64 = 1e-9;
pub const CRITICAL_RESIDUAL_TOL: f64 = 1e-9;
pub const DEFAULT_PERTURBATION: f64 = 1e-6;
const DECRITALIZE_RETRIES: usize = 8;
const SEPARATION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub point: DiscPoint,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlaschke")]
pub struct BlaschkeProduct {
    phase: Complex64,
    zeros: Vec<Zero>,
}

#[derive(Deserialize)]
struct RawBlaschke {
    phase: Complex64,
    zeros: Vec<Zero>,
}

impl TryFrom<RawBlaschke> for BlaschkeProduct {
    type Error = Error;
    fn try_from(raw: RawBlaschke) -> Result<Self> {
        BlaschkeProduct::new(raw.zeros, raw.phase)
    }
}

/// Points where `B′` vanishes inside the disc, with the values of `B` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub points: Vec<DiscPoint>,
    pub values: Vec<Complex64>,
    pub max_residual: f64,
}

/// Output of [`BlaschkeProduct::perturb_to_simple`].
#[derive(Debug, Clone)]
pub struct Perturbed {
    pub product: BlaschkeProduct,
    pub delta_used: f64,
    pub changed: bool,
}

/// Output of [`BlaschkeProduct::decritalize`].
#[derive(Debug, Clone)]
pub struct Decritalized {
    pub product: BlaschkeProduct,
    pub delta_used: f64,
    /// `|B̂(0) − B(0)|`.
    pub basepoint_residual: f64,
    /// Smallest `|B̂′|` over the solutions of `B̂ = B̂(0)`.
    pub separation: f64,
    pub changed: bool,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Zero>, phase: Complex64) -> Result<Self> {
        let phase = check_unimodular(phase)?;
        if let Some(z) = zeros.iter().find(|z| z.mult == 0) {
            return Err(Error::DegenerateInput(format!(
                "zero {} has multiplicity 0",
                z.point.value()
            )));
        }
        Ok(BlaschkeProduct { phase, zeros })
    }

    /// Simple zeros at the given points, phase one.
    pub fn from_points(points: &[Complex64]) -> Result<Self> {
        let zeros = points
            .iter()
            .map(|&p| Ok(Zero { point: DiscPoint::new(p)?, mult: 1 }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(zeros, ONE)
    }

    pub fn constant(phase: Complex64) -> Result<Self> {
        Self::new(Vec::new(), phase)
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    /// Zeros repeated according to multiplicity.
    pub fn zero_list(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .flat_map(|z| std::iter::repeat(z.point.value()).take(z.mult as usize))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.zeros.iter().map(|z| z.mult as usize).sum()
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.zeros.iter().fold(self.phase, |acc, z| {
            let c = z.point.value();
            acc * ((c - lambda) / (ONE - c.conj() * lambda)).powu(z.mult)
        })
    }

    /// `B′(λ)` by the product rule, summing one term per distinct zero so
    /// that zeros of `B` need no special casing.
    pub fn derivative(&self, lambda: Complex64) -> Complex64 {
        let factors: Vec<Complex64> = self
            .zeros
            .iter()
            .map(|z| {
                let c = z.point.value();
                (c - lambda) / (ONE - c.conj() * lambda)
            })
            .collect();
        let mut total = ZERO;
        for (k, z) in self.zeros.iter().enumerate() {
            let c = z.point.value();
            let den = ONE - c.conj() * lambda;
            let factor_derivative = -(1.0 - c.norm_sqr()) / (den * den);
            let mut term = factor_derivative * z.mult as f64 * factors[k].powu(z.mult - 1);
            for (j, other) in self.zeros.iter().enumerate() {
                if j != k {
                    term *= factors[j].powu(other.mult);
                }
            }
            total += term;
        }
        self.phase * total
    }

    /// `B′/B` at a point that is not a zero of `B`.
    pub fn log_derivative(&self, lambda: Complex64) -> Complex64 {
        self.zeros.iter().fold(ZERO, |acc, z| {
            let c = z.point.value();
            acc + z.mult as f64 * (-ONE / (c - lambda) + c.conj() / (ONE - c.conj() * lambda))
        })
    }

    /// Principal-branch sum of factor logarithms, `log phase + Σ m·log(factor)`.
    /// Differs from `log B` by a multiple of `2πi`; never underflows.
    pub fn log_eval(&self, lambda: Complex64) -> Complex64 {
        self.zeros.iter().fold(self.phase.ln(), |acc, z| {
            let c = z.point.value();
            acc + z.mult as f64 * ((c - lambda) / (ONE - c.conj() * lambda)).ln()
        })
    }

    /// `∏ (ζ − λ)^m`.
    pub fn numerator(&self) -> Poly {
        self.zeros.iter().fold(Poly::one(), |acc, z| {
            let f = Poly::new(vec![z.point.value(), -ONE]);
            (0..z.mult).fold(acc, |a, _| a.mul(&f))
        })
    }

    /// `∏ (1 − conj(ζ) λ)^m`.
    pub fn denominator(&self) -> Poly {
        self.zeros.iter().fold(Poly::one(), |acc, z| {
            let f = Poly::new(vec![ONE, -z.point.value().conj()]);
            (0..z.mult).fold(acc, |a, _| a.mul(&f))
        })
    }

    pub fn boundary_deviation(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / samples as f64;
                (self.eval(Complex64::from_polar(1.0, t)).norm() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn critical_data(&self) -> CriticalData {
        if self.degree() <= 1 {
            return CriticalData {
                points: Vec::new(),
                values: Vec::new(),
                max_residual: 0.0,
            };
        }
        let p = self.numerator();
        let q = self.denominator();
        let numerator = p.derivative().mul(&q).sub(&p.mul(&q.derivative()));
        let inside: Vec<Complex64> = numerator
            .roots()
            .into_iter()
            .filter(|z| z.norm() < 1.0 - BOUNDARY_TOL)
            .collect();
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut max_residual: f64 = 0.0;
        for (centre, count) in cluster(&inside, ROOT_CLUSTER_RADIUS) {
            let z = numerator.polish_root(centre, count);
            if let Ok(pt) = DiscPoint::new(z) {
                max_residual = max_residual.max(self.derivative(z).norm());
                points.push(pt);
                values.push(self.eval(z));
            }
        }
        CriticalData {
            points,
            values,
            max_residual,
        }
    }

    /// The Blaschke product `(B − w)/(1 − conj(w) B)`, whose zeros are the
    /// solutions of `B(λ) = w`. When `origin_is_root` is set, `B(0) = w` is
    /// known and the root at the origin is kept exact.
    pub fn level_set_product(&self, w: Complex64, origin_is_root: bool) -> Result<BlaschkeProduct> {
        if w.norm() >= 1.0 {
            return Err(Error::OutsideDisc(w));
        }
        if self.degree() == 0 {
            return Err(Error::DegenerateInput(
                "level set of a constant Blaschke product".into(),
            ));
        }
        let mut f = self.numerator().scaled(self.phase).sub(&self.denominator().scaled(w));
        let mut roots = Vec::new();
        if origin_is_root {
            f.coeffs[0] = ZERO;
            f = Poly::new(f.coeffs[1..].to_vec());
            roots.push(ZERO);
        }
        roots.extend(f.roots());
        let full = self.numerator().scaled(self.phase).sub(&self.denominator().scaled(w));
        let mut zeros = Vec::new();
        for (centre, count) in cluster(&roots, ROOT_CLUSTER_RADIUS) {
            let has_exact_origin = origin_is_root && centre.norm() <= ROOT_CLUSTER_RADIUS;
            let z = if has_exact_origin {
                ZERO
            } else {
                full.polish_root(centre, count)
            };
            zeros.push(Zero {
                point: DiscPoint::new(z)?,
                mult: count as u32,
            });
        }
        let shape = BlaschkeProduct { phase: ONE, zeros };
        let mut phase = ZERO;
        for k in 0..8 {
            let at = Complex64::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.5) / 8.0);
            let b = self.eval(at);
            let target = (b - w) / (ONE - w.conj() * b);
            phase += target / shape.eval(at);
        }
        Ok(BlaschkeProduct {
            phase: phase / phase.norm(),
            zeros: shape.zeros,
        })
    }

    /// Solutions of `B(λ) = w` with multiplicity.
    pub fn fibre(&self, w: Complex64) -> Result<Vec<Zero>> {
        Ok(self.level_set_product(w, false)?.zeros)
    }

    /// `B̃ = (B − B(0))/(1 − conj(B(0)) B)`, vanishing at the origin.
    pub fn recenter(&self) -> Result<BlaschkeProduct> {
        if self.degree() == 0 {
            return Ok(self.clone());
        }
        let c = self.eval(ZERO);
        self.level_set_product(c, true)
    }

    /// Moves zeros by at most `delta` so that all are simple and pairwise at
    /// least `delta/2` apart, keeping one zero exactly at the origin.
    pub fn perturb_to_simple(&self, delta: f64) -> Result<Perturbed> {
        if !(delta > 0.0) {
            return Err(Error::DegenerateInput(format!("delta = {delta}")));
        }
        if self.eval(ZERO).norm() > 1e-12 {
            return Err(Error::Precondition(
                "perturb_to_simple needs B(0) = 0".into(),
            ));
        }
        let points: Vec<(Complex64, u32)> = self
            .zeros
            .iter()
            .map(|z| (z.point.value(), z.mult))
            .collect();
        let split = split_points(&points, delta, Some(ZERO))?;
        if !split.changed {
            return Ok(Perturbed {
                product: self.clone(),
                delta_used: split.delta_used,
                changed: false,
            });
        }
        let zeros = split
            .points
            .iter()
            .map(|&p| Ok(Zero { point: DiscPoint::new(p)?, mult: 1 }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Perturbed {
            product: BlaschkeProduct::new(zeros, self.phase)?,
            delta_used: split.delta_used,
            changed: true,
        })
    }

    /// `B̂ = (B(0) + B̃)/(1 + conj(B(0)) B̃)` with `B̃` the recentred product
    /// after [`perturb_to_simple`](Self::perturb_to_simple). `B̂(0) = B(0)` and
    /// every solution of `B̂ = B̂(0)` is simple.
    pub fn decritalize(&self, delta: f64) -> Result<Decritalized> {
        if self.degree() <= 1 {
            return Ok(Decritalized {
                product: self.clone(),
                delta_used: 0.0,
                basepoint_residual: 0.0,
                separation: if self.degree() == 1 {
                    self.derivative(ZERO).norm()
                } else {
                    f64::INFINITY
                },
                changed: false,
            });
        }
        let c = self.eval(ZERO);
        let centred = self.recenter()?;
        let mut delta = delta;
        let mut last_failure = String::new();
        for _ in 0..DECRITALIZE_RETRIES {
            let perturbed = centred.perturb_to_simple(delta)?;
            let candidate = if perturbed.changed {
                perturbed.product.level_set_product(-c, false)?
            } else {
                self.clone()
            };
            let basepoint_residual = (candidate.eval(ZERO) - c).norm();
            let separation = perturbed
                .product
                .zeros()
                .iter()
                .map(|z| candidate.derivative(z.point.value()).norm())
                .fold(f64::INFINITY, f64::min);
            if basepoint_residual <= 1e-10 && separation >= SEPARATION_FLOOR {
                return Ok(Decritalized {
                    product: candidate,
                    delta_used: perturbed.delta_used,
                    basepoint_residual,
                    separation,
                    changed: perturbed.changed,
                });
            }
            last_failure = format!(
                "delta {:e}: basepoint residual {:e}, separation {:e}",
                perturbed.delta_used, basepoint_residual, separation
            );
            delta *= 0.5;
        }
        Err(Error::PerturbationFailure(last_failure))
    }
}

pub(crate) struct Split {
    pub points: Vec<Complex64>,
    pub delta_used: f64,
    pub changed: bool,
}

/// Expands `(point, multiplicity)` pairs into simple points pairwise at least
/// `delta/2` apart, each within `delta` of its original. A `pin` point keeps
/// one copy exactly in place. `delta` is halved until every moved point stays
/// inside the disc.
pub(crate) fn split_points(
    points: &[(Complex64, u32)],
    delta: f64,
    pin: Option<Complex64>,
) -> Result<Split> {
    let mut expanded: Vec<Complex64> = points
        .iter()
        .flat_map(|&(p, m)| std::iter::repeat(p).take(m as usize))
        .collect();
    if let Some(pin) = pin {
        if let Some(i) = expanded.iter().position(|&p| p == pin) {
            expanded.swap(0, i);
        }
    }
    let limit = 1.0 - INTERIOR_MARGIN - 1e-9;
    let mut delta = delta;
    'attempt: for _ in 0..60 {
        let mut placed: Vec<Complex64> = Vec::with_capacity(expanded.len());
        let mut changed = false;
        for &p in &expanded {
            let clear = |z: Complex64, placed: &[Complex64]| {
                placed.iter().all(|q| (z - q).norm() >= 0.5 * delta)
            };
            if clear(p, &placed) {
                placed.push(p);
                continue;
            }
            changed = true;
            let mut found = None;
            'search: for radius in [0.999, 0.75, 0.5] {
                for k in 0..24 {
                    let angle = std::f64::consts::TAU * k as f64 / 24.0;
                    let z = p + Complex64::from_polar(radius * delta, angle);
                    if z.norm() < limit && clear(z, &placed) {
                        found = Some(z);
                        break 'search;
                    }
                }
            }
            match found {
                Some(z) => placed.push(z),
                None => {
                    delta *= 0.5;
                    continue 'attempt;
                }
            }
        }
        return Ok(Split {
            points: placed,
            delta_used: delta,
            changed,
        });
    }
    Err(Error::PerturbationFailure(
        "could not separate zeros inside the disc".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn with_mult(points: &[(f64, u32)]) -> BlaschkeProduct {
        let zeros = points
            .iter()
            .map(|&(x, m)| Zero { point: DiscPoint::real(x).unwrap(), mult: m })
            .collect();
        BlaschkeProduct::new(zeros, ONE).unwrap()
    }

    #[test]
    fn eval_examples() {
        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((b.eval(ZERO) - c(0.15, 0.0)).norm() < 1e-15);
        let double = with_mult(&[(0.5, 2)]);
        assert_eq!(double.eval(c(0.5, 0.0)), ZERO);
        let single = BlaschkeProduct::from_points(&[c(0.2, 0.1)]).unwrap();
        let on_circle = single.eval(Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3));
        assert!((on_circle.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn derivative_examples() {
        let single = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        assert!((single.derivative(ZERO) - c(-0.75, 0.0)).norm() < 1e-15);
        let even = BlaschkeProduct::from_points(&[c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        assert!(even.derivative(ZERO).norm() < 1e-15);
        let constant = BlaschkeProduct::constant(ONE).unwrap();
        assert_eq!(constant.derivative(c(0.3, 0.2)), ZERO);
        // at a simple zero the explicit product form is used
        let two = BlaschkeProduct::from_points(&[c(0.5, 0.0), c(0.2, 0.0)]).unwrap();
        let at_zero = two.derivative(c(0.5, 0.0));
        let expected = -(1.0 - 0.25) / (0.75 * 0.75) * ((0.2 - 0.5) / (1.0 - 0.1));
        assert!((at_zero - c(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn critical_points_of_automorphism_are_empty() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        assert!(b.critical_data().points.is_empty());
    }

    #[test]
    fn critical_point_of_even_product() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let cd = b.critical_data();
        assert_eq!(cd.points.len(), 1);
        assert!(cd.points[0].norm() < 1e-12);
        assert!((cd.values[0] - c(-0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn degree_two_has_one_critical_point() {
        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        let cd = b.critical_data();
        assert_eq!(cd.points.len(), 1);
        assert!(cd.max_residual <= CRITICAL_RESIDUAL_TOL);
        let p = cd.points[0].value();
        assert!(p.re > 0.3 && p.re < 0.6 && p.im.abs() < 1e-12);
    }

    #[test]
    fn recenter_examples() {
        let mobius = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        let r = mobius.recenter().unwrap();
        assert_eq!(r.degree(), 1);
        assert_eq!(r.zeros()[0].point.value(), ZERO);

        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        let r = b.recenter().unwrap();
        assert!(r.eval(ZERO).norm() <= 1e-12);
        assert!(r.boundary_deviation(256) <= 1e-10);

        let centred = BlaschkeProduct::from_points(&[c(0.0, 0.0), c(0.4, 0.3)]).unwrap();
        let r = centred.recenter().unwrap();
        let ratio = r.eval(c(0.2, -0.1)) / centred.eval(c(0.2, -0.1));
        assert!((ratio.norm() - 1.0).abs() < 1e-12);
        let ratio2 = r.eval(c(-0.6, 0.1)) / centred.eval(c(-0.6, 0.1));
        assert!((ratio - ratio2).norm() < 1e-12);
    }

    #[test]
    fn recenter_keeps_critical_points() {
        let b = BlaschkeProduct::from_points(&[c(0.3, 0.2), c(-0.6, 0.1), c(0.1, -0.7)]).unwrap();
        let r = b.recenter().unwrap();
        for p in b.critical_data().points {
            assert!(r.derivative(p.value()).norm() <= 1e-8);
        }
    }

    #[test]
    fn perturb_examples() {
        let b = with_mult(&[(0.0, 1), (0.5, 2)]);
        let p = b.perturb_to_simple(1e-3).unwrap();
        assert!(p.changed);
        let zs = p.product.zero_list();
        assert_eq!(zs.len(), 3);
        assert!(zs.contains(&ZERO));
        assert!(p.product.zeros().iter().all(|z| z.mult == 1));
        for z in &zs {
            if *z != ZERO {
                assert!((z - c(0.5, 0.0)).norm() <= 1e-3);
            }
        }

        let simple = BlaschkeProduct::from_points(&[c(0.0, 0.0), c(0.4, 0.1)]).unwrap();
        let p = simple.perturb_to_simple(1e-3).unwrap();
        assert!(!p.changed);
        assert_eq!(p.product, simple);

        let origin_double = with_mult(&[(0.0, 2)]);
        let p = origin_double.perturb_to_simple(1e-3).unwrap();
        let zs = p.product.zero_list();
        assert_eq!(zs[0], ZERO);
        assert!(zs[1].norm() > 0.0 && zs[1].norm() <= 1e-3);
    }

    #[test]
    fn perturb_shrinks_delta_near_the_boundary() {
        let zeros = vec![
            Zero { point: DiscPoint::ORIGIN, mult: 1 },
            Zero { point: DiscPoint::real(0.95).unwrap(), mult: 2 },
        ];
        let b = BlaschkeProduct::new(zeros, ONE).unwrap();
        let p = b.perturb_to_simple(0.5).unwrap();
        assert!(p.delta_used <= 0.5);
        assert!(p.product.zero_list().iter().all(|z| z.norm() < 1.0));
    }

    #[test]
    fn decritalize_mobius_is_identity() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.2)]).unwrap();
        let d = b.decritalize(DEFAULT_PERTURBATION).unwrap();
        assert_eq!(d.product, b);
    }

    #[test]
    fn decritalize_generic_degree_two() {
        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        let d = b.decritalize(DEFAULT_PERTURBATION).unwrap();
        assert!((d.product.eval(ZERO) - c(0.18, 0.0)).norm() <= 1e-10);
        let c0 = d.product.eval(ZERO);
        for v in d.product.critical_data().values {
            assert!((v - c0).norm() > 1e-6);
        }
    }

    /// `B = (c + B̃)/(1 + c̄ B̃)` with `B̃ = λ·M_p(λ)²` has `B(0) = c` and a
    /// critical point at `p` with critical value `c`.
    fn critical_basepoint_product() -> (BlaschkeProduct, Complex64, Complex64) {
        let p = c(0.5, 0.1);
        let c0 = c(0.2, -0.05);
        let zeros = vec![
            Zero { point: DiscPoint::ORIGIN, mult: 1 },
            Zero { point: DiscPoint::new(p).unwrap(), mult: 2 },
        ];
        let tilde = BlaschkeProduct::new(zeros, ONE).unwrap();
        let b = tilde.level_set_product(-c0, false).unwrap();
        (b, p, c0)
    }

    #[test]
    fn decritalize_separates_critical_basepoint() {
        let (b, p, c0) = critical_basepoint_product();
        assert!((b.eval(ZERO) - c0).norm() < 1e-12);
        assert!((b.eval(p) - c0).norm() < 1e-10);
        assert!(b.derivative(p).norm() < 1e-7);
        let cd = b.critical_data();
        assert!(cd.values.iter().any(|v| (v - c0).norm() < 1e-8));

        let d = b.decritalize(1e-3).unwrap();
        assert!(d.changed);
        assert!(d.basepoint_residual <= 1e-10);
        assert!(d.separation >= 1e-8);
        let c_hat = d.product.eval(ZERO);
        let gap = d
            .product
            .critical_data()
            .values
            .iter()
            .map(|v| (v - c_hat).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(gap > 0.0);
        for z in d.product.zero_list() {
            let nearest = b
                .zero_list()
                .iter()
                .map(|w| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-2);
        }
    }

    #[test]
    fn fibre_of_critical_value_is_multiple() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let fibre = b.fibre(c(-0.25, 0.0)).unwrap();
        assert_eq!(fibre.len(), 1);
        assert_eq!(fibre[0].mult, 2);
        assert!(fibre[0].point.norm() < 1e-12);
    }

    #[test]
    fn serializes_to_documented_shape() {
        let b = with_mult(&[(0.5, 2)]);
        let json = serde_json::to_value(&b).unwrap();
        assert_eq!(json["phase"], serde_json::json!([1.0, 0.0]));
        assert_eq!(json["zeros"][0]["point"], serde_json::json!([0.5, 0.0]));
        assert_eq!(json["zeros"][0]["mult"], 2);
        let back: BlaschkeProduct = serde_json::from_value(json).unwrap();
        assert_eq!(back, b);
        let bad = serde_json::json!({"phase": [2.0, 0.0], "zeros": []});
        assert!(serde_json::from_value::<BlaschkeProduct>(bad).is_err());
    }

    fn arb_product() -> impl Strategy<Value = BlaschkeProduct> {
        prop::collection::vec((0.0f64..0.9, 0.0f64..6.283), 1..=6).prop_map(|zs| {
            let pts: Vec<Complex64> = zs.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
            BlaschkeProduct::from_points(&pts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn boundary_modulus_is_one(b in arb_product()) {
            prop_assert!(b.boundary_deviation(256) <= 1e-10);
        }

        #[test]
        fn value_at_origin_is_product_of_moduli(b in arb_product()) {
            let expected: f64 = b.zero_list().iter().map(|z| z.norm()).product();
            prop_assert!((b.eval(ZERO).norm() - expected).abs() <= 1e-12);
        }

        #[test]
        fn derivative_matches_finite_difference(b in arb_product(), r in 0.0f64..0.9, t in 0.0f64..6.283) {
            let z = Complex64::from_polar(r, t);
            let h = 1e-6;
            let fd = (b.eval(z + h) - b.eval(z - h)) / (2.0 * h);
            prop_assert!((fd - b.derivative(z)).norm() <= 1e-6);
        }

        #[test]
        fn recentred_zeros_solve_level_equation(b in arb_product()) {
            let c0 = b.eval(ZERO);
            let r = b.recenter().unwrap();
            for z in r.zero_list() {
                prop_assert!((b.eval(z) - c0).norm() <= 1e-9);
            }
        }

        #[test]
        fn decritalized_level_set_is_simple(b in arb_product()) {
            let d = b.decritalize(DEFAULT_PERTURBATION).unwrap();
            prop_assert!((d.product.eval(ZERO) - b.eval(ZERO)).norm() <= 1e-10);
            let level = d.product.recenter().unwrap();
            for z in level.zero_list() {
                prop_assert!(d.product.derivative(z).norm() >= 1e-8);
            }
        }

        #[test]
        fn critical_count_is_bounded(b in arb_product()) {
            let cd = b.critical_data();
            prop_assert!(cd.points.len() <= b.degree().saturating_sub(1));
            prop_assert!(cd.max_residual <= CRITICAL_RESIDUAL_TOL);
        }
    }
}
