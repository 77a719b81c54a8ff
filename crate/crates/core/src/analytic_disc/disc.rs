use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::{Domain, Point};
use crate::disc_algebra::{DiscPoint, Zero};
use crate::error::{Error, Result};
use crate::poly::{cluster, Poly};

pub const DEFAULT_RANGE_GRID: usize = 512;
pub const RANGE_REFINE_TOL: f64 = 1e-6;
const MAX_RANGE_GRID: usize = 1 << 16;
pub const PREIMAGE_TOL: f64 = 1e-8;
pub const PREIMAGE_BOUNDARY_TOL: f64 = 1e-9;
const PREIMAGE_CLUSTER: f64 = 1e-7;

/// Polynomial map `Ē → C^n`, one coefficient vector per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDisc", into = "RawDisc")]
pub struct AnalyticDisc {
    coords: Vec<Poly>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisc {
    dimension: usize,
    degree: usize,
    coords: Vec<Vec<Complex64>>,
}

impl TryFrom<RawDisc> for AnalyticDisc {
    type Error = Error;
    fn try_from(raw: RawDisc) -> Result<Self> {
        if raw.coords.len() != raw.dimension {
            return Err(Error::DimensionMismatch {
                expected: raw.dimension,
                got: raw.coords.len(),
            });
        }
        if let Some(c) = raw.coords.iter().find(|c| c.len() > raw.degree + 1) {
            return Err(Error::DimensionMismatch {
                expected: raw.degree + 1,
                got: c.len(),
            });
        }
        AnalyticDisc::new(raw.coords.into_iter().map(Poly::new).collect())
    }
}

impl From<AnalyticDisc> for RawDisc {
    fn from(d: AnalyticDisc) -> RawDisc {
        RawDisc {
            dimension: d.dimension(),
            degree: d.degree(),
            coords: d.coords.into_iter().map(|p| p.coeffs).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageSet {
    pub target: Point,
    pub entries: Vec<Zero>,
    /// Largest `|φ(λ) − a|` over the entries.
    pub residual: f64,
}

impl PreimageSet {
    /// `∏ |λ|^{mult}`.
    pub fn product(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.point.norm().powi(z.mult as i32))
            .product()
    }

    pub fn count(&self) -> usize {
        self.entries.iter().map(|z| z.mult as usize).sum()
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .flat_map(|z| std::iter::repeat(z.point.value()).take(z.mult as usize))
            .collect()
    }
}

/// Order of vanishing of `p` at `z`: index of the first Taylor coefficient
/// above `tol · scale(p)`.
fn vanishing_order(p: &Poly, z: Complex64, tol: f64) -> usize {
    let cut = tol * p.scale().max(f64::MIN_POSITIVE);
    p.taylor_at(z)
        .iter()
        .position(|c| c.norm() > cut)
        .unwrap_or(usize::MAX)
}

impl AnalyticDisc {
    pub fn new(coords: Vec<Poly>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DegenerateInput("disc needs at least one coordinate".into()));
        }
        if coords.iter().flat_map(|p| &p.coeffs).any(|c| !c.is_finite()) {
            return Err(Error::DegenerateInput("non-finite disc coefficient".into()));
        }
        Ok(AnalyticDisc { coords })
    }

    pub fn constant(point: &[Complex64]) -> Result<Self> {
        Self::new(point.iter().map(|&c| Poly::constant(c)).collect())
    }

    /// `λ ↦ base + λ · direction`.
    pub fn linear(base: &[Complex64], direction: &[Complex64]) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                got: direction.len(),
            });
        }
        Self::new(
            base.iter()
                .zip(direction)
                .map(|(&b, &d)| Poly::new(vec![b, d]))
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn degree(&self) -> usize {
        self.coords.iter().map(Poly::len_degree).max().unwrap_or(0)
    }

    pub fn coords(&self) -> &[Poly] {
        &self.coords
    }

    pub fn eval(&self, lambda: Complex64) -> Point {
        self.coords.iter().map(|p| p.eval(lambda)).collect()
    }

    /// `φ(0)`.
    pub fn center(&self) -> Point {
        self.coords.iter().map(|p| p.coeffs[0]).collect()
    }

    /// `λ ↦ φ(s λ)`.
    pub fn precompose_scale(&self, s: Complex64) -> AnalyticDisc {
        AnalyticDisc {
            coords: self.coords.iter().map(|p| p.compose_scale(s)).collect(),
        }
    }

    /// Coordinates `range` as a disc of lower dimension.
    pub fn project(&self, range: std::ops::Range<usize>) -> Result<AnalyticDisc> {
        if range.end > self.dimension() || range.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: range.end,
            });
        }
        Self::new(self.coords[range].to_vec())
    }

    /// Disc into the product space with this disc's coordinates first.
    pub fn concat(&self, other: &AnalyticDisc) -> AnalyticDisc {
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        AnalyticDisc { coords }
    }

    /// Minimum of `domain.margin` over `n` equally spaced boundary points,
    /// with the angle where it is attained.
    pub fn boundary_margin(&self, domain: &Domain, n: usize) -> Result<(f64, f64)> {
        self.margin_at(domain, (0..n).map(|k| TAU * k as f64 / n as f64))
    }

    fn margin_at(&self, domain: &Domain, angles: impl Iterator<Item = f64>) -> Result<(f64, f64)> {
        let mut worst = (f64::INFINITY, 0.0);
        for theta in angles {
            let m = domain.margin(&self.eval(Complex64::from_polar(1.0, theta)))?;
            if m < worst.0 {
                worst = (m, theta);
            }
        }
        Ok(worst)
    }

    /// Minimum boundary margin, doubling the grid from `grid` points until
    /// the minimum moves by less than [`RANGE_REFINE_TOL`]. By the maximum
    /// principle a positive value certifies `φ(Ē) ⊂ D` up to the grid
    /// resolution.
    pub fn certify_range(&self, domain: &Domain, grid: usize) -> Result<f64> {
        if grid < 64 {
            return Err(Error::Precondition(format!("range grid {grid} < 64")));
        }
        if domain.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                got: self.dimension(),
            });
        }
        let mut n = grid;
        let mut worst = self.boundary_margin(domain, n)?;
        while n < MAX_RANGE_GRID {
            let odd = self.margin_at(domain, (0..n).map(|k| TAU * (k as f64 + 0.5) / n as f64))?;
            n *= 2;
            let refined = if odd.0 < worst.0 { odd } else { worst };
            let change = worst.0 - refined.0;
            worst = refined;
            if change < RANGE_REFINE_TOL {
                break;
            }
        }
        if worst.0 <= 0.0 {
            return Err(Error::InfeasibleDisc {
                margin: worst.0,
                theta: worst.1,
            });
        }
        Ok(worst.0)
    }

    pub fn preimages(&self, a: &[Complex64], tol: f64) -> Result<PreimageSet> {
        self.preimages_with(a, tol, PREIMAGE_BOUNDARY_TOL)
    }

    /// Interior solutions of `φ(λ) = a` with multiplicities `ord_λ(φ − a)`.
    /// Roots come from the lowest-degree nonconstant coordinate and are kept
    /// when every coordinate agrees to `tol`.
    pub fn preimages_with(&self, a: &[Complex64], tol: f64, boundary_tol: f64) -> Result<PreimageSet> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: a.len(),
            });
        }
        let diffs: Vec<Poly> = self
            .coords
            .iter()
            .zip(a)
            .map(|(p, &ak)| {
                let mut q = p.clone();
                q.coeffs[0] -= ak;
                q
            })
            .collect();
        let nonconstant: Vec<(usize, usize)> = diffs
            .iter()
            .enumerate()
            .map(|(k, q)| (k, q.trimmed(1e-14).len_degree()))
            .filter(|(_, d)| *d > 0)
            .collect();
        let Some(&(selected, _)) = nonconstant.iter().min_by_key(|(k, d)| (*d, *k)) else {
            if diffs.iter().all(|q| q.coeffs[0].norm() <= tol) {
                return Err(Error::DegenerateDisc);
            }
            return Ok(PreimageSet {
                target: a.to_vec(),
                entries: Vec::new(),
                residual: 0.0,
            });
        };
        let scalar = &diffs[selected];
        let candidates: Vec<Complex64> = scalar
            .roots()
            .into_iter()
            .filter(|z| z.norm() < 1.0)
            .collect();
        let mut entries = Vec::new();
        let mut residual: f64 = 0.0;
        for (centre, count) in cluster(&candidates, PREIMAGE_CLUSTER) {
            let z = scalar.polish_root(centre, count);
            if z.norm() >= 1.0 - boundary_tol {
                continue;
            }
            let r = diffs.iter().map(|q| q.eval(z).norm()).fold(0.0, f64::max);
            if r > tol {
                continue;
            }
            let order = nonconstant
                .iter()
                .map(|&(k, _)| vanishing_order(&diffs[k], z, tol))
                .min()
                .unwrap_or(count);
            let mult = order.clamp(1, count) as u32;
            residual = residual.max(r);
            entries.push(Zero {
                point: DiscPoint::new(z)?,
                mult,
            });
        }
        entries.sort_by(|x, y| {
            x.point
                .norm()
                .total_cmp(&y.point.norm())
                .then(x.point.value().arg().total_cmp(&y.point.value().arg()))
        });
        Ok(PreimageSet {
            target: a.to_vec(),
            entries,
            residual,
        })
    }
}
