use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vec<Complex64>;

/// `coeff · z₁^{powers[0]} ⋯ z_n^{powers[n−1]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: Complex64,
    pub powers: Vec<u32>,
}

/// Domains whose membership margin is controlled on `Ē` by its values on the
/// boundary circle once composed with a holomorphic disc: every margin is a
/// constant minus the modulus (or norm) of a holomorphic expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Domain {
    Polydisc { center: Point, radii: Vec<f64> },
    Ball { center: Point, radius: f64 },
    Product { factors: Vec<Domain> },
    /// `{z : |p(z)| < level}` in `C^dimension`.
    PolynomialSublevel {
        dimension: usize,
        terms: Vec<Monomial>,
        level: f64,
    },
}

impl Domain {
    /// The unit disc `E ⊂ C`.
    pub fn unit_disc() -> Self {
        Domain::Polydisc {
            center: vec![Complex64::new(0.0, 0.0)],
            radii: vec![1.0],
        }
    }

    pub fn unit_polydisc(n: usize) -> Self {
        Domain::Polydisc {
            center: vec![Complex64::new(0.0, 0.0); n],
            radii: vec![1.0; n],
        }
    }

    pub fn unit_ball(n: usize) -> Self {
        Domain::Ball {
            center: vec![Complex64::new(0.0, 0.0); n],
            radius: 1.0,
        }
    }

    pub fn product(factors: Vec<Domain>) -> Self {
        Domain::Product { factors }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Polydisc { center, .. } | Domain::Ball { center, .. } => center.len(),
            Domain::Product { factors } => factors.iter().map(Domain::dimension).sum(),
            Domain::PolynomialSublevel { dimension, .. } => *dimension,
        }
    }

    /// Structural checks: matching lengths, positive radii and levels.
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Polydisc { center, radii } => {
                if center.len() != radii.len() {
                    return Err(Error::DimensionMismatch {
                        expected: center.len(),
                        got: radii.len(),
                    });
                }
                if center.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::DegenerateInput("polydisc radii must be positive".into()));
                }
            }
            Domain::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::DegenerateInput("ball radius must be positive".into()));
                }
            }
            Domain::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::DegenerateInput("empty product".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
            Domain::PolynomialSublevel {
                dimension,
                terms,
                level,
            } => {
                if *dimension == 0 || !(*level > 0.0 && level.is_finite()) {
                    return Err(Error::DegenerateInput("sublevel needs a positive level".into()));
                }
                if let Some(t) = terms.iter().find(|t| t.powers.len() != *dimension) {
                    return Err(Error::DimensionMismatch {
                        expected: *dimension,
                        got: t.powers.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Signed distance-like margin: positive inside, negative outside.
    pub fn margin(&self, z: &[Complex64]) -> Result<f64> {
        let n = self.dimension();
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        Ok(self.margin_unchecked(z))
    }

    fn margin_unchecked(&self, z: &[Complex64]) -> f64 {
        match self {
            Domain::Polydisc { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .map(|((z, c), r)| r - (z - c).norm())
                .fold(f64::INFINITY, f64::min),
            Domain::Ball { center, radius } => {
                let d2: f64 = z.iter().zip(center).map(|(z, c)| (z - c).norm_sqr()).sum();
                radius - d2.sqrt()
            }
            Domain::Product { factors } => {
                let mut offset = 0;
                let mut m = f64::INFINITY;
                for f in factors {
                    let k = f.dimension();
                    m = m.min(f.margin_unchecked(&z[offset..offset + k]));
                    offset += k;
                }
                m
            }
            Domain::PolynomialSublevel { terms, level, .. } => {
                let value: Complex64 = terms
                    .iter()
                    .map(|t| {
                        t.powers
                            .iter()
                            .zip(z)
                            .fold(t.coeff, |acc, (p, z)| acc * z.powu(*p))
                    })
                    .sum();
                level - value.norm()
            }
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> Result<bool> {
        Ok(self.margin(z)? > 0.0)
    }

    /// Splits a point of a product domain into the factor coordinates.
    pub fn split<'a>(&self, z: &'a [Complex64]) -> Result<Vec<&'a [Complex64]>> {
        let Domain::Product { factors } = self else {
            return Ok(vec![z]);
        };
        if z.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: z.len(),
            });
        }
        let mut out = Vec::with_capacity(factors.len());
        let mut offset = 0;
        for f in factors {
            let k = f.dimension();
            out.push(&z[offset..offset + k]);
            offset += k;
        }
        Ok(out)
    }

    /// One-dimensional disc factors `(center, radius)` if the domain is a
    /// product of discs, flattening nested products.
    pub fn disc_factors(&self) -> Option<Vec<(Complex64, f64)>> {
        match self {
            Domain::Polydisc { center, radii } => {
                Some(center.iter().copied().zip(radii.iter().copied()).collect())
            }
            Domain::Ball { center, radius } if center.len() == 1 => Some(vec![(center[0], *radius)]),
            Domain::Product { factors } => {
                let mut out = Vec::new();
                for f in factors {
                    out.extend(f.disc_factors()?);
                }
                Some(out)
            }
            _ => None,
        }
    }
}
