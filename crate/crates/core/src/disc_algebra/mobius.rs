use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points within this distance of the unit circle are not accepted as
/// interior points.
pub const INTERIOR_MARGIN: f64 = 1e-12;
const UNIMODULAR_TOL: f64 = 1e-12;
const DENOMINATOR_FLOOR: f64 = 1e-300;

/// A point strictly inside the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.is_finite() || value.norm() >= 1.0 - INTERIOR_MARGIN {
            return Err(Error::OutsideDisc(value));
        }
        Ok(DiscPoint(value))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub const ORIGIN: DiscPoint = DiscPoint(Complex64::new(0.0, 0.0));

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

impl TryFrom<Complex64> for DiscPoint {
    type Error = Error;
    fn try_from(value: Complex64) -> Result<Self> {
        DiscPoint::new(value)
    }
}

impl From<DiscPoint> for Complex64 {
    fn from(p: DiscPoint) -> Complex64 {
        p.0
    }
}

pub(crate) fn check_unimodular(phase: Complex64) -> Result<Complex64> {
    if !phase.is_finite() || (phase.norm() - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular(phase));
    }
    Ok(phase / phase.norm())
}

/// `λ ↦ phase · (center − λ) / (1 − conj(center) λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusAut {
    center: DiscPoint,
    phase: Complex64,
}

impl MobiusAut {
    pub fn new(center: DiscPoint, phase: Complex64) -> Result<Self> {
        Ok(MobiusAut {
            center,
            phase: check_unimodular(phase)?,
        })
    }

    /// The involution exchanging `0` and `center`.
    pub fn involution(center: DiscPoint) -> Self {
        MobiusAut {
            center,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    /// `λ ↦ (λ + a)/(1 + conj(a) λ)`, which sends `0` to `a`.
    pub fn translation(a: DiscPoint) -> Self {
        MobiusAut {
            center: DiscPoint(-a.0),
            phase: Complex64::new(-1.0, 0.0),
        }
    }

    pub fn center(&self) -> DiscPoint {
        self.center
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        let c = self.center.0;
        let den = Complex64::new(1.0, 0.0) - c.conj() * lambda;
        if den.norm() < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateInput(format!(
                "Mobius denominator vanishes at {lambda}"
            )));
        }
        Ok(self.phase * (c - lambda) / den)
    }

    pub fn derivative(&self, lambda: Complex64) -> Complex64 {
        let c = self.center.0;
        let den = Complex64::new(1.0, 0.0) - c.conj() * lambda;
        -self.phase * (1.0 - c.norm_sqr()) / (den * den)
    }

    pub fn inverse(&self) -> MobiusAut {
        MobiusAut {
            center: DiscPoint(self.center.0 * self.phase),
            phase: self.phase.conj(),
        }
    }
}

/// `w ↦ (w + a)/(1 + conj(a) w)` evaluated without the validity checks, for
/// internal use where `|a| < 1` is already known.
pub(crate) fn translate(a: Complex64, w: Complex64) -> Complex64 {
    (w + a) / (Complex64::new(1.0, 0.0) + a.conj() * w)
}

pub(crate) fn translate_derivative(a: Complex64, w: Complex64) -> Complex64 {
    let den = Complex64::new(1.0, 0.0) + a.conj() * w;
    Complex64::new(1.0 - a.norm_sqr(), 0.0) / (den * den)
}
