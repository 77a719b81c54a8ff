use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::disc::{AnalyticDisc, PreimageSet, PREIMAGE_TOL};
use super::domain::{Domain, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMethod {
    ClosedForm,
    DiscUpperBound,
    PipelineCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    pub method: GreenMethod,
    pub evidence_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenQuery {
    pub domain: Domain,
    pub pole: Point,
    pub base: Point,
}

impl GreenQuery {
    pub fn new(domain: Domain, pole: Point, base: Point) -> Result<Self> {
        domain.validate()?;
        for (name, p) in [("pole", &pole), ("base", &base)] {
            let m = domain.margin(p)?;
            if !(m > 0.0) {
                return Err(Error::Precondition(format!(
                    "{name} is not inside the domain (margin {m:e})"
                )));
            }
        }
        Ok(GreenQuery { domain, pole, base })
    }

    pub fn pole_is_base(&self) -> bool {
        self.pole == self.base
    }
}

/// Upper bound `∏ |λ|^{ord}` for `g_D(a, φ(0))` contributed by one disc.
pub fn poletsky_value(phi: &AnalyticDisc, a: &[Complex64]) -> Result<(GreenValue, PreimageSet)> {
    let set = phi.preimages(a, PREIMAGE_TOL)?;
    if set.entries.is_empty() {
        return Err(Error::NotAttained);
    }
    let value = GreenValue {
        value: set.product(),
        method: GreenMethod::DiscUpperBound,
        evidence_id: format!("disc-preimages:{}", set.count()),
    };
    Ok((value, set))
}

/// `|(z − a)/(1 − ā z)|`, the Green function of the unit disc.
pub fn green_disc_oracle(a: Complex64, z: Complex64) -> Result<GreenValue> {
    for p in [a, z] {
        if !(p.norm() < 1.0) {
            return Err(Error::OutsideDisc(p));
        }
    }
    Ok(GreenValue {
        value: mobius_modulus(a, z),
        method: GreenMethod::ClosedForm,
        evidence_id: "mobius".into(),
    })
}

fn mobius_modulus(a: Complex64, z: Complex64) -> f64 {
    if a == z {
        return 0.0;
    }
    ((z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)).norm()
}

/// Per-coordinate disc values for a product of one-dimensional discs.
fn factor_values(domain: &Domain, a: &[Complex64], z: &[Complex64]) -> Result<Vec<f64>> {
    let factors = domain.disc_factors().ok_or(Error::NoOracle)?;
    if a.len() != factors.len() || z.len() != factors.len() {
        return Err(Error::DimensionMismatch {
            expected: factors.len(),
            got: a.len().min(z.len()),
        });
    }
    factors
        .iter()
        .zip(a.iter().zip(z))
        .map(|(&(c, r), (&ak, &zk))| {
            let (u, v) = ((ak - c) / r, (zk - c) / r);
            green_disc_oracle(u, v).map(|g| g.value)
        })
        .collect()
}

/// Closed form on a finite product of discs: the maximum of the factor
/// values.
pub fn green_polydisc_oracle(q: &GreenQuery) -> Result<GreenValue> {
    let values = factor_values(&q.domain, &q.pole, &q.base)?;
    Ok(GreenValue {
        value: values.into_iter().fold(0.0, f64::max),
        method: GreenMethod::ClosedForm,
        evidence_id: "polydisc-max".into(),
    })
}

/// Closed form where one is known: products of discs.
pub fn green_oracle(q: &GreenQuery) -> Result<GreenValue> {
    green_polydisc_oracle(q)
}

/// Lower bound for a product domain from its factors: each coordinate
/// projection can only decrease the Green function, so the product value is
/// at least every factor value that has a closed form.
pub fn contractibility_lower_bound(q: &GreenQuery) -> Result<GreenValue> {
    let Domain::Product { factors } = &q.domain else {
        if let Domain::Polydisc { .. } = q.domain {
            return contractibility_from_values(&factor_values(&q.domain, &q.pole, &q.base)?);
        }
        return Err(Error::NoFactorValue);
    };
    let poles = q.domain.split(&q.pole)?;
    let bases = q.domain.split(&q.base)?;
    let mut values = Vec::new();
    for ((f, a), z) in factors.iter().zip(poles).zip(bases) {
        let sub = GreenQuery {
            domain: f.clone(),
            pole: a.to_vec(),
            base: z.to_vec(),
        };
        match green_oracle(&sub) {
            Ok(g) => values.push(g.value),
            Err(Error::NoOracle) => {}
            Err(e) => return Err(e),
        }
    }
    contractibility_from_values(&values)
}

/// `max` of the supplied factor values.
pub fn contractibility_from_values(values: &[f64]) -> Result<GreenValue> {
    if values.is_empty() {
        return Err(Error::NoFactorValue);
    }
    Ok(GreenValue {
        value: values.iter().copied().fold(0.0, f64::max),
        method: GreenMethod::ClosedForm,
        evidence_id: "contractibility".into(),
    })
}
