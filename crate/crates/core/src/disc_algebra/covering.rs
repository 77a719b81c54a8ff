//! Holomorphic coverings `π : E → E∖A` with prescribed `π(0)`, for `|A| ≤ 1`.
//!
//! With one puncture `p` the covering is `π = T_p ∘ π₀ ∘ T_μ`, where
//! `π₀(u) = exp(−(1+u)/(1−u))` covers the punctured disc, `T_a` is the
//! automorphism `w ↦ (w + a)/(1 + ā w)` sending `0` to `a`, and `μ` is a
//! preimage of `T_p⁻¹(C)` under `π₀`. Writing `π = T_p ∘ exp(−h)` with
//! `h = (1+u)/(1−u)` exposes a logarithmic chart that stays well conditioned
//! where `π` approaches the puncture.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blaschke::{BlaschkeProduct, Zero, BOUNDARY_TOL};
use super::jensen::{circle_log_mean, jensen_certificate, JensenCertificate, MIN_QUADRATURE_NODES};
use super::mobius::{translate, translate_derivative, DiscPoint};
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const BASEPOINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringKind {
    FullDisc,
    PuncturedDisc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringMap {
    pub kind: CoveringKind,
    pub punctures: Vec<DiscPoint>,
    pub basepoint_value: Complex64,
    pub branch: usize,
    /// Point sent to `0` by the inner automorphism; zero for the full disc.
    pub mu: Complex64,
}

/// Builds the covering of `E∖A` with `π(0) = C`. Preimages of the basepoint
/// are ordered by modulus and `branch` selects among them.
pub fn covering_map(punctures: &[DiscPoint], basepoint: Complex64, branch: usize) -> Result<CoveringMap> {
    if punctures.len() >= 2 {
        return Err(Error::UnsupportedCovering {
            punctures: punctures.len(),
        });
    }
    if !(basepoint.norm() < 1.0) {
        return Err(Error::OutsideDisc(basepoint));
    }
    let Some(p) = punctures.first().map(|p| p.value()) else {
        return Ok(CoveringMap {
            kind: CoveringKind::FullDisc,
            punctures: Vec::new(),
            basepoint_value: basepoint,
            branch: 0,
            mu: Complex64::new(0.0, 0.0),
        });
    };
    if (basepoint - p).norm() < 1e-14 {
        return Err(Error::InvalidBasepoint(format!(
            "basepoint {basepoint} is the puncture"
        )));
    }
    let w = translate(-p, basepoint);
    let log_w = w.ln();
    let span = branch as i64 + 2;
    let mut candidates: Vec<(f64, i64, Complex64)> = (-span..=span)
        .map(|k| {
            let s = -(log_w + Complex64::new(0.0, TAU * k as f64));
            let mu = (s - ONE) / (s + ONE);
            (mu.norm(), k, mu)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mu = candidates[branch].2;
    let map = CoveringMap {
        kind: CoveringKind::PuncturedDisc,
        punctures: punctures.to_vec(),
        basepoint_value: basepoint,
        branch,
        mu,
    };
    let residual = (map.eval(Complex64::new(0.0, 0.0)) - basepoint).norm();
    if residual > BASEPOINT_TOL {
        return Err(Error::InvalidBasepoint(format!(
            "covering misses its basepoint by {residual:e}"
        )));
    }
    Ok(map)
}

impl CoveringMap {
    pub fn puncture(&self) -> Option<Complex64> {
        self.punctures.first().map(|p| p.value())
    }

    fn inner(&self, lambda: Complex64) -> Complex64 {
        translate(self.mu, lambda)
    }

    /// `−h(λ)`, the exponent of the logarithmic chart (punctured case only).
    pub fn exponent(&self, lambda: Complex64) -> Complex64 {
        let u = self.inner(lambda);
        -(ONE + u) / (ONE - u)
    }

    pub fn exponent_derivative(&self, lambda: Complex64) -> Complex64 {
        let u = self.inner(lambda);
        let du = translate_derivative(self.mu, lambda);
        -2.0 * du / ((ONE - u) * (ONE - u))
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        match self.kind {
            CoveringKind::FullDisc => translate(self.basepoint_value, lambda),
            CoveringKind::PuncturedDisc => {
                let p = self.puncture().unwrap_or_default();
                translate(p, self.exponent(lambda).exp())
            }
        }
    }

    pub fn derivative(&self, lambda: Complex64) -> Complex64 {
        match self.kind {
            CoveringKind::FullDisc => translate_derivative(self.basepoint_value, lambda),
            CoveringKind::PuncturedDisc => {
                let p = self.puncture().unwrap_or_default();
                let e = self.exponent(lambda).exp();
                translate_derivative(p, e) * e * self.exponent_derivative(lambda)
            }
        }
    }

    /// The full-disc covering as a degree-one Blaschke product.
    pub fn as_blaschke(&self) -> Option<BlaschkeProduct> {
        match self.kind {
            CoveringKind::FullDisc => {
                let zero = Zero {
                    point: DiscPoint::new(-self.basepoint_value).ok()?,
                    mult: 1,
                };
                BlaschkeProduct::new(vec![zero], -ONE).ok()
            }
            CoveringKind::PuncturedDisc => None,
        }
    }

    /// All zeros of `π` in the disc of radius `r`.
    pub fn zeros_within(&self, r: f64) -> Vec<Complex64> {
        match self.kind {
            CoveringKind::FullDisc => {
                let z = -self.basepoint_value;
                if z.norm() < r {
                    vec![z]
                } else {
                    Vec::new()
                }
            }
            CoveringKind::PuncturedDisc => {
                let p = self.puncture().unwrap_or_default();
                if p.norm() == 0.0 {
                    return Vec::new();
                }
                // π(λ) = 0 ⇔ h(λ) = −log(−p) − 2πik; |u_k| grows with |k|.
                let log_target = (-p).ln();
                let mu_norm = self.mu.norm();
                let mut out = Vec::new();
                for direction in [1i64, -1] {
                    let mut k = if direction == 1 { 0 } else { -1 };
                    loop {
                        let s = -(log_target + Complex64::new(0.0, TAU * k as f64));
                        let u = (s - ONE) / (s + ONE);
                        let lambda = translate(-self.mu, u);
                        if lambda.norm() < r {
                            out.push(lambda);
                        }
                        let un = u.norm();
                        let lower = if un > mu_norm {
                            (un - mu_norm) / (1.0 - mu_norm * un)
                        } else {
                            0.0
                        };
                        if lower >= r || 1.0 - un < 1e-15 {
                            break;
                        }
                        k += direction;
                    }
                }
                out
            }
        }
    }

    /// Jensen certificate for `π` at radius `r`.
    pub fn jensen_certificate(&self, r: f64, log_bound: f64) -> Result<JensenCertificate> {
        if let Some(b) = self.as_blaschke() {
            return jensen_certificate(&b, r, log_bound);
        }
        let origin = self.eval(Complex64::new(0.0, 0.0));
        let near = self.zeros_within((r + 1e-7).min(1.0 - 1e-12));
        let (mean, nodes) = circle_log_mean(
            |z| self.eval(z).norm().ln(),
            r,
            MIN_QUADRATURE_NODES,
            &near,
        )?;
        let interior = near
            .iter()
            .map(|z| z / r)
            .filter(|z| z.norm() < 1.0 - BOUNDARY_TOL)
            .map(DiscPoint::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(JensenCertificate::assemble(
            r,
            origin.norm().ln(),
            mean,
            nodes,
            interior,
            log_bound,
        ))
    }

    /// Smallest `|π − p|` over a polar grid of `rays × radii` points inside
    /// the disc of radius `outer`. Evaluated as
    /// `|w|(1 − |p|²)/|1 + p̄w|` with `w = exp(−h)`, which avoids the
    /// cancellation in `π − p` once `π` is very close to the puncture.
    pub fn puncture_clearance(&self, rays: usize, radii: usize, outer: f64) -> f64 {
        let Some(p) = self.puncture() else {
            return f64::INFINITY;
        };
        polar_grid(rays, radii, outer)
            .map(|z| {
                let w = self.exponent(z).exp();
                w.norm() * (1.0 - p.norm_sqr()) / (ONE + p.conj() * w).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `rays × radii` polar sample points `outer·(j/radii)·e^{2πik/rays}`,
/// `j = 1..=radii`.
pub fn polar_grid(rays: usize, radii: usize, outer: f64) -> impl Iterator<Item = Complex64> {
    (0..rays).flat_map(move |k| {
        let angle = TAU * k as f64 / rays as f64;
        (1..=radii).map(move |j| Complex64::from_polar(outer * j as f64 / radii as f64, angle))
    })
}
