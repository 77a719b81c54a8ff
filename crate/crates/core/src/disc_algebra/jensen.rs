//! Boundary means of `log|f|` on circles and the Jensen bookkeeping that
//! turns them into bounds on products of zero moduli.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blaschke::{BlaschkeProduct, BOUNDARY_TOL};
use super::mobius::DiscPoint;
use crate::error::{Error, Result};

pub const QUADRATURE_TOL: f64 = 1e-9;
pub const MAX_QUADRATURE_NODES: usize = 1 << 16;
pub const MIN_QUADRATURE_NODES: usize = 64;
pub const IDENTITY_TOL: f64 = 1e-7;
const JITTER_DISTANCE: f64 = 1e-8;
const ON_CIRCLE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenCertificate {
    pub radius: f64,
    /// `log|π(0)|`.
    pub log_value_at_origin: f64,
    /// Trapezoid value of `(1/2π) ∫ log|π(r e^{iθ})| dθ`.
    pub boundary_mean: f64,
    pub quadrature_nodes: usize,
    /// Roots of `π(rλ)` in the unit disc, repeated by multiplicity.
    pub interior_zeros: Vec<DiscPoint>,
    pub log_bound: f64,
    pub identity_residual: f64,
}

impl JensenCertificate {
    pub fn assemble(
        radius: f64,
        log_value_at_origin: f64,
        boundary_mean: f64,
        quadrature_nodes: usize,
        interior_zeros: Vec<DiscPoint>,
        log_bound: f64,
    ) -> Self {
        let zero_sum: f64 = interior_zeros.iter().map(|z| z.norm().ln()).sum();
        JensenCertificate {
            radius,
            log_value_at_origin,
            boundary_mean,
            quadrature_nodes,
            identity_residual: (log_value_at_origin - boundary_mean - zero_sum).abs(),
            interior_zeros,
            log_bound,
        }
    }

    /// Left-hand side of the Jensen bound, `log|π(0)| − mean`.
    pub fn gap(&self) -> f64 {
        self.log_value_at_origin - self.boundary_mean
    }

    pub fn is_valid(&self) -> bool {
        self.gap() < self.log_bound && self.identity_residual <= IDENTITY_TOL
    }

    /// `∏ |λ_j|` over the interior zeros.
    pub fn zero_product(&self) -> f64 {
        self.interior_zeros.iter().map(|z| z.norm()).product()
    }
}

/// Trapezoid mean of `log_modulus` over the circle of radius `r`, doubling
/// the node count from `start_nodes` until successive values agree to
/// [`QUADRATURE_TOL`]. `zeros` are the known zeros of the integrand's
/// function; nodes are rotated away from any that sit near the circle.
pub fn circle_log_mean<F>(
    log_modulus: F,
    r: f64,
    start_nodes: usize,
    zeros: &[Complex64],
) -> Result<(f64, usize)>
where
    F: Fn(Complex64) -> f64,
{
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition(format!("radius {r} not in (0, 1)")));
    }
    let mut offset = 0.0;
    for z in zeros {
        let distance = (z.norm() - r).abs();
        if distance < ON_CIRCLE {
            return Err(Error::RadiusNudge {
                radius: r,
                modulus: z.norm(),
            });
        }
        if distance < JITTER_DISTANCE {
            offset = z.arg() + std::f64::consts::PI / MAX_QUADRATURE_NODES as f64;
        }
    }
    let node = |theta: f64| log_modulus(Complex64::from_polar(r, theta + offset));
    let mut n = start_nodes.clamp(MIN_QUADRATURE_NODES, MAX_QUADRATURE_NODES);
    let mut sum: f64 = (0..n)
        .map(|k| node(std::f64::consts::TAU * k as f64 / n as f64))
        .sum();
    let mut mean = sum / n as f64;
    let mut change = f64::INFINITY;
    while n < MAX_QUADRATURE_NODES {
        let odd: f64 = (0..n)
            .map(|k| node(std::f64::consts::TAU * (k as f64 + 0.5) / n as f64))
            .sum();
        sum += odd;
        n *= 2;
        let refined = sum / n as f64;
        change = (refined - mean).abs();
        mean = refined;
        if change < QUADRATURE_TOL {
            return Ok((mean, n));
        }
    }
    Err(Error::QuadratureNotConverged {
        nodes: n,
        change,
        tolerance: QUADRATURE_TOL,
    })
}

/// Mean of `log|B|` over the circle of radius `r`.
pub fn jensen_mean(b: &BlaschkeProduct, r: f64, quadrature_nodes: usize) -> Result<f64> {
    let zeros = b.zero_list();
    circle_log_mean(|z| b.eval(z).norm().ln(), r, quadrature_nodes, &zeros).map(|(m, _)| m)
}

/// Jensen certificate for a finite Blaschke product at radius `r`. The
/// rescaled zeros come from the companion matrix of the numerator of
/// `π(rλ)`, independently of the stored zero list.
pub fn jensen_certificate(pi: &BlaschkeProduct, r: f64, log_bound: f64) -> Result<JensenCertificate> {
    let origin = pi.eval(Complex64::new(0.0, 0.0));
    if origin.norm() == 0.0 {
        return Err(Error::InvalidBasepoint("pi(0) = 0".into()));
    }
    let zeros = pi.zero_list();
    let (mean, nodes) = circle_log_mean(
        |z| pi.eval(z).norm().ln(),
        r,
        MIN_QUADRATURE_NODES,
        &zeros,
    )?;
    let rescaled = pi.numerator().compose_scale(Complex64::new(r, 0.0));
    let interior = rescaled
        .roots()
        .into_iter()
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

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mean_value_without_interior_zeros() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        let m = jensen_mean(&b, 0.25, 64).unwrap();
        assert!((m - 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn unimodular_constant_has_zero_mean() {
        let b = BlaschkeProduct::constant(Complex64::from_polar(1.0, 0.7)).unwrap();
        for r in [0.1, 0.5, 0.99] {
            assert!(jensen_mean(&b, r, 64).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn mean_tends_to_zero_near_the_boundary() {
        // with every zero inside the circle the mean is exactly n·log r
        let zeros = [
            c(0.7, 0.0),
            c(-0.3, 0.6),
            c(0.1, -0.65),
            c(0.0, 0.2),
            c(-0.5, -0.4),
            c(0.45, 0.45),
        ];
        for n in 1..=zeros.len() {
            let b = BlaschkeProduct::from_points(&zeros[..n]).unwrap();
            let m = jensen_mean(&b, 0.999, 64).unwrap();
            assert!((m - n as f64 * 0.999f64.ln()).abs() < 1e-9);
            if n <= 4 {
                assert!(m.abs() <= 5e-3);
            }
        }
    }

    #[test]
    fn zero_on_circle_needs_radius_nudge() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        assert!(matches!(jensen_mean(&b, 0.5, 64), Err(Error::RadiusNudge { .. })));
    }

    #[test]
    fn zero_near_circle_is_jittered() {
        let b = BlaschkeProduct::from_points(&[c(0.5 + 5e-9, 0.0)]).unwrap();
        // the quadrature may or may not converge this close, but it must not
        // land a node on the zero
        match jensen_mean(&b, 0.5, 64) {
            Ok(m) => assert!(m.is_finite()),
            Err(e) => assert!(matches!(e, Error::QuadratureNotConverged { .. })),
        }
    }

    #[test]
    fn certificate_examples() {
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0)]).unwrap();
        let cert = jensen_certificate(&b, 0.8, 0.0).unwrap();
        assert_eq!(cert.interior_zeros.len(), 1);
        assert!((cert.interior_zeros[0].value() - c(0.625, 0.0)).norm() < 1e-12);
        assert!(cert.identity_residual <= 1e-7);

        let cert = jensen_certificate(&b, 0.4, 0.0).unwrap();
        assert!(cert.interior_zeros.is_empty());
        assert!(cert.gap().abs() <= 1e-7);

        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.5, 0.0)]).unwrap();
        let cert = jensen_certificate(&b, 0.99, 0.16f64.ln()).unwrap();
        assert!(cert.is_valid());
        assert!(cert.zero_product() < 0.16);
    }

    #[test]
    fn certificate_rejects_zero_basepoint() {
        let b = BlaschkeProduct::from_points(&[c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            jensen_certificate(&b, 0.5, 0.0),
            Err(Error::InvalidBasepoint(_))
        ));
    }
}
