//! Lifting a covering `π` through a finite Blaschke product `B`: the map
//! `ψ` with `B ∘ ψ = π` and `ψ(0) = 0`, continued along radial segments.
//!
//! Over the full disc the continuation solves `ψ′ = π′/B′(ψ)` and corrects
//! onto `B(ψ) = π`. Over a punctured disc it works in the logarithmic chart
//! of the covering: with `F = T_p⁻¹ ∘ B` and `π = T_p ∘ exp(e)`, the lift
//! solves `log F(ψ) = e(λ) + 2πik`, i.e. `ψ′ = e′(λ)·F(ψ)/F′(ψ)`, which
//! stays regular as `π` runs towards the puncture.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blaschke::BlaschkeProduct;
use super::covering::{CoveringKind, CoveringMap};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const OBSTRUCTION_FLOOR: f64 = 1e-8;
pub const LIFT_RESIDUAL_TOL: f64 = 1e-6;
const BASEPOINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    /// First step as a fraction of the ray.
    pub initial_step: f64,
    pub min_step: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Largest change of the chart coordinate allowed in one step.
    pub max_chart_step: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            initial_step: 1.0 / 16.0,
            min_step: 1e-10,
            newton_tol: 1e-14,
            max_newton: 8,
            max_chart_step: 0.25,
        }
    }
}

enum Chart {
    /// `B(ψ) = π(λ)`.
    Direct,
    /// `log F(ψ) = e(λ) + offset`.
    Logarithmic { fibre: BlaschkeProduct, offset: Complex64 },
}

pub struct LiftedMap {
    covering: CoveringMap,
    base: BlaschkeProduct,
    settings: IntegratorSettings,
    chart: Chart,
    cache: Mutex<HashMap<(u64, u64), Complex64>>,
}

fn key(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

/// Wraps the imaginary part into `(−π, π]`.
fn wrap(z: Complex64) -> Complex64 {
    let tau = std::f64::consts::TAU;
    Complex64::new(z.re, z.im - tau * (z.im / tau).round())
}

/// Builds the lift of `pi` through `base`. Requires `base(0) = pi(0)` and, for
/// a punctured covering, that the fibre `base⁻¹(p)` avoids the origin.
pub fn lift(base: &BlaschkeProduct, pi: &CoveringMap, settings: IntegratorSettings) -> Result<LiftedMap> {
    let origin_gap = (base.eval(ZERO) - pi.eval(ZERO)).norm();
    if origin_gap > BASEPOINT_TOL {
        return Err(Error::InvalidBasepoint(format!(
            "B(0) and pi(0) differ by {origin_gap:e}"
        )));
    }
    let chart = match pi.kind {
        CoveringKind::FullDisc => Chart::Direct,
        CoveringKind::PuncturedDisc => {
            let p = pi.puncture().unwrap_or_default();
            let fibre = base.level_set_product(p, false)?;
            if fibre.zeros().iter().any(|z| z.point.norm() < 1e-12) {
                return Err(Error::InvalidBasepoint(
                    "origin lies over the puncture".into(),
                ));
            }
            let raw = fibre.log_eval(ZERO) - pi.exponent(ZERO);
            let turns = (raw.im / std::f64::consts::TAU).round();
            let offset = Complex64::new(0.0, std::f64::consts::TAU * turns);
            if (raw - offset).norm() > BASEPOINT_TOL {
                return Err(Error::InvalidBasepoint(format!(
                    "logarithmic chart misses the basepoint by {:e}",
                    (raw - offset).norm()
                )));
            }
            Chart::Logarithmic { fibre, offset }
        }
    };
    Ok(LiftedMap {
        covering: pi.clone(),
        base: base.clone(),
        settings,
        chart,
        cache: Mutex::new(HashMap::new()),
    })
}

impl LiftedMap {
    pub fn covering(&self) -> &CoveringMap {
        &self.covering
    }

    pub fn base(&self) -> &BlaschkeProduct {
        &self.base
    }

    pub fn settings(&self) -> IntegratorSettings {
        self.settings
    }

    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda == ZERO {
            return Ok(ZERO);
        }
        if let Some(v) = self.cache.lock().unwrap().get(&key(lambda)) {
            return Ok(*v);
        }
        let v = self.integrate_ray(lambda, &[1.0])?[0];
        self.cache.lock().unwrap().insert(key(lambda), v);
        Ok(v)
    }

    /// Values at `fractions[i]·end` for increasing `fractions` in `(0, 1]`,
    /// from a single continuation along the segment `[0, end]`.
    pub fn eval_ray(&self, end: Complex64, fractions: &[f64]) -> Result<Vec<Complex64>> {
        let values = self.integrate_ray(end, fractions)?;
        let mut cache = self.cache.lock().unwrap();
        for (f, v) in fractions.iter().zip(&values) {
            cache.insert(key(end * *f), *v);
        }
        Ok(values)
    }

    /// `|B(ψ(λ)) − π(λ)|`.
    pub fn residual(&self, lambda: Complex64) -> Result<f64> {
        let psi = self.eval(lambda)?;
        Ok((self.base.eval(psi) - self.covering.eval(lambda)).norm())
    }

    /// `dψ/dλ` at `(λ, ψ)`.
    fn slope(&self, lambda: Complex64, psi: Complex64) -> Result<Complex64> {
        match &self.chart {
            Chart::Direct => {
                let d = self.base.derivative(psi);
                if d.norm() < OBSTRUCTION_FLOOR {
                    return Err(Error::LiftingObstruction {
                        at: lambda,
                        derivative: d.norm(),
                    });
                }
                Ok(self.covering.derivative(lambda) / d)
            }
            Chart::Logarithmic { fibre, .. } => {
                let ld = fibre.log_derivative(psi);
                if !ld.is_finite() {
                    // ψ sits on a fibre point to working precision
                    return Ok(ZERO);
                }
                if ld.norm() < OBSTRUCTION_FLOOR {
                    return Err(Error::LiftingObstruction {
                        at: lambda,
                        derivative: ld.norm(),
                    });
                }
                Ok(self.covering.exponent_derivative(lambda) / ld)
            }
        }
    }

    /// One Newton step towards the constraint; `None` once the residual is
    /// exactly zero or `ψ` is on a fibre point.
    fn newton_step(&self, lambda: Complex64, psi: Complex64) -> Option<Complex64> {
        match &self.chart {
            Chart::Direct => {
                let g = self.base.eval(psi) - self.covering.eval(lambda);
                let d = self.base.derivative(psi);
                if g == ZERO || d == ZERO {
                    None
                } else {
                    Some(g / d)
                }
            }
            Chart::Logarithmic { fibre, offset } => {
                let log_f = fibre.log_eval(psi);
                if !log_f.is_finite() {
                    return None;
                }
                let g = wrap(log_f - self.covering.exponent(lambda) - offset);
                let d = fibre.log_derivative(psi);
                if g == ZERO || !d.is_finite() {
                    None
                } else {
                    Some(g / d)
                }
            }
        }
    }

    fn correct(&self, lambda: Complex64, guess: Complex64) -> Option<Complex64> {
        let mut psi = guess;
        for _ in 0..self.settings.max_newton {
            let Some(step) = self.newton_step(lambda, psi) else {
                return Some(psi);
            };
            if !step.is_finite() {
                return None;
            }
            psi -= step;
            if step.norm() <= self.settings.newton_tol * (1.0 + psi.norm()) {
                return Some(psi);
            }
        }
        None
    }

    fn chart_change(&self, a: Complex64, b: Complex64, psi: Complex64) -> f64 {
        match &self.chart {
            Chart::Direct => {
                let scale = self.base.derivative(psi).norm().max(OBSTRUCTION_FLOOR);
                (self.covering.eval(b) - self.covering.eval(a)).norm() / scale
            }
            Chart::Logarithmic { .. } => (self.covering.exponent(b) - self.covering.exponent(a)).norm(),
        }
    }

    fn integrate_ray(&self, end: Complex64, fractions: &[f64]) -> Result<Vec<Complex64>> {
        let s = self.settings;
        let mut out = Vec::with_capacity(fractions.len());
        let mut t = 0.0;
        let mut psi = ZERO;
        let mut dt = s.initial_step;
        for &stop in fractions {
            if !(stop > 0.0 && stop <= 1.0) || stop < t {
                return Err(Error::Precondition(format!(
                    "ray fractions must increase within (0, 1], got {stop}"
                )));
            }
            while t < stop {
                let h = dt.min(stop - t);
                let here = end * t;
                let there = end * (t + h);
                if h < stop - t && self.chart_change(here, there, psi) > s.max_chart_step {
                    dt = h * 0.5;
                    if dt < s.min_step {
                        return Err(self.stalled(here, psi));
                    }
                    continue;
                }
                let k1 = end * self.slope(here, psi)?;
                let euler = psi + k1 * h;
                let k2 = end * self.slope(there, euler)?;
                let predicted = psi + (k1 + k2) * (0.5 * h);
                let accepted = self.correct(there, predicted).filter(|c| {
                    c.norm() < 1.0
                        && (c - predicted).norm() <= 0.5 * (predicted - psi).norm() + 1e-10
                });
                match accepted {
                    Some(next) => {
                        psi = next;
                        t = if h == stop - t { stop } else { t + h };
                        dt = (h * 1.5).min(0.25);
                    }
                    None => {
                        dt = h * 0.5;
                        if dt < s.min_step {
                            return Err(self.stalled(there, psi));
                        }
                    }
                }
            }
            out.push(psi);
        }
        Ok(out)
    }

    fn stalled(&self, lambda: Complex64, psi: Complex64) -> Error {
        Error::LiftingObstruction {
            at: lambda,
            derivative: self.base.derivative(psi).norm(),
        }
    }

    /// Largest `|B ∘ ψ − π|` over a polar grid of `rays × radii` points in
    /// the disc of radius `outer`, together with the largest `|ψ|`.
    pub fn grid_residual(&self, rays: usize, radii: usize, outer: f64) -> Result<(f64, f64)> {
        let fractions: Vec<f64> = (1..=radii).map(|j| j as f64 / radii as f64).collect();
        let mut worst: f64 = 0.0;
        let mut reach: f64 = 0.0;
        for k in 0..rays {
            let end = Complex64::from_polar(outer, std::f64::consts::TAU * k as f64 / rays as f64);
            let values = self.eval_ray(end, &fractions)?;
            for (f, psi) in fractions.iter().zip(values) {
                let lambda = end * *f;
                worst = worst.max((self.base.eval(psi) - self.covering.eval(lambda)).norm());
                reach = reach.max(psi.norm());
            }
        }
        Ok((worst, reach))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc_algebra::covering::covering_map;
    use crate::disc_algebra::mobius::{DiscPoint, MobiusAut};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_one_lift_is_inversion() {
        let zeta = DiscPoint::new(c(0.4, -0.2)).unwrap();
        let b = BlaschkeProduct::from_points(&[zeta.value()]).unwrap();
        let pi = covering_map(&[], b.eval(ZERO), 0).unwrap();
        let psi = lift(&b, &pi, IntegratorSettings::default()).unwrap();
        let inverse = MobiusAut::involution(zeta);
        for z in [c(0.3, 0.1), c(-0.8, 0.2), c(0.0, 0.95)] {
            let expected = inverse.eval(pi.eval(z)).unwrap();
            assert!((psi.eval(z).unwrap() - expected).norm() < 1e-10);
            assert!(psi.residual(z).unwrap() < 1e-12);
        }
    }

    #[test]
    fn basepoint_is_fixed() {
        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        let p = b.critical_data().values[0];
        let pi = covering_map(&[DiscPoint::new(p).unwrap()], b.eval(ZERO), 0).unwrap();
        let psi = lift(&b, &pi, IntegratorSettings::default()).unwrap();
        assert_eq!(psi.eval(ZERO).unwrap(), ZERO);
    }

    #[test]
    fn punctured_lift_has_small_residual() {
        let b = BlaschkeProduct::from_points(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        let b = b.decritalize(1e-6).unwrap().product;
        let p = b.critical_data().values[0];
        let pi = covering_map(&[DiscPoint::new(p).unwrap()], b.eval(ZERO), 0).unwrap();
        let psi = lift(&b, &pi, IntegratorSettings::default()).unwrap();
        let (residual, reach) = psi.grid_residual(64, 32, 0.99).unwrap();
        assert!(residual <= LIFT_RESIDUAL_TOL, "residual {residual:e}");
        assert!(reach < 1.0);
    }

    #[test]
    fn critical_point_on_path_is_an_obstruction() {
        // covering of the full disc cannot be lifted through a degree-two map
        let b = BlaschkeProduct::from_points(&[c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let pi = covering_map(&[], b.eval(ZERO), 0).unwrap();
        let psi = lift(&b, &pi, IntegratorSettings::default()).unwrap();
        assert!(matches!(psi.eval(c(0.5, 0.0)), Err(Error::LiftingObstruction { .. })));
    }
}
