use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::Simplex;
use crate::analytic_disc::{green_oracle, poletsky_value, AnalyticDisc, Domain, GreenQuery, Point};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Largest modulus a preimage slot may take.
pub const SLOT_MAX_MODULUS: f64 = 1.0 - 1e-6;

const PROBE_RADIUS: f64 = 0.9;
const MAX_POLISH_ROUNDS: usize = 12;
const GOLDEN_STEPS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Simplex iterations per restart.
    pub max_iterations: usize,
    pub penalty_weight: f64,
    pub boundary_grid: usize,
    pub rng_seed: u64,
    pub simplex_radius: f64,
    pub degree: usize,
    /// Boundary margin the search aims to keep; shortfalls are penalised.
    pub margin_floor: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 8,
            max_iterations: 4000,
            penalty_weight: 1e6,
            boundary_grid: 256,
            rng_seed: 0,
            simplex_radius: 0.25,
            degree: 3,
            margin_floor: 1e-5,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.restarts > 0
            && self.max_iterations > 0
            && self.penalty_weight > 0.0
            && self.boundary_grid >= 64
            && self.simplex_radius > 0.0
            && self.degree > 0
            && self.margin_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid optimizer config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundResult {
    pub value: f64,
    pub disc: AnalyticDisc,
    pub feasibility_margin: f64,
    pub iterations_used: usize,
}

/// Discs `φ = a + P·S` with `P(λ) = ∏(λ − λ_j)` and `S(0) = (z − a)/P(0)`,
/// so `φ(0) = z` and `φ(λ_j) = a` hold for every parameter vector.
///
/// Parameters: two reals per slot `λ_j`, then two reals per free
/// coefficient `S_i[1..=d−k]` of each coordinate.
#[derive(Debug, Clone)]
pub struct DiscParametrization {
    pub degree: usize,
    pub slots: usize,
    pub pole: Point,
    pub base: Point,
}

impl DiscParametrization {
    pub fn new(degree: usize, slots: usize, pole: Point, base: Point) -> Result<Self> {
        if slots == 0 || degree < slots {
            return Err(Error::Precondition(format!(
                "need 1 <= k <= d, got k = {slots}, d = {degree}"
            )));
        }
        if pole.len() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: pole.len(),
                got: base.len(),
            });
        }
        Ok(DiscParametrization {
            degree,
            slots,
            pole,
            base,
        })
    }

    pub fn dimension(&self) -> usize {
        2 * self.slots + 2 * self.pole.len() * (self.degree - self.slots)
    }

    pub fn slot_values(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.slots).map(|j| to_slot(x[2 * j], x[2 * j + 1])).collect()
    }

    /// `None` when a slot sits at the origin while `a ≠ z`.
    pub fn disc(&self, x: &[f64]) -> Option<AnalyticDisc> {
        let slots = self.slot_values(x);
        let p = Poly::from_roots(&slots);
        let p0 = p.coeffs[0];
        let free = self.degree - self.slots;
        let mut coords = Vec::with_capacity(self.pole.len());
        for (i, (&a, &z)) in self.pole.iter().zip(&self.base).enumerate() {
            let s0 = if z == a { Complex64::new(0.0, 0.0) } else { (z - a) / p0 };
            if !s0.is_finite() {
                return None;
            }
            let mut s = vec![s0];
            let off = 2 * self.slots + 2 * free * i;
            s.extend((0..free).map(|m| Complex64::new(x[off + 2 * m], x[off + 2 * m + 1])));
            coords.push(p.mul(&Poly::new(s)).add(&Poly::constant(a)));
        }
        AnalyticDisc::new(coords).ok()
    }

    /// `∏ |λ_j|`, the value the slots alone certify.
    pub fn slot_product(&self, x: &[f64]) -> f64 {
        self.slot_values(x).iter().map(|l| l.norm()).product()
    }

    /// Parameter vector with the given slots and free coefficients.
    pub fn encode(&self, slots: &[Complex64], free: &[Complex64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dimension());
        for &l in slots {
            let (u, v) = from_slot(l);
            x.push(u);
            x.push(v);
        }
        for c in free {
            x.push(c.re);
            x.push(c.im);
        }
        x.resize(self.dimension(), 0.0);
        x
    }
}

fn to_slot(u: f64, v: f64) -> Complex64 {
    let r = u.hypot(v);
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(u, v) * (SLOT_MAX_MODULUS * r.tanh() / r)
}

fn from_slot(l: Complex64) -> (f64, f64) {
    let m = l.norm();
    if m == 0.0 {
        return (0.0, 0.0);
    }
    let r = (m / SLOT_MAX_MODULUS).min(1.0 - 1e-12).atanh();
    (r * l.re / m, r * l.im / m)
}

struct Finalist {
    value: f64,
    disc: AnalyticDisc,
    margin: f64,
}

/// Multi-start simplex search for a disc through `q.base` hitting `q.pole`
/// at `k` slots, minimising the product of slot moduli subject to staying
/// inside the domain.
pub fn upper_bound_search(q: &GreenQuery, k: usize, config: &OptimizerConfig) -> Result<UpperBoundResult> {
    config.validate()?;
    let param = DiscParametrization::new(config.degree, k, q.pole.clone(), q.base.clone())?;
    if q.domain.dimension() != q.pole.len() {
        return Err(Error::DimensionMismatch {
            expected: q.domain.dimension(),
            got: q.pole.len(),
        });
    }
    if q.pole_is_base() {
        return pole_at_base(q, config);
    }
    let hint = green_oracle(q).map(|g| g.value).unwrap_or(PROBE_RADIUS);
    let runs: Vec<(Option<Finalist>, usize)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(q, &param, config, hint, r))
        .collect();
    let iterations_used = runs.iter().map(|(_, n)| n).sum();
    let mut best: Option<Finalist> = None;
    for (f, _) in runs {
        if let Some(f) = f {
            if best.as_ref().map_or(true, |b| f.value < b.value) {
                best = Some(f);
            }
        }
    }
    let best = best.ok_or(Error::NoBound {
        restarts: config.restarts,
    })?;
    Ok(UpperBoundResult {
        value: best.value,
        disc: best.disc,
        feasibility_margin: best.margin,
        iterations_used,
    })
}

fn run_restart(
    q: &GreenQuery,
    param: &DiscParametrization,
    config: &OptimizerConfig,
    hint: f64,
    restart: usize,
) -> (Option<Finalist>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(restart as u64);
    let slots: Vec<Complex64> = (0..param.slots)
        .map(|_| {
            let r = hint * rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, TAU * rng.gen::<f64>())
        })
        .collect();
    let free_len = (param.dimension() - 2 * param.slots) / 2;
    let free: Vec<Complex64> = (0..free_len)
        .map(|_| {
            if restart == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1))
            }
        })
        .collect();
    let mut slots = slots;
    let mut start = param.encode(&slots, &free);
    // Pull the slots outward until the starting disc is feasible, so the
    // simplex starts away from the penalty wall.
    for _ in 0..40 {
        let feasible = param
            .disc(&start)
            .and_then(|d| sharp_margin(&d, &q.domain, config.boundary_grid))
            .is_some_and(|m| m > config.margin_floor);
        if feasible {
            break;
        }
        for l in slots.iter_mut() {
            let m = l.norm().max(1e-3);
            *l = *l / l.norm().max(1e-300) * (0.5 * (m + SLOT_MAX_MODULUS));
            if !l.is_finite() || l.norm() == 0.0 {
                *l = Complex64::new(0.5 * (m + SLOT_MAX_MODULUS), 0.0);
            }
        }
        start = param.encode(&slots, &free);
    }

    let mut objective = |x: &[f64]| -> f64 {
        let Some(disc) = param.disc(x) else {
            return 1e300;
        };
        let margin = match sharp_margin(&disc, &q.domain, config.boundary_grid) {
            Some(m) if m.is_finite() => m,
            _ => return 1e300,
        };
        let short = (config.margin_floor - margin).max(0.0);
        param.slot_product(x) + config.penalty_weight * short * short
    };

    let mut used = 0;
    let mut simplex = Simplex::around(&start, config.simplex_radius, &mut objective);
    for round in 0..MAX_POLISH_ROUNDS {
        if used >= config.max_iterations {
            break;
        }
        let before = simplex.best().1;
        let out = simplex.run(&mut objective, config.max_iterations - used, 1e-15);
        used += out.iterations;
        if round > 0 && before - out.value < 1e-13 {
            break;
        }
        let centre = simplex.best().0.to_vec();
        simplex = Simplex::around(&centre, 0.05 * config.simplex_radius, &mut objective);
    }
    let x = simplex.best().0.to_vec();
    (finalise(q, param, config, &x), used)
}

/// Grid minimum of the boundary margin, with each local minimum of the grid
/// refined by golden-section search between its neighbours.
fn sharp_margin(disc: &AnalyticDisc, domain: &Domain, grid: usize) -> Option<f64> {
    let h = TAU / grid as f64;
    let at = |t: f64| domain.margin(&disc.eval(Complex64::from_polar(1.0, t))).unwrap_or(f64::NEG_INFINITY);
    let values: Vec<f64> = (0..grid).map(|k| at(h * k as f64)).collect();
    let mut worst = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !worst.is_finite() {
        return None;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for k in 0..grid {
        let (prev, next) = (values[(k + grid - 1) % grid], values[(k + 1) % grid]);
        if values[k] > prev || values[k] > next {
            continue;
        }
        let theta = h * k as f64;
        let (mut lo, mut hi) = (theta - h, theta + h);
        let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut f1, mut f2) = (at(x1), at(x2));
        for _ in 0..GOLDEN_STEPS {
            if f1 < f2 {
                hi = x2;
                (x2, f2) = (x1, f1);
                x1 = hi - g * (hi - lo);
                f1 = at(x1);
            } else {
                lo = x1;
                (x1, f1) = (x2, f2);
                x2 = lo + g * (hi - lo);
                f2 = at(x2);
            }
        }
        worst = worst.min(f1).min(f2);
    }
    Some(worst)
}

fn finalise(q: &GreenQuery, param: &DiscParametrization, config: &OptimizerConfig, x: &[f64]) -> Option<Finalist> {
    let disc = param.disc(x)?;
    let margin = disc.certify_range(&q.domain, config.boundary_grid).ok()?;
    let (value, _) = poletsky_value(&disc, &q.pole).ok()?;
    Some(Finalist {
        value: value.value,
        disc,
        margin,
    })
}

/// `z + λ v` with the pole hit at the origin; `v` is halved until the disc
/// certifies.
fn pole_at_base(q: &GreenQuery, config: &OptimizerConfig) -> Result<UpperBoundResult> {
    let n = q.base.len();
    let mut t = q.domain.margin(&q.base)? / (2.0 * (n as f64).sqrt());
    for _ in 0..60 {
        let disc = AnalyticDisc::linear(&q.base, &vec![Complex64::new(t, 0.0); n])?;
        if let Ok(margin) = disc.certify_range(&q.domain, config.boundary_grid) {
            let (value, _) = poletsky_value(&disc, &q.pole)?;
            return Ok(UpperBoundResult {
                value: value.value,
                disc,
                feasibility_margin: margin,
                iterations_used: 0,
            });
        }
        t *= 0.5;
    }
    Err(Error::NoBound { restarts: 0 })
}
