use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::search::{upper_bound_search, OptimizerConfig};
use crate::analytic_disc::{contractibility_lower_bound, Domain, GreenQuery, Point};
use crate::error::Result;

/// Lower bounds are certified, so a gap below this is an error somewhere.
pub const GAP_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub pair_id: usize,
    pub pole: Point,
    pub base: Point,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub iterations: usize,
    pub margin: f64,
}

/// Upper bound from the search against the projection lower bound, for each
/// `(pole, base)` pair in `D₁ × D₂`.
pub fn product_gap_report(
    d1: &Domain,
    d2: &Domain,
    pairs: &[(Point, Point)],
    k: usize,
    config: &OptimizerConfig,
) -> Result<Vec<GapRow>> {
    let domain = Domain::product(vec![d1.clone(), d2.clone()]);
    let mut rows = Vec::with_capacity(pairs.len());
    for (pair_id, (pole, base)) in pairs.iter().enumerate() {
        let q = GreenQuery::new(domain.clone(), pole.clone(), base.clone())?;
        let lower = contractibility_lower_bound(&q)?.value;
        let upper = upper_bound_search(&q, k, config)?;
        rows.push(GapRow {
            pair_id,
            pole: pole.clone(),
            base: base.clone(),
            upper: upper.value,
            lower,
            gap: upper.value - lower,
            iterations: upper.iterations_used,
            margin: upper.feasibility_margin,
        });
    }
    Ok(rows)
}

/// Poles on `{−0.5, −0.25, 0, 0.25, 0.5}²` against the base
/// `(0.1, −0.1)` in the bidisc.
pub fn bidisc_grid_pairs() -> Vec<(Point, Point)> {
    let ticks = [-0.5, -0.25, 0.0, 0.25, 0.5];
    let base = vec![Complex64::new(0.1, 0.0), Complex64::new(-0.1, 0.0)];
    let mut out = Vec::with_capacity(25);
    for &x in &ticks {
        for &y in &ticks {
            out.push((vec![Complex64::new(x, 0.0), Complex64::new(y, 0.0)], base.clone()));
        }
    }
    out
}

pub fn write_gap_csv<W: Write>(rows: &[GapRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pair_id", "upper", "lower", "gap", "iterations", "margin"])?;
    for r in rows {
        w.write_record([
            r.pair_id.to_string(),
            format!("{:e}", r.upper),
            format!("{:e}", r.lower),
            format!("{:e}", r.gap),
            r.iterations.to_string(),
            format!("{:e}", r.margin),
        ])?;
    }
    w.flush()
}
