//! Re-checks a product-disc certificate from its recorded inputs: the
//! defining properties of `γ` are evaluated directly, and the whole
//! pipeline is replayed to confirm every recorded intermediate value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::certificate::{Gamma, GammaDescription, ProductDiscCertificate, Tolerances};
use super::factor::max_distance;
use super::pipeline::{run_pipeline, schedule_radius, PipelineInput, LIFT_GRID};
use crate::analytic_disc::{poletsky_value, PREIMAGE_TOL};
use crate::disc_algebra::{lift, DiscPoint};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
            detail: String::new(),
        });
    }

    fn below(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit,
            passed: value < limit,
            detail: String::new(),
        });
    }

    fn above(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit,
            passed: value > limit,
            detail: String::new(),
        });
    }

    fn failed(&mut self, name: &str, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            value: f64::NAN,
            limit: f64::NAN,
            passed: false,
            detail,
        });
    }

    fn record<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failed(name, e.to_string());
                None
            }
        }
    }
}

fn relative_gap(x: f64, y: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

/// Largest matched distance between two point multisets, or infinity when
/// the counts differ.
fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, p), (_, q)| (*p - x).norm().total_cmp(&(*q - x).norm()));
        match best {
            Some((j, y)) => {
                used[j] = true;
                worst = worst.max((y - x).norm());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// First place where two JSON documents differ beyond relative tolerance
/// `tol` in a number, or structurally.
fn json_mismatch(path: &str, a: &Value, b: &Value, tol: f64) -> Option<(String, f64)> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            let gap = relative_gap(x, y);
            (gap > tol).then(|| (path.to_string(), gap))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some((format!("{path} (length {} vs {})", x.len(), y.len()), f64::INFINITY));
            }
            x.iter()
                .zip(y)
                .enumerate()
                .find_map(|(i, (p, q))| json_mismatch(&format!("{path}[{i}]"), p, q, tol))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Some((format!("{path} (keys differ)"), f64::INFINITY));
            }
            x.iter()
                .find_map(|(k, p)| json_mismatch(&format!("{path}.{k}"), p, &y[k], tol))
        }
        _ => (a != b).then(|| (path.to_string(), f64::INFINITY)),
    }
}

pub fn verify_certificate(cert: &ProductDiscCertificate) -> VerificationReport {
    verify_certificate_with(cert, &Tolerances::default())
}

/// Checks run against `tol`, never against the tolerances the certificate
/// records; those are compared like any other field during replay.
pub fn verify_certificate_with(cert: &ProductDiscCertificate, tol: &Tolerances) -> VerificationReport {
    let mut report = VerificationReport::default();
    let level = cert.level;
    report.above("level_positive", level, 0.0);
    report.at_most("level_at_most_one", level, 1.0);
    let product: f64 = cert.gamma_zeros.iter().map(|z| z.norm()).product();
    report.at_most("achieved_is_zero_product", relative_gap(cert.achieved, product), tol.replay);
    report.below("achieved_below_level", cert.achieved, level);

    let input = PipelineInput {
        domains: cert.domains.clone(),
        pole: cert.pole.clone(),
        base: cert.base.clone(),
        level,
        discs: cert.inputs.clone(),
    };
    for i in 0..2 {
        let name = format!("input_{}", i + 1);
        if let Some(gap) = report.record(&name, max_distance(&cert.inputs[i].center(), &cert.base[i])) {
            report.at_most(&format!("{name}_through_base"), gap, 1e-10);
        }
        if let Some((v, _)) = report.record(&name, poletsky_value(&cert.inputs[i], &cert.pole[i])) {
            report.below(&format!("{name}_beats_level"), v.value, level);
        }
    }

    let zeros: Vec<Complex64> = cert.gamma_zeros.iter().map(|z| z.value()).collect();
    match &cert.gamma {
        GammaDescription::Composed {
            blaschke,
            covering,
            integrator,
            radius,
            radius_index,
            ..
        } => {
            report.at_most(
                "radius_on_schedule",
                (radius - schedule_radius(*radius_index)).abs(),
                1e-8,
            );
            let c = covering.basepoint_value;
            report.at_most("covering_basepoint", (covering.eval(Complex64::new(0.0, 0.0)) - c).norm(), 1e-10);
            for (i, b) in blaschke.iter().enumerate() {
                report.at_most(
                    &format!("blaschke_{}_basepoint", i + 1),
                    (b.eval(Complex64::new(0.0, 0.0)) - c).norm(),
                    1e-10,
                );
                let residual = lift(b, covering, *integrator)
                    .and_then(|psi| psi.grid_residual(LIFT_GRID.0, LIFT_GRID.1, *radius));
                if let Some((res, _)) = report.record(&format!("lift_{}", i + 1), residual) {
                    report.at_most(&format!("lift_{}_residual", i + 1), res, tol.lift_residual);
                }
            }
            if let Some(j) = report.record("jensen", covering.jensen_certificate(*radius, level.ln())) {
                report.at_most("jensen_identity", j.identity_residual, tol.identity);
                report.below("jensen_bound", j.gap(), j.log_bound);
                report.at_most(
                    "jensen_consistency",
                    (cert.achieved - j.gap().exp()).abs(),
                    tol.jensen_consistency,
                );
                let recomputed: Vec<Complex64> = j.interior_zeros.iter().map(|z| z.value()).collect();
                report.at_most("zero_list", multiset_distance(&recomputed, &zeros), tol.zero_match);
                match &cert.jensen {
                    Some(stored) => {
                        let pairs = [
                            ("jensen_radius", stored.radius, j.radius),
                            ("jensen_log_bound", stored.log_bound, j.log_bound),
                            ("jensen_origin", stored.log_value_at_origin, j.log_value_at_origin),
                            ("jensen_mean", stored.boundary_mean, j.boundary_mean),
                        ];
                        for (name, x, y) in pairs {
                            report.at_most(name, relative_gap(x, y), tol.replay);
                        }
                    }
                    None => report.failed("jensen_recorded", "composed certificate without Jensen data".into()),
                }
            }
        }
        GammaDescription::Polynomial { disc } => {
            let set = disc.preimages(&cert.product_pole(), PREIMAGE_TOL);
            if let Some(set) = report.record("gamma_preimages", set) {
                report.at_most("zero_list", multiset_distance(&set.points(), &zeros), tol.zero_match);
            }
        }
    }

    if let Some(gamma) = report.record("gamma", Gamma::build(&cert.gamma)) {
        let base = cert.product_base();
        let pole = cert.product_pole();
        if let Some(g0) = report.record("gamma_origin", gamma.eval(Complex64::new(0.0, 0.0))) {
            if let Some(gap) = report.record("gamma_origin", max_distance(&g0, &base)) {
                report.at_most("gamma_basepoint", gap, tol.basepoint);
            }
        }
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for z in &cert.gamma_zeros {
            match gamma.eval(z.value()).and_then(|p| max_distance(&p, &pole)) {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    report.failed("gamma_zero_eval", e.to_string());
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            report.at_most("gamma_preimage_residual", worst, tol.preimage);
        }
        let margin = gamma.min_margin(&cert.product_domain(), tol.margin_rays, tol.margin_radii);
        if let Some(m) = report.record("gamma_range", margin) {
            report.above("gamma_margin", m, 0.0);
        }
    }

    if cert.gamma_zeros.iter().any(|z| DiscPoint::new(z.value()).is_err()) {
        report.failed("gamma_zeros_inside", "zero outside the disc".into());
    }

    match run_pipeline(&input, &cert.config) {
        Ok(replayed) => {
            let a = serde_json::to_value(cert);
            let b = serde_json::to_value(&replayed);
            match (a, b) {
                (Ok(a), Ok(b)) => match json_mismatch("$", &a, &b, tol.replay) {
                    None => report.at_most("replay", 0.0, tol.replay),
                    Some((path, gap)) => report.checks.push(Check {
                        name: "replay".into(),
                        value: gap,
                        limit: tol.replay,
                        passed: false,
                        detail: format!("recorded value differs from replay at {path}"),
                    }),
                },
                _ => report.failed("replay", "certificate does not serialise".into()),
            }
        }
        Err(e) => report.failed("replay", e.to_string()),
    }
    report
}
