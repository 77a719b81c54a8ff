//! Batch front end: closed-form evaluation, disc search, product-disc
//! construction and certificate verification.

pub mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use poletsky::analytic_disc::{green_oracle, AnalyticDisc, Domain, GreenQuery, Point};
use poletsky::optimizer::{bidisc_grid_pairs, product_gap_report, upper_bound_search, write_gap_csv, OptimizerConfig};
use poletsky::proof_pipeline::{
    run_pipeline, verify_certificate_with, GammaDescription, PipelineConfig, PipelineInput, ProductDiscCertificate,
    RadiusPolicy, Tolerances, VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "poletsky", version, about = "Green-function bounds and product-disc certificates")]
pub struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form Green function value.
    Eval(PointArgs),
    /// Disc-search upper bound.
    Upper(UpperArgs),
    /// Certified product disc from one disc per factor.
    Construct(ConstructArgs),
    /// Re-check a certificate; exit status 1 on any failed check.
    Verify(VerifyArgs),
    /// Upper/lower gap table on a product of two domains.
    Gap(GapArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Upper(_) => "upper",
            Command::Construct(_) => "construct",
            Command::Verify(_) => "verify",
            Command::Gap(_) => "gap",
        }
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// `disc`, `bidisc`, or a domain JSON file.
    #[arg(long)]
    pub domain: String,
    /// Comma-separated complex coordinates, e.g. `0.5,0.3-0.1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub pole: String,
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct UpperArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Number of preimage slots.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Factor domains, given twice.
    #[arg(long, num_args = 2, required = true)]
    pub domain: Vec<String>,
    /// Pole in the product, `(a₁, b₁)` concatenated.
    #[arg(long, allow_hyphen_values = true)]
    pub pole: String,
    /// Base point in the product, `(a₂, b₂)` concatenated.
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    #[arg(long)]
    pub level: f64,
    /// Disc JSON files, one per factor.
    #[arg(long = "disc", num_args = 2)]
    pub discs: Vec<PathBuf>,
    /// Use `r = 1 − 2^{−k}` instead of the first admissible radius.
    #[arg(long)]
    pub radius_index: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub certificate: Option<PathBuf>,
    /// Relative tolerance for the replay comparison.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Factor domains, given twice; both default to the unit disc.
    #[arg(long, num_args = 2)]
    pub domain: Vec<String>,
    /// JSON list of `[pole, base]` pairs; defaults to a 5×5 bidisc grid.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Settings shared by all commands, read from `--config`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, must name the command being run.
    pub command: Option<String>,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub tolerances: Option<Tolerances>,
    pub pipeline: PipelineConfig,
    pub optimizer: OptimizerConfig,
    pub rng_seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] poletsky::Error),
    #[error("{} check(s) failed", .0.failures().count())]
    Verification(VerificationReport),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use poletsky::Error as E;
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Core(e) => match e {
                E::UnsupportedCovering { .. }
                | E::NoOracle
                | E::NoFactorValue
                | E::LiftingObstruction { .. }
                | E::RadiusSearchExhausted { .. }
                | E::NoBound { .. } => EXIT_UNSUPPORTED,
                E::Verification(_) => EXIT_VERIFICATION,
                _ => EXIT_INPUT,
            },
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Input(_) => "input".into(),
            CliError::Verification(_) => "verification".into(),
            CliError::Core(e) => {
                let debug = format!("{e:?}");
                let end = debug.find([' ', '(', '{']).unwrap_or(debug.len());
                debug[..end].to_string()
            }
        }
    }

    /// Machine-readable description for standard error.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Verification(report) = self {
            v["report"] = serde_json::to_value(report).unwrap_or_default();
        }
        render::to_json(&v).unwrap_or_else(|_| format!("{{\"error\": \"{}\"}}\n", self.kind()))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{context}: {e}"))
}

pub fn parse_point(text: &str) -> CliResult<Point> {
    text.split(',')
        .map(|s| {
            Complex64::from_str(s.trim()).map_err(|e| CliError::Input(format!("bad coordinate '{s}': {e:?}")))
        })
        .collect()
}

pub fn load_domain(spec: &str) -> CliResult<Domain> {
    let domain = match spec {
        "disc" => Domain::unit_disc(),
        "bidisc" => Domain::unit_polydisc(2),
        path => read_json(Path::new(path))?,
    };
    domain.validate()?;
    Ok(domain)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(input(&path.display().to_string()))?;
    serde_json::from_str(&text).map_err(input(&path.display().to_string()))
}

fn load_config(path: Option<&Path>, command: &str) -> CliResult<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let config: RunConfig = read_json(path)?;
    if let Some(c) = &config.command {
        if c != command {
            return Err(CliError::Input(format!("config is for '{c}', not '{command}'")));
        }
    }
    Ok(config)
}

fn optimizer_config(config: &RunConfig, args: &SearchArgs) -> OptimizerConfig {
    let mut out = config.optimizer.clone();
    if let Some(seed) = config.rng_seed {
        out.rng_seed = seed;
    }
    if let Some(d) = args.degree {
        out.degree = d;
    }
    if let Some(r) = args.restarts {
        out.restarts = r;
    }
    if let Some(s) = args.seed {
        out.rng_seed = s;
    }
    if let Some(m) = args.max_iterations {
        out.max_iterations = m;
    }
    out
}

/// Writes `body` to the chosen output path, or returns it for standard
/// output.
fn emit(out: Option<&Path>, body: String, summary: serde_json::Value) -> CliResult<String> {
    match out {
        Some(path) => {
            fs::write(path, body).map_err(input(&path.display().to_string()))?;
            let mut s = summary;
            s["output"] = json!(path.display().to_string());
            render::to_json(&s).map_err(|e| CliError::Input(e.to_string()))
        }
        None => Ok(body),
    }
}

fn rendered<T: Serialize>(value: &T) -> CliResult<String> {
    render::to_json(value).map_err(|e| CliError::Input(e.to_string()))
}

/// Runs one parsed command and returns what belongs on standard output.
pub fn run(cli: &Cli) -> CliResult<String> {
    let config = load_config(cli.config.as_deref(), cli.command.name())?;
    let out_default = config.output.clone();
    match &cli.command {
        Command::Eval(args) => {
            let q = query(args)?;
            rendered(&green_oracle(&q)?)
        }
        Command::Upper(args) => {
            let q = query(&args.point)?;
            let result = upper_bound_search(&q, args.k, &optimizer_config(&config, &args.search))?;
            let summary = json!({"value": result.value, "feasibility_margin": result.feasibility_margin});
            emit(args.out.as_deref().or(out_default.as_deref()), rendered(&result)?, summary)
        }
        Command::Construct(args) => construct(args, &config),
        Command::Verify(args) => {
            let path = args
                .certificate
                .clone()
                .or_else(|| config.inputs.first().cloned())
                .ok_or_else(|| CliError::Input("no certificate given".into()))?;
            let cert: ProductDiscCertificate = read_json(&path)?;
            let mut tol = config.tolerances.clone().unwrap_or_default();
            if let Some(t) = args.tolerance {
                tol.replay = t;
            }
            let report = verify_certificate_with(&cert, &tol);
            if !report.passed() {
                return Err(CliError::Verification(report));
            }
            let summary = json!({"passed": true, "checks": report.checks.len()});
            emit(args.out.as_deref().or(out_default.as_deref()), rendered(&report)?, summary)
        }
        Command::Gap(args) => {
            let (d1, d2) = match args.domain.as_slice() {
                [] => (Domain::unit_disc(), Domain::unit_disc()),
                [a, b] => (load_domain(a)?, load_domain(b)?),
                _ => return Err(CliError::Input("--domain takes two values".into())),
            };
            let pairs: Vec<(Point, Point)> = match &args.pairs {
                Some(p) => read_json(p)?,
                None => bidisc_grid_pairs(),
            };
            let rows = product_gap_report(&d1, &d2, &pairs, args.k, &optimizer_config(&config, &args.search))?;
            let mut buf = Vec::new();
            write_gap_csv(&rows, &mut buf).map_err(|e| CliError::Input(e.to_string()))?;
            let body = String::from_utf8(buf).expect("csv writer emits UTF-8");
            let worst = rows.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max);
            emit(args.out.as_deref().or(out_default.as_deref()), body, json!({"rows": rows.len(), "max_gap": worst}))
        }
    }
}

fn query(args: &PointArgs) -> CliResult<GreenQuery> {
    let domain = load_domain(&args.domain)?;
    Ok(GreenQuery::new(domain, parse_point(&args.pole)?, parse_point(&args.base)?)?)
}

fn construct(args: &ConstructArgs, config: &RunConfig) -> CliResult<String> {
    let domains = [load_domain(&args.domain[0])?, load_domain(&args.domain[1])?];
    let n1 = domains[0].dimension();
    let total = n1 + domains[1].dimension();
    let split = |p: Point| -> CliResult<[Point; 2]> {
        if p.len() != total {
            return Err(CliError::Input(format!(
                "point has {} coordinates, the product needs {total}",
                p.len()
            )));
        }
        Ok([p[..n1].to_vec(), p[n1..].to_vec()])
    };
    let paths: Vec<PathBuf> = if args.discs.is_empty() {
        config.inputs.clone()
    } else {
        args.discs.clone()
    };
    let [p1, p2] = paths.as_slice() else {
        return Err(CliError::Input("construct needs two disc files".into()));
    };
    let discs: [AnalyticDisc; 2] = [read_json(p1)?, read_json(p2)?];
    let input = PipelineInput {
        domains,
        pole: split(parse_point(&args.pole)?)?,
        base: split(parse_point(&args.base)?)?,
        level: args.level,
        discs,
    };
    let mut pipeline = config.pipeline.clone();
    if let Some(k) = args.radius_index {
        pipeline.radius_policy = RadiusPolicy::Fixed(k);
    }
    let cert = run_pipeline(&input, &pipeline)?;
    let radius_index = match &cert.gamma {
        GammaDescription::Composed { radius_index, .. } => Some(*radius_index),
        GammaDescription::Polynomial { .. } => None,
    };
    let summary = json!({"achieved": cert.achieved, "level": cert.level, "radius_index": radius_index});
    emit(args.out.as_deref().or(config.output.as_deref()), rendered(&cert)?, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_with_signs_and_imaginary_parts() {
        let p = parse_point("0.5, -0.3+0.1i,2i").unwrap();
        assert_eq!(p, vec![Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.1), Complex64::new(0.0, 2.0)]);
        assert!(matches!(parse_point("0.5,x"), Err(CliError::Input(_))));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let bad = r#"{"optimizer": {"restarts": 2}, "colour": "red"}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let bad = r#"{"optimizer": {"restart": 2}}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let ok: RunConfig = serde_json::from_str(r#"{"optimizer": {"restarts": 2}, "rng_seed": 7}"#).unwrap();
        assert_eq!(ok.optimizer.restarts, 2);
        assert_eq!(ok.optimizer.degree, OptimizerConfig::default().degree);
    }

    #[test]
    fn documented_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.optimizer.restarts, 8);
        assert_eq!(c.optimizer.max_iterations, 4000);
        assert_eq!(c.optimizer.degree, 3);
        assert_eq!(c.pipeline.max_radius_index, 20);
        assert_eq!(c.pipeline.radius_policy, RadiusPolicy::FirstValid);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), EXIT_INPUT);
        assert_eq!(CliError::Core(poletsky::Error::NoOracle).exit_code(), EXIT_UNSUPPORTED);
        assert_eq!(
            CliError::Core(poletsky::Error::UnsupportedCovering { punctures: 2 }).exit_code(),
            EXIT_UNSUPPORTED
        );
        assert_eq!(CliError::Verification(VerificationReport::default()).exit_code(), EXIT_VERIFICATION);
        let j = CliError::Core(poletsky::Error::NoOracle).to_json();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["error"], "NoOracle");
        assert_eq!(v["exit_code"], 2);
    }
}
