//! Command-line front end.
//!
//! ```text
//! shortfall-hedge <command> --config <file> [--x|--v|--c|--grid ...] [--seed N] [--out <file>] [--format csv|json]
//! ```
//!
//! Amounts accept the symbols `p(H)` (alias `price`), `E[H]` and `E[l(H)]`,
//! optionally scaled as `k*sym` or `sym/k`; grids are `start:end:count`. `SH_THREADS`
//! caps the worker threads.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::mc::{verify_risk, McConfig};
use crate::payoffs::{Payoff, PayoffKind};
use crate::psi::{HedgingProblem, LossSpec, Method};
use crate::solver::{price_checked, price_mc, CurveKind, PhiPoint, SolveConfig, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A named payoff in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub strike: f64,
}

impl PayoffSpec {
    pub fn build(&self) -> Result<Payoff> {
        Payoff::new(self.kind, self.strike)
    }
}

/// Everything a run needs, parsed strictly from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketParams,
    pub payoff: PayoffSpec,
    #[serde(default)]
    pub loss: LossSpec,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Check every section, reporting all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let m = &self.market;
        let mut note = |ok: bool, msg: &str| {
            if !ok {
                problems.push(msg.to_string());
            }
        };
        note(
            m.s0.iter().all(|s| *s > 0.0 && s.is_finite()),
            "market.s0: must be positive",
        );
        note(
            m.sigma.iter().all(|s| *s > 0.0 && s.is_finite()),
            "market.sigma: must be positive",
        );
        note(
            m.alpha.iter().all(|a| a.is_finite()),
            "market.alpha: must be finite",
        );
        note(m.r.is_finite(), "market.r: must be finite");
        note(
            m.maturity > 0.0 && m.maturity.is_finite(),
            "market.T: must be positive",
        );
        note(
            m.rho.abs() <= crate::market::MAX_ABS_RHO,
            "market.rho: |rho| must not exceed 0.9999",
        );
        note(
            self.payoff.kind != PayoffKind::Custom,
            "payoff.kind: custom payoffs are library-only",
        );
        note(
            self.payoff.strike > 0.0 && self.payoff.strike.is_finite(),
            "payoff.strike: must be positive",
        );
        for (r, field) in [
            (self.loss.validate(), "loss"),
            (self.solver.validate(), "solver"),
            (self.mc.validate(), "mc"),
        ] {
            if let Err(e) = r {
                problems.push(format!("{field}: {e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn problem(&self) -> Result<HedgingProblem> {
        HedgingProblem::new(self.market, self.payoff.build()?)
    }

    pub fn solver(&self) -> Result<Solver> {
        Solver::new(self.problem()?, self.loss, self.solver, self.mc)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "shortfall-hedge",
    version,
    about = "Quantile hedging of two-asset options"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// No-arbitrage price `p(H)`.
    Price {
        #[command(flatten)]
        common: Common,
    },
    /// Auxiliary functions at one `c`.
    Psi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        c: String,
    },
    /// Minimal risk for capital `x`.
    Phi1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
    },
    /// Minimal capital for risk budget `v`.
    Phi2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        v: String,
    },
    /// `Φ₁` or `Φ₂` on a grid `start:end:count`.
    Curve {
        #[arg(value_enum)]
        kind: CurveArg,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: String,
    },
    /// Simulate the modified claim for capital `x` and compare with `Φ₁(x)`.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CurveArg {
    Phi1,
    Phi2,
}

impl From<CurveArg> for CurveKind {
    fn from(a: CurveArg) -> Self {
        match a {
            CurveArg::Phi1 => CurveKind::Phi1,
            CurveArg::Phi2 => CurveKind::Phi2,
        }
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Price { common }
            | Command::Psi { common, .. }
            | Command::Phi1 { common, .. }
            | Command::Phi2 { common, .. }
            | Command::Curve { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Price { .. } => "price",
            Command::Psi { .. } => "psi",
            Command::Phi1 { .. } => "phi1",
            Command::Phi2 { .. } => "phi2",
            Command::Curve { .. } => "curve",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Round to 12 significant digits, then print the shortest decimal that
/// parses back to the rounded value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let y = round12(x);
    if y != 0.0 && (y.abs() < 1e-5 || y.abs() >= 1e15) {
        format!("{y:e}")
    } else {
        format!("{y}")
    }
}

fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        Value::String(format_number(x))
    }
}

/// Symbols an amount may refer to.
pub trait Anchors {
    fn price(&self) -> Result<f64>;
    fn expected_claim(&self) -> Result<f64>;
    fn risk_ceiling(&self) -> Result<f64>;
}

impl Anchors for Solver {
    fn price(&self) -> Result<f64> {
        Solver::price(self)
    }
    fn expected_claim(&self) -> Result<f64> {
        Solver::expected_claim(self)
    }
    fn risk_ceiling(&self) -> Result<f64> {
        Solver::risk_ceiling(self)
    }
}

/// Parse `1.5`, `p(H)`, `price`, `E[H]`, `E[l(H)]` or a product of these
/// with numbers, e.g. `0.5*p(H)`, `p(H)*0.5`, `p(H)/3`.
pub fn parse_amount(expr: &str, anchors: &dyn Anchors) -> Result<f64> {
    let bad = || Error::Config(format!("cannot read amount `{expr}`"));
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = expr;
    loop {
        let cut = rest.find(['*', '/']).unwrap_or(rest.len());
        let f = rest[..cut].trim();
        let v = match f {
            "p(H)" | "price" => anchors.price()?,
            "E[H]" => anchors.expected_claim()?,
            "E[l(H)]" => anchors.risk_ceiling()?,
            _ => f.parse::<f64>().map_err(|_| bad())?,
        };
        if divide {
            if v == 0.0 {
                return Err(bad());
            }
            value /= v;
        } else {
            value *= v;
        }
        if cut == rest.len() {
            return Ok(value);
        }
        divide = rest.as_bytes()[cut] == b'/';
        rest = &rest[cut + 1..];
    }
}

/// `start:end:count` with inclusive ends.
pub fn parse_grid(expr: &str, anchors: &dyn Anchors) -> Result<Vec<f64>> {
    let parts: Vec<&str> = expr.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "grid `{expr}` is not start:end:count"
        )));
    }
    let a = parse_amount(parts[0], anchors)?;
    let b = parse_amount(parts[1], anchors)?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("grid count `{}` is not an integer", parts[2])))?;
    if n == 0 {
        return Err(Error::Config("grid count must be positive".into()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub path: Option<PathBuf>,
    /// False when a check inside the command failed (e.g. `verify`).
    pub success: bool,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
}

fn phi_row(p: &PhiPoint) -> Vec<String> {
    vec![
        format_number(p.input),
        format_number(p.value),
        format_number(p.c),
        p.method.name().to_string(),
        format_number(p.err_estimate),
    ]
}

fn phi_json(p: &PhiPoint) -> Value {
    json!({
        "input": num(p.input),
        "value": num(p.value),
        "c": num(p.c),
        "method": p.method.name(),
        "err_estimate": num(p.err_estimate),
    })
}

const CURVE_HEADER: [&str; 5] = ["input", "value", "c", "method", "err_estimate"];

/// Parse arguments, run the command and render its output.
pub fn run<I, T>(args: I) -> Result<Rendered>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    execute(&cli.command)
}

pub fn execute(command: &Command) -> Result<Rendered> {
    let common = command.common();
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.mc.seed = seed;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if let Some(p) = &common.out {
        cfg.output.path = Some(p.clone());
    }
    let solver = cfg.solver()?;
    let mut success = true;
    let (table, result): (Table, Value) = match command {
        Command::Price { .. } => {
            let (p, err, method) = match solver.method() {
                Method::Quadrature => (price_checked(solver.problem())?, 0.0, Method::Quadrature),
                Method::MonteCarlo => {
                    let (p, e) = price_mc(solver.problem(), &cfg.mc)?;
                    (p, e, Method::MonteCarlo)
                }
            };
            (
                Table {
                    header: vec!["price", "method", "err_estimate"],
                    rows: vec![vec![
                        format_number(p),
                        method.name().into(),
                        format_number(err),
                    ]],
                    notes: vec![],
                },
                json!({"price": num(p), "method": method.name(), "err_estimate": num(err)}),
            )
        }
        Command::Psi { c, .. } => {
            let c = parse_amount(c, &solver)?;
            let pair = match solver.method() {
                Method::Quadrature => solver.problem().psi(cfg.loss, c)?,
                Method::MonteCarlo => solver.problem().psi_mc(cfg.loss, c, &cfg.mc)?,
            };
            (
                Table {
                    header: vec!["c", "psi1", "psi2", "method", "err_estimate"],
                    rows: vec![vec![
                        format_number(pair.c),
                        format_number(pair.psi1),
                        format_number(pair.psi2),
                        pair.method.name().into(),
                        format_number(pair.err_estimate()),
                    ]],
                    notes: vec![],
                },
                json!({
                    "c": num(pair.c),
                    "psi1": num(pair.psi1),
                    "psi2": num(pair.psi2),
                    "method": pair.method.name(),
                    "psi1_err": num(pair.psi1_err),
                    "psi2_err": num(pair.psi2_err),
                }),
            )
        }
        Command::Phi1 { x, .. } | Command::Phi2 { v: x, .. } => {
            let input = parse_amount(x, &solver)?;
            let p = if matches!(command, Command::Phi1 { .. }) {
                solver.phi1(input)?
            } else {
                solver.phi2(input)?
            };
            (
                Table {
                    header: CURVE_HEADER.to_vec(),
                    rows: vec![phi_row(&p)],
                    notes: vec![],
                },
                phi_json(&p),
            )
        }
        Command::Curve { kind, grid, .. } => {
            let grid = parse_grid(grid, &solver)?;
            let curve = solver.curve((*kind).into(), &grid)?;
            let mut rows = Vec::new();
            let mut notes = Vec::new();
            let mut points = Vec::new();
            for p in &curve.points {
                rows.push(vec![
                    format_number(p.input),
                    format_number(p.value),
                    format_number(p.c),
                    p.method.name().into(),
                    format_number(p.err_estimate),
                ]);
                if let Some(e) = &p.error {
                    notes.push(format!("failed input={}: {e}", format_number(p.input)));
                }
                points.push(json!({
                    "input": num(p.input),
                    "value": num(p.value),
                    "c": num(p.c),
                    "method": p.method.name(),
                    "err_estimate": num(p.err_estimate),
                    "error": p.error,
                }));
            }
            (
                Table {
                    header: CURVE_HEADER.to_vec(),
                    rows,
                    notes,
                },
                json!({"kind": curve.kind.name(), "points": points}),
            )
        }
        Command::Verify { x, .. } => {
            let x = parse_amount(x, &solver)?;
            let rep = verify_risk(&solver, x, &cfg.mc)?;
            success = rep.passed;
            let rows = vec![
                ("x", format_number(rep.x)),
                ("c", format_number(rep.c)),
                ("engine_risk", format_number(rep.engine_risk)),
                ("engine_err", format_number(rep.engine_err)),
                ("mc_risk", format_number(rep.mc_risk.mean)),
                ("mc_risk_se", format_number(rep.mc_risk.std_error)),
                ("mc_cost", format_number(rep.mc_cost.mean)),
                ("mc_cost_se", format_number(rep.mc_cost.std_error)),
                ("risk_z", format_number(rep.risk_check.z_score)),
                ("risk_check", pass(rep.risk_check.passed)),
                ("budget_z", format_number(rep.budget_check.z_score)),
                ("budget_check", pass(rep.budget_check.passed)),
            ];
            (
                Table {
                    header: vec!["quantity", "value"],
                    rows: rows
                        .iter()
                        .map(|(k, v)| vec![k.to_string(), v.clone()])
                        .collect(),
                    notes: vec![],
                },
                json!({
                    "x": num(rep.x),
                    "c": num(rep.c),
                    "engine_risk": num(rep.engine_risk),
                    "engine_err": num(rep.engine_err),
                    "mc_risk": num(rep.mc_risk.mean),
                    "mc_risk_se": num(rep.mc_risk.std_error),
                    "mc_cost": num(rep.mc_cost.mean),
                    "mc_cost_se": num(rep.mc_cost.std_error),
                    "risk_check": {"passed": rep.risk_check.passed, "z_score": num(rep.risk_check.z_score)},
                    "budget_check": {"passed": rep.budget_check.passed, "z_score": num(rep.budget_check.z_score)},
                    "passed": rep.passed,
                }),
            )
        }
    };
    let mut notes = table.notes.clone();
    if let Some(r) = solver.fallback_reason() {
        notes.insert(0, format!("monte carlo fallback: {r}"));
    }
    let text = match cfg.output.format {
        Format::Json => {
            let mut doc = json!({
                "config": serde_json::to_value(&cfg).map_err(|e| Error::Config(e.to_string()))?,
                "seed": cfg.mc.seed,
                "command": command.name(),
                "result": result,
            });
            if !notes.is_empty() {
                doc["notes"] = json!(notes);
            }
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            let config = serde_json::to_string(&cfg).map_err(|e| Error::Config(e.to_string()))?;
            let _ = writeln!(s, "# config: {config}");
            let _ = writeln!(s, "# seed: {}", cfg.mc.seed);
            let _ = writeln!(s, "# command: {}", command.name());
            for n in &notes {
                let _ = writeln!(s, "# {n}");
            }
            let _ = writeln!(s, "{}", table.header.join(","));
            for r in &table.rows {
                let _ = writeln!(s, "{}", r.join(","));
            }
            s
        }
    };
    Ok(Rendered {
        text,
        path: cfg.output.path.clone(),
        success,
    })
}

fn pass(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn init_threads() {
    if let Some(n) = std::env::var("SH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidCorrelation { .. } => {
            "config"
        }
        Error::AssumptionViolated { .. } => "assumption",
        Error::UnsupportedClosedForm(_) => "unsupported",
        Error::HeavyTail { .. } => "heavy_tail",
        Error::OutOfRange { .. } => "out_of_range",
        Error::InfeasibleInversion(_) => "infeasible",
        Error::NonFiniteSample { .. } | Error::PayoffContract { .. } => "sample",
        Error::Io(_) => "io",
        _ => "numeric",
    }
}

/// Entry point of the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    // let clap print help and version itself
    if let Err(e) = Cli::try_parse_from(&args) {
        if !e.use_stderr() {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    match run(&args) {
        Ok(out) => {
            let written = match &out.path {
                Some(p) => std::fs::write(p, &out.text).map_err(Error::from),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error[io]: {e}");
                return ExitCode::from(1);
            }
            if out.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("error[check]: verification failed");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", error_kind(&e));
            ExitCode::from(if error_kind(&e) == "config" { 2 } else { 1 })
        }
    }
}
