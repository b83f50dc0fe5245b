//! Command-line interface: `classify`, `gap`, `verify` and `oracle`.
//!
//! Exit codes: 0 for a complete run (whatever the verdicts), 1 for input
//! errors, 2 when the classification contradicts the implication order.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::chain::{self, ChainAnalysis};
use crate::diffusion::{self, DiffusionAnalysis};
use crate::gap::{Boundary, GapEstimate, OracleValue, VariationalBound};
use crate::lattice::{classify_chain, classify_diffusion, ClassificationReport, ClassifyError};
use crate::model::{load_model, Model, RateExpression};
use crate::verdict::Budget;

/// Environment variable multiplying every probe budget.
pub const BUDGET_ENV: &str = "ERGOKIT_BUDGET";

const DEFAULTS: &str = "\
Defaults:
  --budget 1        probe horizons 256·2^k, k = 0..8 (chains); grid to 2^20 (diffusions)
  --format text
  gap --which l0 (killed at 0, the eigenvalue the δ bracket bounds)
  oracle --which l1 (reflecting, the spectral gap)
  diffusion cutoff --L = 4x the smallest
    power of two leaving < 1e-8 of the mass beyond it
  verify --H 0 --N 1000 --tol 1e-9
ERGOKIT_BUDGET multiplies --budget.";

#[derive(Debug, Parser)]
#[command(
    name = "ergokit",
    version,
    about = "Ergodicity criteria and spectral-gap bounds for birth-death chains and diffusions",
    after_help = DEFAULTS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    /// Principal Dirichlet eigenvalue (absorbing at 0).
    L0,
    /// Spectral gap (reflecting).
    L1,
}

impl Which {
    fn boundary(self) -> Boundary {
        match self {
            Which::L0 => Boundary::Absorbing,
            Which::L1 => Boundary::Reflecting,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Model file.
    model: PathBuf,
    /// Multiplier of the probe budget (rounded up to a power of two).
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verdict for every ergodicity property.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Dimension of the Nash inequality (> 2); the row is omitted without it.
        #[arg(long)]
        nu: Option<f64>,
        /// Write `property,x,value` for every probe of every row to this file.
        #[arg(long, value_name = "PATH")]
        emit_curve: Option<PathBuf>,
    },
    /// δ, the bracket [(4δ)⁻¹, δ⁻¹], the representative variational bound
    /// and optionally a truncated-operator eigenvalue.
    Gap {
        #[command(flatten)]
        common: Common,
        /// Also compute the oracle eigenvalue at this size.
        #[arg(long, value_name = "N")]
        oracle: Option<usize>,
        /// Cutoff of the diffusion oracle.
        #[arg(long = "L", value_name = "CUTOFF")]
        cutoff: Option<f64>,
        #[arg(long, value_enum, default_value_t = Which::L0)]
        which: Which,
    },
    /// Checks a test sequence against the drift inequalities up to a horizon.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Expression in `n`, or `hitting` for the mean hitting times of 0.
        #[arg(long)]
        y: String,
        #[arg(long)]
        lambda: f64,
        /// Comma-separated hitting set.
        #[arg(long = "H", value_delimiter = ',', default_value = "0")]
        hitting: Vec<usize>,
        #[arg(long = "N", default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Eigenvalue of the truncated chain or the finite-difference diffusion.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        size: usize,
        #[arg(long, value_enum, default_value_t = Which::L1)]
        which: Which,
        #[arg(long = "L", value_name = "CUTOFF")]
        cutoff: Option<f64>,
    },
}

enum Failure {
    Input(String),
    Contradiction(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn classify_failure(e: ClassifyError) -> Failure {
    match e {
        ClassifyError::Contradiction { .. } => Failure::Contradiction(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Contradiction(msg)) => {
            let _ = writeln!(err, "internal contradiction: {msg}");
            2
        }
    }
}

fn budget(multiplier: f64) -> Result<Budget, Failure> {
    let env = match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .map_err(|_| Failure::Input(format!("{BUDGET_ENV} is not a number: {v}")))?,
        Err(_) => 1.0,
    };
    let factor = multiplier * env;
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Failure::Input(format!("budget multiplier must be positive, got {factor}")));
    }
    Ok(Budget::default().scaled(factor))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Classify { common, nu, emit_curve } => classify(&common, nu, emit_curve.as_deref(), out),
        Command::Gap {
            common,
            oracle,
            cutoff,
            which,
        } => gap(&common, oracle, cutoff, which, out),
        Command::Verify {
            common,
            y,
            lambda,
            hitting,
            horizon,
            tol,
        } => verify(&common, &y, lambda, &hitting, horizon, tol, out),
        Command::Oracle {
            common,
            size,
            which,
            cutoff,
        } => oracle(&common, size, which, cutoff, out),
    }
}

fn real(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e12).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn number(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn json_number(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        Some(x) => json!(format!("{x}")),
        None => Value::Null,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_report(
    report: &ClassificationReport,
    path: &Path,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let model = path.display().to_string();
    let kind = match report.kind {
        crate::lattice::ModelKind::Chain => "birth-death",
        crate::lattice::ModelKind::Diffusion => "diffusion",
    };
    match format {
        Format::Text => {
            let mut s = format!("# ergokit {} classify {model} ({kind})\n", env!("CARGO_PKG_VERSION"));
            if let Some(nu) = report.nu {
                let _ = writeln!(s, "# nu = {nu}");
            }
            let _ = writeln!(s, "{:<24} {:<13} {:<22} {:<20} last probe", "property", "outcome", "quantity", "reason");
            for row in &report.rows {
                let v = &row.verdict;
                let probe = v
                    .probes
                    .last()
                    .map(|p| format!("{} @ {} ({} probes)", real(p.value), p.horizon, v.probes.len()))
                    .unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{:<24} {:<13} {:<22} {:<20} {probe}",
                    row.name,
                    v.outcome.as_str(),
                    number(v.quantity),
                    v.reason.as_str()
                );
                for flag in &row.flags {
                    let _ = writeln!(s, "  note: {}", flag.caveat());
                }
            }
            for note in &report.notes {
                let _ = writeln!(s, "# {note}");
            }
            out.write_all(s.as_bytes())?;
        }
        Format::Csv => {
            let mut s = String::from("model,kind,property,outcome,quantity,reason,probes,flags\n");
            for row in &report.rows {
                let v = &row.verdict;
                let probes: Vec<String> = v.probes.iter().map(|p| format!("{}:{}", p.horizon, real(p.value))).collect();
                let flags: Vec<&str> = row.flags.iter().map(|f| f.caveat()).collect();
                let _ = writeln!(
                    s,
                    "{},{kind},{},{},{},{},{},{}",
                    csv_field(&model),
                    row.name,
                    v.outcome.as_str(),
                    number(v.quantity),
                    v.reason.as_str(),
                    probes.join(";"),
                    csv_field(&flags.join(";"))
                );
            }
            out.write_all(s.as_bytes())?;
        }
        Format::JsonLines => {
            for row in &report.rows {
                let v = &row.verdict;
                let probes: Vec<Value> = v
                    .probes
                    .iter()
                    .map(|p| json!({"horizon": p.horizon, "value": json_number(Some(p.value))}))
                    .collect();
                let flags: Vec<&str> = row.flags.iter().map(|f| f.caveat()).collect();
                let line = json!({
                    "model": model,
                    "kind": kind,
                    "property": row.name,
                    "outcome": v.outcome.as_str(),
                    "quantity": json_number(v.quantity),
                    "reason": v.reason.as_str(),
                    "probes": probes,
                    "flags": flags,
                });
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

fn emit_curve(report: &ClassificationReport, path: &Path) -> Result<(), Failure> {
    let mut s = String::from("property,x,value\n");
    for row in &report.rows {
        for p in &row.verdict.probes {
            let _ = writeln!(s, "{},{},{}", row.name, p.horizon, real(p.value));
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn classify(common: &Common, nu: Option<f64>, curve: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let budget = budget(common.budget)?;
    let result = match load_model(&common.model)? {
        Model::BirthDeath(m) => classify_chain(&ChainAnalysis::new(&m, budget)?, nu),
        Model::Diffusion(m) => classify_diffusion(&DiffusionAnalysis::new(&m, budget)?, nu),
    };
    let report = match result {
        Ok(r) => r,
        Err(ClassifyError::Contradiction { ref report, .. }) => {
            write_report(report, &common.model, common.format, out)?;
            return Err(classify_failure(result.unwrap_err()));
        }
        Err(e) => return Err(classify_failure(e)),
    };
    if let Some(path) = curve {
        emit_curve(&report, path)?;
    }
    write_report(&report, &common.model, common.format, out)
}

struct GapRow {
    kind: &'static str,
    estimate: GapEstimate,
}

fn gap(
    common: &Common,
    oracle_size: Option<usize>,
    cutoff: Option<f64>,
    which: Which,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let budget = budget(common.budget)?;
    let row = match load_model(&common.model)? {
        Model::BirthDeath(m) => {
            let analysis = ChainAnalysis::new(&m, budget)?;
            let mut estimate = chain::gap_bounds_bd(&analysis);
            let w = chain::representative_w(&m, budget.max_horizon())?;
            estimate.variational_lower = Some(chain::variational_lower_bd(&m, &w)?);
            if let Some(n) = oracle_size {
                estimate.oracle = Some(chain::truncated_gap_oracle(&m, n, which.boundary())?);
            }
            GapRow {
                kind: "birth-death",
                estimate,
            }
        }
        Model::Diffusion(m) => {
            let analysis = DiffusionAnalysis::new(&m, budget)?;
            let mut estimate = diffusion::gap_bounds_diff(&analysis, which.boundary())?;
            let f = diffusion::representative_f(&analysis)?;
            estimate.variational_lower = Some(diffusion::variational_lower_diff(&analysis, &f)?);
            if let Some(n) = oracle_size {
                estimate.oracle = Some(diffusion::fd_gap_oracle(&analysis, cutoff, n, which.boundary())?);
            }
            GapRow {
                kind: "diffusion",
                estimate,
            }
        }
    };
    write_gap(&row, &common.model, common.format, out)
}

fn write_gap(row: &GapRow, path: &Path, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let model = path.display().to_string();
    let e = &row.estimate;
    let delta = match e.delta.value() {
        Some(d) => real(d),
        None => e.delta.status().to_string(),
    };
    let var_lower = e.variational_lower.map(|v: VariationalBound| v.value);
    let oracle = e.oracle.map(|o: OracleValue| o.value);
    let oracle_err = e.oracle.map(|o| o.error_estimate);
    match format {
        Format::Text => {
            let mut s = format!("# ergokit {} gap {model} ({})\n", env!("CARGO_PKG_VERSION"), row.kind);
            let _ = writeln!(s, "delta            {delta}");
            let _ = writeln!(s, "lower (4δ)⁻¹     {}", e.lower);
            let _ = writeln!(s, "upper δ⁻¹        {}", e.upper);
            if let Some(v) = e.variational_lower {
                let _ = writeln!(
                    s,
                    "variational      {} at {} (converged: {})",
                    v.value, v.argmin, v.converged
                );
            }
            if let Some(o) = e.oracle {
                let _ = write!(s, "oracle           {} ± {} (size {}", real(o.value), real(o.error_estimate), o.size);
                if let Some(l) = o.cutoff {
                    let _ = write!(s, ", cutoff {l}");
                }
                let _ = writeln!(s, ")");
            }
            if row.kind == "diffusion" && e.delta.value().is_some() {
                let _ = writeln!(s, "# the upper bound may improve by up to a factor 2 (δ′ not computed)");
            }
            out.write_all(s.as_bytes())?;
        }
        Format::Csv => {
            let s = format!(
                "model,kind,delta,lower,upper,var_lower,oracle,oracle_err\n{},{},{delta},{},{},{},{},{}\n",
                csv_field(&model),
                row.kind,
                real(e.lower),
                real(e.upper),
                number(var_lower),
                number(oracle),
                number(oracle_err)
            );
            out.write_all(s.as_bytes())?;
        }
        Format::JsonLines => {
            let line = json!({
                "model": model,
                "kind": row.kind,
                "delta": delta,
                "lower": json_number(Some(e.lower)),
                "upper": json_number(Some(e.upper)),
                "var_lower": json_number(var_lower),
                "oracle": json_number(oracle),
                "oracle_err": json_number(oracle_err),
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn verify(
    common: &Common,
    y: &str,
    lambda: f64,
    hitting: &[usize],
    horizon: usize,
    tol: f64,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let Model::BirthDeath(m) = load_model(&common.model)? else {
        return Err(Failure::Input("verify needs a birth-death model".into()));
    };
    let check = if y.trim() == "hitting" {
        let budget = budget(common.budget)?.scaled(((horizon + 2) as f64 / 256.0).max(1.0));
        let analysis = ChainAnalysis::new(&m, budget)?;
        let ys = analysis
            .mean_hitting_times(horizon + 1)
            .ok_or_else(|| Failure::Input("mean hitting times are infinite or undecided".into()))?;
        chain::verify_test_sequence(&m, |i| ys[i], lambda, hitting, horizon, tol)?
    } else {
        let expr = RateExpression::parse(y, "n")?;
        chain::verify_test_sequence(&m, |i| expr.eval(i as f64).unwrap_or(f64::NAN), lambda, hitting, horizon, tol)?
    };
    let model = common.model.display().to_string();
    let first = check.first_violation.map(|i| i.to_string()).unwrap_or_default();
    match common.format {
        Format::Text => {
            let mut s = format!("# ergokit {} verify {model}\n", env!("CARGO_PKG_VERSION"));
            let _ = writeln!(s, "verdict              {} (up to N = {})", check.verdict.outcome.as_str(), check.horizon);
            let _ = writeln!(s, "worst residual       {} at {}", check.worst_residual, check.worst_index);
            let _ = writeln!(s, "equality residual    {}", check.max_equality_residual);
            let _ = writeln!(s, "violations           {}", check.violations);
            if let Some(i) = check.first_violation {
                let _ = writeln!(s, "first violation      {i}");
            }
            out.write_all(s.as_bytes())?;
        }
        Format::Csv => {
            let s = format!(
                "model,outcome,horizon,worst_residual,worst_index,equality_residual,violations,first_violation\n{},{},{},{},{},{},{},{first}\n",
                csv_field(&model),
                check.verdict.outcome.as_str(),
                check.horizon,
                real(check.worst_residual),
                check.worst_index,
                real(check.max_equality_residual),
                check.violations
            );
            out.write_all(s.as_bytes())?;
        }
        Format::JsonLines => {
            let line = json!({
                "model": model,
                "outcome": check.verdict.outcome.as_str(),
                "horizon": check.horizon,
                "worst_residual": json_number(Some(check.worst_residual)),
                "worst_index": check.worst_index,
                "equality_residual": json_number(Some(check.max_equality_residual)),
                "violations": check.violations,
                "first_violation": check.first_violation,
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

fn oracle(
    common: &Common,
    size: usize,
    which: Which,
    cutoff: Option<f64>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (kind, value) = match load_model(&common.model)? {
        Model::BirthDeath(m) => ("birth-death", chain::truncated_gap_oracle(&m, size, which.boundary())?),
        Model::Diffusion(m) => {
            let analysis = DiffusionAnalysis::new(&m, budget(common.budget)?)?;
            ("diffusion", diffusion::fd_gap_oracle(&analysis, cutoff, size, which.boundary())?)
        }
    };
    let model = common.model.display().to_string();
    let which = match which {
        Which::L0 => "l0",
        Which::L1 => "l1",
    };
    match common.format {
        Format::Text => {
            let mut s = format!("# ergokit {} oracle {model} ({kind})\n", env!("CARGO_PKG_VERSION"));
            let _ = writeln!(s, "{which}  {} ± {} (size {})", real(value.value), real(value.error_estimate), value.size);
            if let Some(l) = value.cutoff {
                let _ = writeln!(s, "cutoff {l}");
            }
            out.write_all(s.as_bytes())?;
        }
        Format::Csv => {
            let s = format!(
                "model,kind,which,value,error,size,cutoff\n{},{kind},{which},{},{},{},{}\n",
                csv_field(&model),
                real(value.value),
                real(value.error_estimate),
                value.size,
                number(value.cutoff)
            );
            out.write_all(s.as_bytes())?;
        }
        Format::JsonLines => {
            let line = json!({
                "model": model,
                "kind": kind,
                "which": which,
                "value": json_number(Some(value.value)),
                "error": json_number(Some(value.error_estimate)),
                "size": value.size,
                "cutoff": json_number(value.cutoff),
            });
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}
