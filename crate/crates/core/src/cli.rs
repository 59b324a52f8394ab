//! `anon` command-line front end.
//!
//! Exit codes: 0 success / implied / satisfied, 1 negative verdict,
//! 2 input error, 3 aborted by solver limits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::anonymizer::{
    oracle_min_loss, solve_exact, solve_greedy, ExactOutcome, GreedyOutcome, Limits, OracleOutcome,
    Problem, Solution, SolverStats,
};
use crate::constraint::{self, parse_constraint, parse_constraints, Constraint, ConstraintKind};
use crate::error::Error;
use crate::inference::{
    implies, is_satisfiable, minimal_cover, to_fixed, FixedConstraint, Satisfiability,
};
use crate::relation::{QiSet, Relation, DEFAULT_STAR_TOKEN};
use crate::semantics::{all_satisfied, check_all, SatReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ABORTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "anon",
    version,
    about = "k-anonymization under diversity and fairness constraints"
)]
pub struct Cli {
    /// Render human-readable tables instead of JSON on stdout.
    #[arg(long, global = true)]
    pub pretty: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an (anonymized) relation against a constraint file.
    Validate(ValidateArgs),
    /// Decide whether the constraint file implies a query constraint.
    Implies(ImpliesArgs),
    /// Decide whether a fixed-bound constraint file is satisfiable.
    Satisfiable(ConstraintsArg),
    /// Print an irredundant subset of the constraint file.
    Mincover(ConstraintsArg),
    /// Produce a minimum-loss (k, Σ)-anonymization.
    Anonymize(AnonymizeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Initial relation, needed by fairness constraints.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long)]
    pub constraints: PathBuf,
    #[arg(long)]
    pub k: u64,
    #[arg(long, default_value = DEFAULT_STAR_TOKEN)]
    pub star: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ImpliesArgs {
    #[arg(long)]
    pub constraints: PathBuf,
    /// A single constraint in DSL syntax.
    #[arg(long)]
    pub query: String,
    /// Include the axiom trace.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstraintsArg {
    #[arg(long)]
    pub constraints: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Greedy,
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct AnonymizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub constraints: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Comma-separated quasi-identifier attributes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub qi: Vec<String>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_nodes: Option<u64>,
    /// Seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(long, default_value = DEFAULT_STAR_TOKEN)]
    pub star: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Entry point used by the `anon` binary.
pub fn main() -> i32 {
    run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Validate(a) => validate(a, cli.pretty, out),
        Command::Implies(a) => implies_cmd(a, cli.pretty, out),
        Command::Satisfiable(a) => satisfiable(a, cli.pretty, out),
        Command::Mincover(a) => mincover(a, out),
        Command::Anonymize(a) => anonymize(a, cli.pretty, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_relation(path: &Path, star: &str) -> Result<Relation, Failure> {
    let file = fs::File::open(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Relation::from_csv(file, star).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_constraints(path: &Path) -> Result<Vec<Constraint>, Failure> {
    parse_constraints(&read_text(path)?)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn header(command: &str, config: &impl Serialize) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    })
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    writeln!(out, "{text}").map_err(|e| input_error(e.to_string()))
}

fn range_text(lo: u64, hi: Option<u64>) -> String {
    match hi {
        Some(hi) => format!("[{lo}, {hi}]"),
        None => format!("[{lo}, +inf)"),
    }
}

fn report_table(out: &mut dyn Write, reports: &[SatReport]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<6} {:>8} {:<16} constraint",
        "ok", "observed", "range"
    )?;
    for r in reports {
        writeln!(
            out,
            "{:<6} {:>8} {:<16} {}",
            if r.satisfied { "yes" } else { "NO" },
            r.observed_count,
            range_text(r.resolved_lo, r.resolved_hi),
            r.constraint
        )?;
    }
    Ok(())
}

fn validate(a: &ValidateArgs, pretty: bool, out: &mut dyn Write) -> CmdResult {
    let rp = read_relation(&a.input, &a.star)?;
    let sigma = read_constraints(&a.constraints)?;
    if a.k == 0 {
        return Err(input_error("--k must be at least 1"));
    }
    let initial = match &a.initial {
        Some(p) => read_relation(p, &a.star)?,
        None => {
            if sigma.iter().any(|c| c.kind() == ConstraintKind::Fairness) {
                return Err(input_error("fairness constraints need --initial"));
            }
            rp.clone()
        }
    };
    let reports = check_all(&initial, &rp, &sigma, a.k)?;
    let ok = all_satisfied(&reports);
    if pretty {
        report_table(out, &reports).map_err(|e| input_error(e.to_string()))?;
    } else {
        let mut v = header("validate", a);
        v["satisfied"] = json!(ok);
        v["reports"] = json!(reports);
        v["warnings"] = json!(constraint::lint(&sigma, a.k));
        emit(out, &v)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn implies_cmd(a: &ImpliesArgs, pretty: bool, out: &mut dyn Write) -> CmdResult {
    let sigma = to_fixed(&read_constraints(&a.constraints)?)?;
    let query = parse_constraint(&a.query).map_err(|e| input_error(format!("--query: {e}")))?;
    let query = FixedConstraint::try_from(&query)?;
    let outcome = implies(&sigma, &query);
    if pretty {
        let w = |out: &mut dyn Write| -> std::io::Result<()> {
            writeln!(out, "query:   {query}")?;
            writeln!(out, "derived: {}", outcome.derived_range)?;
            writeln!(out, "implied: {}", outcome.implied)?;
            if a.explain {
                for s in &outcome.trace {
                    writeln!(
                        out,
                        "  {:<20} {} contributes {} -> {}",
                        format!("{:?}", s.axiom),
                        s.source,
                        s.contributed,
                        s.narrowed_to
                    )?;
                }
            }
            Ok(())
        };
        w(out).map_err(|e| input_error(e.to_string()))?;
    } else {
        let mut v = header("implies", a);
        v["query"] = json!(query);
        v["implied"] = json!(outcome.implied);
        v["derived_range"] = json!(outcome.derived_range);
        if a.explain {
            v["trace"] = json!(outcome.trace);
        }
        emit(out, &v)?;
    }
    Ok(if outcome.implied {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn satisfiable(a: &ConstraintsArg, pretty: bool, out: &mut dyn Write) -> CmdResult {
    let sigma = to_fixed(&read_constraints(&a.constraints)?)?;
    let verdict = is_satisfiable(&sigma);
    if pretty {
        let text = match &verdict {
            Satisfiability::Satisfiable { witness } => {
                let mut s = String::from("satisfiable\n");
                for (t, n) in witness {
                    s.push_str(&format!("  count({t}) = {n}\n"));
                }
                s
            }
            Satisfiability::Unsatisfiable { false_constraint } => {
                format!(
                    "unsatisfiable: implies the false constraint on {}\n",
                    false_constraint.target
                )
            }
        };
        out.write_all(text.as_bytes())
            .map_err(|e| input_error(e.to_string()))?;
    } else {
        let mut v = header("satisfiable", a);
        v["result"] = json!(verdict);
        emit(out, &v)?;
    }
    Ok(if verdict.is_satisfiable() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn mincover(a: &ConstraintsArg, out: &mut dyn Write) -> CmdResult {
    let sigma = to_fixed(&read_constraints(&a.constraints)?)?;
    let cover = match minimal_cover(&sigma) {
        Ok(c) => c,
        Err(e @ Error::Inference(_)) => {
            return Err(Failure {
                code: EXIT_NEGATIVE,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    for c in cover {
        writeln!(out, "{}", c.to_constraint()).map_err(|e| input_error(e.to_string()))?;
    }
    Ok(EXIT_OK)
}

fn anonymize(
    a: &AnonymizeArgs,
    pretty: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let relation = read_relation(&a.input, &a.star)?;
    let sigma = read_constraints(&a.constraints)?;
    let qi = QiSet::new(a.qi.iter().cloned(), relation.schema())?;
    let time_budget = match a.time_budget {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(input_error(
                "--time-budget must be a non-negative number of seconds",
            ))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let limits = Limits {
        max_nodes: a.max_nodes,
        time_budget,
        seed: a.seed,
        ..Limits::default()
    };
    let warnings = constraint::lint(&sigma, a.k.max(1) as u64);
    let problem = Problem::new(relation, a.k, qi, sigma, limits)?;

    let (status, solution, stats, code): (&str, Option<Solution>, Option<SolverStats>, i32) =
        match a.mode {
            Mode::Exact => match solve_exact(&problem)? {
                ExactOutcome::Solved(s) => ("solved", Some(s), None, EXIT_OK),
                ExactOutcome::Infeasible => ("infeasible", None, None, EXIT_NEGATIVE),
                ExactOutcome::Aborted { best_so_far } => {
                    ("aborted", best_so_far, None, EXIT_ABORTED)
                }
            },
            Mode::Greedy => match solve_greedy(&problem)? {
                GreedyOutcome::Solved(s) => ("solved", Some(s), None, EXIT_OK),
                GreedyOutcome::Unknown { stats, .. } => {
                    ("unknown", None, Some(stats), EXIT_NEGATIVE)
                }
            },
            Mode::Oracle => match oracle_min_loss(&problem)? {
                OracleOutcome::Solved(s) => ("solved", Some(s), None, EXIT_OK),
                OracleOutcome::Infeasible => ("infeasible", None, None, EXIT_NEGATIVE),
            },
        };

    if let Some(s) = &solution {
        let csv = s.anonymized.to_csv_string(&a.star)?;
        fs::write(&a.out, csv).map_err(|e| input_error(format!("{}: {e}", a.out.display())))?;
    }
    let mut v = header("anonymize", a);
    v["status"] = json!(status);
    v["warnings"] = json!(warnings);
    match &solution {
        Some(s) => {
            v["optimal"] = json!(s.optimal);
            v["loss"] = json!(s.loss);
            v["clustering"] = json!(s.clustering.groups());
            v["constraint_reports"] = json!(s.constraint_reports);
            v["solver_stats"] = json!(s.stats);
        }
        None => {
            v["solver_stats"] = json!(stats.unwrap_or_default());
        }
    }
    let text = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    fs::write(&a.report, text + "\n")
        .map_err(|e| input_error(format!("{}: {e}", a.report.display())))?;

    if pretty {
        let w = |out: &mut dyn Write| -> std::io::Result<()> {
            writeln!(out, "status: {status}")?;
            if let Some(s) = &solution {
                writeln!(out, "loss:   {} (optimal: {})", s.loss, s.optimal)?;
                writeln!(out, "groups: {}", s.clustering)?;
                report_table(out, &s.constraint_reports)?;
            }
            Ok(())
        };
        w(out).map_err(|e| input_error(e.to_string()))?;
    }
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(code)
}
