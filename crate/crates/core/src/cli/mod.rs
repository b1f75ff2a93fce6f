//! Command-line front end: `validate`, `run` and `catalog`.

pub mod report;
pub mod run;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::abelian::PolarizedAbelianVariety;
use crate::abelian::CATALOG_LABELS;
use crate::linalg::skew_normal_form;
use scenario::{Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hodgeprobe", version, about = "Exact checks on Weil Jacobians and pushforwards of Hodge classes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario's check list; repeatable.
    #[arg(long = "check")]
    pub checks: Vec<String>,
    #[arg(long)]
    pub budget_terms: Option<u64>,
    #[arg(long)]
    pub budget_monomials: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a scenario, then print it normalized.
    Validate {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Run a scenario and emit the JSON report.
    Run {
        #[command(flatten)]
        args: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
        /// Include wall-clock timings; the report is then no longer reproducible.
        #[arg(long)]
        timings: bool,
    },
    /// Built-in varieties.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { label: String },
}

fn load(args: &ScenarioArgs, err: &mut dyn Write) -> Result<Scenario, i32> {
    let text = match std::fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", args.scenario.display());
            return Err(EXIT_PARSE);
        }
    };
    let mut scenario: Scenario = match toml::from_str(&text) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {}", ScenarioError::Parse(e.to_string()));
            return Err(EXIT_PARSE);
        }
    };
    if !args.checks.is_empty() {
        scenario.checks = args.checks.clone();
    }
    if let Some(t) = args.budget_terms {
        scenario.budgets.terms = t;
    }
    if let Some(m) = args.budget_monomials {
        scenario.budgets.monomials = m;
    }
    match scenario.resolve() {
        Ok(_) => Ok(scenario),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Err(match e {
                ScenarioError::Parse(_) => EXIT_PARSE,
                ScenarioError::Validation { .. } => EXIT_VALIDATION,
            })
        }
    }
}

fn field_name(a: &PolarizedAbelianVariety) -> String {
    a.radicand().map_or_else(|| "Q".to_string(), |d| format!("Q(sqrt{d})"))
}

fn divisor_type(a: &PolarizedAbelianVariety) -> String {
    let e = a.e().to_integer().ok().and_then(|e| skew_normal_form(&e).ok());
    match e {
        Some(snf) => format!("({})", snf.divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")),
        None => "-".into(),
    }
}

fn format_matrix<T: std::fmt::Display>(rows: Vec<Vec<T>>) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    let width = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(1);
    cells
        .iter()
        .map(|r| format!("  [{}]", r.iter().map(|c| format!("{c:>width$}")).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join("\n")
}

fn catalog(action: &CatalogAction, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match action {
        CatalogAction::List => {
            for label in CATALOG_LABELS {
                let a = PolarizedAbelianVariety::catalog(label).expect("catalog entries build");
                let _ = writeln!(out, "{label:<8} n={}  field={:<9} type={}", a.n(), field_name(&a), divisor_type(&a));
            }
            EXIT_OK
        }
        CatalogAction::Show { label } => match PolarizedAbelianVariety::catalog(label) {
            Ok(a) => {
                let _ = writeln!(out, "label: {}\nn: {}\nfield: {}\ntype: {}", a.label(), a.n(), field_name(&a), divisor_type(&a));
                let _ = writeln!(out, "J:\n{}", format_matrix(a.j().row_vecs()));
                let _ = writeln!(out, "E:\n{}", format_matrix(a.e().row_vecs()));
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_VALIDATION
            }
        },
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("HODGEPROBE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process fails harmlessly
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_PARSE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    configure_threads();
    match cli.command {
        Command::Catalog { action } => catalog(&action, out, err),
        Command::Validate { args } => match load(&args, err) {
            Ok(s) => {
                let _ = write!(out, "{}", s.to_toml());
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Run { args, out: out_path, quiet, timings } => {
            let scenario = match load(&args, err) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let report = match run::run(&scenario, timings) {
                Ok(r) => r,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_VALIDATION;
                }
            };
            let json = report.to_json();
            match out_path.or_else(|| scenario.output.clone()) {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &json) {
                        let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                        return EXIT_VALIDATION;
                    }
                }
                None => {
                    let _ = write!(out, "{json}");
                }
            }
            if !quiet {
                let _ = write!(err, "{}", report.summary_table());
            }
            if report.has_failure() {
                EXIT_INVARIANT
            } else {
                EXIT_OK
            }
        }
    }
}
