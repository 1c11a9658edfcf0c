use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmu_core::errmetrics::{w2_lp_oracle, w2_quantile, Distribution};
use qmu_core::error::QmuError;
use qmu_core::scenarios::{
    list_scenarios, parse_overrides, run_all, run_scenario, run_suite, suite_names, sweep, sweep_names,
    write_sweep_csv, write_sweep_rows, RunConfig, SCHEMA,
};

/// Oracle and closed form must agree this closely.
const ORACLE_AGREEMENT: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "qmu", version, about = "Quantum measurement error measures and uncertainty relations")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Unit of action recorded in reports; computations always use ħ = 1.
    #[arg(long, global = true, default_value_t = 1.0)]
    hbar_scale: f64,
    #[arg(long, global = true, default_value_t = 1024)]
    grid_n: usize,
    #[arg(long = "grid-L", global = true, default_value_t = 12.0)]
    grid_l: f64,
    /// Draws per randomized suite and evaluations per search.
    #[arg(long, global = true, default_value_t = 10_000)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bundled scenarios with expected values.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Evaluate a relation along a one-parameter family, as CSV.
    Sweep {
        relation: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wasserstein-2 deviation of two `value,probability` CSV files.
    Wasserstein {
        a: PathBuf,
        b: PathBuf,
        /// Cross-check against the linear-programming solver.
        #[arg(long)]
        oracle: bool,
        /// Write the optimal coupling as `x,y,weight` CSV.
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    /// Randomized check of a relation; `all` also runs every scenario.
    Check {
        relation: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    Run {
        name: String,
        /// Parameter override, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the JSON report here; the table still goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug)]
enum Failure {
    /// A check ran but did not pass.
    Mismatch(String),
    /// Bad input: unknown name, malformed CSV or argument.
    Input(String),
    Numerical(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Output(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Mismatch(m) | Failure::Input(m) | Failure::Numerical(m) | Failure::Output(m) => m,
        }
    }
}

impl From<QmuError> for Failure {
    fn from(e: QmuError) -> Self {
        let m = e.to_string();
        match e {
            QmuError::UnknownScenario(_) | QmuError::Parse(_) | QmuError::Csv(_) | QmuError::Json(_) => {
                Failure::Input(m)
            }
            QmuError::Io(_) => Failure::Output(m),
            _ => Failure::Numerical(m),
        }
    }
}

type CliResult = Result<(), Failure>;

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => File::create(p)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|e| Failure::Output(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Numerical(e.to_string()))
}

/// `v` with twelve significant digits, trailing zeros dropped.
fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{v:.11e}");
    }
    let s = format!("{:.*}", (11 - exp).max(0) as usize, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn read_distribution(path: &Path) -> Result<Distribution, Failure> {
    let f = File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Distribution::read_csv(f).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn scenario(action: ScenarioAction, config: &RunConfig) -> CliResult {
    match action {
        ScenarioAction::List { format } => {
            let list = list_scenarios();
            if format == Format::Json {
                #[derive(Serialize)]
                struct Listing<T> {
                    schema: &'static str,
                    scenarios: T,
                }
                return write_output(None, &json(&Listing { schema: SCHEMA, scenarios: &list })?);
            }
            for s in &list {
                let kind = serde_json::to_value(s.kind).map_err(|e| Failure::Numerical(e.to_string()))?;
                println!("{:<30} {:<13} {}", s.name, kind.as_str().unwrap_or_default(), s.summary);
            }
            Ok(())
        }
        ScenarioAction::Run { name, set, format, out } => {
            let overrides = parse_overrides(&set)?;
            let report = run_scenario(&name, &overrides, config)?;
            if let Some(p) = &out {
                write_output(Some(p), &json(&report)?)?;
            }
            if format == Format::Table || out.is_some() {
                print!("{}", report.table());
            } else {
                write_output(None, &json(&report)?)?;
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Mismatch(format!("scenario {name}: expectation mismatch")))
            }
        }
    }
}

fn wasserstein(a: &Path, b: &Path, oracle: bool, coupling: Option<&Path>) -> CliResult {
    let (mu, nu) = (read_distribution(a)?, read_distribution(b)?);
    let q = w2_quantile(&mu, &nu);
    if !q.coupling.is_coupling_of(&mu, &nu) {
        return Err(Failure::Numerical(format!(
            "quantile coupling marginal defect {:.3e}",
            q.coupling.marginal_defect(&mu, &nu)
        )));
    }
    println!("{}", sig12(q.value));
    if oracle {
        let lp = w2_lp_oracle(&mu, &nu)?;
        if !lp.coupling.is_coupling_of(&mu, &nu) {
            return Err(Failure::Numerical(format!(
                "oracle coupling marginal defect {:.3e}",
                lp.coupling.marginal_defect(&mu, &nu)
            )));
        }
        let gap = (lp.value - q.value).abs();
        println!(
            "oracle {} ({}, {} pivots, |difference| {gap:.3e})",
            sig12(lp.value),
            if lp.exact { "exact" } else { "floating point" },
            lp.pivots
        );
        if gap > ORACLE_AGREEMENT {
            return Err(Failure::Numerical(format!("oracle disagrees by {gap:.3e}")));
        }
    }
    if let Some(p) = coupling {
        let f = File::create(p).map_err(|e| Failure::Output(format!("{}: {e}", p.display())))?;
        q.coupling.write_csv(f)?;
    }
    Ok(())
}

fn check(relation: &str, out: Option<&Path>, config: &RunConfig) -> CliResult {
    let (text, passed) = if relation == "all" {
        let r = run_all(config)?;
        (json(&r)?, r.passed)
    } else {
        if !suite_names().iter().any(|(n, _)| *n == relation) {
            let known: Vec<&str> = suite_names().iter().map(|(n, _)| *n).collect();
            return Err(Failure::Input(format!(
                "unknown relation {relation:?}; known: all, {}",
                known.join(", ")
            )));
        }
        let r = run_suite(relation, config)?;
        (json(&r)?, r.passed)
    };
    write_output(out, &text)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("check {relation} failed")))
    }
}

fn run(cli: Cli) -> CliResult {
    let config = RunConfig {
        seed: cli.seed,
        hbar_scale: cli.hbar_scale,
        grid_n: cli.grid_n,
        grid_l: cli.grid_l,
        budget: cli.budget,
    };
    match cli.command {
        Command::Scenario { action } => scenario(action, &config),
        Command::Sweep { relation, from, to, points, out } => {
            if !sweep_names().iter().any(|(n, _)| *n == relation) {
                return Err(Failure::Input(format!("unknown relation {relation:?}")));
            }
            let rows = sweep(&relation, from, to, points, &config)?;
            match out {
                Some(p) => write_sweep_csv(&rows, &p).map_err(|e| match e {
                    QmuError::Io(e) => Failure::Output(format!("{}: {e}", p.display())),
                    e => e.into(),
                }),
                None => Ok(write_sweep_rows(&rows, io::stdout().lock())?),
            }
        }
        Command::Wasserstein { a, b, oracle, coupling } => wasserstein(&a, &b, oracle, coupling.as_deref()),
        Command::Check { relation, out } => check(&relation, out.as_deref(), &config),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qmu: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
