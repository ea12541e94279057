//! `kplate`: run plate and Poisson contact scenarios from a config file.
//!
//! Exit status: 0 on success, 2 for an invalid or unreadable config
//! (the offending key is printed), 3 when the solver fails (the iteration
//! report is printed and written next to the outputs), 1 for output I/O
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kplate_core::contact::SolveReport;
use kplate_core::postprocess::convergence_sweep;
use kplate_core::postprocess::export::write_text;
use kplate_core::{Error, Scenario};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "kplate", version, about = "Kirchhoff plate Signorini contact solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario and write reports and field exports.
    Solve {
        /// Scenario config (TOML).
        config: PathBuf,
        /// Run a convergence sweep over this many refinement levels.
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
        /// Output directory, overriding `output.dir`.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Override a config key, e.g. `--set domain.nx=64`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Validate a config and print it with every default filled in.
    Check {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RUST_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, sweep, out, set } => solve(&config, sweep, out, &set),
        Command::Check { config, set } => match load(&config, &set) {
            Ok(sc) => {
                print!("{}", sc.to_toml());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
    }
}

fn load(config: &Path, set: &[String]) -> Result<Scenario, ExitCode> {
    Scenario::load(config, set).map_err(|e| {
        match &e {
            Error::Config { key, message } => eprintln!("config error: {key}: {message}"),
            other => eprintln!("config error: {other}"),
        }
        ExitCode::from(EXIT_CONFIG)
    })
}

fn solve(config: &Path, sweep: Option<usize>, out: Option<PathBuf>, set: &[String]) -> ExitCode {
    let mut overrides = set.to_vec();
    if let Some(n) = sweep {
        overrides.push(format!("output.sweep={n}"));
    }
    let scenario = match load(config, &overrides) {
        Ok(sc) => sc,
        Err(code) => return code,
    };
    let dir = out.unwrap_or_else(|| scenario.output.dir.clone());
    let prefix = scenario.output.prefix.as_str();
    log::info!(
        "{} on {}x{} from {}",
        scenario.problem.name(),
        scenario.domain.nx,
        scenario.domain.ny,
        config.display()
    );

    let solution = match scenario.solve() {
        Ok(s) => s,
        Err(e) => return solver_failure(&e, &dir, prefix),
    };
    let written = match solution.write_outputs(scenario.problem, &dir, prefix, scenario.output.samples) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let summary = solution.summary(scenario.problem);
    print!("{}", kplate_core::scenario::report_text(&summary));
    for path in &written {
        println!("wrote {}", path.display());
    }

    if scenario.output.sweep > 0 {
        let table = match convergence_sweep(&scenario, scenario.output.sweep) {
            Ok(t) => t,
            Err(e) => return solver_failure(&e, &dir, prefix),
        };
        let text = table.to_text();
        let json = serde_json::to_string_pretty(&table).expect("table serializes") + "\n";
        for (name, body) in [("convergence.txt", &text), ("convergence.json", &json)] {
            let path = dir.join(format!("{prefix}{name}"));
            if let Err(e) = write_text(&path, body) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_IO);
            }
            println!("wrote {}", path.display());
        }
        print!("{text}");
    }
    ExitCode::SUCCESS
}

fn solver_failure(err: &Error, dir: &Path, prefix: &str) -> ExitCode {
    eprintln!("solver error: {err}");
    match err {
        Error::Solve(report) => write_failure_report(report, dir, prefix),
        Error::Config { .. } => return ExitCode::from(EXIT_CONFIG),
        _ => {}
    }
    ExitCode::from(EXIT_SOLVER)
}

fn write_failure_report(report: &SolveReport, dir: &Path, prefix: &str) {
    eprintln!("terminated by {:?} after {} iterations", report.terminated_by, report.iterations);
    eprintln!("iteration  residual        active");
    for (k, res) in report.residual_history.iter().enumerate() {
        eprintln!("{k:>9}  {res:.6e}  {:>6}", report.active_history[k]);
    }
    let path = dir.join(format!("{prefix}failure_report.json"));
    let body = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match write_text(&path, &body) {
        Ok(()) => eprintln!("wrote {}", path.display()),
        Err(e) => eprintln!("could not write the failure report: {e}"),
    }
}
