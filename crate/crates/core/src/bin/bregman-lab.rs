use std::path::PathBuf;
use std::process::ExitCode;

use bregman_lab::report::{barycenter_csv, EXIT_NUMERIC, EXIT_USAGE};
use bregman_lab::run::{curves_csv, default_curve_grid, run, Command};
use bregman_lab::scenario::{load_scenario, Overrides, ScenarioError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bregman-lab", version, about = "Bregman-distance fixed-point laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Distance identities at the probe points
    Distance(ScenarioArgs),
    /// Bregman projection of a probe point onto the set
    Project(ScenarioArgs),
    /// Classification inequalities for the action
    Classify(ScenarioArgs),
    /// Barycenter along the Folner schedule
    Barycenter(ScenarioArgs),
    /// The scenario's check list
    Verify(ScenarioArgs),
    /// Classification, then barycenter, then every check
    All(ScenarioArgs),
    /// D_g(x, y) on a grid for x^2 and x log x, as CSV
    Curves {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Default tolerance for checks without their own
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Drop Folner boxes with a larger side
    #[arg(long)]
    folner_max: Option<u64>,
    /// Write the barycenter tail as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("BREGMAN_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("BREGMAN_LAB_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("BREGMAN_LAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run_scenario(cmd: Command, a: &ScenarioArgs) -> ExitCode {
    let overrides = Overrides { seed: a.seed, tol: a.tol, samples: a.samples, folner_max: a.folner_max };
    let scenario = match load_scenario(&a.scenario, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", a.scenario.display());
            return ExitCode::from(match e {
                ScenarioError::Io { .. } | ScenarioError::Parse { .. } | ScenarioError::Validation(_) => {
                    EXIT_USAGE as u8
                }
            });
        }
    };
    let report = match run(&scenario, cmd) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = write_out(a.out.as_ref(), &report.to_json()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    if let Some(path) = &a.csv {
        match &report.barycenter {
            Some(b) => {
                if let Err(e) = write_out(Some(path), &barycenter_csv(b)) {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            }
            None => log::warn!("--csv ignored: `{}` computes no barycenter", cmd.name()),
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    match &cli.command {
        Cmd::Distance(a) => run_scenario(Command::Distance, a),
        Cmd::Project(a) => run_scenario(Command::Project, a),
        Cmd::Classify(a) => run_scenario(Command::Classify, a),
        Cmd::Barycenter(a) => run_scenario(Command::Barycenter, a),
        Cmd::Verify(a) => run_scenario(Command::Verify, a),
        Cmd::All(a) => run_scenario(Command::All, a),
        Cmd::Curves { out } => {
            let (ys, xs) = default_curve_grid();
            match curves_csv(&ys, &xs) {
                Ok(csv) => match write_out(out.as_ref(), csv.trim_end()) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(EXIT_USAGE as u8)
                    }
                },
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_NUMERIC as u8)
                }
            }
        }
    }
}
