use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bethe_flow::cli::{self, json, Model, RunFlags};
use bethe_flow::dynamics::{FlowForm, Schedule};

/// Belief propagation as a transport equation on region lattices.
#[derive(Parser)]
#[command(name = "bethe-flow", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Single-line JSON output.
    #[arg(long, global = true)]
    compact: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow to a fixed point and report beliefs.
    Run {
        model: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        /// Maximum number of steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Convergence threshold on the update residual.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        no_normalize: bool,
        #[arg(long, value_enum)]
        schedule: Option<ScheduleArg>,
        #[arg(long, value_enum)]
        form: Option<FormArg>,
        /// Write per-step residuals as CSV.
        #[arg(long, value_name = "CSV")]
        trace: Option<PathBuf>,
        /// Compare against brute-force exact marginals.
        #[arg(long)]
        oracle: bool,
    },
    /// Verify the algebraic invariants on the model's lattice.
    Check {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = cli::check::DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Bethe free energy at given beliefs, or at exact marginals.
    Energy {
        model: PathBuf,
        /// A run report whose `beliefs` are evaluated.
        beliefs: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Synchronous,
    Sequential,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Potential,
    Message,
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn render<T: serde::Serialize>(report: &T, compact: bool) -> String {
    if compact {
        json::to_string(report)
    } else {
        json::to_string_pretty(report)
    }
}

fn execute(args: Args) -> Result<(String, bool), String> {
    let compact = args.compact;
    match &args.command {
        Command::Run {
            model,
            tau,
            steps,
            tol,
            no_normalize,
            schedule,
            form,
            trace,
            oracle,
        } => {
            let model = Model::load(model).map_err(|e| e.to_string())?;
            let flags = RunFlags {
                tau: *tau,
                steps: *steps,
                tolerance: *tol,
                no_normalize: *no_normalize,
                schedule: schedule.map(|s| match s {
                    ScheduleArg::Synchronous => Schedule::Synchronous,
                    ScheduleArg::Sequential => Schedule::Sequential,
                }),
                form: form.map(|f| match f {
                    FormArg::Potential => FlowForm::Potential,
                    FormArg::Message => FlowForm::Message,
                }),
                oracle: *oracle,
            };
            let (report, records) = cli::run_model(&model, &flags).map_err(|e| e.to_string())?;
            if let Some(path) = trace {
                std::fs::write(path, cli::trace_csv(&records))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok((render(&report, compact), report.converged && !report.failed))
        }
        Command::Check {
            model,
            seed,
            trials,
        } => {
            let model = Model::load(model).map_err(|e| e.to_string())?;
            let report =
                cli::check_lattice(&model.lattice, *seed, *trials).map_err(|e| e.to_string())?;
            Ok((render(&report, compact), report.all_passed))
        }
        Command::Energy { model, beliefs } => {
            let model = Model::load(model).map_err(|e| e.to_string())?;
            let text = beliefs.as_deref().map(read).transpose()?;
            let report = cli::energy_model(&model, text.as_deref()).map_err(|e| e.to_string())?;
            Ok((render(&report, compact), true))
        }
    }
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok((text, ok)) => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
