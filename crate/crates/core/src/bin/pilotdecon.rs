use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pilotdecon::angular::dar_profile;
use pilotdecon::assignment::Method;
use pilotdecon::channel::Ula;
use pilotdecon::harness::{
    build_problem, config, emit_csv, run_experiment, solve_checked, ExperimentConfig,
    ExperimentKind, Formulation, FULL_TRIALS,
};
use pilotdecon::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pilotdecon",
    version,
    about = "Pilot decontamination simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write mean errors as CSV.
    Simulate {
        /// Scenario file (required for `custom`).
        #[arg(long)]
        config: Option<PathBuf>,
        /// aoa-sweep, distance-sweep, greedy-vs-joint, mutual-2cell or custom.
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Use the long-run trial count.
        #[arg(long, conflicts_with = "trials")]
        full: bool,
        /// Comma-separated antenna counts, ascending.
        #[arg(long, value_delimiter = ',')]
        antennas: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the cost functions around a user's support and print its
    /// desired angular region.
    Dar {
        /// Angular spread in degrees.
        #[arg(long)]
        theta_delta: f64,
        #[arg(long)]
        antennas: usize,
        /// Spacing in wavelengths.
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the pilot assignment of a scenario and print the table.
    Assign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Bnb)]
        method: MethodArg,
        /// Defaults to the file's `formulation`, else `qos`.
        #[arg(long, value_enum)]
        formulation: Option<FormulationArg>,
        /// 1-based target cell for the single-cell formulation.
        #[arg(long)]
        target_cell: Option<usize>,
        /// Treat cells with fewer users than pilots as infeasible.
        #[arg(long)]
        no_reuse: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Bnb,
    Local,
    Greedy,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exhaustive => Method::Exhaustive,
            MethodArg::Bnb => Method::BranchAndBound,
            MethodArg::Local => Method::LocalSearch,
            MethodArg::Greedy => Method::Greedy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Multicell,
    Qos,
    Single,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Multicell => Formulation::Multicell,
            FormulationArg::Qos => Formulation::Qos,
            FormulationArg::Single => Formulation::SingleCell,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Infeasible(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config: path,
            experiment,
            seed,
            trials,
            full,
            antennas,
            out,
        } => {
            let kind: ExperimentKind = experiment.parse()?;
            let mut cfg = ExperimentConfig::new(kind);
            if let Some(path) = path {
                cfg = cfg.with_file(config::load(&path)?);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if full {
                cfg.trials = FULL_TRIALS;
            }
            if let Some(a) = antennas {
                cfg.antennas = a;
            }
            let rows = run_experiment(&cfg)?;
            emit_csv(&rows, &out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Dar {
            theta_delta,
            antennas,
            spacing,
            points,
            out,
        } => {
            if antennas < 2 || points < 2 || !(spacing > 0.0) {
                return Err(Error::InvalidExperiment(
                    "need at least 2 antennas, 2 points and a positive spacing".into(),
                ));
            }
            if !(theta_delta > 0.0 && theta_delta < 90.0) {
                return Err(Error::InvalidExperiment(format!(
                    "angular spread {theta_delta} deg outside (0, 90)"
                )));
            }
            let ula = Ula::new(antennas, spacing, 1.0);
            let (region, rows) = dar_profile(theta_delta.to_radians(), &ula, points)?;
            let mut w = csv::Writer::from_path(&out).map_err(|source| Error::Csv {
                path: out.clone(),
                source,
            })?;
            for row in &rows {
                w.serialize(row).map_err(|source| Error::Csv {
                    path: out.clone(),
                    source,
                })?;
            }
            w.flush().map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            println!(
                "desired angular region: [{:.3}, {:.3}] deg",
                region.psi_min.to_degrees(),
                region.psi_max.to_degrees()
            );
            Ok(())
        }
        Command::Assign {
            config: path,
            method,
            formulation,
            target_cell,
            no_reuse,
            seed,
        } => {
            let file = config::load(&path)?;
            let formulation = formulation
                .map(Formulation::from)
                .or(file.formulation)
                .unwrap_or(Formulation::Qos);
            let target = match target_cell {
                Some(0) => return Err(Error::InvalidScenario("cell indices start at 1".into())),
                Some(c) => c - 1,
                None => file.target_cell.unwrap_or(0),
            };
            let scenario = &file.scenario;
            let problem = build_problem(scenario, formulation, target)?.with_reuse(!no_reuse);
            let method = Method::from(method);
            let a = solve_checked(&problem, method, seed)?;
            let contributions = problem.contributions(&a.y);
            println!("{:<6} {:>4} {:>8} {:>12}", "user", "cell", "pilots", "cost");
            for user in scenario.users() {
                let pilots = a.pilots_of(user.global);
                let pilots = if pilots.is_empty() {
                    "-".to_string()
                } else {
                    pilots
                        .iter()
                        .map(|p| (p + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                };
                println!(
                    "{:<6} {:>4} {:>8} {:>12.6}",
                    user.label(),
                    user.cell + 1,
                    pilots,
                    contributions[user.global]
                );
            }
            println!("objective: {:.6}", a.objective);
            println!(
                "method: {} ({formulation}), nodes: {}, proven optimal: {}",
                a.meta.method, a.meta.nodes_explored, a.meta.proven_optimal
            );
            if a.forced_reuse {
                println!(
                    "note: some cell has fewer users than pilots; its users repeat across pilots"
                );
            }
            Ok(())
        }
    }
}
