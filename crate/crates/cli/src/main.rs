use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsdi::FieldParams;
use nsdi_cli::commands::{self, TrajectoryStart};
use nsdi_cli::config::{RunConfig, SCHEMA_VERSION};
use nsdi_cli::error::{CliError, CliResult};
use nsdi_cli::THREADS_ENV;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (config schema 1)");

#[derive(Parser)]
#[command(name = "nsdi", version = VERSION, about = "Classical trajectories of multiple ionization in strong laser pulses")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files and the resolved config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: config, then NSDI_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct PulseArgs {
    /// Peak field strength F (a.u.).
    #[arg(long)]
    field_strength: Option<f64>,
    /// Carrier frequency ω (a.u.).
    #[arg(long)]
    omega: Option<f64>,
    /// Carrier-envelope phase φ (rad).
    #[arg(long)]
    phase: Option<f64>,
    /// Pulse length in optical cycles.
    #[arg(long)]
    cycles: Option<u32>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Frozen-field saddle of the two-electron complex.
    Saddle {
        #[arg(long, default_value_t = 0.137)]
        field_strength: f64,
        /// Carrier phase at which the field is frozen: ε = F cos(phase).
        #[arg(long, default_value_t = 0.0)]
        phase_frozen: f64,
    },
    /// One symmetric-subspace trajectory as CSV.
    Trajectory {
        #[command(flatten)]
        pulse: PulseArgs,
        /// Initial state `x,y,px,py` at t = 0.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "from_saddle"
        )]
        initial: Option<Vec<f64>>,
        /// Start at the saddle at the envelope peak, moving outward.
        #[arg(long)]
        from_saddle: bool,
        /// Total energy for --from-saddle (a.u.).
        #[arg(long, default_value_t = -1.5)]
        energy: f64,
    },
    /// Monte Carlo ensemble: histograms and summary.
    Ensemble {
        #[command(flatten)]
        pulse: PulseArgs,
        #[arg(long)]
        n: Option<u64>,
        /// Microcanonical energy Ẽ (a.u.).
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress the progress counter.
        #[arg(long)]
        quiet: bool,
    },
    /// Eigenvalues of the 6×6 Hessian at the saddle pair.
    Stability {
        #[arg(long, default_value_t = 0.137)]
        field_strength: f64,
    },
    /// Full 3-D trajectories launched from the perturbed saddle.
    Fig4 {
        #[command(flatten)]
        pulse: PulseArgs,
        /// Scan all configured displacements instead of only δ = 0.
        #[arg(long)]
        scan: bool,
    },
    /// Existence of the N-gon saddle.
    NgonScan {
        #[arg(long, default_value_t = 2)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        #[arg(long, default_value_t = 0.137)]
        field_strength: f64,
    },
    /// Convert between intensity (W/cm²) and field strength (a.u.).
    Convert {
        #[arg(long, conflicts_with = "field", required_unless_present = "field")]
        intensity: Option<f64>,
        #[arg(long)]
        field: Option<f64>,
    },
}

fn env_threads() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Config file (or defaults), then flags, then derived fields.
fn build_config(cli: &Cli, pulse: &PulseArgs) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let f = &mut cfg.field;
    let cycles = pulse
        .cycles
        .map(f64::from)
        .unwrap_or(f.t_d * f.omega / std::f64::consts::TAU);
    let omega = pulse.omega.unwrap_or(f.omega);
    *f = FieldParams {
        f_peak: pulse.field_strength.unwrap_or(f.f_peak),
        omega,
        phi: pulse.phase.unwrap_or(f.phi),
        t_d: cycles * std::f64::consts::TAU / omega,
    };
    if pulse.omega.is_some() || pulse.cycles.is_some() {
        // A pulse-derived integrator window must follow the new duration.
        if let Some(ic) = cfg.integrator.as_mut() {
            ic.t_end = 3.0 * cfg.field.t_d;
        }
    }
    if pulse.rel_tol.is_some() || pulse.abs_tol.is_some() {
        let mut ic = cfg.integrator();
        ic.rel_tol = pulse.rel_tol.unwrap_or(ic.rel_tol);
        ic.abs_tol = pulse.abs_tol.unwrap_or(ic.abs_tol);
        cfg.integrator = Some(ic);
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.threads = match cli.threads.or(cfg.threads) {
        Some(n) => Some(n),
        None => env_threads()?,
    };
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Saddle {
            field_strength,
            phase_frozen,
        } => commands::cmd_saddle(*field_strength, *phase_frozen),
        Command::Stability { field_strength } => commands::cmd_stability(*field_strength),
        Command::NgonScan {
            n_min,
            n_max,
            field_strength,
        } => {
            let text = commands::cmd_ngon_scan(*n_min, *n_max, *field_strength)?;
            if let Some(dir) = &cli.out_dir {
                let cfg = RunConfig {
                    output_dir: dir.clone(),
                    ..RunConfig::default()
                }
                .resolve()?;
                cfg.persist()?;
                std::fs::write(dir.join("ngon_scan.csv"), &text).map_err(CliError::io("writing ngon_scan.csv"))?;
            }
            Ok(text)
        }
        Command::Convert { intensity, field } => commands::cmd_convert(*intensity, *field),
        Command::Trajectory {
            pulse,
            initial,
            from_saddle,
            energy,
        } => {
            let cfg = build_config(cli, pulse)?.resolve()?;
            let start = match (initial, from_saddle) {
                (Some(v), false) => match v.as_slice() {
                    &[x, y, px, py] => TrajectoryStart::State([x, y, px, py]),
                    _ => return Err(CliError::Usage(format!("--initial needs 4 values, got {}", v.len()))),
                },
                (None, true) => TrajectoryStart::Saddle { energy: *energy },
                _ => return Err(CliError::Usage("give --initial x,y,px,py or --from-saddle".into())),
            };
            let text = commands::cmd_trajectory(&cfg, start)?;
            if cli.out_dir.is_some() {
                cfg.persist()?;
                std::fs::write(cfg.output_dir.join("trajectory.csv"), &text)
                    .map_err(CliError::io("writing trajectory.csv"))?;
            }
            Ok(text)
        }
        Command::Ensemble {
            pulse,
            n,
            energy,
            seed,
            quiet,
        } => {
            let mut cfg = build_config(cli, pulse)?;
            cfg.ensemble.n_samples = n.unwrap_or(cfg.ensemble.n_samples);
            cfg.ensemble.master_seed = seed.unwrap_or(cfg.ensemble.master_seed);
            if let Some(e) = energy {
                cfg.ensemble.e_tilde = *e;
                // A region derived from the old energy no longer applies.
                cfg.ensemble.region = None;
            }
            commands::cmd_ensemble(&cfg.resolve()?, !quiet)
        }
        Command::Fig4 { pulse, scan } => commands::cmd_fig4(&build_config(cli, pulse)?.resolve()?, *scan),
    }
}

fn main() -> ExitCode {
    debug_assert!(VERSION.ends_with(&format!("schema {SCHEMA_VERSION})")));
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_owned());
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
