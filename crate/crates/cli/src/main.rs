//! `rotor-wigner` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O failure |
//! | 2 | parse or configuration error (nothing is written) |
//! | 3 | tolerance breach (outputs and diagnostics are written) |
//! | 4 | singularity or truncation failure |
//! | 5 | integration failure |

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotor_wigner::quadrature::DEFAULT_ORDER;
use rotor_wigner::Error;

/// Environment variable that sizes the worker pool.
pub const THREADS_ENV: &str = "ROTOR_WIGNER_THREADS";

#[derive(Parser, Debug)]
#[command(name = "rotor-wigner", version, about = "Orientation-state Wigner functions of rigid rotors")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Gauss–Legendre order for quadrature paths (at least 32).
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    pub quadrature_order: usize,
    /// Also write a matplotlib script that plots the outputs.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wigner function of a state file on a grid.
    Wigner {
        #[arg(long)]
        state: PathBuf,
        /// Angle samples per axis, `NαxNβxNγ`.
        #[arg(long, value_parser = parse_counts)]
        grid: [usize; 3],
        /// Momentum half-widths per axis, `a,b,c`.
        #[arg(long, value_parser = parse_window)]
        mwin: [u32; 3],
        #[arg(long, value_enum, default_value_t = commands::EvalPath::Auto)]
        path: commands::EvalPath,
    },
    /// Coherent state on one axis and its Wigner function.
    Coherent {
        #[arg(long, default_value_t = 7.0)]
        sigma: f64,
        /// Center `angle,m`.
        #[arg(long, value_parser = parse_center, default_value = "3.141592653589793,10", allow_hyphen_values = true)]
        center: (f64, i64),
        #[arg(long, default_value = "alpha", value_parser = parse_axis)]
        axis: rotor_wigner::Axis,
        /// Angle samples on the coherent axis.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Superposition of coherent states from a spec file.
    Superpose {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Kicked symmetric-top alignment run.
    Align {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<commands::Preset>,
    },
    /// Classical trajectory of the free symmetric top.
    Classical {
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        tspan: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Seeded invariant suites with a JSON report.
    Verify {
        #[arg(long, default_value_t = 20240607)]
        seed: u64,
    },
}

fn parse_counts(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected NαxNβxNγ, got {s:?}"))
}

fn parse_window(s: &str) -> Result<[u32; 3], String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected a,b,c, got {s:?}"))
}

fn parse_center(s: &str) -> Result<(f64, i64), String> {
    let (a, m) = s.split_once(',').ok_or_else(|| format!("expected angle,m, got {s:?}"))?;
    let a = a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
    let m = m.trim().parse::<i64>().map_err(|e| format!("{m:?}: {e}"))?;
    Ok((a, m))
}

fn parse_axis(s: &str) -> Result<rotor_wigner::Axis, String> {
    use rotor_wigner::Axis;
    match s {
        "alpha" => Ok(Axis::Alpha),
        "beta" => Ok(Axis::Beta),
        "gamma" => Ok(Axis::Gamma),
        _ => Err(format!("axis must be alpha, beta or gamma, got {s:?}")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::Parse(_) | Error::Configuration(_) | Error::Domain(_) => 2,
        Error::Tolerance(_) => 3,
        Error::Singularity(_) | Error::Pole { .. } | Error::Truncation(_) => 4,
        Error::Integration(_) => 5,
    }
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Configuration(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Configuration(format!("{THREADS_ENV} must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    init_threads()?;
    rotor_wigner::quadrature::check_order(cli.common.quadrature_order)?;
    let c = &cli.common;
    match cli.command {
        Command::Wigner { state, grid, mwin, path } => commands::wigner(c, &state, grid, mwin, path),
        Command::Coherent { sigma, center, axis, samples } => commands::coherent(c, sigma, center, axis, samples),
        Command::Superpose { spec } => commands::superpose(c, &spec),
        Command::Align { config, preset } => commands::align(c, config.as_deref(), preset),
        Command::Classical { init, tspan, tol } => commands::classical(c, &init, tspan, tol),
        Command::Verify { seed } => commands::verify(c, seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
