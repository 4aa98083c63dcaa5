//! `sit`: dispersion and velocity sweeps, stopping widths, area-law curves
//! and propagation runs.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Params;
use error::CliError;
use output::{emit, Format};

#[derive(Parser)]
#[command(name = "sit", version, about = "Self-induced transparency pulse calculations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Carrier wave number K along a sweep
    Dispersion(SweepArgs),
    /// Pulse velocity V and regime along a sweep
    Velocity(SweepArgs),
    /// Stopping width of a sharp-line absorber versus x
    Critical(CriticalArgs),
    /// Propagate a pulse through the ensemble; --output names the run directory
    Simulate(SimulateArgs),
    /// Area law evolution next to its closed form
    Area(AreaArgs),
}

#[derive(Args)]
struct Common {
    /// Output file (standard output if absent)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Flat `key = value` parameter file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lineshape {
    Sharp,
    Lorentzian,
}

#[derive(Args)]
struct Medium {
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s0: Option<f64>,
    #[arg(long, value_enum)]
    lineshape: Option<Lineshape>,
    #[arg(long, allow_negative_numbers = true)]
    omega0_tau_star: Option<f64>,
}

#[derive(Args)]
struct Pulse {
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau0: Option<f64>,
    /// tau_p / tau*, an alternative to --tau0 for the lorentzian line
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepVar {
    X,
    Tau0,
    Y,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    medium: Medium,
    #[command(flatten)]
    pulse: Pulse,
    /// Variable to sweep; without it a single point is evaluated
    #[arg(long, value_enum)]
    sweep: Option<SweepVar>,
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// Use the y^4 variant of the broadened dispersion expression
    #[arg(long)]
    eq18_literal: bool,
}

#[derive(Args)]
struct CriticalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    medium: Medium,
    #[command(flatten)]
    pulse: Pulse,
}

#[derive(Args)]
struct AreaArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    medium: Medium,
    #[command(flatten)]
    pulse: Pulse,
    /// Launch area in radians
    #[arg(long, allow_negative_numbers = true)]
    theta0: Option<f64>,
    /// Absorption coefficient; derived from the medium when absent
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    eq18_literal: bool,
}

fn put<T: ToString>(p: &mut Params, key: &str, v: Option<T>) {
    if let Some(v) = v {
        p.set(key, v.to_string());
    }
}

fn load(common: &Common) -> Result<Params, CliError> {
    match &common.config {
        Some(path) => Params::load(path),
        None => Ok(Params::default()),
    }
}

fn apply_medium(p: &mut Params, m: &Medium) {
    put(p, "nu", m.nu);
    put(p, "s0", m.s0);
    put(
        p,
        "lineshape",
        m.lineshape.map(|l| match l {
            Lineshape::Sharp => "sharp",
            Lineshape::Lorentzian => "lorentzian",
        }),
    );
    put(p, "omega0_tau_star", m.omega0_tau_star);
}

fn apply_pulse(p: &mut Params, pulse: &Pulse) {
    // a width flag replaces whichever width the config file gave
    if pulse.tau0.is_some() || pulse.y.is_some() {
        p.remove("tau0");
        p.remove("y");
    }
    put(p, "x", pulse.x);
    put(p, "tau0", pulse.tau0);
    put(p, "y", pulse.y);
}

fn sweep_params(a: &SweepArgs) -> Result<Params, CliError> {
    let mut p = load(&a.common)?;
    apply_medium(&mut p, &a.medium);
    if let Some(var) = a.sweep {
        p.set(
            "sweep",
            match var {
                SweepVar::X => "x",
                SweepVar::Tau0 => "tau0",
                SweepVar::Y => "y",
            },
        );
    }
    apply_pulse(&mut p, &a.pulse);
    put(&mut p, "start", a.start);
    put(&mut p, "stop", a.stop);
    put(&mut p, "count", a.count);
    if a.eq18_literal {
        p.set("eq18_literal", "true");
    }
    Ok(p)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dispersion(a) => {
            let table = commands::dispersion(&sweep_params(&a)?)?;
            emit(&table.render(a.common.format), a.common.output.as_deref())
        }
        Command::Velocity(a) => {
            let table = commands::velocity(&sweep_params(&a)?)?;
            emit(&table.render(a.common.format), a.common.output.as_deref())
        }
        Command::Critical(a) => {
            let mut p = load(&a.common)?;
            put(&mut p, "nu", a.nu);
            put(&mut p, "start", a.start);
            put(&mut p, "stop", a.stop);
            put(&mut p, "count", a.count);
            let table = commands::critical(&p)?;
            emit(&table.render(a.common.format), a.common.output.as_deref())
        }
        Command::Area(a) => {
            let mut p = load(&a.common)?;
            apply_medium(&mut p, &a.medium);
            apply_pulse(&mut p, &a.pulse);
            put(&mut p, "theta0", a.theta0);
            put(&mut p, "beta", a.beta);
            put(&mut p, "x_max", a.x_max);
            put(&mut p, "steps", a.steps);
            if a.eq18_literal {
                p.set("eq18_literal", "true");
            }
            let table = commands::area(&p)?;
            emit(&table.render(a.common.format), a.common.output.as_deref())
        }
        Command::Simulate(a) => {
            let mut p = load(&a.common)?;
            apply_medium(&mut p, &a.medium);
            apply_pulse(&mut p, &a.pulse);
            let dir = a
                .common
                .output
                .as_deref()
                .ok_or_else(|| CliError::usage("`simulate` needs --output <run directory>"))?;
            commands::simulate(&p, dir, a.common.format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
