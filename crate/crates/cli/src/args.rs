use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "intertwine",
    version,
    about = "Conserved quantities and exponentially evolving operators of non-Hermitian Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Liouvillian analysis of a time-independent Hamiltonian
    Static,
    /// One-period propagator, multipliers and stroboscopic invariants
    Floquet,
    /// Dense-time expectation traces of the eigen-operators
    Trace,
    /// Phase diagram over (gamma/J, JT) with exceptional contours
    Scan,
    /// Run the built-in invariant suite
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Static => "static",
            Command::Floquet => "floquet",
            Command::Trace => "trace",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Built-in model: quantum-dimer or classical-dimer
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// JSON file with a raw Hamiltonian or schedule
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Gain/loss strength (default 0.5 J)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Coupling (default 1)
    #[arg(long = "J", global = true, allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// Period in units of 1/J (default 1)
    #[arg(long = "JT", global = true, allow_negative_numbers = true)]
    pub jt: Option<f64>,
    /// static, square or kicks
    #[arg(long, global = true)]
    pub waveform: Option<String>,
    /// Initial state as "re,im;re,im;..." (default |+x>)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub psi0: Option<String>,
    #[arg(long, global = true, value_name = "INT")]
    pub steps_per_period: Option<usize>,
    #[arg(long, global = true, value_name = "INT")]
    pub periods: Option<usize>,
    /// "gmin:gmax:n,tmin:tmax:n" over gamma/J and JT
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Eigen-residual tolerance; for verify, overrides every check bound
    #[arg(long, global = true)]
    pub tol_eig: Option<f64>,
    /// Relative singular-value cutoff for null spaces
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv, json, gnuplot
    #[arg(long, global = true)]
    pub format: Option<String>,
}
