use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "blowuplab", version, about = "Blow-up diagnostics for damped wave equations")]
pub struct Cli {
    /// JSON run configuration; command-line flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output file for the command's table (CSV) or report (JSON)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// suppress summaries and warnings
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a damping coefficient against the effective-damping conditions
    Check(CheckArgs),
    /// Auxiliary functions of the damping
    #[command(subcommand)]
    Aux(AuxCommand),
    /// Critical and lower exponents
    Exponents(ExponentArgs),
    /// Scaling scan of the test-function estimate over radii
    Scan(ScanArgs),
    /// Solve one radial Cauchy problem
    Simulate(SimArgs),
    /// Solve the same problem for several powers p
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum AuxCommand {
    /// Tabulate t, B, beta, Gamma, g
    Dump(AuxArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DampingKind {
    Constant,
    Powerlaw,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationKind {
    /// log(e+t)^param
    Log,
    /// 1 + (1+t)^param sin((1+t)^(-2 param))
    Sine,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DampingArgs {
    #[arg(long, value_enum)]
    pub damping: Option<DampingKind>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum)]
    pub perturbation: Option<PerturbationKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub perturbation_param: Option<f64>,
}

impl DampingArgs {
    pub fn any(&self) -> bool {
        self.damping.is_some() || self.mu.is_some() || self.kappa.is_some() || self.perturbation.is_some()
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// space dimension
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c_a: Option<f64>,
    #[arg(long)]
    pub c_f: Option<f64>,
    #[command(flatten)]
    pub damping: DampingArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub damping: DampingArgs,
    /// end of the sampled window
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AuxArgs {
    #[command(flatten)]
    pub damping: DampingArgs,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub points_per_decade: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Radial,
    Box,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// radii R, comma separated
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub measure: Option<MeasureKind>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimFlags {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// amplitude of the Gaussian initial velocity
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    /// amplitude of the Gaussian initial displacement
    #[arg(long, allow_negative_numbers = true)]
    pub u0_amplitude: Option<f64>,
    #[arg(long)]
    pub u0_width: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// drop the f|u|^p term
    #[arg(long)]
    pub linear: bool,
    #[arg(long)]
    pub record_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub sim: SimFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    /// powers p, comma separated
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
}
