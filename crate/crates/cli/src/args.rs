use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SEED_ENV: &str = "QUASAR_PPA_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "quasar-ppa",
    version,
    about = "Proximal point method for nonsmooth quasar-convex functions",
    args_override_self = true
)]
pub struct Cli {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for every random choice (multi-start draws, samplers, instances).
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run PPA or semismooth Newton from a starting point.
    Solve(SolveArgs),
    /// Evaluate the proximity operator at one point.
    Prox(ProxArgs),
    /// Sample the quasar-convexity inequalities for a function.
    Certify(CertifyArgs),
    /// Run a seeded batch and print the success/median table.
    Table(TableArgs),
    /// Write per-run trace CSVs for seeded instances.
    Trace(TraceArgs),
    /// Print the contraction rate and iteration bounds.
    Bounds(BoundsArgs),
    /// Draw one random instance and write it as JSON.
    Instance(InstanceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FnKind {
    /// sum_i w_i x_i^2
    Quadratic,
    /// |x|^alpha
    Euclid,
    /// sum_i |x_i|^p
    Lp,
    /// (sum_i |x_i|^p)^(1/p)
    LpNorm,
    /// CES utility on the nonnegative orthant
    Ces,
    /// Leontief function on the nonnegative orthant
    Leontief,
    /// random product family with a quadratic radial factor
    Ex1,
    /// random product family with a linear radial factor
    Ex2,
}

#[derive(Debug, Clone, Args)]
pub struct FnArgs {
    /// Gallery function or random family.
    #[arg(long = "fn", value_enum, required_unless_present = "instance")]
    pub function: Option<FnKind>,

    /// Instance JSON written by `quasar-ppa instance`.
    #[arg(long, conflicts_with = "function", value_name = "FILE")]
    pub instance: Option<PathBuf>,

    /// Dimension; inferred from the point flags when omitted.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Quadratic weights.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,

    /// Exponent of the lp functions.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    /// Exponent of the Euclidean power and the Leontief function.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Coefficients of CES and Leontief (default all ones).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,

    /// CES exponent.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub ces_beta: f64,

    /// Number of trigonometric terms of a random family.
    #[arg(long, default_value_t = 2)]
    pub n_terms: usize,

    #[arg(long, default_value_t = 1.0)]
    pub q1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q2: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,

    /// Evaluate the trigonometric factor at x instead of x/|x|.
    #[arg(long)]
    pub raw_coordinates: bool,

    /// Restrict the function to the cube [lo, hi]^n.
    #[arg(long = "box", value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "LO,HI")]
    pub cube: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Ppa,
    Ssn,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub function: FnArgs,

    /// Starting point (defaults to the instance's own start).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value_t = SolverChoice::Ppa)]
    pub solver: SolverChoice,

    /// Constant proximal parameter.
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,

    /// Stopping tolerance (PPA step length or SSN residual).
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    #[arg(long, default_value_t = 30000)]
    pub max_iter: usize,

    /// Write the trace CSV here.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,

    /// Write the JSON summary here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProxArgs {
    #[command(flatten)]
    pub function: FnArgs,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub z: Vec<f64>,

    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,

    /// Newton starts (z, the origin and random points).
    #[arg(long, default_value_t = 5)]
    pub n_starts: usize,

    /// Also compute the grid oracle with this many points per axis (dimension 1 or 2, bounded box).
    #[arg(long)]
    pub oracle_resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerChoice {
    Ball,
    Sphere,
    NearKink,
    Orthant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckChoice {
    Quasar,
    Growth,
    Diff,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub function: FnArgs,

    #[arg(long)]
    pub kappa: f64,

    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,

    /// Reference minimizer (default: the origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xbar: Option<Vec<f64>>,

    #[arg(long, default_value_t = 10000)]
    pub samples: usize,

    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,

    /// Sampling scheme (default: orthant for orthant-domain functions, ball otherwise).
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerChoice>,

    /// Inequalities to check (default: all three).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Option<Vec<CheckChoice>>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Example family (1 or 2).
    #[arg(long, default_value = "1")]
    pub example: String,

    /// Plan JSON; overrides the example defaults.
    #[arg(long, value_name = "FILE")]
    pub plan: Option<PathBuf>,

    /// Instances per cell.
    #[arg(long)]
    pub instances: Option<usize>,

    /// Values of N (number of trigonometric terms).
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<usize>>,

    #[arg(long)]
    pub raw_coordinates: bool,

    /// Constant proximal parameter for PPA.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub plan: PlanArgs,

    /// Write the table CSV here.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Write the full per-run JSON report here.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceSolvers {
    Ppa,
    Ssn,
    Both,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub plan: PlanArgs,

    #[arg(long, value_enum, default_value_t = TraceSolvers::Both)]
    pub solver: TraceSolvers,

    /// Directory for the CSV files (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,

    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,

    #[arg(long)]
    pub beta_lower: f64,

    /// Needed for the step-length bound.
    #[arg(long)]
    pub beta_upper: Option<f64>,

    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,

    /// Distance from x0 to the minimizer.
    #[arg(long, default_value_t = 1.0)]
    pub dist0: f64,

    /// Initial gap h(x0) - min h, for the step-length bound.
    #[arg(long)]
    pub gap0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, default_value = "1")]
    pub example: String,

    #[arg(long, default_value_t = 2)]
    pub n_terms: usize,

    #[arg(long)]
    pub raw_coordinates: bool,

    #[arg(long, default_value_t = 1.0)]
    pub q1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q2: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,

    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
