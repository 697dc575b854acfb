//! Command-line front-end: channel construction, verification, dynamics,
//! Monte Carlo sweeps, and analytic tables, with JSON/CSV output.
//!
//! Exit codes: 0 success (and verdict cptp for `verify`), 1 verification
//! failure, 2 invalid parameters, 3 I/O or parse error.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "aqnn",
    version,
    about = "Attractor quantum neural networks as CPTP maps",
    after_help = "Environment: AQNN_DEFAULT_TOL overrides the default tolerance (1e-9)."
)]
struct Cli {
    /// Optional JSON config supplying global scalars
    /// ({"seed": .., "tol": .., "threads": ..}); explicit flags override it.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// Numerical tolerance applied to validation checks (overrides the
    /// config file, AQNN_DEFAULT_TOL, and the built-in default 1e-9).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Master seed for randomized constructions and sampling [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for Monte Carlo sampling (0 = rayon default).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a channel and write Choi + report + manifest files.
    Construct(ConstructArgs),
    /// Check a Choi file; prints the report JSON and exits 0 iff cptp.
    Verify(VerifyArgs),
    /// Iterate a channel on a state and write the trajectory CSV.
    Iterate(IterateArgs),
    /// Fixed-point structure of a square channel.
    FixedPoints(FixedPointsArgs),
    /// Volume estimation: Monte Carlo sweeps and analytic tables.
    #[command(subcommand)]
    Gardner(GardnerCommand),
}

#[derive(Args)]
pub struct ConstructArgs {
    /// canonical | general | mixed | perceptron | theorem3
    #[arg(long)]
    pub kind: String,

    /// Correlation-coefficient matrix file (matrix JSON).
    #[arg(long)]
    pub correlation: Option<std::path::PathBuf>,

    /// Draw a random full-rank correlation matrix of this dimension.
    #[arg(long)]
    pub random_correlation: Option<usize>,

    /// Rank of the random correlation matrix (defaults to the dimension).
    #[arg(long)]
    pub rank: Option<usize>,

    /// Basis transform file (matrix JSON), for kind=general.
    #[arg(long)]
    pub transform: Option<std::path::PathBuf>,

    /// Ensemble member state files (matrix JSON), for kind=mixed.
    #[arg(long = "member")]
    pub members: Vec<std::path::PathBuf>,

    /// Input dimension, for kind=perceptron.
    #[arg(long)]
    pub na: Option<usize>,

    /// Number of inputs mapped to label 0, for kind=perceptron.
    #[arg(long)]
    pub m0: Option<usize>,

    /// Coupling block file (matrix JSON), for kind=perceptron; omitted = zero block.
    #[arg(long)]
    pub coupling: Option<std::path::PathBuf>,

    /// Single-system dimension, for kind=theorem3.
    #[arg(long)]
    pub n: Option<usize>,

    /// Bipartite basis for kind=theorem3: orthonormal | product | random.
    #[arg(long, default_value = "orthonormal")]
    pub basis_kind: String,

    /// Output directory.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub choi: std::path::PathBuf,

    /// Optional directory for report.json + manifest.json.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct IterateArgs {
    #[arg(long)]
    pub choi: std::path::PathBuf,

    /// Initial state file (matrix JSON).
    #[arg(long)]
    pub rho: std::path::PathBuf,

    #[arg(long, default_value_t = 1000)]
    pub steps: usize,

    /// Convergence threshold on the trace distance of successive iterates.
    #[arg(long, default_value_t = 1e-12)]
    pub conv_tol: f64,

    /// Output directory.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args)]
pub struct FixedPointsArgs {
    #[arg(long)]
    pub choi: std::path::PathBuf,

    /// Eigenvalue window |λ−1| ≤ window for counting fixed points.
    #[arg(long, default_value_t = 1e-8)]
    pub window: f64,

    /// Output directory.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Subcommand)]
pub enum GardnerCommand {
    /// Monte Carlo sweep over pattern counts and basin widths.
    Mc(GardnerMcArgs),
    /// Analytic volume formulas over a parameter grid.
    Analytic(GardnerAnalyticArgs),
    /// Capacity table over qubit counts.
    Capacity(GardnerCapacityArgs),
}

#[derive(Args)]
pub struct GardnerMcArgs {
    /// Hilbert space dimension.
    #[arg(long)]
    pub n: usize,

    /// Comma-separated pattern counts.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,

    /// Comma-separated basin widths.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,

    #[arg(long)]
    pub samples: u64,

    /// Output CSV path; a JSON mirror and a manifest are written alongside.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args)]
pub struct GardnerAnalyticArgs {
    /// Manifold dimension d.
    #[arg(long)]
    pub d: f64,

    /// Comma-separated pattern counts.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<f64>,

    /// Comma-separated basin widths.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,

    /// Constraints per pattern (1 for pure patterns, N² for the
    /// mixed-state scaling study): K = M · k_scale.
    #[arg(long, default_value_t = 1.0)]
    pub k_scale: f64,

    /// Output CSV path.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Args)]
pub struct GardnerCapacityArgs {
    #[arg(long)]
    pub n_min: u32,

    #[arg(long)]
    pub n_max: u32,

    /// Output CSV path.
    #[arg(long)]
    pub out: std::path::PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_config = match cli.config.as_deref().map(commands::load_config) {
        Some(Ok(cfg)) => cfg,
        Some(Err(e)) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
        None => commands::FileConfig::default(),
    };
    let tol = commands::resolve_tolerances(cli.tol.or(file_config.tol));
    let ctx = commands::Context {
        tol,
        seed: cli.seed.or(file_config.seed).unwrap_or(0),
        threads: cli.threads.or(file_config.threads).unwrap_or(0),
    };
    let code = match cli.command {
        Command::Construct(args) => commands::construct(&ctx, &args),
        Command::Verify(args) => commands::verify(&ctx, &args),
        Command::Iterate(args) => commands::iterate(&ctx, &args),
        Command::FixedPoints(args) => commands::fixed_points(&ctx, &args),
        Command::Gardner(GardnerCommand::Mc(args)) => commands::gardner_mc(&ctx, &args),
        Command::Gardner(GardnerCommand::Analytic(args)) => commands::gardner_analytic(&ctx, &args),
        Command::Gardner(GardnerCommand::Capacity(args)) => commands::gardner_capacity(&ctx, &args),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
