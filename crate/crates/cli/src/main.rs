//! `walklab`: exact lazy random walks on Cayley graphs, the compression
//! cocycle, and the inequality suite, driven from the command line.

mod cache;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Overrides, RunConfig, RunMode};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "walklab", version, about = "Lazy random walks on Cayley graphs: observables, compression, inequality checks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML config file; environment variables and flags override it
    #[arg(long, env = "WALKLAB_CONFIG", global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV and JSON outputs [default: walklab-out]
    #[arg(long, env = "WALKLAB_OUT_DIR", global = true)]
    out_dir: Option<PathBuf>,

    /// Trace cache directory [default: <out-dir>/cache]
    #[arg(long, env = "WALKLAB_CACHE_DIR", global = true)]
    cache_dir: Option<PathBuf>,

    /// Memory budget for balls and measures, in GiB [default: 4]
    #[arg(long, env = "WALKLAB_BUDGET_GIB", global = true)]
    budget_gib: Option<f64>,

    /// Seed for sampling [default: 0]
    #[arg(long, env = "WALKLAB_SEED", global = true)]
    seed: Option<u64>,

    /// Neither read nor write the trace cache
    #[arg(long, env = "WALKLAB_NO_CACHE", global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a walk and write per-step observables to observables.csv
    Walk(WalkArgs),
    /// Build the walk cocycle and estimate its compression profile
    Compression(CompressionArgs),
    /// Run the inequality suite and write report.json and margins.csv
    Verify(VerifyArgs),
    /// Compare fitted exponents with their known asymptotic values
    Table(TableArgs),
    /// Inspect or clear the trace cache
    #[command(subcommand)]
    Cache(CacheCommand),
}

#[derive(Args, Debug)]
struct WalkArgs {
    /// Group: Z^d, heisenberg, free:k, lamplighter:m or wreathZZ
    #[arg(long, env = "WALKLAB_GROUP")]
    group: Option<String>,

    /// Last step [default: 64]
    #[arg(long, env = "WALKLAB_N_MAX")]
    n_max: Option<usize>,

    /// Radius of the ball table for families without closed-form lengths [default: n-max]
    #[arg(long, env = "WALKLAB_RADIUS_MAX")]
    radius_max: Option<usize>,

    /// Speed computation [default: exact]
    #[arg(long, env = "WALKLAB_MODE", value_enum)]
    mode: Option<RunMode>,

    /// Monte Carlo trials per step in mc-speed mode [default: 2000]
    #[arg(long, env = "WALKLAB_MC_TRIALS")]
    mc_trials: Option<usize>,

    /// Holding probability of the lazy step [default: 0.5]
    #[arg(long, env = "WALKLAB_LAZINESS")]
    laziness: Option<f64>,
}

#[derive(Args, Debug)]
struct CompressionArgs {
    /// Group [default: Z]
    #[arg(long, env = "WALKLAB_GROUP")]
    group: Option<String>,

    /// Largest sphere radius evaluated [default: 32]
    #[arg(long, env = "WALKLAB_K_MAX")]
    k_max: Option<usize>,

    /// Summability exponent of the weights [default: 0.1]
    #[arg(long, env = "WALKLAB_EPSILON")]
    epsilon: Option<f64>,

    /// Number of cocycle summands N_max [default: 4 k-max^2]
    #[arg(long = "cocycle-n-max", env = "WALKLAB_COCYCLE_N_MAX")]
    cocycle_n_max: Option<usize>,

    /// Choice of k_n: identity or window [default: window]
    #[arg(long, env = "WALKLAB_KN_MODE")]
    kn_mode: Option<String>,

    /// Spheres larger than this are sampled [default: 5000]
    #[arg(long, env = "WALKLAB_MAX_SPHERE_POINTS")]
    max_sphere_points: Option<usize>,

    /// Holding probability of the lazy step [default: 0.5]
    #[arg(long, env = "WALKLAB_LAZINESS")]
    laziness: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated subset of checks [default: all]
    #[arg(long, env = "WALKLAB_CHECKS", value_delimiter = ',')]
    checks: Option<Vec<String>>,

    /// Comma-separated families, each `spec` or `spec@last_step` [default: the five built-in families]
    #[arg(long, env = "WALKLAB_FAMILIES", value_delimiter = ',')]
    families: Option<Vec<String>>,

    /// Slack for the informational exponent relations [default: 0.15]
    #[arg(long, env = "WALKLAB_SLACK")]
    slack: Option<f64>,

    /// Verify the observables stored in a cached trace instead of running the families
    #[arg(long, env = "WALKLAB_TRACE")]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Comma-separated row letters [default: all]
    #[arg(long, env = "WALKLAB_ROWS", value_delimiter = ',')]
    rows: Option<Vec<String>>,

    /// Comma-separated family budgets overriding the defaults, `spec@last_step`
    #[arg(long, env = "WALKLAB_FAMILIES", value_delimiter = ',')]
    families: Option<Vec<String>>,

    /// Slack for the within/outside verdict [default: 0.15]
    #[arg(long, env = "WALKLAB_SLACK")]
    slack: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum CacheCommand {
    /// List cached traces
    List,
    /// Remove every cached trace
    Clear,
    /// Print the cache directory
    Path,
}

fn overrides(cli: &Cli) -> Overrides {
    let g = &cli.global;
    let mut o = Overrides {
        budget_gib: g.budget_gib,
        seed: g.seed,
        out_dir: g.out_dir.clone(),
        cache_dir: g.cache_dir.clone(),
        no_cache: g.no_cache,
        ..Overrides::default()
    };
    match &cli.command {
        Command::Walk(a) => {
            o.group = a.group.clone();
            o.n_max = a.n_max;
            o.radius_max = a.radius_max;
            o.mode = a.mode;
            o.mc_trials = a.mc_trials;
            o.laziness = a.laziness;
        }
        Command::Compression(a) => {
            o.group = a.group.clone();
            o.k_max = a.k_max;
            o.epsilon = a.epsilon;
            o.cocycle_n_max = a.cocycle_n_max;
            o.kn_mode = a.kn_mode.clone();
            o.max_sphere_points = a.max_sphere_points;
            o.laziness = a.laziness;
        }
        Command::Verify(a) => {
            o.checks = a.checks.clone();
            o.families = a.families.clone();
            o.slack = a.slack;
        }
        Command::Table(a) => {
            o.rows = a.rows.clone();
            o.families = a.families.clone();
            o.slack = a.slack;
        }
        Command::Cache(_) => {}
    }
    o
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let config = RunConfig::resolve(file, overrides(cli))?;
    match &cli.command {
        Command::Walk(_) => commands::walk(&config),
        Command::Compression(_) => commands::compression(&config),
        Command::Verify(a) => commands::verify(&config, a.trace.as_deref()),
        Command::Table(_) => commands::table(&config),
        Command::Cache(CacheCommand::List) => commands::cache_list(&config),
        Command::Cache(CacheCommand::Clear) => commands::cache_clear(&config),
        Command::Cache(CacheCommand::Path) => {
            println!("{}", config.cache_dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
