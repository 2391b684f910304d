//! Run configuration: built-in defaults, then a TOML file, then
//! `WALKLAB_*` environment variables and flags (flags win).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use walklab::compression::KnMode;
use walklab::exponents::CHAIN_SLACK;
use walklab::suite::{default_budgets, FamilyBudget};
use walklab::{GroupSpec, MemoryBudget};

use crate::error::CliError;

/// How `walk` computes its speed column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    /// Exact speeds from the full distribution.
    Exact,
    /// Monte Carlo speed estimates alongside the exact observables.
    McSpeed,
    /// Cross-check the float walk against exact rational arithmetic.
    RationalOracle,
}

/// Longest walk the rational oracle accepts.
pub const ORACLE_MAX_STEPS: usize = 12;

/// Keys accepted in the config file; every one is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub group: Option<String>,
    pub n_max: Option<usize>,
    pub radius_max: Option<usize>,
    pub epsilon: Option<f64>,
    pub cocycle_n_max: Option<usize>,
    pub k_max: Option<usize>,
    pub kn_mode: Option<String>,
    pub budget_gib: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub mode: Option<RunMode>,
    pub mc_trials: Option<usize>,
    pub laziness: Option<f64>,
    pub checks: Option<Vec<String>>,
    pub families: Option<Vec<String>>,
    pub rows: Option<Vec<String>>,
    pub slack: Option<f64>,
    pub max_sphere_points: Option<usize>,
    pub cache: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Values given on the command line or through the environment.
#[derive(Debug, Default)]
pub struct Overrides {
    pub group: Option<String>,
    pub n_max: Option<usize>,
    pub radius_max: Option<usize>,
    pub epsilon: Option<f64>,
    pub cocycle_n_max: Option<usize>,
    pub k_max: Option<usize>,
    pub kn_mode: Option<String>,
    pub budget_gib: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub mode: Option<RunMode>,
    pub mc_trials: Option<usize>,
    pub laziness: Option<f64>,
    pub checks: Option<Vec<String>>,
    pub families: Option<Vec<String>>,
    pub rows: Option<Vec<String>>,
    pub slack: Option<f64>,
    pub max_sphere_points: Option<usize>,
    pub no_cache: bool,
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub group: Option<GroupSpec>,
    pub n_max: usize,
    /// Radius of BFS ball tables for families without closed-form lengths.
    pub radius_max: Option<usize>,
    pub epsilon: f64,
    /// Number of cocycle summands; defaults to `4·k_max²`.
    pub cocycle_n_max: usize,
    pub k_max: usize,
    pub kn_mode: KnMode,
    pub budget: MemoryBudget,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub mode: RunMode,
    pub mc_trials: usize,
    pub laziness: f64,
    pub checks: Option<Vec<String>>,
    pub families: Vec<FamilyBudget>,
    /// Whether `families` was given rather than defaulted.
    pub families_explicit: bool,
    pub rows: Vec<char>,
    pub slack: f64,
    pub max_sphere_points: usize,
    pub use_cache: bool,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive_usize(name: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        Err(invalid(format!("{name} must be positive")))
    } else {
        Ok(v)
    }
}

fn parse_family(s: &str, fallback_steps: usize) -> Result<FamilyBudget, CliError> {
    let (spec, steps) = match s.split_once('@') {
        Some((spec, steps)) => {
            let steps: usize = steps
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad step count in family {s:?}")))?;
            (spec, Some(positive_usize("family step count", steps)?))
        }
        None => (s, None),
    };
    let spec: GroupSpec = spec.trim().parse()?;
    let steps = steps.unwrap_or_else(|| {
        default_budgets()
            .into_iter()
            .find(|b| b.spec == spec)
            .map_or(fallback_steps, |b| b.last_step)
    });
    Ok(FamilyBudget::new(spec, steps))
}

impl RunConfig {
    /// Merges overrides over the file over the defaults, then validates.
    pub fn resolve(file: FileConfig, over: Overrides) -> Result<Self, CliError> {
        let group = over.group.or(file.group).map(|g| g.parse::<GroupSpec>()).transpose()?;
        let n_max = positive_usize("n_max", over.n_max.or(file.n_max).unwrap_or(64))?;
        let radius_max = over
            .radius_max
            .or(file.radius_max)
            .map(|r| positive_usize("radius_max", r))
            .transpose()?;
        let epsilon = over.epsilon.or(file.epsilon).unwrap_or(0.1);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        let k_max = positive_usize("k_max", over.k_max.or(file.k_max).unwrap_or(32))?;
        let cocycle_n_max = positive_usize(
            "N_max",
            over.cocycle_n_max.or(file.cocycle_n_max).unwrap_or(4 * k_max * k_max),
        )?;
        let kn_mode = over
            .kn_mode
            .or(file.kn_mode)
            .map(|m| m.parse::<KnMode>())
            .transpose()?
            .unwrap_or(KnMode::Window);
        let budget_gib = over.budget_gib.or(file.budget_gib).unwrap_or(4.0);
        if !(budget_gib > 0.0 && budget_gib.is_finite()) {
            return Err(invalid(format!("budget_gib must be positive, got {budget_gib}")));
        }
        let out_dir = over.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("walklab-out"));
        let cache_dir = over
            .cache_dir
            .or(file.cache_dir)
            .unwrap_or_else(|| out_dir.join("cache"));
        let mc_trials = positive_usize("mc_trials", over.mc_trials.or(file.mc_trials).unwrap_or(2000))?;
        let laziness = over.laziness.or(file.laziness).unwrap_or(0.5);
        if !(0.0..1.0).contains(&laziness) {
            return Err(invalid(format!("laziness must lie in [0, 1), got {laziness}")));
        }
        let family_list = over.families.or(file.families);
        let families_explicit = family_list.is_some();
        let families = match family_list {
            Some(list) => list
                .iter()
                .map(|s| parse_family(s, n_max))
                .collect::<Result<Vec<_>, _>>()?,
            None => default_budgets(),
        };
        if families.is_empty() {
            return Err(invalid("family list is empty"));
        }
        let rows = over
            .rows
            .or(file.rows)
            .unwrap_or_default()
            .iter()
            .map(|r| {
                let mut chars = r.trim().chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii_alphabetic() => Ok(c.to_ascii_uppercase()),
                    _ => Err(invalid(format!("table rows are single letters, got {r:?}"))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let slack = over.slack.or(file.slack).unwrap_or(CHAIN_SLACK);
        if !(slack >= 0.0 && slack.is_finite()) {
            return Err(invalid(format!("slack must be nonnegative, got {slack}")));
        }
        Ok(Self {
            group,
            n_max,
            radius_max,
            epsilon,
            cocycle_n_max,
            k_max,
            kn_mode,
            budget: MemoryBudget::gib(budget_gib),
            seed: over.seed.or(file.seed).unwrap_or(0),
            out_dir,
            cache_dir,
            mode: over.mode.or(file.mode).unwrap_or(RunMode::Exact),
            mc_trials,
            laziness,
            checks: over.checks.or(file.checks),
            families,
            families_explicit,
            rows,
            slack,
            max_sphere_points: positive_usize(
                "max_sphere_points",
                over.max_sphere_points.or(file.max_sphere_points).unwrap_or(5000),
            )?,
            use_cache: !over.no_cache && file.cache.unwrap_or(true),
        })
    }

    pub fn require_group(&self) -> Result<&GroupSpec, CliError> {
        self.group
            .as_ref()
            .ok_or_else(|| invalid("no group given (use --group or set `group` in the config file)"))
    }
}
