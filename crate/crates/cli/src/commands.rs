use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use walklab::compression::{check_kn_selection, run_compression, sphere_points, CocycleConfig};
use walklab::exponents::InequalityReport;
use walklab::group::{compute_ball, BallTable, Lengths};
use walklab::observables::{observables_csv, observe_walk, ObservableSeries};
use walklab::suite::{
    collect_family, default_budgets, exponent_table, family_data, run_checks, run_suite, FamilyRun, SuiteConfig,
    KNOWN_ROWS,
};
use walklab::walk::{cache_load, rational_walk, read_header, sample_speed, to_f64, Retention, WalkOptions};
use walklab::{with_group, Group, GroupSpec, WalkTrace};

use crate::cache::{self, CacheEntry};
use crate::config::{RunConfig, RunMode, ORACLE_MAX_STEPS};
use crate::error::{io_context, CliError};

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_context(format!("creating {}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_context(format!("writing {}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn walk_options<G: Group>(group: &G, last_step: usize, config: &RunConfig) -> WalkOptions {
    let mut options = WalkOptions::new(group, last_step).budget(config.budget);
    options.laziness = config.laziness;
    options
}

/// Cache mode tag: walk mode, plus the laziness when it is not the standard ½.
fn cache_mode(options: &WalkOptions) -> String {
    if options.laziness == 0.5 {
        options.mode.as_str().to_string()
    } else {
        format!("{}-lazy{}", options.mode.as_str(), options.laziness)
    }
}

/// Ball table for families without closed-form lengths, of radius
/// `radius_max` (default `radius`) capped at `radius`.
fn length_table<G: Group>(group: &G, radius: usize, config: &RunConfig) -> Result<Option<BallTable<G::Elem>>, CliError> {
    if group.word_length(&group.identity()).is_some() {
        return Ok(None);
    }
    let r = config.radius_max.unwrap_or(radius).min(radius);
    Ok(Some(compute_ball(group, r as u32, config.budget)?))
}

fn lengths_for<'a, G: Group>(group: &'a G, ball: &'a Option<BallTable<G::Elem>>, n: usize) -> Option<Lengths<'a, G>> {
    match ball {
        None => Some(Lengths::Closed(group)),
        Some(b) if b.radius_max() as usize >= n => Some(Lengths::Table(b)),
        Some(b) => {
            log::warn!("ball radius {} is below step {n}; speeds omitted", b.radius_max());
            None
        }
    }
}

pub fn walk(config: &RunConfig) -> Result<(), CliError> {
    let spec = *config.require_group()?;
    with_group!(spec, g => walk_generic(g, config))
}

fn walk_generic<G: Group>(group: G, config: &RunConfig) -> Result<(), CliError> {
    let spec = group.spec();
    let n_max = config.n_max;
    let options = walk_options(&group, n_max, config);
    let entry = CacheEntry::new(&config.cache_dir, &spec, n_max, &cache_mode(&options));
    let ball = length_table(&group, n_max, config)?;
    let lengths = lengths_for(&group, &ball, n_max);
    let (series, reached) = if config.use_cache && entry.exists() {
        let (trace, extras) = entry.load(group.clone())?;
        let series: ObservableSeries = extras
            .get("observables")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| CliError::Config(format!("cached observables unreadable: {e}")))?
            .ok_or_else(|| CliError::Config("cached trace has no observables".into()))?;
        (series, trace.reached())
    } else {
        let (trace, series) = observe_walk(group.clone(), &options, Vec::new(), lengths.as_ref())?;
        if config.use_cache && !trace.is_truncated() {
            let value = serde_json::to_value(&series).expect("series serializes");
            entry.store(&trace, &BTreeMap::from([("observables".to_string(), value)]))?;
        }
        (series, trace.reached())
    };

    let mut estimates = Vec::new();
    match config.mode {
        RunMode::Exact => {}
        RunMode::McSpeed => {
            let l = lengths
                .as_ref()
                .ok_or_else(|| CliError::Config("Monte Carlo speeds need word lengths up to n_max".into()))?;
            for n in 1..=reached {
                estimates.push(sample_speed(&group, l, n, config.mc_trials, config.seed.wrapping_add(n as u64), config.laziness)?);
            }
        }
        RunMode::RationalOracle => oracle_check(&group, n_max.min(reached), config)?,
    }

    write_output(
        &config.out_dir,
        "observables.csv",
        &observables_csv(&series, group.generators().len(), &estimates),
    )?;
    if reached < n_max {
        let msg = format!(
            "truncated: memory budget stopped the walk at step {reached} of {n_max}; observables.csv holds steps 0..={reached}"
        );
        write_output(&config.out_dir, "observables.truncated", &format!("{msg}\n"))?;
        return Err(CliError::Truncated(msg));
    }
    Ok(())
}

fn oracle_check<G: Group>(group: &G, n_max: usize, config: &RunConfig) -> Result<(), CliError> {
    if n_max > ORACLE_MAX_STEPS {
        return Err(CliError::Config(format!(
            "the rational oracle is limited to n_max <= {ORACLE_MAX_STEPS}"
        )));
    }
    if config.laziness != 0.5 {
        return Err(CliError::Config("the rational oracle uses laziness 1/2".into()));
    }
    let exact = rational_walk(group, n_max);
    let options = WalkOptions::new(group, n_max)
        .explicit()
        .retain(Retention::All)
        .budget(config.budget);
    let trace = WalkTrace::run(group.clone(), &options, Vec::new(), |_, _| Ok(()))?;
    let mut worst: f64 = 0.0;
    for (n, q) in exact.iter().enumerate() {
        let mu = trace
            .measure(n)
            .ok_or(walklab::Error::MissingStep { step: n, reached: trace.reached() })?;
        if mu.len() != q.len() {
            worst = f64::INFINITY;
        }
        for (g, p) in q {
            let want = to_f64(p);
            worst = worst.max((mu.get(g) - want).abs() / want);
        }
    }
    println!("rational oracle: max relative atom deviation {worst:e} over steps 0..={n_max}");
    if worst > 1e-12 {
        return Err(CliError::Violations(1));
    }
    Ok(())
}

pub fn compression(config: &RunConfig) -> Result<(), CliError> {
    let spec = config.group.unwrap_or(GroupSpec::FreeAbelian { dim: 1 });
    with_group!(spec, g => compression_generic(g, config))
}

fn compression_generic<G: Group>(group: G, config: &RunConfig) -> Result<(), CliError> {
    let spec = group.spec();
    let cocycle = CocycleConfig::new(config.epsilon, config.cocycle_n_max, config.kn_mode)?;
    let ball = compute_ball(&group, config.k_max as u32, config.budget)?;
    let spheres = sphere_points(&ball, config.k_max, config.max_sphere_points, config.seed)?;
    let mut watch = group.generators();
    let mut seen: HashSet<G::Elem> = watch.iter().cloned().collect();
    for g in spheres.iter().flat_map(|s| &s.points) {
        if seen.insert(g.clone()) {
            watch.push(g.clone());
        }
    }
    let need = cocycle.required_last_step();
    let options = walk_options(&group, need, config);
    let tag = format!(
        "{}-cocycle-k{}-p{}-s{}",
        cache_mode(&options),
        config.k_max,
        config.max_sphere_points,
        config.seed
    );
    let entry = CacheEntry::new(&config.cache_dir, &spec, need, &tag);
    let trace = if config.use_cache && entry.exists() {
        entry.load(group.clone())?.0
    } else {
        let trace = WalkTrace::run(group.clone(), &options, watch, |_, _| Ok(()))?;
        if config.use_cache && !trace.is_truncated() {
            entry.store(&trace, &BTreeMap::new())?;
        }
        trace
    };
    if trace.reached() < need {
        return Err(CliError::Truncated(format!(
            "the cocycle with N_max = {} needs walk steps up to {need}; the memory budget stopped the walk at step {}",
            config.cocycle_n_max,
            trace.reached()
        )));
    }
    let run = run_compression(&trace, &cocycle, &spheres)?;
    write_output(&config.out_dir, "compression.csv", &walklab::compression::compression_csv(&run.estimate))?;
    let mut json = serde_json::to_string_pretty(&run.report).expect("report serializes");
    json.push('\n');
    write_output(&config.out_dir, "compression.json", &json)?;
    let r = &run.report;
    let show = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "{}: slope {} over k in [{}, {}]; gamma_hat {}; predicted exponent {} (general), {} (off-diagonal)",
        r.group,
        show(r.fitted_slope),
        r.fit_window.0,
        r.fit_window.1,
        show(r.gamma_hat),
        show(r.predicted_general),
        show(r.predicted_od)
    );
    if r.sampled_spheres > 0 {
        println!("{} sphere(s) sampled rather than enumerated (sampled=true in compression.csv)", r.sampled_spheres);
    }
    let kn = check_kn_selection(&r.group, trace.returns());
    println!("kn-selection: {}", kn.verdict);
    Ok(())
}

fn print_report(report: &InequalityReport) {
    for c in &report.checks {
        let margin = c.worst_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
        println!("{:<14} {:<24} {:<16} worst margin {margin}", c.group, c.name, c.verdict);
    }
}

pub fn verify(config: &RunConfig, trace: Option<&Path>) -> Result<(), CliError> {
    let suite = SuiteConfig {
        families: config.families.clone(),
        checks: config.checks.clone(),
        slack: config.slack,
        budget: config.budget,
    };
    let (report, truncated) = match trace {
        Some(path) => verify_trace(path, &suite)?,
        None => {
            let out = run_suite(&suite)?;
            let truncated = out.truncated();
            (out.report, truncated)
        }
    };
    write_output(&config.out_dir, "report.json", &report.to_json())?;
    write_output(&config.out_dir, "margins.csv", &report.margins_csv())?;
    print_report(&report);
    let violated = report
        .checks
        .iter()
        .filter(|c| c.verdict == walklab::exponents::Verdict::Violated)
        .count();
    if violated > 0 {
        return Err(CliError::Violations(violated));
    }
    if truncated {
        return Err(CliError::Truncated("a walk stopped early on the memory budget".into()));
    }
    Ok(())
}

fn verify_trace(path: &Path, suite: &SuiteConfig) -> Result<(InequalityReport, bool), CliError> {
    let checks = suite.selected_checks()?;
    let spec: GroupSpec = read_header(path)?.group.parse()?;
    let (series, generators, truncated) = with_group!(spec, g => {
        let (trace, extras) = cache_load(path, g)?;
        let series: Option<ObservableSeries> = extras
            .get("observables")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| CliError::Config(format!("stored observables unreadable: {e}")))?;
        (series, trace.group().generators().len(), trace.is_truncated())
    });
    let series = series.ok_or_else(|| {
        CliError::Config(format!("{} holds no observables (write it with `walklab walk`)", path.display()))
    })?;
    let run = FamilyRun {
        data: family_data(spec, generators, series),
        pushforward: None,
        truncated,
    };
    Ok((run_checks(&[run], &checks, suite.slack), truncated))
}

pub fn table(config: &RunConfig) -> Result<(), CliError> {
    let mut unknown = Vec::new();
    for r in &config.rows {
        if !KNOWN_ROWS.iter().any(|k| k.label == *r) {
            unknown.push(format!("{r}: unknown row (not implemented)"));
        }
    }
    let needed: Vec<&str> = KNOWN_ROWS
        .iter()
        .filter(|k| config.rows.is_empty() || config.rows.contains(&k.label))
        .flat_map(|k| k.families.iter().copied())
        .filter(|f| !config.families_explicit || config.families.iter().any(|b| b.spec.to_string() == *f))
        .collect();
    let mut runs = Vec::new();
    for family in needed {
        let spec: GroupSpec = family.parse()?;
        let budget = config
            .families
            .iter()
            .chain(default_budgets().iter())
            .find(|b| b.spec == spec)
            .cloned()
            .expect("default budgets cover every table family");
        log::info!("collecting {} to step {}", budget.spec, budget.last_step);
        runs.push(collect_family(&budget, config.budget, false)?);
    }
    let mut table = exponent_table(&runs, &config.rows, config.slack);
    table.not_implemented.extend(unknown);
    write_output(&config.out_dir, "table.csv", &table.to_csv())?;
    write_output(&config.out_dir, "table.json", &table.to_json())?;
    println!("{} (slack {})", table.label, table.slack);
    for e in &table.entries {
        let fitted = e.fitted.map_or("n/a".to_string(), |f| format!("{f:.3}"));
        println!("{} {:<14} {:<6} known {:.3} fitted {fitted} {}", e.row, e.group, e.quantity, e.known, e.verdict);
    }
    for note in &table.not_implemented {
        println!("{note}");
    }
    if runs.iter().any(|r| r.truncated) {
        return Err(CliError::Truncated("a walk stopped early on the memory budget".into()));
    }
    Ok(())
}

pub fn cache_list(config: &RunConfig) -> Result<(), CliError> {
    for line in cache::list(&config.cache_dir)? {
        println!("{line}");
    }
    Ok(())
}

pub fn cache_clear(config: &RunConfig) -> Result<(), CliError> {
    let n = cache::clear(&config.cache_dir)?;
    println!("removed {n} cache entr{}", if n == 1 { "y" } else { "ies" });
    Ok(())
}
