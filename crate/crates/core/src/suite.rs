//! Runs the inequality checks over a set of families and compares fitted
//! exponents with their known asymptotic values.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compression::check_kn_selection;
use crate::error::{Error, Result};
use crate::exponents::{
    check_ave, check_carne_varopoulos, check_speed_entropy, check_dungey, check_entropy_vs_growth,
    check_etagamma, check_return_vs_growth, check_pushforward_speed, check_return_increments, check_subadditivity,
    check_trace_invariants, exponent_chain_report, fit_od_constants, CheckResult, ExponentProxies, FamilyData,
    InequalityReport, PushforwardData, CHAIN_SLACK,
};
use crate::group::{
    compute_ball, FreeAbelian, Group, GroupSpec, GrowthTable, HomDescriptor, Homomorphism, Lengths, MemoryBudget,
    ProjectionToZ,
};
use crate::observables::{observe_walk, speed, ObservableSeries};
use crate::walk::{convolve, lazy_step_measure, Retention, WalkOptions, WalkTrace};

/// Every check the suite knows, in report order.
pub const CHECK_NAMES: [&str; 14] = [
    "trace-invariants",
    "etagamma",
    "carne-varopoulos",
    "dungey",
    "od-fit",
    "ave",
    "entropy-growth",
    "speed-entropy",
    "return-growth",
    "return-increments",
    "subadditivity",
    "kn-selection",
    "pushforward-speed",
    "exponent-chain",
];

/// Longest pushed-forward walk compared against its source.
pub const PUSHFORWARD_STEPS: usize = 20;

/// Steps on which the pushforward identity is checked atom by atom.
const PUSHFORWARD_IDENTITY_STEPS: usize = 6;

/// Walk length for one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyBudget {
    pub spec: GroupSpec,
    /// Last step computed.
    pub last_step: usize,
}

impl FamilyBudget {
    pub fn new(spec: GroupSpec, last_step: usize) -> Self {
        Self { spec, last_step }
    }
}

/// Desk-scale budgets for the five default families.
pub fn default_budgets() -> Vec<FamilyBudget> {
    [("Z^2", 64), ("heisenberg", 64), ("free:2", 24), ("lamplighter:2", 24), ("wreathZZ", 16)]
        .into_iter()
        .map(|(s, n)| FamilyBudget::new(s.parse().expect("valid built-in spec"), n))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub families: Vec<FamilyBudget>,
    /// Subset of [`CHECK_NAMES`]; `None` runs all of them.
    pub checks: Option<Vec<String>>,
    pub slack: f64,
    pub budget: MemoryBudget,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            families: default_budgets(),
            checks: None,
            slack: CHAIN_SLACK,
            budget: MemoryBudget::default(),
        }
    }
}

impl SuiteConfig {
    /// Selected check names in report order; rejects unknown names.
    pub fn selected_checks(&self) -> Result<Vec<&'static str>> {
        match &self.checks {
            None => Ok(CHECK_NAMES.to_vec()),
            Some(list) => {
                if let Some(bad) = list.iter().find(|c| !CHECK_NAMES.contains(&c.as_str())) {
                    return Err(Error::InvalidInput(format!(
                        "unknown check {bad:?}; known checks: {}",
                        CHECK_NAMES.join(", ")
                    )));
                }
                Ok(CHECK_NAMES.iter().copied().filter(|c| list.iter().any(|l| l == c)).collect())
            }
        }
    }
}

/// Everything collected for one family.
#[derive(Clone, Debug)]
pub struct FamilyRun {
    pub data: FamilyData,
    pub pushforward: Option<PushforwardData>,
    /// Whether the walk stopped early on the memory budget.
    pub truncated: bool,
}

/// Builds check inputs from an observable series; growth comes from the
/// last step's sphere counts, which for a lazy walk are the sphere sizes of `B_n`.
pub fn family_data(spec: GroupSpec, generators: usize, series: ObservableSeries) -> FamilyData {
    let growth = series.sphere_counts().map(|c| GrowthTable::from_sphere_counts(&c));
    FamilyData {
        spec,
        generators,
        series,
        growth,
    }
}

/// Walks one family, recording observables and its projection onto ℤ.
pub fn collect_family(budget: &FamilyBudget, memory: MemoryBudget, with_pushforward: bool) -> Result<FamilyRun> {
    crate::with_group!(budget.spec, g => collect_generic(g, budget.last_step, memory, with_pushforward))
}

fn collect_generic<G: Group>(group: G, last_step: usize, memory: MemoryBudget, with_pushforward: bool) -> Result<FamilyRun> {
    let spec = group.spec();
    let generators = group.generators().len();
    let options = WalkOptions::new(&group, last_step).budget(memory);
    let (trace, series) = if group.word_length(&group.identity()).is_some() {
        observe_walk(group.clone(), &options, Vec::new(), Some(&Lengths::Closed(&group)))?
    } else {
        let ball = compute_ball(&group, last_step as u32, memory)?;
        observe_walk(group.clone(), &options, Vec::new(), Some(&Lengths::<G>::Table(&ball)))?
    };
    let truncated = trace.is_truncated();
    let pushforward = match (with_pushforward, descriptor_for(&spec)) {
        (true, Some(d)) => Some(pushforward_data(group, &d, &series, memory)?),
        _ => None,
    };
    Ok(FamilyRun {
        data: family_data(spec, generators, series),
        pushforward,
        truncated,
    })
}

/// The projection onto ℤ used for each family.
pub fn descriptor_for(spec: &GroupSpec) -> Option<HomDescriptor> {
    match spec {
        GroupSpec::Free { .. } => Some(HomDescriptor::KeepGenerator(0)),
        GroupSpec::Lamplighter { .. } | GroupSpec::WreathZZ => Some(HomDescriptor::CursorProjection),
        GroupSpec::FreeAbelian { .. } | GroupSpec::Heisenberg => Some(HomDescriptor::Coordinate(0)),
    }
}

/// Speeds of the walk and of the pushed-forward walk on ℤ, for
/// `n ≤ min(PUSHFORWARD_STEPS, last step)`.
///
/// The target walk is the convolution power of `ψ_*P`; that it equals
/// `ψ_*(P^(n))` is checked atom by atom on the first few steps.
pub fn pushforward_data<G: Group>(
    group: G,
    descriptor: &HomDescriptor,
    series: &ObservableSeries,
    memory: MemoryBudget,
) -> Result<PushforwardData> {
    let source_speeds = series
        .speeds()
        .ok_or_else(|| Error::LengthUnavailable("source speeds unavailable".into()))?;
    let steps = PUSHFORWARD_STEPS.min(series.last_step());
    let psi = ProjectionToZ::new(group.clone(), descriptor)?;
    let z = FreeAbelian::new(1);
    let step = psi.push_forward(&lazy_step_measure(&group, 0.5));
    let mut mu = crate::walk::SparseMeasure::point_mass(z.identity());
    let mut target = Vec::with_capacity(steps + 1);
    let mut target_speeds = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        if n > 0 {
            mu = convolve(&z, &mu, &step, memory)?;
        }
        target_speeds.push(speed(&mu, &Lengths::Closed(&z))?);
        if n <= PUSHFORWARD_IDENTITY_STEPS {
            target.push(mu.clone());
        }
    }
    let small = PUSHFORWARD_IDENTITY_STEPS.min(steps);
    let options = WalkOptions::new(&group, small)
        .explicit()
        .retain(Retention::All)
        .budget(memory);
    let source = WalkTrace::run(group.clone(), &options, Vec::new(), |_, _| Ok(()))?;
    let mut defect: f64 = 0.0;
    for (n, expected) in target.iter().enumerate().take(source.reached() + 1) {
        let measure = source.measure(n).ok_or(Error::MissingStep { step: n, reached: source.reached() })?;
        let pushed = psi.push_forward(measure);
        for (x, p) in pushed.iter().chain(expected.iter()) {
            defect = defect.max((p - expected.get(x)).abs()).max((p - pushed.get(x)).abs());
        }
    }
    Ok(PushforwardData {
        source: group.spec(),
        target: z.spec(),
        description: describe(descriptor),
        source_speeds: source_speeds[..=steps].to_vec(),
        target_speeds,
        identity_defect: Some(defect),
        lipschitz: psi.is_lipschitz_on_generators(),
    })
}

fn describe(d: &HomDescriptor) -> String {
    match d {
        HomDescriptor::KeepGenerator(i) => format!("generator {i} to 1, others to 0"),
        HomDescriptor::CursorProjection => "cursor projection".into(),
        HomDescriptor::Coordinate(i) => format!("abelianization coordinate {i}"),
        HomDescriptor::Images(v) => format!("abelianization images {v:?}"),
    }
}

fn run_check(name: &str, run: &FamilyRun, slack: f64) -> CheckResult {
    let data = &run.data;
    let group = data.spec.to_string();
    match name {
        "trace-invariants" => check_trace_invariants(data),
        "etagamma" => check_etagamma(data),
        "carne-varopoulos" => check_carne_varopoulos(data),
        "dungey" => check_dungey(data),
        "od-fit" => fit_od_constants(data),
        "ave" => check_ave(data),
        "entropy-growth" => check_entropy_vs_growth(data),
        "speed-entropy" => {
            let nu = ExponentProxies::from_data(data).nu.map(|f| f.central);
            check_speed_entropy(data, nu)
        }
        "return-growth" => check_return_vs_growth(data),
        "return-increments" => check_return_increments(data),
        "subadditivity" => check_subadditivity(data),
        "kn-selection" => check_kn_selection(&group, &data.series.returns()),
        "pushforward-speed" => match &run.pushforward {
            Some(p) => check_pushforward_speed(p),
            None => {
                let mut c = CheckResult::new(&group, "pushforward-speed", "speed does not increase under a surjective homomorphism");
                c.notes.push("no projection computed".into());
                c
            }
        },
        "exponent-chain" => exponent_chain_report(&group, &ExponentProxies::from_data(data), slack),
        other => unreachable!("unvalidated check name {other}"),
    }
}

/// Runs the selected checks on collected families; the report lists
/// families in input order and checks in [`CHECK_NAMES`] order.
pub fn run_checks(runs: &[FamilyRun], checks: &[&str], slack: f64) -> InequalityReport {
    let jobs: Vec<(usize, &str)> = (0..runs.len())
        .flat_map(|i| checks.iter().map(move |c| (i, *c)))
        .collect();
    let results = jobs.par_iter().map(|(i, c)| run_check(c, &runs[*i], slack)).collect();
    InequalityReport::new(results)
}

/// Output of [`run_suite`].
#[derive(Clone, Debug)]
pub struct SuiteOutput {
    pub runs: Vec<FamilyRun>,
    pub report: InequalityReport,
}

impl SuiteOutput {
    pub fn truncated(&self) -> bool {
        self.runs.iter().any(|r| r.truncated)
    }
}

/// Collects every family (sequentially, to bound memory) and runs the checks.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutput> {
    let checks = config.selected_checks()?;
    let with_pushforward = checks.contains(&"pushforward-speed");
    let runs = config
        .families
        .iter()
        .map(|b| {
            log::info!("collecting {} to step {}", b.spec, b.last_step);
            collect_family(b, config.budget, with_pushforward)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = run_checks(&runs, &checks, config.slack);
    Ok(SuiteOutput { runs, report })
}

/// One row of the known-exponent table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnownRow {
    pub label: char,
    pub description: &'static str,
    /// `(β, γ, α)` where stated as a single number.
    pub values: Option<(f64, f64, f64)>,
    /// Families standing in for the row.
    pub families: &'static [&'static str],
}

/// Known asymptotic values of speed, return and compression exponents.
pub const KNOWN_ROWS: [KnownRow; 9] = [
    KnownRow { label: 'A', description: "polynomial growth", values: Some((0.5, 0.0, 1.0)), families: &["Z^2", "heisenberg"] },
    KnownRow { label: 'B', description: "polycyclic of exponential growth or F wr Z with F finite", values: Some((0.5, 1.0 / 3.0, 1.0)), families: &["lamplighter:2"] },
    KnownRow { label: 'C', description: "Z wr Z", values: Some((0.75, 1.0 / 3.0, 2.0 / 3.0)), families: &["wreathZZ"] },
    KnownRow { label: 'D', description: "F wr H, F finite or Z, H of polynomial growth d >= 2", values: None, families: &[] },
    KnownRow { label: 'E', description: "H wr Z^2 with H amenable", values: None, families: &[] },
    KnownRow { label: 'F', description: "iterated wreath products of Z", values: None, families: &[] },
    KnownRow { label: 'G', description: "intermediate growth", values: None, families: &[] },
    KnownRow { label: 'H', description: "incompressible amenable groups", values: None, families: &[] },
    KnownRow { label: 'I', description: "property (T) groups", values: None, families: &[] },
];

/// One fitted-versus-known comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub row: String,
    pub group: String,
    pub quantity: String,
    pub known: f64,
    pub fitted: Option<f64>,
    pub difference: Option<f64>,
    /// `within-slack`, `outside-slack` or `not-fitted`.
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub schema_version: u32,
    pub label: String,
    pub slack: f64,
    pub entries: Vec<TableEntry>,
    /// Requested rows with no supported family.
    pub not_implemented: Vec<String>,
}

/// Compares fitted proxies with the known values of the requested rows
/// (all rows when `rows` is empty).
pub fn exponent_table(runs: &[FamilyRun], rows: &[char], slack: f64) -> ExponentTable {
    let mut entries = Vec::new();
    let mut not_implemented = Vec::new();
    for row in KNOWN_ROWS.iter().filter(|r| rows.is_empty() || rows.contains(&r.label)) {
        let Some((beta, gamma, alpha)) = row.values.filter(|_| !row.families.is_empty()) else {
            not_implemented.push(format!("{}: {} (not implemented)", row.label, row.description));
            continue;
        };
        for family in row.families {
            let run = runs.iter().find(|r| r.data.spec.to_string() == *family);
            let proxies = run.map(|r| ExponentProxies::from_data(&r.data)).unwrap_or_default();
            let fitted = |f: &Option<crate::exponents::ExponentFit>| f.as_ref().map(|f| f.central);
            for (quantity, known, fit) in [
                ("beta", beta, fitted(&proxies.beta)),
                ("gamma", gamma, fitted(&proxies.gamma)),
                ("alpha", alpha, None),
            ] {
                let difference = fit.map(|f| (f - known).abs());
                entries.push(TableEntry {
                    row: row.label.to_string(),
                    group: family.to_string(),
                    quantity: quantity.into(),
                    known,
                    fitted: fit,
                    difference,
                    verdict: match difference {
                        None => "not-fitted",
                        Some(d) if d <= slack => "within-slack",
                        Some(_) => "outside-slack",
                    }
                    .into(),
                });
            }
        }
    }
    ExponentTable {
        schema_version: crate::exponents::REPORT_SCHEMA_VERSION,
        label: "asymptotic target, finite-n proxy".into(),
        slack,
        entries,
        not_implemented,
    }
}

impl ExponentTable {
    /// `row, group, quantity, known, fitted, difference, verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,group,quantity,known,fitted,difference,verdict\n");
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.row,
                e.group,
                e.quantity,
                e.known,
                opt(e.fitted),
                opt(e.difference),
                e.verdict
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_selection() {
        let mut config = SuiteConfig {
            checks: Some(vec!["etagamma".into()]),
            ..SuiteConfig::default()
        };
        assert_eq!(config.selected_checks().unwrap(), vec!["etagamma"]);
        config.checks = Some(vec!["nonsense".into()]);
        assert!(config.selected_checks().is_err());
    }

    #[test]
    fn small_suite_on_z2_holds() {
        let config = SuiteConfig {
            families: vec![FamilyBudget::new("Z^2".parse().unwrap(), 16)],
            ..SuiteConfig::default()
        };
        let out = run_suite(&config).unwrap();
        assert_eq!(out.report.checks.len(), CHECK_NAMES.len());
        assert!(!out.report.has_violation(), "{}", out.report.to_json());
    }

    #[test]
    fn unsupported_rows_are_flagged() {
        let table = exponent_table(&[], &['D', 'A'], 0.15);
        assert_eq!(table.not_implemented.len(), 1);
        assert!(table.entries.iter().all(|e| e.fitted.is_none()));
    }
}
