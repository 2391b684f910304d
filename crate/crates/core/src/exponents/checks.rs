use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::hull::{interpolate, ConcaveHull};
use super::{fit_exponents, ExponentFit};
use crate::group::{GroupSpec, GrowthTable};
use crate::observables::ObservableSeries;

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Allowance for floating-point error in additive and log-ratio margins.
pub const FLOAT_TOL: f64 = 1e-9;

/// Default absolute slack when comparing fitted exponents.
pub const CHAIN_SLACK: f64 = 0.15;

/// The Carne-Varopoulos constants used throughout: `P^(n)(g) ≤ 2 e^{−|g|²/2n}`.
pub const CV_N: f64 = 2.0;
pub const CV_M: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    HoldsWithinTol,
    Violated,
    Skipped,
    Informational,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinTol => "holds-within-tol",
            Verdict::Violated => "violated",
            Verdict::Skipped => "skipped",
            Verdict::Informational => "informational",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One point of a check's margin series; negative means the inequality fails there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginPoint {
    pub n: usize,
    pub label: String,
    pub margin: f64,
}

/// Outcome of one named check on one group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub group: String,
    pub name: String,
    pub anchor: String,
    pub verdict: Verdict,
    pub worst_margin: Option<f64>,
    pub worst_n: Option<usize>,
    pub fitted_constants: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub margins: Vec<MarginPoint>,
}

impl CheckResult {
    pub(crate) fn new(group: &str, name: &str, anchor: &str) -> Self {
        Self {
            group: group.to_string(),
            name: name.to_string(),
            anchor: anchor.to_string(),
            verdict: Verdict::Skipped,
            worst_margin: None,
            worst_n: None,
            fitted_constants: BTreeMap::new(),
            notes: Vec::new(),
            margins: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, n: usize, label: impl Into<String>, margin: f64) {
        self.margins.push(MarginPoint {
            n,
            label: label.into(),
            margin,
        });
    }

    pub(crate) fn constant(&mut self, key: &str, value: f64) {
        self.fitted_constants.insert(key.to_string(), value);
    }

    /// Sets the worst margin and derives the verdict with tolerance `tol`.
    pub(crate) fn conclude(mut self, tol: f64) -> Self {
        let worst = self
            .margins
            .iter()
            .filter(|m| !m.margin.is_nan())
            .min_by(|a, b| a.margin.total_cmp(&b.margin));
        let nan = self.margins.iter().any(|m| m.margin.is_nan());
        match worst {
            None if !nan => {
                self.verdict = Verdict::Skipped;
                self.notes.push("no data points in range".into());
            }
            _ => {
                if let Some(w) = worst {
                    self.worst_margin = Some(w.margin);
                    self.worst_n = Some(w.n);
                }
                let min = worst.map_or(f64::NAN, |w| w.margin);
                self.verdict = if nan || min < -tol {
                    Verdict::Violated
                } else if min < 0.0 {
                    Verdict::HoldsWithinTol
                } else {
                    Verdict::Holds
                };
                if nan {
                    self.notes.push("a margin evaluated to NaN".into());
                }
            }
        }
        self
    }

    fn informational(mut self) -> Self {
        if let Some(w) = self
            .margins
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
        {
            self.worst_margin = Some(w.margin);
            self.worst_n = Some(w.n);
        }
        self.verdict = Verdict::Informational;
        self
    }

    pub(crate) fn skipped(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Skipped;
        self.notes.push(why.into());
        self
    }
}

/// Named checks plus metadata, serialized as the verification report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: u32,
    pub checks: Vec<CheckResult>,
}

impl InequalityReport {
    pub fn new(checks: Vec<CheckResult>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            checks,
        }
    }

    /// Whether some non-informational check failed.
    pub fn has_violation(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Violated)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `group, check, n, label, margin` for every margin point.
    pub fn margins_csv(&self) -> String {
        let mut out = String::from("group,check,n,label,margin\n");
        for c in &self.checks {
            for m in &c.margins {
                let _ = writeln!(out, "{},{},{},{},{}", c.group, c.name, m.n, m.label, m.margin);
            }
        }
        out
    }
}

/// Everything the pointwise checks need about one group.
#[derive(Clone, Debug)]
pub struct FamilyData {
    pub spec: GroupSpec,
    pub generators: usize,
    pub series: ObservableSeries,
    pub growth: Option<GrowthTable>,
}

impl FamilyData {
    fn name(&self) -> String {
        self.spec.to_string()
    }
}

/// Mass, symmetry and support invariants of every recorded step.
pub fn check_trace_invariants(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "trace-invariants", "walk measure invariants");
    for r in &data.series.records {
        let allowance = r.n.max(1) as f64 * 1e-14;
        c.push(r.n, "mass", allowance - (1.0 - r.pruned_mass - r.mass).abs());
        c.push(r.n, "symmetry", 1e-13 - r.symmetry_defect);
        if !r.spheres.is_empty() {
            c.push(r.n, "support-in-ball", r.n as f64 + 1.0 - r.spheres.len() as f64);
        }
        c.push(r.n, "return-positive", r.return_prob);
    }
    c.conclude(0.0)
}

/// `H(P^(n)) ≥ −ln P^(2n)(e)`.
pub fn check_etagamma(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "etagamma", "entropy bounds return probability (Avez)");
    let rec = &data.series.records;
    for n in 0..rec.len() {
        if 2 * n >= rec.len() {
            break;
        }
        c.push(n, "", rec[n].entropy + rec[2 * n].return_prob.ln());
    }
    c.conclude(FLOAT_TOL)
}

/// Iterates `(n, r, max_{|g|=r} P^(n)(g), P^(n)(e))` over nonempty spheres, `n ≥ 1`.
fn sphere_points(series: &ObservableSeries) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
    series.records.iter().filter(|r| r.n >= 1).flat_map(|r| {
        r.spheres
            .iter()
            .enumerate()
            .filter(|(_, s)| s.count > 0 && s.max > 0.0)
            .map(move |(radius, s)| (r.n, radius, s.max, r.return_prob))
    })
}

fn has_spheres(data: &FamilyData) -> bool {
    data.series.records.iter().any(|r| !r.spheres.is_empty())
}

const NO_SPHERES: &str = "word lengths unavailable, no sphere profile";

/// `P^(n)(g) ≤ N e^{−M|g|²/n}` with `(N, M) = (2, ½)`, as a log-ratio margin.
pub fn check_carne_varopoulos(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "carne-varopoulos", "Carne-Varopoulos Gaussian bound");
    if !has_spheres(data) {
        return c.skipped(NO_SPHERES);
    }
    c.constant("N", CV_N);
    c.constant("M", CV_M);
    for (n, r, max, _) in sphere_points(&data.series) {
        let log_bound = CV_N.ln() - CV_M * (r * r) as f64 / n as f64;
        c.push(n, format!("r={r}"), log_bound - max.ln());
    }
    c.conclude(FLOAT_TOL)
}

/// Epsilon grid of the interpolated bound.
pub const DUNGEY_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// `P^(n)(g) ≤ P^(n)(e)^{1−ε} N^ε e^{−εM|g|²/n}` on the ε grid.
pub fn check_dungey(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "dungey", "Dungey interpolated off-diagonal bound");
    if !has_spheres(data) {
        return c.skipped(NO_SPHERES);
    }
    let mut worst_per_eps = [f64::INFINITY; DUNGEY_GRID.len()];
    for (n, r, max, pe) in sphere_points(&data.series) {
        for (i, &eps) in DUNGEY_GRID.iter().enumerate() {
            let log_bound = (1.0 - eps) * pe.ln() + eps * CV_N.ln() - eps * CV_M * (r * r) as f64 / n as f64;
            let m = log_bound - max.ln();
            worst_per_eps[i] = worst_per_eps[i].min(m);
            c.push(n, format!("eps={eps},r={r}"), m);
        }
    }
    for (eps, w) in DUNGEY_GRID.iter().zip(worst_per_eps) {
        if w.is_finite() {
            c.constant(&format!("worst_margin_eps_{eps}"), w);
        }
    }
    c.conclude(FLOAT_TOL)
}

/// Largest `M` with `P^(n)(g) ≤ 2 P^(n)(e) e^{−M|g|²/n}` over the computed range.
pub fn fit_od_constants(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "od-fit", "off-diagonal estimate (OD), diagnostic");
    if !has_spheres(data) {
        return c.skipped(NO_SPHERES);
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (n, r, max, pe) in sphere_points(&data.series) {
        if r == 0 {
            continue;
        }
        let m = n as f64 / (r * r) as f64 * ((CV_N * pe).ln() - max.ln());
        c.push(n, format!("r={r}"), m);
        if best.is_none_or(|(b, _, _)| m < b) {
            best = Some((m, n, r));
        }
    }
    c.constant("N", CV_N);
    if let Some((m, n, r)) = best {
        c.constant("M_hat", m);
        c.constant("binding_n", n as f64);
        c.constant("binding_radius", r as f64);
    }
    if data.series.last_step() <= 1 {
        c.notes.push("degenerate window: a single step".into());
    }
    c.informational()
}

/// `H(P^(n)) ≥ ln N + (M/n)(𝔼|P^(n)|)²` with `(N, M) = (2, ½)`, `n ≥ 1`.
///
/// The Gaussian bound alone gives the weaker `−ln N + …`; its worst margin is
/// reported alongside.
pub fn check_ave(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "ave", "entropy-speed bound from the Gaussian estimate");
    let mut derived = f64::INFINITY;
    for r in data.series.records.iter().filter(|r| r.n >= 1) {
        let Some(speed) = r.speed else { continue };
        let quad = CV_M / r.n as f64 * speed * speed;
        c.push(r.n, "", r.entropy - CV_N.ln() - quad);
        derived = derived.min(r.entropy + CV_N.ln() - quad);
    }
    if derived.is_finite() {
        c.constant("worst_margin_minus_ln_n_form", derived);
    }
    c.conclude(FLOAT_TOL)
}

/// `H(P^(n)) ≤ L + 4 f_V(𝔼|P^(n)|)` for groups of at least quadratic growth.
///
/// `L = ln Σ_{k≤R} |B_k|⁻¹` is the normalizing constant of the comparison
/// measure truncated at the table radius `R`; the bound is exact for `n ≤ R`
/// since then `P^(n)` lives in `B_R`. `f_V` is interpolated linearly.
pub fn check_entropy_vs_growth(data: &FamilyData) -> CheckResult {
    let c = CheckResult::new(&data.name(), "entropy-growth", "entropy bounded by volume growth at the speed");
    let Some(growth) = &data.growth else {
        return c.skipped("no ball table");
    };
    if !growth.at_least_degree(2.0) {
        return c.skipped(format!(
            "growth below quadratic (local degree {:.2}); hypothesis unmet",
            growth.local_degree().unwrap_or(f64::NAN)
        ));
    }
    let mut c = c;
    let radius = growth.radius_max();
    let inv_sum: f64 = growth.ball_sizes.iter().map(|&b| 1.0 / b as f64).sum();
    let l = inv_sum.ln();
    c.constant("L", l);
    c.constant("L1", 1.0 / inv_sum);
    c.constant("radius_max", radius as f64);
    let hull = ConcaveHull::of_values(&growth.growth_log);
    let mut intermediate = f64::INFINITY;
    for r in data.series.records.iter().filter(|r| r.n >= 1 && r.n <= radius) {
        let Some(speed) = r.speed else { continue };
        if speed > radius as f64 {
            continue;
        }
        c.push(r.n, "", l + 4.0 * interpolate(&growth.growth_log, speed) - r.entropy);
        intermediate = intermediate.min(l + 2.0 * hull.eval(speed) - r.entropy);
    }
    if intermediate.is_finite() {
        c.constant("worst_margin_hull_form", intermediate);
    }
    c.conclude(FLOAT_TOL)
}

/// Speed bound `𝔼|P^(n)| ≤ K' n^{1/(2−ν̂)}` with fitted `K'`, and the exact
/// `P^(2n)(e)·e^{H(P^(n))} ≥ 1`, which decides the verdict.
pub fn check_speed_entropy(data: &FamilyData, nu: Option<f64>) -> CheckResult {
    let mut c = CheckResult::new(
        &data.name(),
        "speed-entropy",
        "speed and return probability from volume growth",
    );
    let rec = &data.series.records;
    for n in 0..rec.len() {
        if 2 * n >= rec.len() {
            break;
        }
        c.push(n, "return-entropy", rec[2 * n].return_prob.ln() + rec[n].entropy);
    }
    match (nu, data.series.speeds()) {
        (Some(nu), Some(speeds)) => {
            let exponent = 1.0 / (2.0 - nu);
            let k = (1..speeds.len())
                .map(|n| speeds[n] / (n as f64).powf(exponent))
                .fold(0.0, f64::max);
            c.constant("nu_hat", nu);
            c.constant("speed_exponent", exponent);
            c.constant("K_prime", k);
            if nu >= 0.95 {
                c.notes.push("fitted growth exponent near 1: speed bound uninformative".into());
            }
        }
        _ => c.notes.push("speed bound not fitted (growth or speed unavailable)".into()),
    }
    c.conclude(FLOAT_TOL)
}

/// Lower bound on return probability from growth, for at least cubic growth.
///
/// Verifies that `k ↦ k²/g(k)` is strictly increasing for the concave hull
/// `g` of `f_V` (and the chain of inequalities behind it), then fits
/// `(K'', L'')` in `P^(n)(e) ≥ K'' |B_{F(L''n)}|⁻² F(L''n)⁻¹`, `F` the inverse
/// of `k²/g(k)`.
pub fn check_return_vs_growth(data: &FamilyData) -> CheckResult {
    let c = CheckResult::new(&data.name(), "return-growth", "return probability bounded below by growth");
    let Some(growth) = &data.growth else {
        return c.skipped("no ball table");
    };
    if !growth.at_least_degree(3.0) {
        return c.skipped(format!(
            "growth below cubic (local degree {:.2}); hypothesis unmet",
            growth.local_degree().unwrap_or(f64::NAN)
        ));
    }
    let mut c = c;
    let hull = ConcaveHull::of_values(&growth.growth_log);
    let g = hull.values();
    for k in 1..g.len() - 1 {
        let (a, b) = (k as f64, (k + 1) as f64);
        c.push(k, "ratio-increase", b * b / g[k + 1] - a * a / g[k]);
        c.push(k, "increment-chain", (2.0 * a + 1.0) * g[k] - a * a * (g[k + 1] - g[k]));
    }
    // strictness: a zero increment is a failure
    let strict_failure = c.margins.iter().any(|m| m.margin <= 0.0);

    let returns = data.series.returns();
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for j in -8..=8 {
        let l2 = 2f64.powf(j as f64 / 2.0);
        let mut logs = Vec::new();
        for (n, &p) in returns.iter().enumerate().skip(1) {
            let Some(x) = hull.inverse_square_ratio(l2 * n as f64) else { continue };
            let log_shape = -2.0 * interpolate(&growth.growth_log, x) - x.ln();
            logs.push(p.ln() - log_shape);
        }
        if logs.len() < 3 {
            continue;
        }
        let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if best.is_none_or(|(spread, ..)| hi - lo < spread) {
            best = Some((hi - lo, l2, lo.exp(), logs.len()));
        }
    }
    match best {
        Some((spread, l2, k2, points)) => {
            c.constant("L_double_prime", l2);
            c.constant("K_double_prime", k2);
            c.constant("log_spread", spread);
            c.constant("points", points as f64);
        }
        None => c.notes.push("too few steps inside the inverse range to fit (K'', L'')".into()),
    }
    let mut c = c.conclude(0.0);
    if strict_failure {
        c.verdict = Verdict::Violated;
    }
    c
}

/// `F(n) = −ln P^(2n)(e)` is nondecreasing with nonincreasing increments.
pub fn check_return_increments(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "return-increments", "log-convexity of even return probabilities");
    let returns = data.series.returns();
    let f: Vec<f64> = returns.iter().step_by(2).map(|p| -p.ln()).collect();
    for n in 0..f.len().saturating_sub(1) {
        c.push(n, "monotone", f[n + 1] - f[n]);
        if n + 2 < f.len() {
            c.push(n, "increments", (f[n + 1] - f[n]) - (f[n + 2] - f[n + 1]));
        }
    }
    c.conclude(1e-12)
}

/// Subadditivity of entropy and speed, and `𝔼|P^(n)| ≤ n`.
pub fn check_subadditivity(data: &FamilyData) -> CheckResult {
    let mut c = CheckResult::new(&data.name(), "subadditivity", "subadditivity of entropy and speed");
    let h = data.series.entropies();
    let speeds = data.series.speeds();
    let len = h.len();
    for total in 2..len {
        let worst_h = (1..total)
            .map(|n| h[n] + h[total - n] - h[total])
            .fold(f64::INFINITY, f64::min);
        c.push(total, "entropy", worst_h);
        if let Some(s) = &speeds {
            let worst_s = (1..total)
                .map(|n| s[n] + s[total - n] - s[total])
                .fold(f64::INFINITY, f64::min);
            c.push(total, "speed", worst_s);
        }
    }
    if let Some(s) = &speeds {
        for (n, v) in s.iter().enumerate() {
            c.push(n, "lipschitz", n as f64 - v);
        }
    }
    c.conclude(1e-10)
}

/// Exact speeds of a walk and of its image under a surjection onto another group.
#[derive(Clone, Debug)]
pub struct PushforwardData {
    pub source: GroupSpec,
    pub target: GroupSpec,
    pub description: String,
    pub source_speeds: Vec<f64>,
    pub target_speeds: Vec<f64>,
    /// Largest atom difference between `ψ_*(P^(n))` and `(ψ_*P)^(n)` where both were computed.
    pub identity_defect: Option<f64>,
    pub lipschitz: bool,
}

/// `𝔼|P^(n)| ≥ 𝔼|P'^(n)|` for the pushed-forward walk.
pub fn check_pushforward_speed(data: &PushforwardData) -> CheckResult {
    let mut c = CheckResult::new(
        &data.source.to_string(),
        "pushforward-speed",
        "speed does not increase under a surjective homomorphism",
    );
    c.notes.push(format!("{} onto {}", data.description, data.target));
    if !data.lipschitz {
        return c.skipped("homomorphism is not 1-Lipschitz on generators");
    }
    for (n, (a, b)) in data.source_speeds.iter().zip(&data.target_speeds).enumerate() {
        c.push(n, "", a - b);
    }
    if let Some(d) = data.identity_defect {
        c.constant("pushforward_identity_defect", d);
        c.push(0, "pushforward-identity", 1e-12 - d);
    }
    c.conclude(1e-10)
}

/// Exponent proxies of one group.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExponentProxies {
    pub gamma: Option<ExponentFit>,
    pub nu: Option<ExponentFit>,
    pub eta: Option<ExponentFit>,
    pub beta: Option<ExponentFit>,
}

impl ExponentProxies {
    /// Fits `−ln P^(n)(e)`, `ln |B_n|`, `H(P^(n))` and `𝔼|P^(n)|`.
    pub fn from_data(data: &FamilyData) -> Self {
        let returns: Vec<f64> = data.series.returns().iter().map(|p| -p.ln()).collect();
        Self {
            gamma: fit_exponents(&returns).ok(),
            nu: data.growth.as_ref().and_then(|g| fit_exponents(&g.growth_log).ok()),
            eta: fit_exponents(&data.series.entropies()).ok(),
            beta: data.series.speeds().and_then(|s| fit_exponents(&s).ok()),
        }
    }
}

/// Pairwise relations among the exponent proxies, each with a slack.
///
/// Verdicts are informational: the fits stand in for limits.
pub fn exponent_chain_report(group: &str, proxies: &ExponentProxies, slack: f64) -> CheckResult {
    let mut c = CheckResult::new(group, "exponent-chain", "relations among growth, return, entropy and speed exponents");
    let central = |f: &Option<ExponentFit>| f.as_ref().map(|f| f.central);
    let (g, v, h, b) = (
        central(&proxies.gamma),
        central(&proxies.nu),
        central(&proxies.eta),
        central(&proxies.beta),
    );
    for (key, fit) in [("gamma", g), ("nu", v), ("eta", h), ("beta", b)] {
        if let Some(x) = fit {
            c.constant(key, x);
        }
    }
    c.constant("slack", slack);
    let relations: Vec<(&str, Option<(f64, f64)>)> = vec![
        ("beta <= (1+eta)/2", b.zip(h).map(|(b, h)| (b, (1.0 + h) / 2.0))),
        ("nu/(2+nu) <= gamma", v.zip(g).map(|(v, g)| (v / (2.0 + v), g))),
        ("gamma <= eta", g.zip(h)),
        ("eta <= beta*nu", h.zip(b.zip(v)).map(|(h, (b, v))| (h, b * v))),
        ("beta*nu <= nu/(2-nu)", b.zip(v).map(|(b, v)| (b * v, v / (2.0 - v)))),
        ("beta <= 1/(2-nu)", b.zip(v).map(|(b, v)| (b, 1.0 / (2.0 - v)))),
    ];
    for (i, (label, pair)) in relations.into_iter().enumerate() {
        match pair {
            Some((lhs, rhs)) => {
                let margin = rhs - lhs;
                c.push(i, label, margin);
                if margin < -slack {
                    c.notes.push(format!("inconsistent beyond slack: {label} (margin {margin:.3})"));
                }
            }
            None => c.notes.push(format!("not evaluated: {label}")),
        }
    }
    c.informational()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeAbelian, Lengths};
    use crate::observables::observe_walk;
    use crate::walk::WalkOptions;

    fn z_family(dim: u32, steps: usize) -> FamilyData {
        let z = FreeAbelian::new(dim);
        let (_, series) =
            observe_walk(z, &WalkOptions::new(&z, steps), Vec::new(), Some(&Lengths::Closed(&z))).unwrap();
        let growth = GrowthTable::from_sphere_counts(&series.sphere_counts().unwrap());
        FamilyData {
            spec: GroupSpec::FreeAbelian { dim },
            generators: 2 * dim as usize,
            series,
            growth: Some(growth),
        }
    }

    #[test]
    fn pointwise_checks_hold_on_z2() {
        let data = z_family(2, 24);
        for c in [
            check_trace_invariants(&data),
            check_etagamma(&data),
            check_carne_varopoulos(&data),
            check_dungey(&data),
            check_ave(&data),
            check_entropy_vs_growth(&data),
            check_return_increments(&data),
            check_subadditivity(&data),
            check_speed_entropy(&data, Some(0.1)),
        ] {
            assert!(
                matches!(c.verdict, Verdict::Holds | Verdict::HoldsWithinTol),
                "{} {:?} {:?}",
                c.name,
                c.verdict,
                c.worst_margin
            );
        }
        assert_eq!(check_return_vs_growth(&data).verdict, Verdict::Skipped);
    }

    #[test]
    fn linear_growth_skips_entropy_growth() {
        let data = z_family(1, 40);
        assert_eq!(check_entropy_vs_growth(&data).verdict, Verdict::Skipped);
        let od = fit_od_constants(&data);
        assert!(od.fitted_constants["M_hat"] > 0.0);
    }

    #[test]
    fn identity_pushforward_has_zero_margin() {
        let speeds = vec![0.0, 0.5, 0.75];
        let data = PushforwardData {
            source: GroupSpec::FreeAbelian { dim: 1 },
            target: GroupSpec::FreeAbelian { dim: 1 },
            description: "identity".into(),
            source_speeds: speeds.clone(),
            target_speeds: speeds,
            identity_defect: None,
            lipschitz: true,
        };
        let c = check_pushforward_speed(&data);
        assert_eq!(c.worst_margin, Some(0.0));
        assert_eq!(c.verdict, Verdict::Holds);
    }

    #[test]
    fn synthetic_linear_chain() {
        let lin: Vec<f64> = (0..=64).map(|n| n as f64).collect();
        let proxies = ExponentProxies {
            eta: fit_exponents(&lin).ok(),
            ..Default::default()
        };
        assert!((proxies.eta.as_ref().unwrap().central - 1.0).abs() < 1e-12);
        let c = exponent_chain_report("synthetic", &proxies, CHAIN_SLACK);
        assert_eq!(c.verdict, Verdict::Informational);
    }
}
