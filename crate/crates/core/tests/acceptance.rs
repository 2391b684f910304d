//! Acceptance suite: one PASS/FAIL line per criterion.

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walklab::compression::{run_compression, sphere_points, CocycleConfig, KnMode};
use walklab::exponents::{fit_exponents, ConcaveHull, Verdict};
use walklab::group::compute_ball;
use walklab::observables::{displacement_norm_sq, gradient_norm_sq};
use walklab::suite::{run_suite, SuiteConfig, SuiteOutput};
use walklab::walk::{rational_walk, to_f64, Retention, WalkOptions, WalkTrace};
use walklab::{with_group, FreeAbelian, Group, GroupSpec, MemoryBudget, Result};

use support::{direct_displacement, direct_gradient, peak_rss_bytes, random_element, FAMILIES};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> (bool, String) {
    (elapsed.as_secs() < limit_s, format!("{:.1}s of {limit_s}s", elapsed.as_secs_f64()))
}

fn identities_on<G: Group>(group: G) -> Result<(f64, f64)> {
    let options = WalkOptions::new(&group, 11).explicit().retain(Retention::All);
    let trace = WalkTrace::run(group.clone(), &options, Vec::new(), |_, _| Ok(()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut disp_err, mut grad_err): (f64, f64) = (0.0, 0.0);
    for n in 0..=5 {
        let mu = trace.measure(n).expect("retained");
        for _ in 0..50 {
            let g = random_element(&group, &mut rng, 2 * n + 2);
            let err = (displacement_norm_sq(&trace, n, &g)? - direct_displacement(&group, mu, &g)).abs();
            disp_err = disp_err.max(err);
        }
        grad_err = grad_err.max((gradient_norm_sq(&trace, n)? - direct_gradient(&group, mu)).abs());
    }
    Ok((disp_err, grad_err))
}

fn criterion_identities() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for family in FAMILIES {
        let spec: GroupSpec = family.parse().unwrap();
        match with_group!(spec, g => identities_on(g)) {
            Ok((d, g)) => {
                worst = worst.max(d).max(g);
                notes.push(format!("{family} {:.1e}", d.max(g)));
            }
            Err(e) => return outcome(false, format!("{family}: {e}")),
        }
    }
    let (fast, time) = within(start.elapsed(), 60);
    outcome(
        worst <= 1e-10 && fast,
        format!("max abs error {worst:.2e} (tol 1e-10) [{}]; {time}", notes.join(", ")),
    )
}

fn oracle_on<G: Group>(group: G) -> Result<f64> {
    let exact = rational_walk(&group, 8);
    let options = WalkOptions::new(&group, 8).explicit().retain(Retention::All);
    let trace = WalkTrace::run(group, &options, Vec::new(), |_, _| Ok(()))?;
    let mut worst: f64 = 0.0;
    for (n, q) in exact.iter().enumerate() {
        let mu = trace.measure(n).expect("retained");
        if mu.len() != q.len() {
            return Ok(f64::INFINITY);
        }
        for (g, p) in q {
            let want = to_f64(p);
            worst = worst.max((mu.get(g) - want).abs() / want);
        }
    }
    Ok(worst)
}

fn criterion_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for family in FAMILIES {
        let spec: GroupSpec = family.parse().unwrap();
        match with_group!(spec, g => oracle_on(g)) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return outcome(false, format!("{family}: {e}")),
        }
    }
    let (fast, time) = within(start.elapsed(), 120);
    outcome(
        worst <= 1e-12 && fast,
        format!("max relative atom error {worst:.2e} (tol 1e-12), supports equal; {time}"),
    )
}

const POINTWISE: [&str; 9] = [
    "speed-entropy",
    "carne-varopoulos",
    "dungey",
    "ave",
    "entropy-growth",
    "return-growth",
    "pushforward-speed",
    "return-increments",
    "trace-invariants",
];

fn criterion_pointwise(suite: &SuiteOutput, elapsed: Duration) -> Outcome {
    let mut failures = Vec::new();
    let mut evaluated = 0;
    for c in suite.report.checks.iter().filter(|c| POINTWISE.contains(&c.name.as_str())) {
        match c.verdict {
            Verdict::Violated => failures.push(format!("{} on {} (margin {:?} at n={:?})", c.name, c.group, c.worst_margin, c.worst_n)),
            Verdict::Skipped => {}
            _ => evaluated += 1,
        }
    }
    let etagamma_violations = suite
        .report
        .checks
        .iter()
        .filter(|c| c.name == "etagamma" && c.verdict == Verdict::Violated)
        .count();
    let pushforwards: Vec<String> = suite
        .runs
        .iter()
        .filter_map(|r| r.pushforward.as_ref())
        .map(|p| format!("{}:{}", p.source, p.source_speeds.len() - 1))
        .collect();
    let rss = peak_rss_bytes();
    let mem_ok = rss.is_none_or(|b| b < 4 << 30);
    let (fast, time) = within(elapsed, 600);
    let truncated = suite.truncated();
    let pass = failures.is_empty() && etagamma_violations == 0 && mem_ok && fast && !truncated;
    outcome(
        pass,
        format!(
            "{evaluated} checks evaluated, violations: [{}]; pushforward steps {}; peak RSS {}; {time}{}",
            failures.join("; "),
            pushforwards.join(", "),
            rss.map_or("unavailable".into(), |b| format!("{:.2} GiB", b as f64 / (1u64 << 30) as f64)),
            if truncated { "; a walk was truncated" } else { "" }
        ),
    )
}

fn criterion_kn(suite: &SuiteOutput) -> Outcome {
    let checks: Vec<_> = suite.report.checks.iter().filter(|c| c.name == "kn-selection").collect();
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| matches!(c.verdict, Verdict::Violated | Verdict::Skipped))
        .map(|c| format!("{} {:?}", c.group, c.verdict))
        .collect();
    let constants: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.3}", c.group, c.fitted_constants.get("observed_constant").copied().unwrap_or(f64::NAN)))
        .collect();
    outcome(
        bad.is_empty() && checks.len() == FAMILIES.len(),
        format!("observed constants (stated 8): {}; failing: [{}]", constants.join(", "), bad.join(", ")),
    )
}

fn criterion_compression() -> Outcome {
    let start = Instant::now();
    let z = FreeAbelian::new(1);
    let k_max = 32;
    let config = CocycleConfig::new(0.1, 4 * k_max * k_max, KnMode::Window).unwrap();
    let run = (|| {
        let ball = compute_ball(&z, k_max as u32, MemoryBudget::default())?;
        let spheres = sphere_points(&ball, k_max, usize::MAX, 0)?;
        let watch: Vec<_> = spheres.iter().flat_map(|s| s.points.clone()).collect();
        let options = WalkOptions::new(&z, config.required_last_step());
        let trace = WalkTrace::run(z, &options, watch, |_, _| Ok(()))?;
        run_compression(&trace, &config, &spheres)
    })();
    let run = match run {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let slope = run.estimate.slope.unwrap_or(f64::NAN);
    let (fast, time) = within(start.elapsed(), 180);
    outcome(
        slope >= 0.75 && fast,
        format!(
            "slope of ln rho_minus over k in [{}, {}] = {slope:.4} (threshold 0.75); lower bound excess {:.1e}; {time}",
            run.estimate.fit_window.0, run.estimate.fit_window.1, run.estimate.lower_bound_excess
        ),
    )
}

fn central(suite: &SuiteOutput, family: &str, pick: fn(&walklab::exponents::ExponentProxies) -> Option<f64>) -> Option<f64> {
    let run = suite.runs.iter().find(|r| r.data.spec.to_string() == family)?;
    pick(&walklab::exponents::ExponentProxies::from_data(&run.data))
}

fn criterion_exponents(suite: &SuiteOutput) -> Outcome {
    let beta = |p: &walklab::exponents::ExponentProxies| p.beta.as_ref().map(|f| f.central);
    let gamma = |p: &walklab::exponents::ExponentProxies| p.gamma.as_ref().map(|f| f.central);
    let z2 = central(suite, "Z^2", beta);
    let strict = z2.is_some_and(|b| (0.45..=0.55).contains(&b));
    let mut warnings = Vec::new();
    let mut report = vec![format!("Z^2 beta {:.3}", z2.unwrap_or(f64::NAN))];
    for (family, lo, hi) in [("lamplighter:2", 0.40, 0.65), ("wreathZZ", 0.55, 0.90)] {
        let b = central(suite, family, beta).unwrap_or(f64::NAN);
        report.push(format!("{family} beta {b:.3}"));
        if !(lo..=hi).contains(&b) {
            warnings.push(format!("{family} beta outside [{lo}, {hi}]"));
        }
    }
    let (gz, gl) = (
        central(suite, "Z^2", gamma).unwrap_or(f64::NAN),
        central(suite, "lamplighter:2", gamma).unwrap_or(f64::NAN),
    );
    report.push(format!("gamma Z^2 {gz:.3} vs lamplighter:2 {gl:.3}"));
    if gz.partial_cmp(&gl) != Some(std::cmp::Ordering::Less) {
        warnings.push("gamma ordering not observed".into());
    }
    outcome(
        strict,
        format!("{}; warnings: [{}]", report.join(", "), warnings.join("; ")),
    )
}

fn criterion_calibration() -> Outcome {
    let mut worst_fit: f64 = 0.0;
    for c in [0.25, 0.5, 0.75, 1.0] {
        let f: Vec<f64> = (0..=512).map(|n| (n as f64).powf(c)).collect();
        worst_fit = worst_fit.max((fit_exponents(&f).unwrap().central - c).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hull_ok = true;
    for _ in 0..100 {
        let f = random_subadditive(&mut rng, 200);
        let g = ConcaveHull::of_values(&f).values();
        for n in 0..f.len() {
            if f[n] > g[n] + 1e-12 || g[n] > 2.0 * f[n] + 1e-12 {
                hull_ok = false;
            }
        }
    }
    outcome(
        worst_fit <= 1e-6 && hull_ok,
        format!("max fit error {worst_fit:.1e} (tol 1e-6); hull within [f, 2f] on 100 series: {hull_ok}"),
    )
}

/// A nonnegative combination of step functions `⌈n/k⌉`, jumps `1_{n ≥ 1}` and
/// concave powers, each nondecreasing and subadditive with value 0 at 0.
fn random_subadditive(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    use rand::Rng;
    let step = rng.random_range(1..20usize);
    let (a, b, c) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
    let p = rng.random_range(0.1..1.0);
    (0..len)
        .map(|n| {
            let jump = if n > 0 { b } else { 0.0 };
            a * n.div_ceil(step) as f64 + jump + c * (n as f64).powf(p)
        })
        .collect()
}

fn criterion_determinism(first: &SuiteOutput) -> Outcome {
    match run_suite(&SuiteConfig::default()) {
        Ok(second) => {
            let (a, b) = (first.report.to_json(), second.report.to_json());
            outcome(a == b, format!("{} bytes per report, identical: {}", a.len(), a == b))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    let mut outcomes: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!("{} criterion {n} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        outcomes.push((n, name, o));
    };
    report(1, "identity-suite", criterion_identities());
    report(2, "oracle-equivalence", criterion_oracle());
    let start = Instant::now();
    let suite = run_suite(&SuiteConfig::default());
    let elapsed = start.elapsed();
    match &suite {
        Ok(s) => {
            report(3, "pointwise-inequalities", criterion_pointwise(s, elapsed));
            report(4, "kn-selection", criterion_kn(s));
        }
        Err(e) => {
            report(3, "pointwise-inequalities", outcome(false, e.to_string()));
            report(4, "kn-selection", outcome(false, e.to_string()));
        }
    }
    report(5, "compression-on-z", criterion_compression());
    match &suite {
        Ok(s) => report(6, "exponent-proxies", criterion_exponents(s)),
        Err(e) => report(6, "exponent-proxies", outcome(false, e.to_string())),
    }
    report(7, "synthetic-calibration", criterion_calibration());
    match &suite {
        Ok(s) => report(8, "determinism", criterion_determinism(s)),
        Err(e) => report(8, "determinism", outcome(false, e.to_string())),
    }
    let failed = outcomes.iter().filter(|(_, _, o)| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
