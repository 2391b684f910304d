mod support;

use walklab::compression::{cocycle_norm_sq, cocycle_weights, CocycleConfig, KnMode};
use walklab::exponents::{check_pushforward_speed, check_trace_invariants, Verdict};
use walklab::group::Lengths;
use walklab::observables::{displacement_norm_sq, gradient_norm_sq, record_step, ObservableSeries};
use walklab::suite::{collect_family, family_data, FamilyBudget};
use walklab::walk::{Retention, StepView};
use walklab::{with_group, FreeAbelian, Group, GroupSpec, MemoryBudget, WalkOptions, WalkTrace, Wreath};

use support::{direct_displacement, direct_gradient, FAMILIES};

fn retained<G: Group>(group: &G, last: usize, watch: Vec<G::Elem>) -> WalkTrace<G> {
    let options = WalkOptions::new(group, last).explicit().retain(Retention::All);
    WalkTrace::run(group.clone(), &options, watch, |_, _| Ok(())).unwrap()
}

#[test]
fn one_step_gradient_on_z() {
    let z = FreeAbelian::new(1);
    let trace = retained(&z, 3, Vec::new());
    // P = ½δ₀ + ¼δ₁ + ¼δ₋₁: four unit-step differences of ¼ per generator
    assert!((gradient_norm_sq(&trace, 1).unwrap() - 0.25).abs() < 1e-15);
    assert!((direct_gradient(&z, trace.measure(1).unwrap()) - 0.25).abs() < 1e-15);
}

#[test]
fn cocycle_norm_matches_direct_sum_on_z() {
    let z = FreeAbelian::new(1);
    let g = z.evaluate_word(&[0, 0, 0, 0]);
    for mode in [KnMode::Identity, KnMode::Window] {
        let config = CocycleConfig::new(0.1, 6, mode).unwrap();
        let mut watch = z.generators();
        watch.push(g.clone());
        let trace = retained(&z, config.required_last_step(), watch);
        let profile = cocycle_weights(&trace, &config).unwrap();
        let direct: f64 = profile
            .terms
            .iter()
            .map(|t| t.weight * direct_displacement(&z, trace.measure(t.k).unwrap(), &g))
            .sum();
        let (exact, _) = cocycle_norm_sq(&profile, &trace, &g).unwrap();
        assert!((exact - direct).abs() < 1e-12 * direct, "{mode:?}: {exact} vs {direct}");
    }
}

fn max_displacement_within_gradient<G: Group>(group: G) {
    let trace = retained(&group, 11, group.generators());
    for n in 1..=5 {
        let grad = gradient_norm_sq(&trace, n).unwrap();
        for s in group.generators() {
            let d = displacement_norm_sq(&trace, n, &s).unwrap();
            assert!(d <= grad * (1.0 + 1e-12), "{} n={n}: {d} > {grad}", group.spec());
        }
    }
}

#[test]
fn generator_displacement_is_bounded_by_the_gradient() {
    for family in FAMILIES {
        let spec: GroupSpec = family.parse().unwrap();
        with_group!(spec, g => max_displacement_within_gradient(g));
    }
}

#[test]
fn cocycle_lower_bound_holds_for_lamplighter() {
    let group = Wreath::lamplighter(2);
    let config = CocycleConfig::new(0.1, 4, KnMode::Window).unwrap();
    let targets: Vec<_> = [vec![0, 2, 0], vec![2], vec![0, 0, 2, 1, 1]]
        .iter()
        .map(|w| group.evaluate_word(w))
        .collect();
    let mut watch = group.generators();
    watch.extend(targets.iter().cloned());
    let trace = retained(&group, config.required_last_step(), watch);
    let profile = cocycle_weights(&trace, &config).unwrap();
    for g in &targets {
        let (exact, lower) = cocycle_norm_sq(&profile, &trace, g).unwrap();
        assert!(exact >= lower * (1.0 - 1e-12), "{g:?}: {exact} < {lower}");
    }
}

#[test]
fn scaled_measures_violate_trace_invariants() {
    let group = FreeAbelian::new(2);
    let mut trace = retained(&group, 6, Vec::new());
    let build = |trace: &WalkTrace<FreeAbelian>| {
        let records = (0..=6)
            .map(|n| {
                let view = StepView::Explicit(trace.measure(n).unwrap());
                record_step(&group, n, view, Some(&Lengths::Closed(&group)), 0.0).unwrap()
            })
            .collect();
        let series = ObservableSeries {
            group: group.spec().to_string(),
            records,
        };
        family_data(group.spec(), 4, series)
    };
    assert_ne!(check_trace_invariants(&build(&trace)).verdict, Verdict::Violated);
    for n in 0..=6 {
        trace.measure_mut(n).unwrap().scale(0.9);
    }
    let faulty = check_trace_invariants(&build(&trace));
    assert_eq!(faulty.verdict, Verdict::Violated);
    assert!(faulty.worst_margin.unwrap() < -0.09);
}

#[test]
fn free_group_speed_dominates_its_projection() {
    let spec: GroupSpec = "free:2".parse().unwrap();
    let run = collect_family(&FamilyBudget::new(spec, 12), MemoryBudget::default(), true).unwrap();
    let push = run.pushforward.expect("free group projects onto Z");
    assert!(push.identity_defect.unwrap() < 1e-12);
    let check = check_pushforward_speed(&push);
    assert_ne!(check.verdict, Verdict::Violated);
    for m in check.margins.iter().filter(|m| m.n >= 2 && m.label.is_empty()) {
        assert!(m.margin > 0.0, "n={} margin {}", m.n, m.margin);
    }
}
