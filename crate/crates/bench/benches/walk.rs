use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use walklab::group::compute_ball;
use walklab::walk::{convolve, lazy_step_measure, WalkOptions};
use walklab::{FreeAbelian, FreeGroup, Group, Heisenberg, MemoryBudget, WalkTrace, Wreath};
use walklab_bench::measure_at;

fn convolution_step<G: Group>(c: &mut Criterion, name: &str, group: G, n: usize) {
    let mu = measure_at(&group, n);
    let step = lazy_step_measure(&group, 0.5);
    c.bench_with_input(BenchmarkId::new("convolve", format!("{name}/n={n}")), &mu, |b, mu| {
        b.iter(|| convolve(&group, black_box(mu), &step, MemoryBudget::default()).unwrap())
    });
}

fn convolution(c: &mut Criterion) {
    convolution_step(c, "Z^2", FreeAbelian::new(2), 64);
    convolution_step(c, "heisenberg", Heisenberg, 16);
    convolution_step(c, "lamplighter:2", Wreath::lamplighter(2), 12);
    convolution_step(c, "wreathZZ", Wreath::integer_lamps(), 8);
}

fn balls(c: &mut Criterion) {
    let mut group = c.benchmark_group("ball");
    group.sample_size(10);
    group.bench_function("heisenberg/r=24", |b| {
        b.iter(|| compute_ball(&Heisenberg, black_box(24), MemoryBudget::default()).unwrap())
    });
    group.bench_function("lamplighter:2/r=14", |b| {
        b.iter(|| compute_ball(&Wreath::lamplighter(2), black_box(14), MemoryBudget::default()).unwrap())
    });
    group.finish();
}

fn radial(c: &mut Criterion) {
    let f2 = FreeGroup::new(2);
    c.bench_function("radial free:2 to step 4096", |b| {
        b.iter(|| {
            let options = WalkOptions::new(&f2, black_box(4096));
            WalkTrace::run(f2, &options, Vec::new(), |_, _| Ok(())).unwrap()
        })
    });
}

criterion_group!(benches, convolution, balls, radial);
criterion_main!(benches);
