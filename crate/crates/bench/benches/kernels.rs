use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gsqpe_core::sine::SineTransform;
use gsqpe_core::splitting::SplitPropagator;
use gsqpe_core::{discretize, ground_state, run_qpe, suzuki_schedule, GridSpec, KPolicy, PotentialSpec, QpeConfig, StepPolicy};
use num_complex::Complex64;

fn state(n: usize) -> Vec<Complex64> {
    (0..n).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect()
}

fn sine_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("sine_transform");
    for (d, q) in [(1, 10), (2, 6), (3, 4)] {
        let g = GridSpec::new(d, q).unwrap();
        let mut dst = SineTransform::new(g.m());
        let mut data = state(g.len());
        group.bench_with_input(BenchmarkId::from_parameter(format!("d{d}q{q}")), &d, |b, &d| {
            b.iter(|| dst.transform_axes(&mut data, d))
        });
    }
    group.finish();
}

fn schedule_application(c: &mut Criterion) {
    let mut group = c.benchmark_group("schedule");
    let g = GridSpec::new(2, 5).unwrap();
    let h = discretize(&PotentialSpec::SineBump { amplitude: 0.2 }.build(2).unwrap(), &g).unwrap();
    let mut split = SplitPropagator::new(&h);
    for k in [1, 2] {
        let compiled = split.compile(&suzuki_schedule(k, 1.0, 4).unwrap());
        let mut s = state(h.len());
        group.bench_with_input(BenchmarkId::new("suzuki", k), &k, |b, _| b.iter(|| split.run(&compiled, &mut s).unwrap()));
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_state");
    group.sample_size(10);
    for (d, q) in [(1, 8), (2, 5), (3, 4)] {
        let g = GridSpec::new(d, q).unwrap();
        let h = discretize(&PotentialSpec::LinearMean.build(d).unwrap(), &g).unwrap();
        group.bench_function(format!("d{d}q{q}"), |b| b.iter(|| ground_state(&h).unwrap()));
    }
    group.finish();
}

fn phase_estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("qpe");
    group.sample_size(10);
    let exact = QpeConfig::new(GridSpec::new(1, 8).unwrap(), PotentialSpec::Zero);
    group.bench_function("exact_d1q8b8", |b| b.iter(|| run_qpe(&exact).unwrap()));
    let split = QpeConfig::new(GridSpec::new(2, 3).unwrap(), PotentialSpec::LinearMean)
        .with_clock_bits(5)
        .splitting(KPolicy::Fixed(1), StepPolicy::Fixed(8));
    group.bench_function("splitting_d2q3b5", |b| b.iter(|| run_qpe(&split).unwrap()));
    group.finish();
}

criterion_group!(benches, sine_transform, schedule_application, oracle, phase_estimation);
criterion_main!(benches);
