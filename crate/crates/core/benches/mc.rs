use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use me_kit::algebra::sdc;
use me_kit::metrics::{optimize_rate, Link, OptimizeMetric};
use me_kit::oracle::{mc_metric, Exec, McScenario, RngConfig};
use me_kit::{MeDist, RationalLt};
use std::hint::black_box;

fn oscillatory() -> MeDist {
    MeDist::from_rational_lt(&RationalLt::new(vec![50.0], vec![50.0, 52.0, 3.0]).unwrap()).unwrap()
}

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc_harq3");
    g.sample_size(10);
    let sc = McScenario::HarqTruncated { d: sdc(3, 5.0).unwrap(), link: Link::absolute(1.0), k: 3 };
    for (name, exec) in MODES {
        let cfg = RngConfig { seed: 1, n: 500_000, exec };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(mc_metric(&sc, cfg).unwrap()))
        });
    }
    g.finish();
}

fn rate_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimize_harq_persistent");
    g.sample_size(10);
    let d_um = oscillatory().unit_mean().unwrap();
    let thetas: Vec<f64> = (1..=200).map(|i| 0.01 * i as f64).collect();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(optimize_rate(&d_um, &OptimizeMetric::HarqPersistent, &thetas, exec).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, rate_sweep);
criterion_main!(benches);
