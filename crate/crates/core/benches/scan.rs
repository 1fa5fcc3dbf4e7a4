//! Scan throughput, parallel reduction against the sequential twin.
//!
//! The heavy loop is the per-scale sweep that scores every window triple, so
//! that is what gets benched: one mid-depth scale on its own, then the full
//! first pass over all scales. Run with `--no-default-features` to bench the
//! build without the rayon dependency at all.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use slscan::{
    default_lambda2, first_pass_max, first_pass_max_sequential, gen_ar1, scan_scale,
    scan_scale_sequential, Ar1Params, CovarianceKernel, DetectionConfig, SeriesMatrix,
    SparsityWeights, WindowSchedule,
};

fn panel(n: usize, t_len: usize) -> SeriesMatrix {
    let params = Ar1Params::new(0.0, 0.3, 1.0).unwrap();
    gen_ar1(&params, n, t_len, 42, None).unwrap()
}

fn config(n: usize, t_len: usize) -> DetectionConfig {
    DetectionConfig {
        threshold: f64::INFINITY,
        weights: SparsityWeights::new(1.0, default_lambda2(t_len).unwrap(), n).unwrap(),
        kernel: CovarianceKernel::stationary_ar1(0.3, 1.0).unwrap(),
        schedule: WindowSchedule::geometric(t_len, 1.1).unwrap(),
        start_scale: 1,
    }
}

fn bench_scan_scale(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_scale");
    for &(n, t_len) in &[(20usize, 500usize), (100, 1000)] {
        let data = panel(n, t_len);
        let cfg = config(n, t_len);
        // a scale deep enough to have real arms but a still-dense grid
        let scale = cfg.schedule.deepest_scale(t_len) / 2;
        let triples = cfg.schedule.triples(scale, t_len).len() as u64;
        group.throughput(Throughput::Elements(triples * n as u64));
        group.bench_with_input(
            BenchmarkId::new("parallel", format!("{n}x{t_len}")),
            &(&data, &cfg, scale),
            |b, (data, cfg, scale)| {
                b.iter(|| scan_scale(data, cfg, *scale, 1, t_len).unwrap())
            },
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", format!("{n}x{t_len}")),
            &(&data, &cfg, scale),
            |b, (data, cfg, scale)| {
                b.iter(|| scan_scale_sequential(data, cfg, *scale, 1, t_len).unwrap())
            },
        );
    }
    group.finish();
}

fn bench_first_pass(c: &mut Criterion) {
    let mut group = c.benchmark_group("first_pass");
    group.sample_size(10);
    for &(n, t_len) in &[(20usize, 500usize), (100, 1000)] {
        let data = panel(n, t_len);
        let cfg = config(n, t_len);
        group.bench_with_input(
            BenchmarkId::new("parallel", format!("{n}x{t_len}")),
            &(&data, &cfg),
            |b, (data, cfg)| b.iter(|| first_pass_max(data, cfg).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", format!("{n}x{t_len}")),
            &(&data, &cfg),
            |b, (data, cfg)| b.iter(|| first_pass_max_sequential(data, cfg).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_scan_scale, bench_first_pass);
criterion_main!(benches);
