use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use statemetric::linalg::{eigh, solve_lp};
use statemetric::resistance::{effective_resistance, resistance_table};
use statemetric::{dual_norm, difference, state_metric, SeminormSpec, DEFAULT_TOL};
use statemetric_bench::{dirac_on_matrices, dirac_on_points, network, random_lp, state_pair, symmetric};

fn bench_eigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for n in [4, 8, 16, 32] {
        let a = symmetric(n, 0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| eigh(black_box(a)).unwrap()));
    }
    group.finish();
}

fn bench_lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_lp");
    for (vars, rows) in [(4, 16), (8, 40), (16, 100)] {
        let p = random_lp(vars, rows, 0);
        group.bench_with_input(BenchmarkId::new("vars", vars), &p, |b, p| b.iter(|| solve_lp(black_box(p)).unwrap()));
    }
    group.finish();
}

fn bench_dirac(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirac_state_metric");
    group.sample_size(20);
    for (name, spec) in [
        ("points3", dirac_on_points(3, 0)),
        ("points6", dirac_on_points(6, 0)),
        ("matrices2", dirac_on_matrices(2, 0)),
        ("matrices3", dirac_on_matrices(3, 0)),
    ] {
        let (mu, nu) = state_pair(spec.shape(), 0);
        group.bench_function(name, |b| b.iter(|| state_metric(&spec, &mu, &nu, DEFAULT_TOL).unwrap()));
    }
    group.finish();
}

fn bench_resistance(c: &mut Criterion) {
    let mut group = c.benchmark_group("resistance");
    for n in [4, 8, 12] {
        let g = network(n, 0);
        group.bench_with_input(BenchmarkId::new("pair", n), &g, |b, g| {
            b.iter(|| effective_resistance(black_box(g), 0, n - 1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("table", n), &g, |b, g| b.iter(|| resistance_table(black_box(g)).unwrap()));
        let spec = SeminormSpec::Resistance(g.clone());
        let (mu, nu) = state_pair(spec.shape(), 0);
        let lambda = difference(&mu, &nu).unwrap();
        group.bench_with_input(BenchmarkId::new("dual_norm", n), &spec, |b, spec| {
            b.iter(|| dual_norm(spec, black_box(&lambda), DEFAULT_TOL).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_eigh, bench_lp, bench_dirac, bench_resistance);
criterion_main!(benches);
