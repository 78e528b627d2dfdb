use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use privstate_bench::pair;
use privstate_core::measures;
use privstate_core::opt;
use privstate_core::qudit::{self, BellIndex};
use privstate_core::states::{KA, KB, SA, SB};
use privstate_core::{Family, OptConfig};

fn bnot_sweep(c: &mut Criterion) {
    c.bench_function("bnot_sweep_d3", |b| {
        let m = qudit::bnot_matrix(3);
        b.iter(|| {
            let mut worst = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            let (c, t) = (BellIndex { i, j }, BellIndex { i: k, j: l });
                            let v = qudit::bell_vector(3, c).kronecker(&qudit::bell_vector(3, t));
                            let (c2, t2) = qudit::bnot_rule(3, c, t);
                            let w = qudit::bell_vector(3, c2).kronecker(&qudit::bell_vector(3, t2));
                            worst = worst.max(privstate_core::linalg::pure_trace_distance(&w, &(&m * v)));
                        }
                    }
                }
            }
            black_box(worst)
        })
    });
}

fn log_negativity(c: &mut Criterion) {
    let (g, _) = pair(Family::Swap, 6);
    c.bench_function("log_negativity_swap_d6", |b| {
        b.iter(|| measures::log_negativity(black_box(&g), &[KB, SB]).unwrap())
    });
}

fn relative_entropy(c: &mut Criterion) {
    let (g, hat) = pair(Family::Swap, 4);
    c.bench_function("relative_entropy_swap_d4", |b| {
        b.iter(|| measures::relative_entropy(black_box(&g), black_box(&hat)).unwrap())
    });
}

fn optimizer_restart(c: &mut Criterion) {
    let (g, hat) = pair(Family::Swap, 2);
    let cfg = OptConfig { restarts: 1, max_evals: 500, ..OptConfig::default() };
    let mut group = c.benchmark_group("optimizer");
    group.sample_size(10);
    group.bench_function("single_restart_swap_d2", |b| {
        b.iter(|| opt::optimize_da(&g, &hat, &[KA, SA], &cfg).unwrap().best)
    });
    group.finish();
}

criterion_group!(benches, bnot_sweep, log_negativity, relative_entropy, optimizer_restart);
criterion_main!(benches);
