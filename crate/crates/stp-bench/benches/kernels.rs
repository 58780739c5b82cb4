//! Benchmarks of the four hot kernels: dense lattice convolution,
//! characteristic-function evaluation, Gil–Pelaez grid evaluation, and
//! Monte Carlo sampling.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use stp_core::lattice::{merge_cap, sum_law};
use stp_core::mc::{simulate, SimConfig};
use stp_core::semistable::{charfn_w, charfn_wj, wj_grid};

fn bench_dense_convolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense_convolution");
    g.sample_size(10);
    for n in [64u64, 256] {
        g.bench_function(format!("sum_law_n{n}"), |b| {
            b.iter(|| black_box(sum_law(black_box(n), merge_cap(n, 400))))
        });
    }
    g.finish();
}

fn bench_charfn(c: &mut Criterion) {
    c.bench_function("charfn_w_gamma075", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 1..=256 {
                let t = i as f64 * 0.125;
                acc += black_box(charfn_w(0.75, t, 1e-9)).norm();
            }
            acc
        })
    });
    c.bench_function("charfn_wj_j0", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 1..=256 {
                let t = i as f64 * 0.125;
                acc += black_box(charfn_wj(0, 1.0, t, 1e-9)).norm();
            }
            acc
        })
    });
}

fn bench_inversion(c: &mut Criterion) {
    let grid = wj_grid(0, 1.0, 32.0, 1e-7);
    c.bench_function("grid_cdf_at_64pts", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..64 {
                acc += grid.cdf_at(black_box(-2.0 + 0.5 * i as f64)).value;
            }
            acc
        })
    });
}

fn bench_mc(c: &mut Criterion) {
    c.bench_function("simulate_n128_reps10k", |b| {
        b.iter_batched(
            || SimConfig {
                n: 128,
                reps: 10_000,
                seed: 1,
                bins: 16,
            },
            |cfg| black_box(simulate(&cfg)),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_dense_convolution,
    bench_charfn,
    bench_inversion,
    bench_mc
);
criterion_main!(benches);
