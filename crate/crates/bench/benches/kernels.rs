use std::hint::black_box;

use clifftest::commutant::{enumerate_sd, gram_weingarten, unitary_partial_transpose};
use clifftest::densesim::{char_dist_state, char_dist_unitary, f_stab};
use clifftest::gf2::{rank, rref};
use clifftest::norms::qk_norm;
use clifftest::testers::pacc_exact;
use clifftest_bench::{bit_matrix, state, unitary};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn gf2(c: &mut Criterion) {
    let mut g = c.benchmark_group("gf2");
    for size in [8, 16, 24] {
        let m = bit_matrix(size, size);
        g.bench_with_input(BenchmarkId::new("rref", size), &m, |b, m| b.iter(|| rref(black_box(m))));
        g.bench_with_input(BenchmarkId::new("rank", size), &m, |b, m| b.iter(|| rank(black_box(m))));
    }
    g.finish();
}

fn distributions(c: &mut Criterion) {
    let mut g = c.benchmark_group("char_dist");
    for n in [2, 4, 6] {
        let psi = state(n);
        g.bench_with_input(BenchmarkId::new("state", n), &psi, |b, p| b.iter(|| char_dist_state(p).unwrap()));
    }
    for n in [1, 2] {
        let u = unitary(n);
        g.bench_with_input(BenchmarkId::new("unitary", n), &u, |b, u| b.iter(|| char_dist_unitary(u).unwrap()));
    }
    g.finish();
}

fn fidelity_and_acceptance(c: &mut Criterion) {
    let mut g = c.benchmark_group("testers");
    for n in [2, 3, 4] {
        let psi = state(n);
        g.bench_with_input(BenchmarkId::new("f_stab", n), &psi, |b, p| b.iter(|| f_stab(p).unwrap()));
    }
    for n in [1, 2, 3] {
        let u = unitary(n);
        g.bench_with_input(BenchmarkId::new("pacc", n), &u, |b, u| b.iter(|| pacc_exact(u).unwrap()));
        g.bench_with_input(BenchmarkId::new("qk_norm_3", n), &u, |b, u| b.iter(|| qk_norm(u, 3).unwrap()));
    }
    g.finish();
}

fn commutant(c: &mut Criterion) {
    let mut g = c.benchmark_group("commutant");
    let codes = enumerate_sd(4).unwrap();
    g.bench_function("partial_transpose_all_sd8", |b| {
        b.iter(|| {
            for code in &codes {
                black_box(unitary_partial_transpose(code).unwrap());
            }
        })
    });
    for (n, t) in [(1, 4), (2, 4), (1, 5)] {
        g.bench_function(BenchmarkId::new("gram_weingarten", format!("n{n}_t{t}")), |b| {
            b.iter(|| gram_weingarten(n, t).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, gf2, distributions, fidelity_and_acceptance, commutant);
criterion_main!(benches);
