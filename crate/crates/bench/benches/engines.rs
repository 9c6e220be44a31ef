//! Throughput benchmarks for the hot paths: canonicalization, the
//! first-order recursion, partition sweeps, and the matrix kernels.

use criterion::{criterion_group, criterion_main, Criterion};
use deltadist::expr::{parse_polynomial, Alphabet, DeltaMonomial};
use deltadist::first_order::{Evaluator, FirstOrderState};
use deltadist::graph::law::WignerEntryLaw;
use deltadist::graph::limits::limit_covariance;
use deltadist::graph::moments::{exact_moment, LawSet};
use deltadist::graph::partitions::SetPartitions;
use deltadist::mc::ensemble::{sample_wigner, EntryLawKind};
use std::hint::black_box;

fn mono(text: &str) -> DeltaMonomial {
    parse_polynomial(text, &Alphabet::permissive())
        .unwrap()
        .as_single_monomial()
        .unwrap()
        .clone()
}

fn bench_normalize(c: &mut Criterion) {
    let text = "x1*D[D[x1^2*y1]*y1*D[x2*D[y1]*x2]]*x1^3*D[y1*x1]";
    c.bench_function("parse_and_normalize", |b| {
        b.iter(|| parse_polynomial(black_box(text), &Alphabet::permissive()).unwrap())
    });
}

fn bench_first_order(c: &mut Criterion) {
    let state = FirstOrderState::new();
    let p = parse_polynomial("x1^12", &Alphabet::permissive()).unwrap();
    c.bench_function("phi_x12_cold", |b| {
        b.iter(|| {
            let mut ev = Evaluator::new(&state);
            black_box(ev.eval(black_box(&p)).unwrap())
        })
    });
}

fn bench_partition_sweep(c: &mut Criterion) {
    let laws = LawSet::uniform(WignerEntryLaw::quaternary(12));
    let m = mono("x1^8");
    c.bench_function("exact_moment_deg8", |b| {
        b.iter(|| black_box(exact_moment(black_box(&m), &laws, 14).unwrap()))
    });
    let m1 = mono("x1^4*x2");
    let m2 = mono("x2*x1^4");
    c.bench_function("limit_covariance_deg10", |b| {
        b.iter(|| black_box(limit_covariance(&m1, &m2, &laws, 14).unwrap()))
    });
}

fn bench_partitions(c: &mut Criterion) {
    c.bench_function("enumerate_bell_11", |b| {
        b.iter(|| {
            let mut parts = SetPartitions::new(11);
            let mut count = 0u64;
            while parts.advance() {
                count += 1;
            }
            black_box(count)
        })
    });
}

fn bench_matrix(c: &mut Criterion) {
    let x = sample_wigner(EntryLawKind::ComplexGaussian, 1, 256, 1, 0);
    c.bench_function("hermitian_square_256", |b| {
        b.iter(|| black_box(x.mul_commuting_hermitian(&x)))
    });
    c.bench_function("sample_wigner_256", |b| {
        let mut r = 0u32;
        b.iter(|| {
            r += 1;
            black_box(sample_wigner(EntryLawKind::ComplexGaussian, 1, 256, 1, r))
        })
    });
}

criterion_group!(
    benches,
    bench_normalize,
    bench_first_order,
    bench_partition_sweep,
    bench_partitions,
    bench_matrix
);
criterion_main!(benches);
