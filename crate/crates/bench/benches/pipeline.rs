//! Benchmarks for the hot paths: linearized assembly, the full
//! certification pipeline, the dense inverse oracle, and the nonlinear
//! solve.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use monofem::{
    assemble_linearized, fiedler_ptak_certify, monotone_oracle, solve_picard, CertifyOptions,
    OracleMode, SolveOptions,
};
use monofem_bench::standard_case;

fn bench_assembly(c: &mut Criterion) {
    let (mesh, spec, u1, u2) = standard_case(24);
    c.bench_function("assemble_linearized n=24 (529 unknowns)", |b| {
        b.iter(|| {
            black_box(
                assemble_linearized(black_box(&mesh), &spec, &u1, &u2).unwrap(),
            )
        })
    });
}

fn bench_certify(c: &mut Criterion) {
    let (mesh, spec, u1, u2) = standard_case(16);
    let opts = CertifyOptions {
        oracle: OracleMode::Never,
        ..CertifyOptions::default()
    };
    c.bench_function("fiedler_ptak_certify n=16 (225 unknowns)", |b| {
        b.iter(|| {
            black_box(
                fiedler_ptak_certify(black_box(&mesh), &spec, &u1, &u2, &opts).unwrap(),
            )
        })
    });
}

fn bench_oracle(c: &mut Criterion) {
    let (mesh, spec, u1, u2) = standard_case(12);
    let system = assemble_linearized(&mesh, &spec, &u1, &u2).unwrap();
    c.bench_function("monotone_oracle n=12 (121 unknowns)", |b| {
        b.iter(|| black_box(monotone_oracle(black_box(&system.matrix))))
    });
}

fn bench_solve(c: &mut Criterion) {
    let (mesh, spec, _, _) = standard_case(16);
    let opts = SolveOptions::default();
    c.bench_function("solve_picard n=16 (225 unknowns)", |b| {
        b.iter(|| black_box(solve_picard(black_box(&mesh), &spec, &opts).unwrap()))
    });
}

criterion_group!(benches, bench_assembly, bench_certify, bench_oracle, bench_solve);
criterion_main!(benches);
