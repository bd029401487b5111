use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sketchls_bench::{gaussian_problem, sparse_problem};
use sketchls_core::embed::{build_sketch, exact_distortion, fwht};
use sketchls_core::solvers::{solve, SketchedOnly, SolveOptions, Unsketched};
use sketchls_core::{SketchKind, SolverKind, StoppingPolicy};

fn bench_fwht(c: &mut Criterion) {
    let mut g = c.benchmark_group("fwht");
    for len in [1 << 10, 1 << 14, 1 << 18] {
        let v: Vec<f64> = (0..len).map(|i| (i as f64).sin()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(len), &v, |b, v| {
            b.iter(|| {
                let mut w = v.clone();
                fwht(&mut w).unwrap();
                black_box(w)
            })
        });
    }
    g.finish();
}

fn bench_sketch_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("sketch_apply");
    let p = sparse_problem(20_000, 200, 10, 1);
    let d = 400;
    for kind in SketchKind::RANDOM {
        let s = build_sketch(kind, d, p.m(), 1).unwrap();
        g.bench_function(BenchmarkId::new("matrix_20000x200", kind.as_str()), |b| {
            b.iter(|| black_box(s.apply_matrix(&p.a).unwrap()))
        });
        g.bench_function(BenchmarkId::new("vector_20000", kind.as_str()), |b| {
            b.iter(|| black_box(s.apply_vec(&p.b).unwrap()))
        });
    }
    g.finish();
}

fn bench_distortion(c: &mut Criterion) {
    let p = gaussian_problem(2000, 50, 2);
    let s = build_sketch(SketchKind::Srht, 100, p.m(), 2).unwrap();
    c.bench_function("exact_distortion_2000x50", |b| {
        b.iter(|| black_box(exact_distortion(&s, &p.a, &p.b).unwrap()))
    });
}

fn bench_solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    let p = gaussian_problem(4000, 100, 3);
    let s = build_sketch(SketchKind::Srht, 200, p.m(), 3).unwrap();
    let sp = s.sketch_problem(&p.a, &p.b).unwrap();
    let norm_a = p.a.spectral_norms().unwrap().norm;
    let policy = StoppingPolicy::never();
    for solver in SolverKind::ALL {
        g.bench_function(BenchmarkId::new("sketched_only", solver.as_str()), |b| {
            b.iter(|| {
                black_box(
                    solve(solver, &sp.sa, &sp.sb, &mut SketchedOnly, &policy, &SolveOptions::default())
                        .unwrap(),
                )
            })
        });
        g.bench_function(BenchmarkId::new("unsketched_observer", solver.as_str()), |b| {
            b.iter(|| {
                let mut obs = Unsketched::new(&p.a, &p.b, norm_a, 1);
                black_box(solve(solver, &sp.sa, &sp.sb, &mut obs, &policy, &SolveOptions::default()).unwrap())
            })
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_fwht, bench_sketch_apply, bench_distortion, bench_solvers
}
criterion_main!(benches);
