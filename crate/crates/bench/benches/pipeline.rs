use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use trimmed_iga::analysis::{discretize, CaseKind, RunSettings};
use trimmed_iga::assembly::assemble_problem;
use trimmed_iga::solver::solve;
use trimmed_iga::{BasisValues, TensorBSplineSpace};
use trimmed_iga_bench::{circle, sample_points};

fn basis(c: &mut Criterion) {
    let pts = sample_points(1000);
    let mut g = c.benchmark_group("basis_eval");
    for p in [2, 3, 4] {
        let space = TensorBSplineSpace::uniform(2, p, 32);
        g.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            let mut out = BasisValues::default();
            b.iter(|| {
                for x in &pts {
                    space.eval_into(space.find_element(x), x, &mut out);
                    black_box(&out);
                }
            })
        });
    }
    g.finish();
}

fn reparam(c: &mut Criterion) {
    let case = CaseKind::Poisson2d.build();
    let mut g = c.benchmark_group("discretize_circle_64");
    g.sample_size(20);
    for r in [1, 2, 3] {
        let s = RunSettings::new(3, r);
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, _| {
            b.iter(|| black_box(discretize(&case, 64, &s).unwrap()))
        });
    }
    g.finish();
}

fn assemble_and_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("circle_p2_64");
    g.sample_size(10);
    let (case, disc) = circle(2, 64);
    g.bench_function("assemble", |b| b.iter(|| black_box(assemble_problem(&disc, &case.problem).unwrap())));
    let sys = assemble_problem(&disc, &case.problem).unwrap();
    g.bench_function("solve", |b| b.iter(|| black_box(solve(&sys).unwrap())));
    g.finish();
}

criterion_group!(benches, basis, reparam, assemble_and_solve);
criterion_main!(benches);
