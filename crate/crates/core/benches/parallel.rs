//! Rayon fan-out against the sequential fallback on the same workloads.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ratmodel::cdga::cohomology;
use ratmodel::fixtures::{circle_system, cpn, suspension_system};
use ratmodel::localsys::global_sections;
use ratmodel::par;
use ratmodel::polyforms::ComplexForms;
use ratmodel::simplicial::SimplicialComplexK;
use ratmodel::specseq::{pages, skeletal_filtration};

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", false), ("sequential", true)]
}

fn run<R>(seq: bool, f: impl FnOnce() -> R) -> R {
    if seq {
        par::sequential(f)
    } else {
        f()
    }
}

fn forms_on_product(c: &mut Criterion) {
    let base = SimplicialComplexK::full_simplex(2);
    let x = SimplicialComplexK::product(&base, &SimplicialComplexK::boundary_of_simplex(2));
    let mut group = c.benchmark_group("forms dga on a product");
    group.sample_size(10);
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(seq, || ComplexForms::new(black_box(&x), 2, 3).unwrap().dga().dims()))
        });
    }
    group.finish();
}

fn sections(c: &mut Criterion) {
    let m = cpn(1, 5);
    let (_, fp) = suspension_system(&SimplicialComplexK::cycle(3), &m, 1, 1, 4).unwrap();
    let e = fp.system().clone();
    let mut group = c.benchmark_group("global sections of a suspension system");
    group.sample_size(10);
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run(seq, || global_sections(black_box(&e), 4).unwrap().dims())));
    }
    group.finish();
}

fn spectral_pages(c: &mut Criterion) {
    let e = circle_system(true, 2, 5).unwrap();
    let mut group = c.benchmark_group("skeletal spectral sequence");
    group.sample_size(10);
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                run(seq, || {
                    let fc = skeletal_filtration(black_box(&e), 4).unwrap();
                    pages(&fc, 3).unwrap().infinity.total(2)
                })
            })
        });
    }
    group.finish();
}

fn algebra_cohomology(c: &mut Criterion) {
    let a = cpn(3, 14);
    let mut group = c.benchmark_group("cohomology with products");
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run(seq, || cohomology(black_box(&a), 13).unwrap().dims())));
    }
    group.finish();
}

criterion_group!(benches, forms_on_product, sections, spectral_pages, algebra_cohomology);
criterion_main!(benches);
