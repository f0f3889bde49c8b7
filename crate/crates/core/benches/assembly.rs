use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use std::sync::Arc;
use thinplate::fem2d::{Domain, PlateSystem};
use thinplate::fundsol::SingularBasis;
use thinplate::green::green_bundle;
use thinplate::material::{make_isotropic, reduce_stiffness};
use thinplate::par;

fn modes() -> [(&'static str, bool); 2] {
    [("sequential", false), ("parallel", true)]
}

fn plate_assembly(c: &mut Criterion) {
    let a0 = reduce_stiffness(&make_isotropic(1.0, 1.0).unwrap()).unwrap();
    let mut group = c.benchmark_group("plate_system");
    group.sample_size(10);
    for h in [0.1, 0.05] {
        for (name, on) in modes() {
            group.bench_with_input(BenchmarkId::new(name, h), &h, |b, &h| {
                par::set_parallel(on);
                b.iter(|| PlateSystem::build(&Domain::unit_disk(), black_box(h), &a0).unwrap());
            });
        }
    }
    group.finish();
    par::set_parallel(true);
}

fn green_functions(c: &mut Criterion) {
    let a0 = reduce_stiffness(&make_isotropic(1.0, 1.0).unwrap()).unwrap();
    let basis = Arc::new(SingularBasis::new(&a0).unwrap());
    let system = PlateSystem::build(&Domain::unit_disk(), 0.08, &a0).unwrap();
    let mut group = c.benchmark_group("green_bundle");
    group.sample_size(10);
    for (name, on) in modes() {
        group.bench_function(name, |b| {
            par::set_parallel(on);
            b.iter(|| green_bundle(black_box(&system), &basis).unwrap());
        });
    }
    group.finish();
    par::set_parallel(true);
}

criterion_group!(benches, plate_assembly, green_functions);
criterion_main!(benches);
