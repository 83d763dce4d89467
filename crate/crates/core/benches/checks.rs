use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use csys::checker::{suite_c0_c, suite_congruence, suite_prop_pullback};
use csys::congruence::RelationSeed;
use csys::instances::{FamilyCS, Fragment, FragmentConfig};
use csys::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn fragment_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("fragment_build");
    let cs = FamilyCS::context(&[2, 2]).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "context_2_2/L2"), |b| {
            b.iter(|| Fragment::build(&cs, FragmentConfig::with_max_len(2), exec))
        });
    }
    group.finish();
}

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    let ctx = FamilyCS::context(&[2]).unwrap();
    let uni = FamilyCS::universe(&[1, 2]).unwrap();
    for (name, exec) in MODES {
        let frag = Fragment::build(&ctx, FragmentConfig::with_max_len(3), exec);
        group.bench_function(BenchmarkId::new("c0_c", name), |b| {
            b.iter(|| black_box(suite_c0_c(&ctx, &frag)))
        });
        let frag = Fragment::build(&uni, FragmentConfig::with_max_len(2), exec);
        group.bench_function(BenchmarkId::new("prop_pullback", name), |b| {
            b.iter(|| black_box(suite_prop_pullback(&uni, &frag)))
        });
    }
    group.finish();
}

fn congruence(c: &mut Criterion) {
    let mut group = c.benchmark_group("congruence");
    group.sample_size(10);
    let cs = FamilyCS::context(&[2, 2]).unwrap();
    for (name, exec) in MODES {
        let frag = Fragment::build(&cs, FragmentConfig::with_max_len(2), exec);
        group.bench_function(BenchmarkId::new("discrete", name), |b| {
            b.iter(|| black_box(suite_congruence(&cs, &RelationSeed::default(), &frag).report))
        });
    }
    group.finish();
}

criterion_group!(benches, fragment_build, suites, congruence);
criterion_main!(benches);
