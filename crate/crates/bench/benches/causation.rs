use causa::causation::DefinitionId as D;
use causa::sufficiency::{self, SufficiencyKind};
use causa::verify::{self, Group, Mode, ModelFamily, VerifyConfig};
use causa_bench::{cases, load};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn solve(c: &mut Criterion) {
    let doc = load("voting.scm");
    let (m, u) = (&doc.model, &doc.contexts[0].context);
    c.bench_function("solve/voting", |b| b.iter(|| black_box(m.solve(black_box(u)))));
}

fn is_cause(c: &mut Criterion) {
    let mut g = c.benchmark_group("is_cause");
    for (name, case) in cases() {
        let an = case.analyzer();
        for d in [D::Def2, D::Def8, D::OriginalHP, D::ModifiedHP] {
            g.bench_with_input(BenchmarkId::new(d.name(), name), &an, |b, an| b.iter(|| an.is_cause(d, &case.cause, &case.effect).unwrap()));
        }
    }
    g.finish();
}

fn find_all_causes(c: &mut Criterion) {
    let mut g = c.benchmark_group("find_all_causes");
    g.sample_size(20);
    for (name, case) in cases() {
        let an = case.analyzer();
        g.bench_function(name, |b| b.iter(|| an.find_all_causes(D::Def2, &case.effect, 2).unwrap()));
    }
    g.finish();
}

fn strong_sufficiency(c: &mut Criterion) {
    let doc = load("lp.scm");
    let m = &doc.model;
    let x = m.setting([("ST", "1")]).unwrap();
    let y = m.setting([("BS", "1")]).unwrap();
    c.bench_function("sufficiency/strong/lp", |b| b.iter(|| sufficiency::sufficient(m, &x, &y, SufficiencyKind::Strong, None).unwrap()));
}

fn harness(c: &mut Criterion) {
    let family = ModelFamily { non_roots: 1..=2, ..ModelFamily::exhaustive_default() };
    let sampled = ModelFamily { mode: Mode::Sampled { count: 50, seed: 0, ranges: vec![2, 3] }, ..ModelFamily::sampled_default(0) };
    let config = VerifyConfig { families: vec![family, sampled], ..VerifyConfig::standard(0) }.with_groups(&[Group::Equivalence]);
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    g.bench_function("equivalences/small", |b| b.iter(|| verify::run(&config).unwrap()));
    g.finish();
}

criterion_group!(benches, solve, is_cause, find_all_causes, strong_sufficiency, harness);
criterion_main!(benches);
