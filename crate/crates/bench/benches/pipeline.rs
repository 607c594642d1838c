use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ebv_bench::corpus_units;
use ebv_core::frontend::{load_units, parse, resolve_and_typecheck};
use ebv_core::pogen::{gen_project_pos, PoOptions};
use ebv_core::smt::emit;

fn pipeline(c: &mut Criterion) {
    for unit in corpus_units() {
        let name = unit.path.rsplit('/').next().unwrap_or(&unit.path).trim_end_matches(".eb").to_string();
        let mut g = c.benchmark_group(name);
        g.bench_function("parse", |b| b.iter(|| parse(black_box(&unit))));
        let (decls, _) = parse(&unit);
        g.bench_function("resolve", |b| b.iter(|| resolve_and_typecheck(black_box(&decls))));
        let (model, _) = load_units(std::slice::from_ref(&unit));
        g.bench_function("generate", |b| b.iter(|| gen_project_pos(black_box(&model), PoOptions::default())));
        let pos = gen_project_pos(&model, PoOptions::default());
        g.bench_function("emit", |b| b.iter(|| pos.iter().map(emit).count()));
        g.finish();
    }
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
