use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use coresolve::productivity::DEFAULT_BOUND;
use coresolve::testgen::{self, GenConfig};
use coresolve::*;

fn load(name: &str) -> (Program, Query, VarGen) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(format!("{name}.lp"));
    let src = std::fs::read_to_string(path).expect("corpus file");
    let g = VarGen::new();
    let p = parse_program(&src, &g).expect("parses");
    let q = parse_query(declared_query(&src).expect("declared query"), &g).expect("query parses");
    (p, q, g)
}

fn unification(c: &mut Criterion) {
    let mut rng = testgen::rng(1);
    let cfg = GenConfig { max_depth: 5, ..GenConfig::default() };
    let g = VarGen::new();
    let pairs: Vec<(Term, Term)> = (0..256).map(|_| testgen::random_pair(&mut rng, &cfg, &g)).collect();
    let mut group = c.benchmark_group("unify");
    group.bench_function("mgu", |b| {
        b.iter(|| pairs.iter().filter(|(x, y)| !mgu(black_box(x), black_box(y)).is_fail()).count())
    });
    group.bench_function("rational", |b| {
        b.iter(|| pairs.iter().filter(|(x, y)| !rational_unify(black_box(x), black_box(y)).is_fail()).count())
    });
    group.finish();
}

fn decircularization(c: &mut Criterion) {
    let mut rng = testgen::rng(2);
    let g = VarGen::new();
    let s = testgen::random_circular(&mut rng, &GenConfig::default(), &g);
    let t = Term::Var(s.cyclic_vars().into_iter().next().expect("circular"));
    let mut group = c.benchmark_group("unfold");
    for d in [4, 8, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| b.iter(|| unfold(&s, &t, d, &g)));
    }
    group.finish();
}

fn resolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("refute");
    let (p, _, g) = load("nat");
    let q = parse_query("nat(X)", &g).unwrap();
    let lim = Limits { max_answers: 8, ..Limits::default() };
    group.bench_function("nat/sld", |b| b.iter(|| refute(&p, &q.atoms, Mode::Sld, Selector::Leftmost, &lim, &g)));
    group.bench_function("nat/s", |b| b.iter(|| refute(&p, &q.atoms, Mode::S, Selector::Leftmost, &lim, &g)));
    group.finish();

    let mut group = c.benchmark_group("co_refute");
    for name in ["nats", "server", "r"] {
        let (p, q, g) = load(name);
        let lim = Limits::default();
        group.bench_function(name, |b| b.iter(|| co_refute(&p, &q.atoms, CoMode::Restricted, &lim, &g)));
    }
    let (p, q, g) = load("ex52");
    let lim = Limits { max_depth: 32, ..Limits::default() };
    group.bench_function("ex52/diverging", |b| b.iter(|| co_refute(&p, &q.atoms, CoMode::Restricted, &lim, &g)));
    group.finish();
}

fn checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("checks");
    let (p, _, g) = load("fibs");
    group.bench_function("productivity/fibs", |b| b.iter(|| check_productive_default(&p, DEFAULT_BOUND, &g)));
    let (p, q, g) = load("server");
    group.bench_function("validate/server", |b| {
        b.iter(|| check_theorem_5_1(&p, &q.atoms, 8, 16, &Limits::default(), &g).expect("validates"))
    });
    group.finish();
}

criterion_group!(benches, unification, decircularization, resolution, checks);
criterion_main!(benches);
