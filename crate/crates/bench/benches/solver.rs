use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use popolo_core::elements::ElemSet;
use popolo_core::intersection::{lex_max_common_independent, LevelWeights};
use popolo_core::oracle::{generate, margin, GeneratorSpec, PrefMode};
use popolo_core::solver::{solve, Multichain, SolveOutcome};

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for agents in [6usize, 10, 14] {
        let inst = generate(&GeneratorSpec::Random {
            seed: 7,
            agents,
            extra_edges: 2 * agents,
            prefs: PrefMode::Weak,
            root_reachable: true,
        })
        .unwrap()
        .instance;
        group.bench_with_input(BenchmarkId::from_parameter(agents), &inst, |b, inst| {
            b.iter(|| solve(inst));
        });
    }
    group.finish();
}

fn bench_lex_max(c: &mut Criterion) {
    let inst = generate(&GeneratorSpec::Random {
        seed: 11,
        agents: 12,
        extra_edges: 24,
        prefs: PrefMode::Strict,
        root_reachable: true,
    })
    .unwrap()
    .instance;
    let ground = inst.ground_size();
    // A three-level chain: first-choice span, everything non-root, all.
    let chain = Multichain {
        sets: vec![
            inst.matroid.span(&ElemSet::from_iter(ground, 0..4)),
            ElemSet::from_iter(ground, 0..ground - 4),
            ElemSet::full(ground),
        ],
    };
    let levels: LevelWeights = chain.levels(ground);
    let m1 = inst.partition_matroid();
    let allowed = ElemSet::full(ground);
    c.bench_function("lex_max_common_independent", |b| {
        b.iter(|| lex_max_common_independent(&m1, &inst.matroid, &levels, &allowed));
    });
}

fn bench_margin(c: &mut Criterion) {
    // The 25-vertex / 93-edge margin gadget with its constructed candidate.
    let gen = generate(&GeneratorSpec::Exact3CoverGadget {
        universe: 3,
        sets: vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]],
        cover: Some(vec![0]),
    })
    .unwrap();
    let candidate = gen.candidate.unwrap();
    c.bench_function("margin_gadget", |b| {
        b.iter(|| margin(&gen.instance, &candidate).unwrap());
    });
    // Keep the solver exercised on the same instance shape.
    c.bench_function("solve_gadget", |b| {
        b.iter(|| matches!(solve(&gen.instance), SolveOutcome::Popular { .. }));
    });
}

criterion_group!(benches, bench_solve, bench_lex_max, bench_margin);
criterion_main!(benches);
