//! Property tests for the comparison primitives, serialization, and the
//! solver's runtime invariants, driven by the seeded generators.

use proptest::prelude::*;

use popolo_core::elements::ElemSet;
use popolo_core::instance::{parse_instance, serialize_instance, Comparison, Instance};
use popolo_core::oracle::{enumerate_bases, generate, GeneratorSpec, PrefMode};
use popolo_core::solver::{solve, SolveOutcome};

fn stream_instance(seed: u64, mode: u8) -> Instance {
    let prefs = match mode % 3 {
        0 => PrefMode::Weak,
        1 => PrefMode::Strict,
        _ => PrefMode::Partial,
    };
    generate(&GeneratorSpec::Random {
        seed,
        agents: 3 + (seed % 4) as usize,
        extra_edges: (seed % 7) as usize,
        prefs,
        root_reachable: true,
    })
    .unwrap()
    .instance
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// phi is bounded by the agent count and compare is antisymmetric.
    #[test]
    fn phi_bounds_and_antisymmetry(seed in 0u64..10_000, mode in 0u8..3) {
        let inst = stream_instance(seed, mode);
        let bases = match enumerate_bases(&inst) {
            Ok(b) if b.len() >= 2 => b,
            _ => return Ok(()),
        };
        let n = inst.n_agents();
        for x in bases.iter().take(12) {
            for y in bases.iter().take(12) {
                prop_assert!(inst.phi(x, y) + inst.phi(y, x) <= n);
                let xy = inst.compare(x, y);
                let yx = inst.compare(y, x);
                let flipped = match xy {
                    Comparison::XMorePopular => Comparison::YMorePopular,
                    Comparison::YMorePopular => Comparison::XMorePopular,
                    Comparison::Tie => Comparison::Tie,
                };
                prop_assert_eq!(yx, flipped);
            }
        }
    }

    /// The weight identity: summing wt_x over y's elements counts exactly
    /// the popularity difference.
    #[test]
    fn weight_identity(seed in 0u64..10_000, mode in 0u8..3) {
        let inst = stream_instance(seed, mode);
        let bases = match enumerate_bases(&inst) {
            Ok(b) if b.len() >= 2 => b,
            _ => return Ok(()),
        };
        for x in bases.iter().take(8) {
            for y in bases.iter().take(8) {
                let sum: i64 = y
                    .elements
                    .iter()
                    .map(|e| inst.wt(x, e).unwrap() as i64)
                    .sum();
                let diff = inst.phi(y, x) as i64 - inst.phi(x, y) as i64;
                prop_assert_eq!(sum, diff);
            }
        }
    }

    /// Canonical serialization is a fixed point of parse, and the reloaded
    /// instance induces the same dominance relation.
    #[test]
    fn serialization_round_trip(seed in 0u64..10_000, mode in 0u8..3) {
        let inst = stream_instance(seed, mode);
        let bytes = serialize_instance(&inst);
        let reparsed = parse_instance(&bytes).unwrap();
        prop_assert_eq!(serialize_instance(&reparsed), bytes);
        for e in 0..inst.ground_size() {
            for f in 0..inst.ground_size() {
                prop_assert_eq!(inst.prefers(e, f), reparsed.prefers(e, f));
            }
        }
    }

    /// Solver loop invariants: sets only shrink per index, the chain only
    /// grows, every update strictly decreases the deficient set's rank,
    /// and the iteration count stays within (n+1)^2.
    #[test]
    fn trace_invariants(seed in 0u64..10_000, mode in 0u8..3) {
        let inst = stream_instance(seed, mode);
        let n = inst.n_agents();
        let trace = match solve(&inst) {
            SolveOutcome::Popular { trace, .. } => trace,
            SolveOutcome::NoPopular { trace } => trace,
            SolveOutcome::StructurallyInfeasible => return Ok(()),
        };
        prop_assert!(trace.steps.len() <= (n + 1) * (n + 1) + 1);
        let ground = inst.ground_size();
        let as_sets = |lists: &Vec<Vec<usize>>| -> Vec<ElemSet> {
            lists
                .iter()
                .map(|l| ElemSet::from_iter(ground, l.iter().copied()))
                .collect()
        };
        for pair in trace.steps.windows(2) {
            let before = as_sets(&pair[0].chain);
            let after = as_sets(&pair[1].chain);
            prop_assert!(after.len() >= before.len(), "p never decreases");
            for (i, b) in before.iter().enumerate() {
                prop_assert!(after[i].is_subset(b), "index {i} gained elements");
            }
            if let Some(k) = pair[0].deficient {
                let shrunk = &after[k - 1];
                prop_assert!(
                    inst.matroid.rank(shrunk) < inst.matroid.rank(&before[k - 1]),
                    "update must strictly decrease rank"
                );
            }
        }
        for step in &trace.steps {
            let sets = as_sets(&step.chain);
            prop_assert!(sets.len() <= n + 1);
            for pair in sets.windows(2) {
                prop_assert!(pair[0].is_subset(&pair[1]), "multichain nesting");
            }
            for set in &sets {
                prop_assert_eq!(&inst.matroid.span(set), set, "span-closed sets");
            }
        }
    }

    /// Certified outputs always verify and have margin zero.
    #[test]
    fn popular_outputs_are_certified(seed in 0u64..10_000, mode in 0u8..3) {
        let inst = stream_instance(seed, mode);
        if let SolveOutcome::Popular { solution, certificate, .. } = solve(&inst) {
            prop_assert!(popolo_core::solver::verify_certificate(&inst, &solution, &certificate).is_ok());
            prop_assert_eq!(popolo_core::oracle::margin(&inst, &solution).unwrap(), 0);
        }
    }
}
