//! The popular common base solver: multichain search with lex-maximal
//! branchings, dual-certificate extraction, and certificate verification.
//!
//! The search keeps an ordered multichain `C_1 ⊆ ... ⊆ C_p = E` with
//! `span(C_i) = C_i`, repeatedly takes a lexicographically maximal common
//! independent set inside the admissible set `E(C)`, and either accepts it
//! (every `|I ∩ C_i|` meets `rank(C_i)`) or shrinks the first deficient set
//! to `span(I ∩ C_k)`. Once the multichain grows longer than the number of
//! agents, no popular solution exists.

use serde::{Deserialize, Serialize};

use crate::elements::{ElemSet, ElementId};
use crate::error::Error;
use crate::instance::{Instance, Solution};
use crate::intersection::{lex_max_common_independent, max_common_independent, LevelWeights};

/// Ordered nested sets `C_1 ⊆ ... ⊆ C_p`; duplicates are allowed while the
/// solver runs and removed only in the final certificate.
#[derive(Clone, Debug)]
pub struct Multichain {
    pub sets: Vec<ElemSet>,
}

impl Multichain {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `lev(e)`: 1-based index of the first set containing `e`. Total
    /// because the last set is the full ground.
    pub fn levels(&self, ground: usize) -> LevelWeights {
        let mut level = vec![self.sets.len() as u32; ground];
        for (i, set) in self.sets.iter().enumerate().rev() {
            for e in set.iter() {
                level[e] = i as u32 + 1;
            }
        }
        LevelWeights {
            level,
            p: self.sets.len(),
        }
    }
}

/// Strictly increasing nonempty chain `D_1 ⊊ ... ⊊ D_q = E` witnessing
/// popularity. Empty when the ground set itself is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub chain: Vec<ElemSet>,
}

/// The dual variables induced by a certificate: `y_D = 1` per chain set and
/// `alpha_v = -|{D : A(v) in D}|` per agent, at objective zero.
#[derive(Clone, Debug)]
pub struct DualValues {
    pub y_sets: Vec<Vec<ElementId>>,
    pub alpha: Vec<i64>,
    pub objective: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceStep {
    /// Multichain at the start of the iteration.
    pub chain: Vec<Vec<ElementId>>,
    /// Lex-maximal common independent set found (empty in the terminal
    /// entry of an unsuccessful run).
    #[serde(rename = "I")]
    pub chosen: Vec<ElementId>,
    /// 1-based first deficient index, or null when accepted / terminal.
    pub deficient: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolveTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Popular {
        solution: Solution,
        certificate: DualCertificate,
        trace: SolveTrace,
    },
    NoPopular {
        trace: SolveTrace,
    },
    StructurallyInfeasible,
}

impl SolveOutcome {
    pub fn is_popular(&self) -> bool {
        matches!(self, SolveOutcome::Popular { .. })
    }
}

/// Why a certificate failed verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotACommonBase,
    EmptyChainSet { index: usize },
    NotStrictlyIncreasing { index: usize },
    LastSetNotGround,
    ElementOutsideAdmissible { element: ElementId },
    SpanMismatch { index: usize },
    ObjectiveNonZero { objective: i64 },
    Lp2RowViolated { agent: String, element: ElementId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// The admissible set `E(C)`: per agent, the undominated elements at the
/// agent's top level, plus undominated elements one level below that beat
/// every top-level element.
pub fn edge_set_of(chain: &Multichain, inst: &Instance) -> ElemSet {
    let ground = inst.ground_size();
    let levels = chain.levels(ground);
    edge_set_of_levels(&levels, inst)
}

fn edge_set_of_levels(levels: &LevelWeights, inst: &Instance) -> ElemSet {
    let ground = inst.ground_size();
    let mut out = ElemSet::empty(ground);
    for class in &inst.classes {
        if class.is_empty() {
            continue;
        }
        let top = class.iter().map(|&e| levels.level[e]).max().unwrap();
        for &e in class {
            let lev_e = levels.level[e];
            if lev_e == top {
                let dominated = class
                    .iter()
                    .any(|&f| levels.level[f] == top && inst.prefers(f, e));
                if !dominated {
                    out.insert(e);
                }
            } else if lev_e + 1 == top {
                let dominated = class
                    .iter()
                    .any(|&f| levels.level[f] == lev_e && inst.prefers(f, e));
                let beats_top = class
                    .iter()
                    .filter(|&&f| levels.level[f] == top)
                    .all(|&f| inst.prefers(e, f));
                if !dominated && beats_top {
                    out.insert(e);
                }
            }
        }
    }
    out
}

pub fn solve(inst: &Instance) -> SolveOutcome {
    solve_forbidden(inst, &ElemSet::empty(inst.ground_size()))
}

/// Algorithm 1 restricted to `E(C) \ forbidden` in every iteration. A
/// `Popular` outcome is popular among all common bases and avoids the
/// forbidden elements; `NoPopular` means no popular common base does.
pub fn solve_forbidden(inst: &Instance, forbidden: &ElemSet) -> SolveOutcome {
    let n = inst.n_agents();
    let ground = inst.ground_size();
    let full = ElemSet::full(ground);

    if n == 0 {
        return SolveOutcome::Popular {
            solution: Solution {
                elements: ElemSet::empty(ground),
                assignment: Vec::new(),
            },
            certificate: DualCertificate { chain: Vec::new() },
            trace: SolveTrace::default(),
        };
    }

    // No common base at all: every agent needs an element and the matroid
    // rank must match the number of agents.
    if inst.classes.iter().any(|c| c.is_empty()) {
        return SolveOutcome::StructurallyInfeasible;
    }
    let m1 = inst.partition_matroid();
    let m2 = &inst.matroid;
    if m2.rank(&full) != n {
        return SolveOutcome::StructurallyInfeasible;
    }
    match max_common_independent(&m1, m2) {
        Ok(best) if best.len() == n => {}
        _ => return SolveOutcome::StructurallyInfeasible,
    }

    let mut chain = Multichain {
        sets: vec![full.clone()],
    };
    let mut trace = SolveTrace::default();
    let mut guard = 0usize;

    while chain.len() <= n {
        guard += 1;
        assert!(
            guard <= (n + 1) * (n + 1) + 1,
            "iteration bound exceeded; multichain invariant broken"
        );
        debug_assert!(chain
            .sets
            .windows(2)
            .all(|w| w[0].is_subset(&w[1])));
        debug_assert!(chain.sets.iter().all(|c| &m2.span(c) == c));

        let levels = chain.levels(ground);
        let admissible = edge_set_of_levels(&levels, inst);
        let allowed = admissible.difference(forbidden);
        let chosen = lex_max_common_independent(&m1, m2, &levels, &allowed);

        let deficient = chain
            .sets
            .iter()
            .position(|c| chosen.intersection(c).len() < m2.rank(c));

        trace.steps.push(TraceStep {
            chain: chain.sets.iter().map(|s| s.to_vec()).collect(),
            chosen: chosen.to_vec(),
            deficient: deficient.map(|k| k + 1),
        });

        match deficient {
            None => {
                let certificate = prune(&chain);
                let solution = Solution::from_elements(inst, chosen)
                    .expect("lex-maximal set respects the partition matroid");
                debug_assert!(solution.is_common_base(inst));
                return SolveOutcome::Popular {
                    solution,
                    certificate,
                    trace,
                };
            }
            Some(k) => {
                let shrunk = m2.span(&chosen.intersection(&chain.sets[k]));
                debug_assert!(m2.rank(&shrunk) < m2.rank(&chain.sets[k]));
                chain.sets[k] = shrunk;
                if k + 1 == chain.len() {
                    chain.sets.push(full.clone());
                }
            }
        }
    }

    trace.steps.push(TraceStep {
        chain: chain.sets.iter().map(|s| s.to_vec()).collect(),
        chosen: Vec::new(),
        deficient: None,
    });
    SolveOutcome::NoPopular { trace }
}

/// Forced elements reduce to forbidden ones: forbid every sibling of a
/// forced element inside its agent's class.
pub fn solve_forced_forbidden(
    inst: &Instance,
    forced: &ElemSet,
    forbidden: &ElemSet,
) -> SolveOutcome {
    if !forced.intersection(forbidden).is_empty() {
        return SolveOutcome::NoPopular {
            trace: SolveTrace::default(),
        };
    }
    let mut blocked = forbidden.clone();
    let mut forced_agents = vec![false; inst.n_agents()];
    for e in forced.iter() {
        let a = inst.class_of[e] as usize;
        if forced_agents[a] {
            // Two forced elements in one class can never coexist.
            return SolveOutcome::NoPopular {
                trace: SolveTrace::default(),
            };
        }
        forced_agents[a] = true;
        for &f in &inst.classes[a] {
            if f != e {
                blocked.insert(f);
            }
        }
    }
    let outcome = solve_forbidden(inst, &blocked);
    if let SolveOutcome::Popular { solution, .. } = &outcome {
        debug_assert!(forced.is_subset(&solution.elements));
    }
    outcome
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStatus {
    InAllPopular,
    InNoPopular,
    InSome,
}

/// Per-element membership across all popular common bases. Requires the
/// instance to admit a popular solution.
pub fn classify_edges(inst: &Instance) -> Result<Vec<EdgeStatus>, Error> {
    if !solve(inst).is_popular() {
        return Err(Error::Infeasible(
            "edge classification needs a popular solution".into(),
        ));
    }
    let ground = inst.ground_size();
    let empty = ElemSet::empty(ground);
    let mut out = Vec::with_capacity(ground);
    for e in 0..ground {
        let single = ElemSet::from_iter(ground, [e]);
        let status = if !solve_forced_forbidden(inst, &single, &empty).is_popular() {
            EdgeStatus::InNoPopular
        } else if !solve_forbidden(inst, &single).is_popular() {
            EdgeStatus::InAllPopular
        } else {
            EdgeStatus::InSome
        };
        out.push(status);
    }
    Ok(out)
}

fn prune(chain: &Multichain) -> DualCertificate {
    let mut pruned: Vec<ElemSet> = Vec::new();
    for set in &chain.sets {
        if set.is_empty() {
            continue;
        }
        if pruned.last() == Some(set) {
            continue;
        }
        pruned.push(set.clone());
    }
    if pruned.len() != chain.len() {
        log::warn!(
            "final multichain needed pruning: {} sets reduced to {}",
            chain.len(),
            pruned.len()
        );
    }
    DualCertificate { chain: pruned }
}

/// Certificate check: strict nonempty chain ending at the
/// ground set, solution inside `E(D)`, and `span(A ∩ D_i) = D_i` per set.
pub fn verify_certificate(
    inst: &Instance,
    sol: &Solution,
    cert: &DualCertificate,
) -> Result<(), Violation> {
    let ground = inst.ground_size();
    if !sol.is_common_base(inst) {
        return Err(Violation::NotACommonBase);
    }
    if ground == 0 {
        return if cert.chain.is_empty() {
            Ok(())
        } else {
            Err(Violation::LastSetNotGround)
        };
    }
    for (i, set) in cert.chain.iter().enumerate() {
        if set.is_empty() {
            return Err(Violation::EmptyChainSet { index: i + 1 });
        }
        if i + 1 < cert.chain.len() {
            let next = &cert.chain[i + 1];
            if !(set.is_subset(next) && set != next) {
                return Err(Violation::NotStrictlyIncreasing { index: i + 1 });
            }
        }
    }
    let full = ElemSet::full(ground);
    if cert.chain.last() != Some(&full) {
        return Err(Violation::LastSetNotGround);
    }
    let chain = Multichain {
        sets: cert.chain.clone(),
    };
    let admissible = edge_set_of(&chain, inst);
    if let Some(e) = sol.elements.difference(&admissible).iter().next() {
        return Err(Violation::ElementOutsideAdmissible { element: e });
    }
    for (i, set) in cert.chain.iter().enumerate() {
        if &inst.matroid.span(&sol.elements.intersection(set)) != set {
            return Err(Violation::SpanMismatch { index: i + 1 });
        }
    }
    Ok(())
}

/// Dual variables induced by a verified certificate, with the per-row
/// feasibility check `lev(A(v)) - lev(e) >= wt_A(e)` for every element.
pub fn extract_dual(
    inst: &Instance,
    sol: &Solution,
    cert: &DualCertificate,
) -> Result<DualValues, Violation> {
    verify_certificate(inst, sol, cert)?;
    let ground = inst.ground_size();
    let chain = Multichain {
        sets: cert.chain.clone(),
    };
    let levels = chain.levels(ground);
    let mut alpha = vec![0i64; inst.n_agents()];
    for (a, assigned) in sol.assignment.iter().enumerate() {
        let e = assigned.expect("verified solutions assign every agent");
        alpha[a] = -(cert.chain.iter().filter(|d| d.contains(e)).count() as i64);
    }
    let rank_sum: i64 = cert
        .chain
        .iter()
        .map(|d| inst.matroid.rank(d) as i64)
        .sum();
    let objective = rank_sum + alpha.iter().sum::<i64>();
    if objective != 0 {
        return Err(Violation::ObjectiveNonZero { objective });
    }
    for (a, class) in inst.classes.iter().enumerate() {
        let assigned = sol.assignment[a].unwrap();
        for &e in class {
            let wt = inst.wt(sol, e).expect("assigned agent");
            let lhs = levels.level[assigned] as i64 - levels.level[e] as i64;
            if lhs < wt as i64 {
                return Err(Violation::Lp2RowViolated {
                    agent: inst.agents[a].clone(),
                    element: e,
                });
            }
        }
    }
    Ok(DualValues {
        y_sets: cert.chain.iter().map(|d| d.to_vec()).collect(),
        alpha,
        objective,
    })
}
