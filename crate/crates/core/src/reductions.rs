//! Problem transformations onto the popular common base problem:
//! branchings, colorful forests and generic common independent sets, size
//! windows, category constraints, and the min-cost popular colorful forest.
//!
//! Every reduction appends dummy elements after the original ids, so the
//! original elements keep their identity in the auxiliary instance and
//! solutions project by dropping the dummy ids.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::elements::{ElemSet, ElementId};
use crate::error::Error;
use crate::instance::{
    build_matroid, graphic_matroid, Cost, CostMap, DirectSumPartDoc, EdgeInfo, Instance,
    InstanceKind, MatroidDoc, Solution,
};
use crate::intersection::{max_weight_common_base_in, Weight};
use crate::matroid::Matroid;
use crate::solver::{edge_set_of, solve, DualCertificate, Multichain, SolveOutcome, SolveTrace};

/// How auxiliary ids relate to the original instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionMap {
    /// Original element id -> auxiliary id (identity for all reductions
    /// here, recorded explicitly for the sidecar document).
    pub forward: Vec<ElementId>,
    /// Original agent id -> its dummy element in the auxiliary instance.
    pub dummies: Vec<ElementId>,
}

impl ReductionMap {
    fn identity(n_orig: usize, dummies: Vec<ElementId>) -> Self {
        ReductionMap {
            forward: (0..n_orig).collect(),
            dummies,
        }
    }

    pub fn original_count(&self) -> usize {
        self.forward.len()
    }

    /// Drop dummy elements from an auxiliary solution.
    pub fn project(&self, orig: &Instance, aux_sol: &Solution) -> Solution {
        let elements = ElemSet::from_iter(
            orig.ground_size(),
            aux_sol
                .elements
                .iter()
                .filter(|&e| e < self.original_count()),
        );
        Solution::from_elements(orig, elements).expect("projection keeps classes disjoint")
    }

    /// Complete an original solution with dummies for unassigned agents.
    pub fn lift(&self, aux: &Instance, orig_sol: &Solution) -> Solution {
        let mut elements = ElemSet::empty(aux.ground_size());
        for e in orig_sol.elements.iter() {
            elements.insert(self.forward[e]);
        }
        for (agent, assigned) in orig_sol.assignment.iter().enumerate() {
            if assigned.is_none() {
                elements.insert(self.dummies[agent]);
            }
        }
        Solution::from_elements(aux, elements).expect("lift keeps classes disjoint")
    }
}

fn fresh_root(vertices: &[String]) -> String {
    if !vertices.iter().any(|v| v == "r") {
        return "r".to_string();
    }
    let mut i = 0;
    loop {
        let name = format!("__r{i}");
        if !vertices.iter().any(|v| v == &name) {
            return name;
        }
        i += 1;
    }
}

/// View a rootless digraph as an arborescence instance: a new root sends
/// one edge to every vertex, strictly worse than all original edges there.
pub fn branching_to_arborescence(inst: &Instance) -> Result<Instance, Error> {
    if inst.kind != InstanceKind::Arborescence || inst.root.is_some() {
        return Err(Error::Schema(
            "branching reduction expects a rootless arborescence-kind instance".into(),
        ));
    }
    let m = inst.ground_size();
    let root = fresh_root(&inst.vertices);
    let mut edges = inst.edges.clone();
    let mut pairs = inst.dominance_pairs();
    let mut class_of = inst.class_of.clone();
    for (a, vertex) in inst.vertices.iter().enumerate() {
        let id = m + a;
        edges.push(EdgeInfo {
            tail: root.clone(),
            head: vertex.clone(),
            color: None,
        });
        class_of.push(a as u32);
        for &f in &inst.classes[a] {
            pairs.push((f, id));
        }
    }
    let graphic = graphic_matroid(&inst.vertices, Some(&root), &edges);
    Instance::assemble(
        InstanceKind::Arborescence,
        inst.vertices.clone(),
        Some(root),
        edges,
        inst.agents.clone(),
        class_of,
        &pairs,
        graphic,
        None,
    )
}

struct AuxParts {
    vertices: Vec<String>,
    edges: Vec<EdgeInfo>,
    class_of: Vec<u32>,
    pairs: Vec<(ElementId, ElementId)>,
    dummies: Vec<ElementId>,
}

/// Shared skeleton: one dummy element per agent, strictly worst in its
/// class, drawn as an isolated fresh edge in the graph.
fn augment_with_dummies(inst: &Instance) -> AuxParts {
    let m = inst.ground_size();
    let mut vertices = inst.vertices.clone();
    let mut edges = inst.edges.clone();
    let mut class_of = inst.class_of.clone();
    let mut pairs = inst.dominance_pairs();
    let mut dummies = Vec::with_capacity(inst.n_agents());
    for (a, agent) in inst.agents.iter().enumerate() {
        let id = m + a;
        let u = format!("__u{a}");
        let v = format!("__v{a}");
        vertices.push(u.clone());
        vertices.push(v.clone());
        edges.push(EdgeInfo {
            tail: u,
            head: v,
            color: Some(agent.clone()),
        });
        class_of.push(a as u32);
        for &f in &inst.classes[a] {
            pairs.push((f, id));
        }
        dummies.push(id);
    }
    AuxParts {
        vertices,
        edges,
        class_of,
        pairs,
        dummies,
    }
}

/// Popular colorful forest -> popular colorful base: add one dummy edge per
/// color on fresh vertices and truncate the graphic matroid at the number
/// of colors.
pub fn colorful_to_base(inst: &Instance) -> Result<(Instance, ReductionMap), Error> {
    if inst.kind != InstanceKind::ColorfulForest {
        return Err(Error::Schema(
            "colorful reduction expects a colorful_forest instance".into(),
        ));
    }
    let parts = augment_with_dummies(inst);
    let n = inst.n_agents();
    let graphic = graphic_matroid(&parts.vertices, None, &parts.edges);
    // The generic kind's default matroid is exactly this truncation, so the
    // auxiliary instance needs no explicit matroid expression.
    let aux = Instance::assemble(
        InstanceKind::Generic,
        parts.vertices,
        None,
        parts.edges,
        inst.agents.clone(),
        parts.class_of,
        &parts.pairs,
        graphic.truncate(n),
        None,
    )?;
    Ok((aux, ReductionMap::identity(inst.ground_size(), parts.dummies)))
}

/// The same construction over an arbitrary matroid: dummies become free
/// elements and the direct sum is truncated at the number of agents.
pub fn common_independent_to_base(inst: &Instance) -> Result<(Instance, ReductionMap), Error> {
    let parts = augment_with_dummies(inst);
    let m = inst.ground_size();
    let n = inst.n_agents();
    let orig: Vec<usize> = (0..m).collect();
    let doc = MatroidDoc::Truncate {
        limit: n,
        inner: Box::new(MatroidDoc::DirectSum {
            parts: vec![
                DirectSumPartDoc {
                    support: orig,
                    matroid: inst.matroid_doc_or_default(),
                },
                DirectSumPartDoc {
                    support: parts.dummies.clone(),
                    matroid: MatroidDoc::Free {
                        elements: parts.dummies.clone(),
                    },
                },
            ],
        }),
    };
    let graphic = graphic_matroid(&parts.vertices, None, &parts.edges);
    let matroid = build_matroid(&doc, &graphic, m + n)?;
    let aux = Instance::assemble(
        InstanceKind::Generic,
        parts.vertices,
        None,
        parts.edges,
        inst.agents.clone(),
        parts.class_of,
        &parts.pairs,
        matroid,
        Some(doc),
    )?;
    Ok((aux, ReductionMap::identity(m, parts.dummies)))
}

/// Popularity among common independent sets of size in `[lo, hi]`: bases of
/// the auxiliary instance correspond exactly to admissible sets.
pub fn with_size_window(
    inst: &Instance,
    lo: usize,
    hi: usize,
) -> Result<(Instance, ReductionMap), Error> {
    if lo > hi {
        return Err(Error::Schema(format!("size window {lo}..{hi} is empty")));
    }
    let m = inst.ground_size();
    let n = inst.n_agents();
    if lo > n {
        return Err(Error::Infeasible(format!(
            "no selection with one element per agent reaches size {lo}"
        )));
    }
    if inst.matroid.rank(&ElemSet::full(m)) < lo {
        return Err(Error::Infeasible(format!(
            "matroid rank is below the lower size bound {lo}"
        )));
    }
    let parts = augment_with_dummies(inst);
    let orig: Vec<usize> = (0..m).collect();
    let doc = MatroidDoc::Truncate {
        limit: n,
        inner: Box::new(MatroidDoc::DirectSum {
            parts: vec![
                DirectSumPartDoc {
                    support: orig,
                    matroid: MatroidDoc::Truncate {
                        limit: hi,
                        inner: Box::new(inst.matroid_doc_or_default()),
                    },
                },
                DirectSumPartDoc {
                    support: parts.dummies.clone(),
                    matroid: MatroidDoc::Uniform {
                        elements: parts.dummies.clone(),
                        limit: n - lo,
                    },
                },
            ],
        }),
    };
    let graphic = graphic_matroid(&parts.vertices, None, &parts.edges);
    let matroid = build_matroid(&doc, &graphic, m + n)?;
    let aux = Instance::assemble(
        InstanceKind::Generic,
        parts.vertices,
        None,
        parts.edges,
        inst.agents.clone(),
        parts.class_of,
        &parts.pairs,
        matroid,
        Some(doc),
    )?;
    Ok((aux, ReductionMap::identity(m, parts.dummies)))
}

/// Per-category bounds on how many agents receive an element. Categories
/// must partition the agents.
pub fn with_categories(
    inst: &Instance,
    categories: &[Vec<usize>],
    bounds: &[(usize, usize)],
) -> Result<(Instance, ReductionMap), Error> {
    let n = inst.n_agents();
    let m = inst.ground_size();
    if categories.len() != bounds.len() {
        return Err(Error::Schema("one bound pair per category required".into()));
    }
    let mut seen = vec![false; n];
    for class in categories {
        for &a in class {
            if a >= n || seen[a] {
                return Err(Error::Schema(
                    "categories must partition the agent set".into(),
                ));
            }
            seen[a] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Schema(
            "categories must partition the agent set".into(),
        ));
    }
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if lo > hi {
            return Err(Error::Schema(format!("category {k} has lo > hi")));
        }
        if lo > categories[k].len() {
            return Err(Error::Infeasible(format!(
                "category {k} cannot assign {lo} of its {} agents",
                categories[k].len()
            )));
        }
    }
    let need: usize = bounds.iter().map(|&(lo, _)| lo).sum();
    if inst.matroid.rank(&ElemSet::full(m)) < need {
        return Err(Error::Infeasible(
            "matroid rank is below the sum of category lower bounds".into(),
        ));
    }

    let mut parts = augment_with_dummies(inst);
    let mut agents = inst.agents.clone();
    let mut g_all: Vec<ElementId> = Vec::new();
    let mut category_supports: Vec<Vec<ElementId>> = Vec::new();
    for (k, class) in categories.iter().enumerate() {
        let (lo, hi) = bounds[k];
        // F_k starts with the per-agent dummies of this category.
        let mut support: Vec<ElementId> = class.iter().map(|&a| parts.dummies[a]).collect();
        for j in 0..hi - lo {
            let agent_id = agents.len();
            let agent_name = format!("__cat{k}_{j}");
            agents.push(agent_name.clone());
            // f_j and g_j are mutually incomparable (tied in preferences).
            for which in ["f", "g"] {
                let id = parts.edges.len();
                let u = format!("__{which}{k}_{j}u");
                let v = format!("__{which}{k}_{j}v");
                parts.vertices.push(u.clone());
                parts.vertices.push(v.clone());
                parts.edges.push(EdgeInfo {
                    tail: u,
                    head: v,
                    color: Some(agent_name.clone()),
                });
                parts.class_of.push(agent_id as u32);
                if which == "f" {
                    support.push(id);
                } else {
                    g_all.push(id);
                }
            }
        }
        support.sort_unstable();
        category_supports.push(support);
    }

    let total_hi: usize = bounds.iter().map(|&(_, hi)| hi).sum();
    let orig: Vec<usize> = (0..m).collect();
    let ground = parts.edges.len();
    let e_prime: Vec<usize> = orig.iter().copied().chain(g_all.iter().copied()).collect();
    let mut sum_parts = vec![DirectSumPartDoc {
        support: e_prime,
        matroid: MatroidDoc::Truncate {
            limit: total_hi,
            inner: Box::new(MatroidDoc::DirectSum {
                parts: vec![
                    DirectSumPartDoc {
                        support: orig,
                        matroid: inst.matroid_doc_or_default(),
                    },
                    DirectSumPartDoc {
                        support: g_all.clone(),
                        matroid: MatroidDoc::Free {
                            elements: g_all.clone(),
                        },
                    },
                ],
            }),
        },
    }];
    for (k, support) in category_supports.iter().enumerate() {
        let (lo, _) = bounds[k];
        sum_parts.push(DirectSumPartDoc {
            support: support.clone(),
            matroid: MatroidDoc::Uniform {
                elements: support.clone(),
                limit: categories[k].len() - lo,
            },
        });
    }
    let doc = MatroidDoc::DirectSum { parts: sum_parts };
    let graphic = graphic_matroid(&parts.vertices, None, &parts.edges);
    let matroid = build_matroid(&doc, &graphic, ground)?;
    let aux = Instance::assemble(
        InstanceKind::Generic,
        parts.vertices,
        None,
        parts.edges,
        agents,
        parts.class_of,
        &parts.pairs,
        matroid,
        Some(doc),
    )?;
    Ok((aux, ReductionMap::identity(m, parts.dummies)))
}

/// Outcome of solving an independent-set-semantics instance through the
/// base reduction. The certificate and trace live on the auxiliary side.
#[derive(Clone, Debug)]
pub enum ColorfulOutcome {
    Popular {
        solution: Solution,
        aux: Instance,
        aux_solution: Solution,
        certificate: DualCertificate,
        trace: SolveTrace,
        map: ReductionMap,
    },
    NoPopular {
        aux: Instance,
        trace: SolveTrace,
        map: ReductionMap,
    },
}

/// The base reduction for a colorful instance: the graphic construction
/// when the matroid is the plain graphic one, the generic free-dummy
/// construction when an explicit matroid expression overrides it. Both
/// `solve_colorful` and document verification rebuild through this, so the
/// auxiliary side is reproducible from the instance bytes.
pub fn independent_to_base(inst: &Instance) -> Result<(Instance, ReductionMap), Error> {
    if inst.kind != InstanceKind::ColorfulForest {
        return Err(Error::Schema(
            "independent-set reduction expects a colorful_forest instance".into(),
        ));
    }
    match inst.matroid_doc_or_default() {
        MatroidDoc::Graphic => colorful_to_base(inst),
        _ => common_independent_to_base(inst),
    }
}

pub fn solve_colorful(inst: &Instance) -> Result<ColorfulOutcome, Error> {
    let (aux, map) = independent_to_base(inst)?;
    match solve(&aux) {
        SolveOutcome::Popular {
            solution,
            certificate,
            trace,
        } => Ok(ColorfulOutcome::Popular {
            solution: map.project(inst, &solution),
            aux,
            aux_solution: solution,
            certificate,
            trace,
            map,
        }),
        SolveOutcome::NoPopular { trace } => Ok(ColorfulOutcome::NoPopular { aux, trace, map }),
        SolveOutcome::StructurallyInfeasible => unreachable!(
            "the all-dummies selection is always a common base of the auxiliary instance"
        ),
    }
}

/// Exact rational weight for cost objectives.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct RatWeight(BigRational);

impl Weight for RatWeight {
    fn zero() -> Self {
        RatWeight(BigRational::zero())
    }
    fn add(&self, rhs: &Self) -> Self {
        RatWeight(&self.0 + &rhs.0)
    }
    fn neg(&self) -> Self {
        RatWeight(-self.0.clone())
    }
}

#[derive(Clone, Debug)]
pub enum MinCostOutcome {
    Forest { solution: Solution, total: Cost },
    NoPopular,
}

/// Minimum-cost popular colorful forest for weak rankings: solve the
/// auxiliary instance, then optimize cost over the certificate's face
/// (selection within `E(C)` with `|B ∩ C| = rank(C)`), realized by swapping
/// the matroid for restrict ⊕ contract along the chain set.
///
/// Elements of infinite cost are avoided lexicographically before the
/// rational total, so a finite-cost optimum is exact and an all-infinite
/// face reports an infinite total instead of failing.
pub fn min_cost_popular_colorful_forest(
    inst: &Instance,
    costs: &CostMap,
) -> Result<MinCostOutcome, Error> {
    if inst.kind != InstanceKind::ColorfulForest {
        return Err(Error::Schema(
            "min-cost forest expects a colorful_forest instance".into(),
        ));
    }
    if let Some(a) = inst.weak_ranking.iter().position(|&w| !w) {
        return Err(Error::PartialOrderUnsupported(inst.agents[a].clone()));
    }
    if costs.costs.len() != inst.ground_size() {
        return Err(Error::Schema(
            "cost map does not cover the ground set".into(),
        ));
    }
    let (certificate, aux, map) = match solve_colorful(inst)? {
        ColorfulOutcome::Popular {
            certificate,
            aux,
            map,
            ..
        } => (certificate, aux, map),
        ColorfulOutcome::NoPopular { .. } => return Ok(MinCostOutcome::NoPopular),
    };
    debug_assert!(
        certificate.chain.len() <= 2,
        "auxiliary certificates have length at most two"
    );

    let ground = aux.ground_size();
    let chain = Multichain {
        sets: certificate.chain.clone(),
    };
    let allowed = edge_set_of(&chain, &aux);
    let face_matroid = if certificate.chain.len() == 2 {
        let inner = certificate.chain[0].clone();
        let rest = ElemSet::full(ground).difference(&inner);
        Matroid::direct_sum(
            ground,
            vec![
                (inner.clone(), aux.matroid.clone().restrict(inner.clone())),
                (rest, aux.matroid.clone().contract(inner)),
            ],
        )?
    } else {
        aux.matroid.clone()
    };

    let originals = map.original_count();
    let weight = |e: ElementId| -> (i64, i64, RatWeight) {
        if e >= originals {
            return (1, 0, RatWeight::zero());
        }
        match &costs.costs[e] {
            Cost::Infinite => (1, -1, RatWeight::zero()),
            Cost::Finite(c) => (1, 0, RatWeight(-c.clone())),
        }
    };
    let (base, _) =
        max_weight_common_base_in(&aux.partition_matroid(), &face_matroid, &allowed, weight)?;
    let aux_solution = Solution::from_elements(&aux, base)?;
    let projected = map.project(inst, &aux_solution);
    let mut total = BigRational::zero();
    let mut infinite = false;
    for e in projected.elements.iter() {
        match &costs.costs[e] {
            Cost::Infinite => infinite = true,
            Cost::Finite(c) => total += c,
        }
    }
    Ok(MinCostOutcome::Forest {
        solution: projected,
        total: if infinite {
            Cost::Infinite
        } else {
            Cost::Finite(total)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    const SINGLE_EDGE: &str = r#"{
        "kind": "colorful_forest",
        "vertices": ["x", "y"],
        "edges": [{"id": 0, "tail": "x", "head": "y", "color": "1"}],
        "preferences": {}
    }"#;

    #[test]
    fn one_vertex_branching() {
        let doc = r#"{
            "kind": "arborescence",
            "vertices": ["v"],
            "edges": [],
            "preferences": {}
        }"#;
        let inst = parse_instance(doc.as_bytes()).unwrap();
        let arb = branching_to_arborescence(&inst).unwrap();
        assert_eq!(arb.ground_size(), 1);
        assert_eq!(arb.root.as_deref(), Some("r"));
        match solve(&arb) {
            SolveOutcome::Popular { solution, .. } => {
                assert_eq!(solution.elements.to_vec(), vec![0]);
            }
            other => panic!("expected popular, got {other:?}"),
        }
    }

    #[test]
    fn vertex_without_incoming_edges_gets_exactly_one() {
        let doc = r#"{
            "kind": "arborescence",
            "vertices": ["a", "b"],
            "edges": [{"id": 0, "tail": "a", "head": "b"}],
            "preferences": {}
        }"#;
        let inst = parse_instance(doc.as_bytes()).unwrap();
        let arb = branching_to_arborescence(&inst).unwrap();
        let a = arb.agent_index("a").unwrap();
        assert_eq!(arb.classes[a].len(), 1);
        let b = arb.agent_index("b").unwrap();
        assert_eq!(arb.classes[b].len(), 2);
        // The root edge into b (id 2) is strictly worst.
        assert!(arb.prefers(0, 2));
    }

    #[test]
    fn single_color_forest() {
        let inst = parse_instance(SINGLE_EDGE.as_bytes()).unwrap();
        match solve_colorful(&inst).unwrap() {
            ColorfulOutcome::Popular { solution, .. } => {
                assert_eq!(solution.elements.to_vec(), vec![0]);
            }
            other => panic!("expected popular, got {other:?}"),
        }
    }

    #[test]
    fn all_dummies_base_projects_to_empty_forest() {
        let inst = parse_instance(SINGLE_EDGE.as_bytes()).unwrap();
        let (aux, map) = colorful_to_base(&inst).unwrap();
        let all_dummies = ElemSet::from_iter(aux.ground_size(), map.dummies.iter().copied());
        let sol = Solution::from_elements(&aux, all_dummies).unwrap();
        assert!(sol.is_common_base(&aux));
        let projected = map.project(&inst, &sol);
        assert!(projected.elements.is_empty());
    }

    #[test]
    fn unique_popular_forest_is_returned_at_its_own_cost() {
        let inst = parse_instance(SINGLE_EDGE.as_bytes()).unwrap();
        let costs = CostMap {
            costs: vec![Cost::Finite(BigRational::from_integer(7.into()))],
        };
        match min_cost_popular_colorful_forest(&inst, &costs).unwrap() {
            MinCostOutcome::Forest { solution, total } => {
                assert_eq!(solution.elements.to_vec(), vec![0]);
                assert_eq!(total, Cost::Finite(BigRational::from_integer(7.into())));
            }
            MinCostOutcome::NoPopular => panic!("the single edge is popular"),
        }
    }

    #[test]
    fn size_window_rejects_unreachable_lower_bound() {
        let inst = parse_instance(SINGLE_EDGE.as_bytes()).unwrap();
        assert!(matches!(
            with_size_window(&inst, 2, 3),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn min_cost_rejects_partial_orders() {
        let doc = r#"{
            "kind": "colorful_forest",
            "vertices": ["x", "y", "z"],
            "edges": [
                {"id": 0, "tail": "x", "head": "y", "color": "1"},
                {"id": 1, "tail": "y", "head": "z", "color": "1"},
                {"id": 2, "tail": "x", "head": "z", "color": "1"}
            ],
            "preferences": {"1": {"dominates": [[0, 1]]}}
        }"#;
        let inst = parse_instance(doc.as_bytes()).unwrap();
        // Element 2 is incomparable to both 0 and 1 while 0 beats 1, so
        // indifference is not transitive: a genuine partial order.
        assert!(!inst.all_weak_rankings());
        let costs = CostMap {
            costs: vec![Cost::Finite(BigRational::zero()); 3],
        };
        assert!(matches!(
            min_cost_popular_colorful_forest(&inst, &costs),
            Err(Error::PartialOrderUnsupported(_))
        ));
    }
}
