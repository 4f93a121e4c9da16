//! Brute-force ground truth and instance generators.
//!
//! Enumeration is deliberately naive (backtracking with independence
//! pruning) and guarded by a configurable desk-scale limit; it exists to
//! validate the polynomial solver, never to replace it. Popularity of an
//! enumerated solution is established by pairwise comparison against every
//! rival, independent of the margin computation it cross-checks.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elements::{ElemSet, ElementId};
use crate::error::Error;
use crate::instance::{Cost, CostMap, EdgeInfo, Instance, InstanceKind, Solution};
use crate::intersection::max_weight_common_base;
use crate::reductions::independent_to_base;

const DEFAULT_BRUTE_LIMIT: u128 = 1_000_000;

/// Desk-scale guard for enumeration; `POPOLO_BRUTE_LIMIT` overrides.
pub fn brute_limit() -> u128 {
    std::env::var("POPOLO_BRUTE_LIMIT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BRUTE_LIMIT)
}

fn guard(estimate: u128) -> Result<(), Error> {
    let limit = brute_limit();
    if estimate > limit {
        return Err(Error::DeskScaleExceeded { estimate, limit });
    }
    Ok(())
}

fn backtrack(
    inst: &Instance,
    agent: usize,
    optional: bool,
    partial: &mut ElemSet,
    out: &mut Vec<Solution>,
) {
    if agent == inst.n_agents() {
        out.push(Solution::from_elements(inst, partial.clone()).expect("one per class"));
        return;
    }
    if optional {
        backtrack(inst, agent + 1, optional, partial, out);
    }
    for &e in &inst.classes[agent] {
        partial.insert(e);
        if inst.matroid.is_independent(partial) {
            backtrack(inst, agent + 1, optional, partial, out);
        }
        partial.remove(e);
    }
}

/// Every common base exactly once, sorted by their element lists.
pub fn enumerate_bases(inst: &Instance) -> Result<Vec<Solution>, Error> {
    let estimate = inst
        .classes
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    guard(estimate)?;
    if inst.matroid.rank(&ElemSet::full(inst.ground_size())) != inst.n_agents() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut partial = ElemSet::empty(inst.ground_size());
    backtrack(inst, 0, false, &mut partial, &mut out);
    out.sort_by_key(|s| s.elements.to_vec());
    Ok(out)
}

/// Every common independent set (all sizes) exactly once, sorted.
pub fn enumerate_common_independent(inst: &Instance) -> Result<Vec<Solution>, Error> {
    let estimate = inst
        .classes
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128 + 1));
    guard(estimate)?;
    let mut out = Vec::new();
    let mut partial = ElemSet::empty(inst.ground_size());
    backtrack(inst, 0, true, &mut partial, &mut out);
    out.sort_by_key(|s| s.elements.to_vec());
    Ok(out)
}

/// Feasible rivals under the instance's semantics: all common bases for
/// base problems, all common independent sets for forests.
pub fn enumerate_rivals(inst: &Instance) -> Result<Vec<Solution>, Error> {
    if inst.kind.is_base_problem() {
        enumerate_bases(inst)
    } else {
        enumerate_common_independent(inst)
    }
}

/// Unpopularity margin `mu(sol) = max_B wt_sol(B)`, computed polynomially
/// as a maximum-weight common base (never by enumeration). For forest
/// instances the computation runs on the base reduction, which preserves
/// every pairwise comparison.
pub fn margin(inst: &Instance, sol: &Solution) -> Result<i64, Error> {
    match inst.kind {
        InstanceKind::ColorfulForest => {
            let (aux, map) = independent_to_base(inst)?;
            let lifted = map.lift(&aux, sol);
            margin_common_base(&aux, &lifted)
        }
        _ => margin_common_base(inst, sol),
    }
}

fn margin_common_base(inst: &Instance, sol: &Solution) -> Result<i64, Error> {
    let mut weights = vec![0i64; inst.ground_size()];
    for (e, w) in weights.iter_mut().enumerate() {
        *w = inst.wt(sol, e)? as i64;
    }
    let (_, total) = max_weight_common_base(&inst.partition_matroid(), &inst.matroid, &weights)?;
    Ok(total)
}

/// All popular solutions, by exhaustive pairwise comparison.
pub fn brute_popular(inst: &Instance) -> Result<Vec<Solution>, Error> {
    let all = enumerate_rivals(inst)?;
    Ok(all
        .iter()
        .filter(|cand| {
            all.iter()
                .all(|rival| inst.phi(cand, rival) >= inst.phi(rival, cand))
        })
        .cloned()
        .collect())
}

/// Margin of one solution against an enumerated rival list.
pub fn brute_margin(inst: &Instance, sol: &Solution, rivals: &[Solution]) -> i64 {
    rivals
        .iter()
        .map(|r| inst.phi(r, sol) as i64 - inst.phi(sol, r) as i64)
        .max()
        .unwrap_or(0)
}

/// Exhaustive minimum-unpopularity-margin solution.
pub fn brute_min_margin(inst: &Instance) -> Result<(Solution, i64), Error> {
    let all = enumerate_rivals(inst)?;
    if all.is_empty() {
        return Err(Error::Infeasible("no feasible solution to rank".into()));
    }
    let best = all
        .iter()
        .map(|s| (s, brute_margin(inst, s, &all)))
        .min_by_key(|&(s, m)| (m, s.elements.to_vec()))
        .map(|(s, m)| (s.clone(), m))
        .unwrap();
    Ok(best)
}

/// Total cost of a selection, ordered first by how many infinite-cost
/// elements it uses; the same key the min-cost engine optimizes.
pub fn cost_key(costs: &CostMap, elements: &ElemSet) -> (usize, BigRational) {
    let mut infinite = 0usize;
    let mut total = BigRational::zero();
    for e in elements.iter() {
        match &costs.costs[e] {
            Cost::Infinite => infinite += 1,
            Cost::Finite(c) => total += c,
        }
    }
    (infinite, total)
}

pub fn total_cost(costs: &CostMap, elements: &ElemSet) -> Cost {
    let (infinite, total) = cost_key(costs, elements);
    if infinite > 0 {
        Cost::Infinite
    } else {
        Cost::Finite(total)
    }
}

/// Exhaustive minimum-cost popular solution.
pub fn brute_min_cost_popular(
    inst: &Instance,
    costs: &CostMap,
) -> Result<(Solution, Cost), Error> {
    let popular = brute_popular(inst)?;
    if popular.is_empty() {
        return Err(Error::Infeasible("no popular solution exists".into()));
    }
    let best = popular
        .into_iter()
        .min_by_key(|s| (cost_key(costs, &s.elements), s.elements.to_vec()))
        .unwrap();
    let total = total_cost(costs, &best.elements);
    Ok((best, total))
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefMode {
    /// Weak ranking: tiers with ties.
    Weak,
    /// Strict ranking: a total order, no ties.
    Strict,
    /// General partial order sampled as a random DAG.
    Partial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Random rooted digraph: an optional spanning skeleton from the root
    /// plus uniformly sampled extra arcs, preferences drawn per mode.
    Random {
        seed: u64,
        agents: usize,
        extra_edges: usize,
        prefs: PrefMode,
        root_reachable: bool,
    },
    /// Random colorful (undirected) instance for forest problems.
    RandomColorful {
        seed: u64,
        colors: usize,
        vertices: usize,
        edges: usize,
        prefs: PrefMode,
    },
    /// Min-cost hardness gadget built from an undirected graph; the budget
    /// belongs to the decision question and does not change the instance.
    VertexCoverGadget {
        graph: Vec<(String, String)>,
        budget: usize,
    },
    /// Margin hardness gadget from a restricted exact-cover-by-3-sets
    /// input; when `cover` names a solution, the forward-direction
    /// candidate arborescence is emitted too.
    #[serde(rename = "exact_3cover_gadget")]
    Exact3CoverGadget {
        universe: usize,
        sets: Vec<Vec<usize>>,
        cover: Option<Vec<usize>>,
    },
    /// The worked examples shipped as fixtures.
    AppendixFixture { name: String },
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    pub costs: Option<CostMap>,
    pub candidate: Option<Solution>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated, Error> {
    match spec {
        GeneratorSpec::Random {
            seed,
            agents,
            extra_edges,
            prefs,
            root_reachable,
        } => random_arborescence(*seed, *agents, *extra_edges, *prefs, *root_reachable),
        GeneratorSpec::RandomColorful {
            seed,
            colors,
            vertices,
            edges,
            prefs,
        } => random_colorful(*seed, *colors, *vertices, *edges, *prefs),
        GeneratorSpec::VertexCoverGadget { graph, .. } => vertex_cover_gadget(graph),
        GeneratorSpec::Exact3CoverGadget {
            universe,
            sets,
            cover,
        } => exact_3cover_gadget(*universe, sets, cover.as_deref()),
        GeneratorSpec::AppendixFixture { name } => appendix_fixture(name),
    }
}

/// Random preference pairs over one class: weak rankings chop a shuffled
/// class into tiers; partial orders sample a DAG along a random topological
/// order and let validation take the transitive closure.
fn random_pairs(
    rng: &mut ChaCha8Rng,
    class: &[ElementId],
    mode: PrefMode,
    pairs: &mut Vec<(ElementId, ElementId)>,
) {
    let mut order: Vec<ElementId> = class.to_vec();
    order.shuffle(rng);
    match mode {
        PrefMode::Weak | PrefMode::Strict => {
            let mut tiers: Vec<Vec<ElementId>> = Vec::new();
            for &e in &order {
                if tiers.is_empty() || mode == PrefMode::Strict || rng.gen_bool(0.5) {
                    tiers.push(vec![e]);
                } else {
                    tiers.last_mut().unwrap().push(e);
                }
            }
            for (i, tier) in tiers.iter().enumerate() {
                for lower in &tiers[i + 1..] {
                    for &e in tier {
                        for &f in lower {
                            pairs.push((e, f));
                        }
                    }
                }
            }
        }
        PrefMode::Partial => {
            for i in 0..order.len() {
                for j in i + 1..order.len() {
                    if rng.gen_bool(0.4) {
                        pairs.push((order[i], order[j]));
                    }
                }
            }
        }
    }
}

fn random_arborescence(
    seed: u64,
    agents: usize,
    extra_edges: usize,
    prefs: PrefMode,
    root_reachable: bool,
) -> Result<Generated, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices: Vec<String> = (0..agents).map(|i| format!("v{i}")).collect();
    let root = "r".to_string();
    let mut edges: Vec<EdgeInfo> = Vec::new();
    if root_reachable {
        // Spanning skeleton: each vertex, in a random order, is entered
        // from the root or an already-reachable vertex.
        let mut placed: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..agents).collect();
        order.shuffle(&mut rng);
        for &v in &order {
            let tail = if placed.is_empty() || rng.gen_bool(0.4) {
                root.clone()
            } else {
                vertices[placed[rng.gen_range(0..placed.len())]].clone()
            };
            edges.push(EdgeInfo {
                tail,
                head: vertices[v].clone(),
                color: None,
            });
            placed.push(v);
        }
    }
    for _ in 0..extra_edges {
        let head = rng.gen_range(0..agents);
        // Tail is the root or any other vertex.
        let tail = match rng.gen_range(0..agents) {
            t if t == head => root.clone(),
            t => vertices[t].clone(),
        };
        edges.push(EdgeInfo {
            tail,
            head: vertices[head].clone(),
            color: None,
        });
    }
    let class_of: Vec<u32> = edges
        .iter()
        .map(|e| vertices.iter().position(|v| v == &e.head).unwrap() as u32)
        .collect();
    let mut pairs = Vec::new();
    for a in 0..agents {
        let class: Vec<ElementId> = (0..edges.len())
            .filter(|&e| class_of[e] as usize == a)
            .collect();
        random_pairs(&mut rng, &class, prefs, &mut pairs);
    }
    let graphic = crate::instance::graphic_matroid(&vertices, Some(&root), &edges);
    let instance = Instance::assemble(
        InstanceKind::Arborescence,
        vertices.clone(),
        Some(root),
        edges,
        vertices,
        class_of,
        &pairs,
        graphic,
        None,
    )?;
    Ok(Generated {
        instance,
        costs: None,
        candidate: None,
    })
}

fn random_colorful(
    seed: u64,
    colors: usize,
    vertices: usize,
    edges: usize,
    prefs: PrefMode,
) -> Result<Generated, Error> {
    if vertices < 2 {
        return Err(Error::Generator(
            "colorful instances need at least two vertices".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertex_names: Vec<String> = (0..vertices).map(|i| format!("u{i}")).collect();
    let agents: Vec<String> = (0..colors).map(|i| format!("c{i}")).collect();
    let mut infos = Vec::new();
    let mut color_of = Vec::new();
    for _ in 0..edges {
        let a = rng.gen_range(0..vertices);
        let b = loop {
            let b = rng.gen_range(0..vertices);
            if b != a {
                break b;
            }
        };
        let color = rng.gen_range(0..colors);
        infos.push(EdgeInfo {
            tail: vertex_names[a].clone(),
            head: vertex_names[b].clone(),
            color: Some(agents[color].clone()),
        });
        color_of.push(color as u32);
    }
    let mut pairs = Vec::new();
    for c in 0..colors {
        let class: Vec<ElementId> = (0..infos.len())
            .filter(|&e| color_of[e] as usize == c)
            .collect();
        random_pairs(&mut rng, &class, prefs, &mut pairs);
    }
    let graphic = crate::instance::graphic_matroid(&vertex_names, None, &infos);
    let instance = Instance::assemble(
        InstanceKind::ColorfulForest,
        vertex_names,
        None,
        infos,
        agents,
        color_of,
        &pairs,
        graphic,
        None,
    )?;
    Ok(Generated {
        instance,
        costs: None,
        candidate: None,
    })
}

/// Rank tiers for the gadget generators: first-tier edges beat second-tier
/// edges beat third-tier edges; inside a tier the order is strict by
/// ascending id.
fn tiered_pairs(class: &[(ElementId, u8)]) -> Vec<(ElementId, ElementId)> {
    let mut sorted: Vec<(ElementId, u8)> = class.to_vec();
    sorted.sort_by_key(|&(e, tier)| (tier, e));
    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            pairs.push((sorted[i].0, sorted[j].0));
        }
    }
    pairs
}

struct GadgetBuilder {
    vertices: Vec<String>,
    edges: Vec<EdgeInfo>,
    tiers: Vec<u8>,
    by_name: BTreeMap<(String, String), ElementId>,
}

impl GadgetBuilder {
    fn new() -> Self {
        GadgetBuilder {
            vertices: Vec::new(),
            edges: Vec::new(),
            tiers: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    fn vertex(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.vertices.contains(&name) {
            self.vertices.push(name);
        }
    }

    fn edge(&mut self, tail: impl Into<String>, head: impl Into<String>, tier: u8) -> ElementId {
        let (tail, head) = (tail.into(), head.into());
        let id = self.edges.len();
        self.by_name.insert((tail.clone(), head.clone()), id);
        self.edges.push(EdgeInfo {
            tail,
            head,
            color: None,
        });
        self.tiers.push(tier);
        id
    }

    fn id(&self, tail: &str, head: &str) -> ElementId {
        self.by_name[&(tail.to_string(), head.to_string())]
    }

    fn finish(self, root: &str) -> Result<Instance, Error> {
        let class_of: Vec<u32> = self
            .edges
            .iter()
            .map(|e| self.vertices.iter().position(|v| v == &e.head).unwrap() as u32)
            .collect();
        let mut pairs = Vec::new();
        for a in 0..self.vertices.len() {
            let class: Vec<(ElementId, u8)> = (0..self.edges.len())
                .filter(|&e| class_of[e] as usize == a)
                .map(|e| (e, self.tiers[e]))
                .collect();
            pairs.extend(tiered_pairs(&class));
        }
        let root = root.to_string();
        let graphic =
            crate::instance::graphic_matroid(&self.vertices, Some(&root), &self.edges);
        Instance::assemble(
            InstanceKind::Arborescence,
            self.vertices.clone(),
            Some(root),
            self.edges,
            self.vertices,
            class_of,
            &pairs,
            graphic,
            None,
        )
    }
}

/// Min-cost hardness gadget: a hub vertex `w`, one 2-cycle pair per input
/// vertex, one 2-cycle pair per input edge, with costs that price exactly
/// the `(w,v1)` edges and forbid the third-tier escapes.
fn vertex_cover_gadget(graph: &[(String, String)]) -> Result<Generated, Error> {
    let mut h_vertices: Vec<String> = graph
        .iter()
        .flat_map(|(u, v)| [u.clone(), v.clone()])
        .collect();
    h_vertices.sort();
    h_vertices.dedup();
    if graph.iter().any(|(u, v)| u == v) {
        return Err(Error::Generator("vertex cover input has a loop".into()));
    }

    let mut b = GadgetBuilder::new();
    b.vertex("w");
    for v in &h_vertices {
        b.vertex(format!("{v}0"));
        b.vertex(format!("{v}1"));
    }
    for (i, (u, v)) in graph.iter().enumerate() {
        b.vertex(format!("e{i}{u}"));
        b.vertex(format!("e{i}{v}"));
    }

    // First tier: the 2-cycles and the edge-gadget escapes into w.
    for (i, (u, v)) in graph.iter().enumerate() {
        let (eu, ev) = (format!("e{i}{u}"), format!("e{i}{v}"));
        b.edge(eu.clone(), ev.clone(), 1);
        b.edge(ev.clone(), eu.clone(), 1);
        b.edge(eu, "w", 1);
        b.edge(ev, "w", 1);
    }
    for v in &h_vertices {
        b.edge(format!("{v}0"), format!("{v}1"), 1);
        b.edge(format!("{v}1"), format!("{v}0"), 1);
    }
    // Second tier: the hub reaches everything.
    b.edge("r", "w", 2);
    for v in &h_vertices {
        b.edge("w", format!("{v}0"), 2);
        b.edge("w", format!("{v}1"), 2);
    }
    for (i, (u, v)) in graph.iter().enumerate() {
        b.edge("w", format!("e{i}{u}"), 2);
        b.edge("w", format!("e{i}{v}"), 2);
    }
    // Third tier: root escapes and tails into the edge gadgets.
    for v in &h_vertices {
        b.edge("r", format!("{v}1"), 3);
    }
    for (i, (u, v)) in graph.iter().enumerate() {
        b.edge(format!("{u}0"), format!("e{i}{u}"), 3);
        b.edge(format!("{v}0"), format!("e{i}{v}"), 3);
    }

    let mut costs = vec![Cost::Finite(BigRational::zero()); b.edges.len()];
    for (e, info) in b.edges.iter().enumerate() {
        let third_tier = b.tiers[e] == 3;
        let enters_hub_not_from_root = info.head == "w" && info.tail != "r";
        if third_tier || enters_hub_not_from_root {
            costs[e] = Cost::Infinite;
        }
    }
    for v in &h_vertices {
        costs[b.id("w", &format!("{v}1"))] = Cost::Finite(BigRational::from_integer(1.into()));
    }

    let instance = b.finish("r")?;
    Ok(Generated {
        instance,
        costs: Some(CostMap { costs }),
        candidate: None,
    })
}

/// Margin hardness gadget; `universe` is `|U| = 3n` and `sets` lists `3n`
/// triples with every point in exactly three of them.
fn exact_3cover_gadget(
    universe: usize,
    sets: &[Vec<usize>],
    cover: Option<&[usize]>,
) -> Result<Generated, Error> {
    if !universe.is_multiple_of(3) || sets.len() != universe {
        return Err(Error::Generator(
            "need |U| = 3n points and exactly 3n sets".into(),
        ));
    }
    let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (s, members) in sets.iter().enumerate() {
        if members.len() != 3 {
            return Err(Error::Generator(format!("set {s} is not a triple")));
        }
        let mut sorted = members.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != 3 || sorted.iter().any(|&u| u >= universe) {
            return Err(Error::Generator(format!("set {s} has bad members")));
        }
        for &u in members {
            occurrences[u].push(s);
        }
    }
    if occurrences.iter().any(|occ| occ.len() != 3) {
        return Err(Error::Generator(
            "every point must lie in exactly three sets".into(),
        ));
    }

    let a_name = |u: usize, i: usize| format!("a{u}_{i}");
    let b_name = |u: usize, i: usize| format!("b{u}_{i}");
    let mut b = GadgetBuilder::new();
    for u in 0..universe {
        b.vertex(format!("u{u}_0"));
        b.vertex(format!("u{u}_1"));
        for i in 1..=3 {
            b.vertex(a_name(u, i));
            b.vertex(b_name(u, i));
        }
    }

    // First tier: four 2-cycles per gadget.
    for u in 0..universe {
        for i in 1..=3 {
            b.edge(a_name(u, i), b_name(u, i), 1);
            b.edge(b_name(u, i), a_name(u, i), 1);
        }
        b.edge(format!("u{u}_0"), format!("u{u}_1"), 1);
        b.edge(format!("u{u}_1"), format!("u{u}_0"), 1);
    }
    // Second tier: the 6-cycle stitches and the bidirected K_{2,3}; edges
    // from u0 come first so they are preferred to edges from u1.
    for u in 0..universe {
        b.edge(a_name(u, 3), b_name(u, 2), 2);
        b.edge(a_name(u, 2), b_name(u, 1), 2);
        b.edge(a_name(u, 1), b_name(u, 3), 2);
        for i in 1..=3 {
            b.edge(format!("u{u}_0"), a_name(u, i), 2);
            b.edge(a_name(u, i), format!("u{u}_0"), 2);
        }
        for i in 1..=3 {
            b.edge(format!("u{u}_1"), a_name(u, i), 2);
            b.edge(a_name(u, i), format!("u{u}_1"), 2);
        }
    }
    // Third tier: root entries and inter-gadget links along shared sets.
    for u in 0..universe {
        b.edge("r", format!("u{u}_0"), 3);
        b.edge("r", format!("u{u}_1"), 3);
    }
    for (s, members) in sets.iter().enumerate() {
        for &u in members {
            for &v in members {
                if u != v {
                    let i = occurrences[u].iter().position(|&x| x == s).unwrap() + 1;
                    let j = occurrences[v].iter().position(|&x| x == s).unwrap() + 1;
                    b.edge(b_name(u, i), b_name(v, j), 3);
                }
            }
        }
    }

    let candidate_elems = match cover {
        None => None,
        Some(chosen) => {
            let mut hit = vec![0usize; universe];
            for &s in chosen {
                if s >= sets.len() {
                    return Err(Error::Generator(format!("cover names unknown set {s}")));
                }
                for &u in &sets[s] {
                    hit[u] += 1;
                }
            }
            if hit.iter().any(|&h| h != 1) {
                return Err(Error::Generator(
                    "cover must hit every point exactly once".into(),
                ));
            }
            let mut elements = Vec::new();
            #[allow(clippy::needless_range_loop)]
            for u in 0..universe {
                let s = chosen
                    .iter()
                    .copied()
                    .find(|s| sets[*s].contains(&u))
                    .unwrap();
                let sigma = occurrences[u].iter().position(|&x| x == s).unwrap() + 1;
                elements.push(b.id("r", &format!("u{u}_0")));
                elements.push(b.id(&format!("u{u}_0"), &format!("u{u}_1")));
                elements.push(b.id(&format!("u{u}_0"), &a_name(u, sigma)));
                elements.push(b.id(&a_name(u, sigma), &b_name(u, sigma)));
                // The 6-cycle minus the two edges touching b_{u,sigma}.
                let cycle = [
                    (a_name(u, 1), b_name(u, 3)),
                    (b_name(u, 3), a_name(u, 3)),
                    (a_name(u, 3), b_name(u, 2)),
                    (b_name(u, 2), a_name(u, 2)),
                    (a_name(u, 2), b_name(u, 1)),
                    (b_name(u, 1), a_name(u, 1)),
                ];
                for (tail, head) in cycle {
                    if tail != b_name(u, sigma) && head != b_name(u, sigma) {
                        elements.push(b.id(&tail, &head));
                    }
                }
            }
            Some(elements)
        }
    };

    let instance = b.finish("r")?;
    let candidate = candidate_elems.map(|elements| {
        let set = ElemSet::from_iter(instance.ground_size(), elements);
        Solution::from_elements(&instance, set).expect("candidate respects classes")
    });
    if let Some(c) = &candidate {
        debug_assert!(c.is_common_base(&instance));
    }
    Ok(Generated {
        instance,
        costs: None,
        candidate,
    })
}

fn appendix_fixture(name: &str) -> Result<Generated, Error> {
    // Shared graph of the running example; the A.1 variant drops (r,d).
    let square = |with_rd: bool| -> Result<Instance, Error> {
        let mut b = GadgetBuilder::new();
        for v in ["a", "b", "c", "d"] {
            b.vertex(v);
        }
        b.edge("a", "b", 1);
        b.edge("b", "a", 1);
        b.edge("c", "d", 1);
        b.edge("d", "c", 1);
        b.edge("c", "a", 2);
        b.edge("d", "b", 2);
        b.edge("a", "c", 2);
        b.edge("b", "d", 2);
        b.edge("r", "a", 3);
        b.edge("r", "b", 3);
        b.edge("r", "c", 3);
        if with_rd {
            b.edge("r", "d", 3);
        }
        b.finish("r")
    };
    let instance = match name {
        "A.1" | "a1" => square(false)?,
        "A.2" | "a2" | "intro" => square(true)?,
        "A.3" | "a3" => {
            let mut b = GadgetBuilder::new();
            for v in ["a", "b", "c", "d"] {
                b.vertex(v);
            }
            b.edge("b", "a", 1);
            b.edge("c", "b", 1);
            b.edge("c", "d", 1);
            b.edge("d", "c", 1);
            b.edge("r", "a", 2);
            b.edge("a", "b", 2);
            b.edge("b", "c", 2);
            b.finish("r")?
        }
        other => {
            return Err(Error::Generator(format!("unknown fixture {other:?}")));
        }
    };
    Ok(Generated {
        instance,
        costs: None,
        candidate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{parse_instance, serialize_instance};
    use crate::solver::{solve, SolveOutcome};

    fn fixture(name: &str) -> Instance {
        generate(&GeneratorSpec::AppendixFixture {
            name: name.to_string(),
        })
        .unwrap()
        .instance
    }

    #[test]
    fn example3_has_a_unique_arborescence() {
        let inst = fixture("A.3");
        let bases = enumerate_bases(&inst).unwrap();
        assert_eq!(bases.len(), 1);
        assert_eq!(bases[0].elements.to_vec(), vec![2, 4, 5, 6]);
    }

    #[test]
    fn empty_instance_has_one_empty_base() {
        let doc = r#"{"kind": "generic", "vertices": [], "edges": [], "preferences": {}}"#;
        let inst = parse_instance(doc.as_bytes()).unwrap();
        let bases = enumerate_bases(&inst).unwrap();
        assert_eq!(bases.len(), 1);
        assert!(bases[0].elements.is_empty());
    }

    #[test]
    fn two_enumeration_orders_agree() {
        let inst = fixture("intro");
        let forward = enumerate_bases(&inst).unwrap();
        // Independent recount: assign agents in reverse order.
        fn recount(inst: &Instance, agent: isize, partial: &mut ElemSet) -> usize {
            if agent < 0 {
                return 1;
            }
            let mut total = 0;
            for &e in &inst.classes[agent as usize] {
                partial.insert(e);
                if inst.matroid.is_independent(partial) {
                    total += recount(inst, agent - 1, partial);
                }
                partial.remove(e);
            }
            total
        }
        let mut partial = ElemSet::empty(inst.ground_size());
        let backward = recount(&inst, inst.n_agents() as isize - 1, &mut partial);
        assert_eq!(forward.len(), backward);
        assert!(forward.len() > 1);
    }

    #[test]
    fn brute_popular_matches_paper_examples() {
        let ex1 = fixture("A.1");
        let popular = brute_popular(&ex1).unwrap();
        let lists: Vec<Vec<usize>> = popular.iter().map(|s| s.elements.to_vec()).collect();
        assert_eq!(lists, vec![vec![0, 2, 6, 8], vec![1, 2, 6, 9]]);

        let intro = fixture("intro");
        assert!(brute_popular(&intro).unwrap().is_empty());

        let ex3 = fixture("A.3");
        assert_eq!(brute_popular(&ex3).unwrap().len(), 1);
    }

    #[test]
    fn margin_of_solver_output_is_zero_and_intro_margin_matches_brute() {
        let ex1 = fixture("A.1");
        match solve(&ex1) {
            SolveOutcome::Popular { solution, .. } => {
                assert_eq!(margin(&ex1, &solution).unwrap(), 0);
            }
            other => panic!("expected popular, got {other:?}"),
        }

        let intro = fixture("intro");
        // A = {(r,a),(a,b),(a,c),(c,d)} from the running example.
        let a = Solution::from_elements(&intro, ElemSet::from_iter(12, [0, 2, 6, 8])).unwrap();
        let engine = margin(&intro, &a).unwrap();
        let rivals = enumerate_bases(&intro).unwrap();
        let brute = brute_margin(&intro, &a, &rivals);
        assert_eq!(engine, brute);
        assert!(engine >= 1);

        let (_, min_margin) = brute_min_margin(&intro).unwrap();
        assert!(min_margin >= 1);
    }

    #[test]
    fn brute_min_margin_is_zero_when_a_popular_base_exists() {
        let ex1 = fixture("A.1");
        let (solution, m) = brute_min_margin(&ex1).unwrap();
        assert_eq!(m, 0);
        assert_eq!(margin(&ex1, &solution).unwrap(), 0);
    }

    #[test]
    fn desk_scale_guard_trips() {
        let gen = generate(&GeneratorSpec::Random {
            seed: 5,
            agents: 6,
            extra_edges: 8,
            prefs: PrefMode::Weak,
            root_reachable: true,
        })
        .unwrap();
        std::env::set_var("POPOLO_BRUTE_LIMIT", "1");
        let result = enumerate_bases(&gen.instance);
        std::env::remove_var("POPOLO_BRUTE_LIMIT");
        assert!(matches!(result, Err(Error::DeskScaleExceeded { .. })));
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = GeneratorSpec::Random {
            seed: 42,
            agents: 5,
            extra_edges: 6,
            prefs: PrefMode::Partial,
            root_reachable: true,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(
            serialize_instance(&a.instance),
            serialize_instance(&b.instance)
        );
    }

    #[test]
    fn exact_3cover_gadget_shape_and_candidate() {
        let sets = vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]];
        let gen = generate(&GeneratorSpec::Exact3CoverGadget {
            universe: 3,
            sets,
            cover: Some(vec![0]),
        })
        .unwrap();
        let inst = &gen.instance;
        assert_eq!(inst.n_agents(), 24);
        // 8 first-tier + 15 second-tier edges per point gadget, then
        // 2 root edges per gadget and 6 linking edges per set.
        assert_eq!(inst.ground_size(), 24 + 45 + 6 + 18);
        let a = gen.candidate.unwrap();
        assert!(a.is_common_base(inst));
        // Margin bound 2n with n = |U|/3 = 1, via the polynomial route.
        assert!(margin(inst, &a).unwrap() <= 2);
    }
}
