//! Preference instances: data model, JSON documents, and the comparison
//! primitives `wt` and `phi`.
//!
//! An instance couples a partition of the ground set into per-agent classes
//! with a matroid oracle and a strict partial order per agent over its own
//! class. Three kinds share one document schema:
//!
//! * `arborescence` — rooted digraph, agents are the non-root vertices,
//!   classes are incoming-edge sets, matroid is graphic; solutions are
//!   common bases (arborescences).
//! * `colorful_forest` — undirected edges with colors, agents are colors;
//!   solutions are common independent sets of any size (colorful forests).
//! * `generic` — colored elements with an explicit (or default truncated
//!   graphic) matroid; solutions are common bases.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::elements::{ElemSet, ElementId};
use crate::error::Error;
use crate::matroid::Matroid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    Arborescence,
    ColorfulForest,
    Generic,
}

impl InstanceKind {
    fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Arborescence => "arborescence",
            InstanceKind::ColorfulForest => "colorful_forest",
            InstanceKind::Generic => "generic",
        }
    }

    /// Common-base semantics (as opposed to independent sets of any size).
    pub fn is_base_problem(self) -> bool {
        !matches!(self, InstanceKind::ColorfulForest)
    }
}

#[derive(Clone, Debug)]
pub struct EdgeInfo {
    pub tail: String,
    pub head: String,
    pub color: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub kind: InstanceKind,
    pub vertices: Vec<String>,
    pub root: Option<String>,
    pub edges: Vec<EdgeInfo>,
    /// Agent display names; agent ids are indices into this list.
    pub agents: Vec<String>,
    /// Element id -> agent id.
    pub class_of: Vec<u32>,
    /// Agent id -> its class, ascending element ids.
    pub classes: Vec<Vec<ElementId>>,
    pub matroid: Matroid,
    /// Per element, the set of same-class elements it strictly dominates.
    dominates: Vec<ElemSet>,
    /// Per agent: indifference is transitive, so the order is a weak ranking.
    pub weak_ranking: Vec<bool>,
    /// Explicit matroid expression, kept for round-trip serialization.
    matroid_doc: Option<MatroidDoc>,
}

/// A (possibly partial) selection: at most one element per agent class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub elements: ElemSet,
    /// Agent id -> assigned element, if any.
    pub assignment: Vec<Option<ElementId>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    XMorePopular,
    YMorePopular,
    Tie,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cost {
    Finite(BigRational),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct CostMap {
    /// Element id -> cost; every ground element has an entry.
    pub costs: Vec<Cost>,
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    kind: String,
    vertices: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    root: Option<String>,
    edges: Vec<EdgeDoc>,
    preferences: BTreeMap<String, PrefDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matroid: Option<MatroidDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: usize,
    tail: String,
    head: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    color: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PrefDoc {
    Ranks { ranks: Vec<Vec<usize>> },
    Dominates { dominates: Vec<[usize; 2]> },
}

/// Matroid expression tree for instances whose oracle is not implied by the
/// kind (size-window and category reductions produce these).
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MatroidDoc {
    Graphic,
    Free {
        elements: Vec<usize>,
    },
    Uniform {
        elements: Vec<usize>,
        limit: usize,
    },
    Truncate {
        limit: usize,
        inner: Box<MatroidDoc>,
    },
    Restrict {
        elements: Vec<usize>,
        inner: Box<MatroidDoc>,
    },
    Contract {
        elements: Vec<usize>,
        inner: Box<MatroidDoc>,
    },
    DirectSum {
        parts: Vec<DirectSumPartDoc>,
    },
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct DirectSumPartDoc {
    pub support: Vec<usize>,
    pub matroid: MatroidDoc,
}

#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    elements: Vec<usize>,
    assignment: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct CostDoc {
    costs: BTreeMap<String, serde_json::Value>,
}

// ---------------------------------------------------------------------------
// Construction and validation
// ---------------------------------------------------------------------------

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

/// Floyd-Warshall transitive closure of the dominance relation inside one
/// class, then irreflexivity/antisymmetry checks.
fn close_and_check(
    agent: &str,
    class: &[ElementId],
    dominates: &mut [ElemSet],
) -> Result<(), Error> {
    for &k in class {
        for &i in class {
            if dominates[i].contains(k) {
                let dk = dominates[k].clone();
                dominates[i] = dominates[i].union(&dk);
            }
        }
    }
    for &i in class {
        if dominates[i].contains(i) {
            return Err(Error::BadPreferenceOrder {
                agent: agent.to_string(),
                reason: format!("cyclic dominance through element {i}"),
            });
        }
        for &j in class {
            if i < j && dominates[i].contains(j) && dominates[j].contains(i) {
                return Err(Error::BadPreferenceOrder {
                    agent: agent.to_string(),
                    reason: format!("antisymmetry violated on elements {i} and {j}"),
                });
            }
        }
    }
    Ok(())
}

impl Instance {
    pub fn ground_size(&self) -> usize {
        self.edges.len()
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    /// Strict dominance: does `e` beat `f` in their common agent's order?
    pub fn prefers(&self, e: ElementId, f: ElementId) -> bool {
        self.dominates[e].contains(f)
    }

    /// Neither dominates (covers both declared ties and incomparability).
    pub fn tied(&self, e: ElementId, f: ElementId) -> bool {
        !self.prefers(e, f) && !self.prefers(f, e)
    }

    pub fn all_weak_rankings(&self) -> bool {
        self.weak_ranking.iter().all(|&w| w)
    }

    /// The partition matroid of the agent classes (capacity one per class).
    pub fn partition_matroid(&self) -> Matroid {
        Matroid::partition(self.class_of.clone(), vec![1; self.n_agents()])
    }

    /// The full strict-dominance relation as (better, worse) pairs.
    pub fn dominance_pairs(&self) -> Vec<(ElementId, ElementId)> {
        let mut pairs = Vec::new();
        for e in 0..self.ground_size() {
            for f in self.dominates[e].iter() {
                pairs.push((e, f));
            }
        }
        pairs
    }

    /// The matroid expression this instance serializes with; kind defaults
    /// are made explicit so reductions can embed them.
    pub fn matroid_doc_or_default(&self) -> MatroidDoc {
        match &self.matroid_doc {
            Some(doc) => doc.clone(),
            None => match self.kind {
                InstanceKind::Generic => MatroidDoc::Truncate {
                    limit: self.n_agents(),
                    inner: Box::new(MatroidDoc::Graphic),
                },
                _ => MatroidDoc::Graphic,
            },
        }
    }

    /// Build an instance directly (generators and reductions use this; the
    /// same validation as `parse_instance` applies).
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        kind: InstanceKind,
        vertices: Vec<String>,
        root: Option<String>,
        edges: Vec<EdgeInfo>,
        agents: Vec<String>,
        class_of: Vec<u32>,
        dominance_pairs: &[(ElementId, ElementId)],
        matroid: Matroid,
        matroid_doc: Option<MatroidDoc>,
    ) -> Result<Instance, Error> {
        let m = edges.len();
        if matroid.ground_size() != m {
            return Err(Error::GroundMismatch(matroid.ground_size(), m));
        }
        let mut classes = vec![Vec::new(); agents.len()];
        for (e, &a) in class_of.iter().enumerate() {
            if a as usize >= agents.len() {
                return Err(schema(format!("element {e} has unknown agent index {a}")));
            }
            classes[a as usize].push(e);
        }
        let mut dominates = vec![ElemSet::empty(m); m];
        for &(better, worse) in dominance_pairs {
            if better >= m || worse >= m {
                return Err(Error::ElementOutOfRange(better.max(worse), m));
            }
            if class_of[better] != class_of[worse] {
                return Err(schema(format!(
                    "dominance pair ({better},{worse}) crosses agent classes"
                )));
            }
            dominates[better].insert(worse);
        }
        for (a, class) in classes.iter().enumerate() {
            close_and_check(&agents[a], class, &mut dominates)?;
        }
        let weak_ranking = (0..agents.len())
            .map(|a| {
                let class = &classes[a];
                // Indifference must be transitive for a weak ranking.
                for &x in class {
                    for &y in class {
                        for &z in class {
                            if x != y
                                && y != z
                                && x != z
                                && !dominates[x].contains(y)
                                && !dominates[y].contains(x)
                                && !dominates[y].contains(z)
                                && !dominates[z].contains(y)
                                && (dominates[x].contains(z) || dominates[z].contains(x))
                            {
                                return false;
                            }
                        }
                    }
                }
                true
            })
            .collect();
        Ok(Instance {
            kind,
            vertices,
            root,
            edges,
            agents,
            class_of,
            classes,
            matroid,
            dominates,
            weak_ranking,
            matroid_doc,
        })
    }

    // -- comparison primitives ---------------------------------------------

    /// `wt_A(e)`: +1 if the owner of `e` prefers `e` to its assigned
    /// element, -1 for the reverse, 0 if tied or incomparable.
    pub fn wt(&self, sol: &Solution, e: ElementId) -> Result<i8, Error> {
        if e >= self.ground_size() {
            return Err(Error::ElementOutOfRange(e, self.ground_size()));
        }
        let agent = self.class_of[e] as usize;
        let assigned = sol.assignment[agent]
            .ok_or_else(|| Error::UnassignedAgent(self.agents[agent].clone(), e))?;
        Ok(if self.prefers(e, assigned) {
            1
        } else if self.prefers(assigned, e) {
            -1
        } else {
            0
        })
    }

    /// Number of agents preferring `x` to `y`. An agent holding an element
    /// in `x` but none in `y` prefers `x`.
    pub fn phi(&self, x: &Solution, y: &Solution) -> usize {
        let mut count = 0;
        for a in 0..self.n_agents() {
            match (x.assignment[a], y.assignment[a]) {
                (Some(p), Some(q)) => {
                    if self.prefers(p, q) {
                        count += 1;
                    }
                }
                (Some(_), None) => count += 1,
                _ => {}
            }
        }
        count
    }

    pub fn compare(&self, x: &Solution, y: &Solution) -> Comparison {
        let fx = self.phi(x, y);
        let fy = self.phi(y, x);
        match fx.cmp(&fy) {
            std::cmp::Ordering::Greater => Comparison::XMorePopular,
            std::cmp::Ordering::Less => Comparison::YMorePopular,
            std::cmp::Ordering::Equal => Comparison::Tie,
        }
    }
}

impl Solution {
    pub fn from_elements(inst: &Instance, elements: ElemSet) -> Result<Solution, Error> {
        let mut assignment = vec![None; inst.n_agents()];
        for e in elements.iter() {
            let a = inst.class_of[e] as usize;
            if let Some(prev) = assignment[a] {
                return Err(schema(format!(
                    "elements {prev} and {e} both belong to agent {:?}",
                    inst.agents[a]
                )));
            }
            assignment[a] = Some(e);
        }
        Ok(Solution {
            elements,
            assignment,
        })
    }

    pub fn is_common_base(&self, inst: &Instance) -> bool {
        self.assignment.iter().all(|a| a.is_some())
            && inst.matroid.is_independent(&self.elements)
            && self.elements.len() == inst.matroid.rank(&ElemSet::full(inst.ground_size()))
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_instance(bytes: &[u8]) -> Result<Instance, Error> {
    let doc: InstanceDoc = serde_json::from_slice(bytes)?;
    instance_from_doc(doc)
}

fn instance_from_doc(doc: InstanceDoc) -> Result<Instance, Error> {
    let kind = match doc.kind.as_str() {
        "arborescence" => InstanceKind::Arborescence,
        "colorful_forest" => InstanceKind::ColorfulForest,
        "generic" => InstanceKind::Generic,
        other => return Err(schema(format!("unknown kind {other:?}"))),
    };
    // Arborescence documents without a root are branching-style digraphs;
    // they parse fine and become solvable via the branching reduction.
    if kind != InstanceKind::Arborescence && doc.root.is_some() {
        return Err(schema("root is only valid for arborescence instances"));
    }

    // Edge ids must be dense 0..m-1.
    let m = doc.edges.len();
    let mut edges: Vec<Option<EdgeDoc>> = (0..m).map(|_| None).collect();
    for e in doc.edges {
        let id = e.id;
        if id >= m {
            return Err(schema(format!("edge id {id} not in 0..{m}")));
        }
        if edges[id].is_some() {
            return Err(schema(format!("duplicate edge id {id}")));
        }
        edges[id] = Some(e);
    }
    let edges: Vec<EdgeDoc> = edges.into_iter().map(|e| e.unwrap()).collect();

    let mut known: BTreeSet<&str> = BTreeSet::new();
    for v in &doc.vertices {
        if !known.insert(v.as_str()) {
            return Err(schema(format!("duplicate vertex {v:?}")));
        }
    }
    if let Some(r) = &doc.root {
        if !known.insert(r.as_str()) {
            return Err(schema("root must not appear in the vertex list"));
        }
    }

    for e in &edges {
        if !known.contains(e.tail.as_str()) {
            return Err(schema(format!("unknown tail vertex {:?}", e.tail)));
        }
        if !known.contains(e.head.as_str()) {
            return Err(schema(format!("unknown head vertex {:?}", e.head)));
        }
        if let Some(r) = &doc.root {
            if &e.head == r {
                return Err(schema(format!(
                    "root {r:?} has an incoming edge from {:?}",
                    e.tail
                )));
            }
        }
        match kind {
            InstanceKind::Arborescence => {
                if e.color.is_some() {
                    return Err(schema("colors are not valid in arborescence instances"));
                }
            }
            _ => {
                if e.color.is_none() {
                    return Err(schema(format!(
                        "edge {} needs a color in {} instances",
                        e.id,
                        kind.as_str()
                    )));
                }
            }
        }
    }

    // Agents and classes.
    let agents: Vec<String> = match kind {
        InstanceKind::Arborescence => doc.vertices.clone(),
        _ => {
            let mut set: Vec<String> = edges
                .iter()
                .filter_map(|e| e.color.clone())
                .chain(doc.preferences.keys().cloned())
                .collect();
            set.sort();
            set.dedup();
            set
        }
    };
    let agent_of = |name: &str| agents.iter().position(|a| a == name);
    let mut class_of = vec![0u32; m];
    for (i, e) in edges.iter().enumerate() {
        let owner = match kind {
            InstanceKind::Arborescence => e.head.as_str(),
            _ => e.color.as_deref().unwrap(),
        };
        class_of[i] = agent_of(owner)
            .ok_or_else(|| schema(format!("edge {i} owned by unknown agent {owner:?}")))?
            as u32;
    }

    // Preferences -> dominance pairs.
    let mut pairs: Vec<(ElementId, ElementId)> = Vec::new();
    for (agent, pref) in &doc.preferences {
        let a = agent_of(agent).ok_or_else(|| schema(format!("unknown agent {agent:?}")))?;
        let class: Vec<ElementId> = (0..m).filter(|&e| class_of[e] as usize == a).collect();
        match pref {
            PrefDoc::Ranks { ranks } => {
                let mut seen = vec![false; m];
                for group in ranks {
                    for &e in group {
                        if e >= m || class_of[e] as usize != a {
                            return Err(schema(format!(
                                "rank entry {e} is not in agent {agent:?}'s class"
                            )));
                        }
                        if seen[e] {
                            return Err(schema(format!("element {e} ranked twice")));
                        }
                        seen[e] = true;
                    }
                }
                if let Some(&missing) = class.iter().find(|&&e| !seen[e]) {
                    return Err(schema(format!(
                        "agent {agent:?}'s ranks omit element {missing}"
                    )));
                }
                for (gi, group) in ranks.iter().enumerate() {
                    for lower in &ranks[gi + 1..] {
                        for &e in group {
                            for &f in lower {
                                pairs.push((e, f));
                            }
                        }
                    }
                }
            }
            PrefDoc::Dominates { dominates } => {
                for &[better, worse] in dominates {
                    if better >= m || class_of[better] as usize != a {
                        return Err(schema(format!(
                            "dominance entry {better} is not in agent {agent:?}'s class"
                        )));
                    }
                    if worse >= m || class_of[worse] as usize != a {
                        return Err(schema(format!(
                            "dominance entry {worse} is not in agent {agent:?}'s class"
                        )));
                    }
                    pairs.push((better, worse));
                }
            }
        }
    }

    let edge_infos: Vec<EdgeInfo> = edges
        .into_iter()
        .map(|e| EdgeInfo {
            tail: e.tail,
            head: e.head,
            color: e.color,
        })
        .collect();
    let graphic = graphic_matroid(&doc.vertices, doc.root.as_deref(), &edge_infos);
    let matroid = match &doc.matroid {
        Some(mdoc) => build_matroid(mdoc, &graphic, m)?,
        None => default_matroid(kind, graphic, agents.len()),
    };
    Instance::assemble(
        kind,
        doc.vertices,
        doc.root,
        edge_infos,
        agents,
        class_of,
        &pairs,
        matroid,
        doc.matroid,
    )
}

/// Graphic matroid of the instance graph; vertex ids follow the vertex
/// list, with the root (when present) last.
pub fn graphic_matroid(
    vertices: &[String],
    root: Option<&str>,
    edges: &[EdgeInfo],
) -> Matroid {
    let mut index: BTreeMap<&str, u32> = BTreeMap::new();
    for (i, v) in vertices.iter().enumerate() {
        index.insert(v.as_str(), i as u32);
    }
    if let Some(r) = root {
        index.insert(r, vertices.len() as u32);
    }
    let endpoints = edges
        .iter()
        .map(|e| (index[e.tail.as_str()], index[e.head.as_str()]))
        .collect();
    Matroid::graphic(index.len(), endpoints)
}

pub(crate) fn default_matroid(kind: InstanceKind, graphic: Matroid, n_agents: usize) -> Matroid {
    match kind {
        InstanceKind::Arborescence | InstanceKind::ColorfulForest => graphic,
        InstanceKind::Generic => graphic.truncate(n_agents),
    }
}

pub(crate) fn build_matroid(
    doc: &MatroidDoc,
    graphic: &Matroid,
    ground: usize,
) -> Result<Matroid, Error> {
    let set = |ids: &[usize]| -> Result<ElemSet, Error> {
        for &e in ids {
            if e >= ground {
                return Err(Error::ElementOutOfRange(e, ground));
            }
        }
        Ok(ElemSet::from_iter(ground, ids.iter().copied()))
    };
    Ok(match doc {
        MatroidDoc::Graphic => graphic.clone(),
        MatroidDoc::Free { elements } => {
            let support = set(elements)?;
            let limit = support.len();
            Matroid::uniform(ground, support, limit)
        }
        MatroidDoc::Uniform { elements, limit } => Matroid::uniform(ground, set(elements)?, *limit),
        MatroidDoc::Truncate { limit, inner } => {
            build_matroid(inner, graphic, ground)?.truncate(*limit)
        }
        MatroidDoc::Restrict { elements, inner } => {
            build_matroid(inner, graphic, ground)?.restrict(set(elements)?)
        }
        MatroidDoc::Contract { elements, inner } => {
            build_matroid(inner, graphic, ground)?.contract(set(elements)?)
        }
        MatroidDoc::DirectSum { parts } => {
            let mut built = Vec::new();
            for part in parts {
                built.push((set(&part.support)?, build_matroid(&part.matroid, graphic, ground)?));
            }
            Matroid::direct_sum(ground, built)?
        }
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Canonical serialization: sorted preference keys, ranks form for weak
/// rankings, full dominance closure otherwise. `parse(serialize(x))`
/// induces the same dominance relation as `x`.
pub fn serialize_instance(inst: &Instance) -> Vec<u8> {
    let mut preferences = BTreeMap::new();
    for (a, name) in inst.agents.iter().enumerate() {
        let class = &inst.classes[a];
        if class.is_empty() {
            continue;
        }
        let has_any = class
            .iter()
            .any(|&e| !inst.dominates[e].is_empty());
        let doc = if inst.weak_ranking[a] {
            // Layered by how many class elements dominate each element.
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &e in class {
                let above = class.iter().filter(|&&f| inst.prefers(f, e)).count();
                groups.entry(above).or_default().push(e);
            }
            PrefDoc::Ranks {
                ranks: groups.into_values().collect(),
            }
        } else {
            let mut dominates = Vec::new();
            for &e in class {
                for f in inst.dominates[e].iter() {
                    dominates.push([e, f]);
                }
            }
            dominates.sort();
            PrefDoc::Dominates { dominates }
        };
        if has_any || !matches!(doc, PrefDoc::Dominates { ref dominates } if dominates.is_empty())
        {
            preferences.insert(name.clone(), doc);
        }
    }
    let doc = InstanceDoc {
        kind: inst.kind.as_str().to_string(),
        vertices: inst.vertices.clone(),
        root: inst.root.clone(),
        edges: inst
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeDoc {
                id,
                tail: e.tail.clone(),
                head: e.head.clone(),
                color: e.color.clone(),
            })
            .collect(),
        preferences,
        matroid: inst.matroid_doc.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("instance serialization");
    bytes.push(b'\n');
    bytes
}

pub fn parse_solution(inst: &Instance, bytes: &[u8]) -> Result<Solution, Error> {
    let doc: SolutionDoc = serde_json::from_slice(bytes)?;
    let mut elements = ElemSet::empty(inst.ground_size());
    for e in doc.elements {
        if e >= inst.ground_size() {
            return Err(Error::ElementOutOfRange(e, inst.ground_size()));
        }
        elements.insert(e);
    }
    let sol = Solution::from_elements(inst, elements)?;
    for (agent, e) in doc.assignment {
        let a = inst
            .agent_index(&agent)
            .ok_or_else(|| schema(format!("unknown agent {agent:?}")))?;
        if sol.assignment[a] != Some(e) {
            return Err(schema(format!(
                "assignment for {agent:?} does not match the element list"
            )));
        }
    }
    Ok(sol)
}

pub fn serialize_solution(inst: &Instance, sol: &Solution) -> Vec<u8> {
    let doc = solution_doc(inst, sol);
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("solution serialization");
    bytes.push(b'\n');
    bytes
}

pub fn solution_to_value(inst: &Instance, sol: &Solution) -> serde_json::Value {
    serde_json::to_value(solution_doc(inst, sol)).expect("solution serialization")
}

fn solution_doc(inst: &Instance, sol: &Solution) -> SolutionDoc {
    SolutionDoc {
        elements: sol.elements.to_vec(),
        assignment: sol
            .assignment
            .iter()
            .enumerate()
            .filter_map(|(a, e)| e.map(|e| (inst.agents[a].clone(), e)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Costs
// ---------------------------------------------------------------------------

impl CostMap {
    pub fn parse(inst: &Instance, bytes: &[u8]) -> Result<CostMap, Error> {
        let doc: CostDoc = serde_json::from_slice(bytes)?;
        let m = inst.ground_size();
        let mut costs: Vec<Option<Cost>> = vec![None; m];
        for (key, value) in doc.costs {
            let id: usize = key
                .parse()
                .map_err(|_| schema(format!("cost key {key:?} is not an element id")))?;
            if id >= m {
                return Err(Error::ElementOutOfRange(id, m));
            }
            costs[id] = Some(parse_cost_value(&value)?);
        }
        let costs = costs
            .into_iter()
            .enumerate()
            .map(|(e, c)| c.ok_or_else(|| schema(format!("element {e} has no cost"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CostMap { costs })
    }

    pub fn serialize(&self) -> Vec<u8> {
        let doc = CostDoc {
            costs: self
                .costs
                .iter()
                .enumerate()
                .map(|(e, c)| (e.to_string(), cost_to_value(c)))
                .collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("cost serialization");
        bytes.push(b'\n');
        bytes
    }
}

fn parse_cost_value(value: &serde_json::Value) -> Result<Cost, Error> {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Cost::Finite(BigRational::from_integer(BigInt::from(i))))
            } else if let Some(u) = n.as_u64() {
                Ok(Cost::Finite(BigRational::from_integer(BigInt::from(u))))
            } else {
                let f = n.as_f64().ok_or_else(|| schema("unreadable cost number"))?;
                BigRational::from_f64(f)
                    .map(Cost::Finite)
                    .ok_or_else(|| schema(format!("cost {f} is not finite")))
            }
        }
        serde_json::Value::String(s) if s == "inf" => Ok(Cost::Infinite),
        serde_json::Value::String(s) => {
            // "p/q" exact rationals.
            let (p, q) = s
                .split_once('/')
                .ok_or_else(|| schema(format!("bad cost string {s:?}")))?;
            let p: BigInt = p
                .parse()
                .map_err(|_| schema(format!("bad cost numerator {p:?}")))?;
            let q: BigInt = q
                .parse()
                .map_err(|_| schema(format!("bad cost denominator {q:?}")))?;
            if q.is_zero() {
                return Err(schema("cost denominator is zero"));
            }
            Ok(Cost::Finite(BigRational::new(p, q)))
        }
        _ => Err(schema("cost must be a number or \"inf\"")),
    }
}

pub fn cost_to_value(cost: &Cost) -> serde_json::Value {
    match cost {
        Cost::Infinite => serde_json::Value::String("inf".to_string()),
        Cost::Finite(r) => {
            if r.is_integer() {
                let n = r.to_integer();
                if let Ok(i) = i64::try_from(&n) {
                    return serde_json::json!(i);
                }
                serde_json::Value::String(n.to_string())
            } else {
                serde_json::Value::String(format!("{}/{}", r.numer(), r.denom()))
            }
        }
    }
}

pub fn rational_is_negative(r: &BigRational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TINY: &str = r#"{
        "kind": "arborescence",
        "vertices": ["a", "b"],
        "root": "r",
        "edges": [
            {"id": 0, "tail": "r", "head": "a"},
            {"id": 1, "tail": "b", "head": "a"},
            {"id": 2, "tail": "a", "head": "b"}
        ],
        "preferences": {"a": {"ranks": [[1], [0]]}}
    }"#;

    #[test]
    fn parse_tiny() {
        let inst = parse_instance(TINY.as_bytes()).unwrap();
        assert_eq!(inst.n_agents(), 2);
        assert_eq!(inst.ground_size(), 3);
        assert!(inst.prefers(1, 0));
        assert!(!inst.prefers(0, 1));
        assert!(inst.all_weak_rankings());
    }

    #[test]
    fn empty_instance_is_valid() {
        let doc = r#"{"kind": "colorful_forest", "vertices": [], "edges": [], "preferences": {}}"#;
        let inst = parse_instance(doc.as_bytes()).unwrap();
        assert_eq!(inst.ground_size(), 0);
        assert_eq!(inst.n_agents(), 0);
    }

    #[test]
    fn antisymmetry_violation_rejected() {
        let doc = r#"{
            "kind": "arborescence",
            "vertices": ["a"],
            "root": "r",
            "edges": [
                {"id": 0, "tail": "r", "head": "a"},
                {"id": 1, "tail": "r", "head": "a"}
            ],
            "preferences": {"a": {"dominates": [[0, 1], [1, 0]]}}
        }"#;
        match parse_instance(doc.as_bytes()) {
            Err(Error::BadPreferenceOrder { .. }) => {}
            other => panic!("expected preference error, got {other:?}"),
        }
    }

    #[test]
    fn root_with_incoming_edge_rejected() {
        let doc = r#"{
            "kind": "arborescence",
            "vertices": ["a"],
            "root": "r",
            "edges": [{"id": 0, "tail": "a", "head": "r"}],
            "preferences": {}
        }"#;
        assert!(matches!(parse_instance(doc.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn roundtrip_is_stable() {
        let inst = parse_instance(TINY.as_bytes()).unwrap();
        let bytes = serialize_instance(&inst);
        let reparsed = parse_instance(&bytes).unwrap();
        assert_eq!(serialize_instance(&reparsed), bytes);
        for e in 0..inst.ground_size() {
            for f in 0..inst.ground_size() {
                assert_eq!(inst.prefers(e, f), reparsed.prefers(e, f));
            }
        }
    }

    #[test]
    fn cost_parsing() {
        let inst = parse_instance(TINY.as_bytes()).unwrap();
        let doc = r#"{"costs": {"0": 1, "1": "inf", "2": "1/3"}}"#;
        let costs = CostMap::parse(&inst, doc.as_bytes()).unwrap();
        assert_eq!(costs.costs[1], Cost::Infinite);
        assert_eq!(
            costs.costs[2],
            Cost::Finite(BigRational::new(BigInt::from(1), BigInt::from(3)))
        );
        let missing = r#"{"costs": {"0": 1}}"#;
        assert!(CostMap::parse(&inst, missing.as_bytes()).is_err());
    }
}
