//! Common independent sets in the intersection of two matroids:
//! maximum-cardinality, lexicographically maximal by chain levels, and
//! maximum-weight common bases.
//!
//! All three run the same primal augmenting scheme over the exchange graph,
//! generic over an ordered group of weights. Cardinality-first objectives
//! use a pair whose leading component is 1 per element, and lexicographic
//! level objectives use level-indexed vectors; both avoid the big-M blowup
//! of scalarizing and keep arithmetic exact.
//!
//! Determinism contract: augmenting paths maximize total gain, then
//! minimize hop count; remaining ties are broken toward smaller element ids
//! (arcs relax in ascending id order and only strict improvements replace a
//! label). Given equal inputs the result is bit-identical across runs.

use crate::elements::{ElemSet, ElementId};
use crate::error::Error;
use crate::matroid::Matroid;

/// Totally ordered abelian group; enough structure for augmenting gains.
pub trait Weight: Clone + Ord + std::fmt::Debug {
    fn zero() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Weight for i64 {
    fn zero() -> Self {
        0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl<A: Weight, B: Weight> Weight for (A, B) {
    fn zero() -> Self {
        (A::zero(), B::zero())
    }
    fn add(&self, rhs: &Self) -> Self {
        (self.0.add(&rhs.0), self.1.add(&rhs.1))
    }
    fn neg(&self) -> Self {
        (self.0.neg(), self.1.neg())
    }
}

impl<A: Weight, B: Weight, C: Weight> Weight for (A, B, C) {
    fn zero() -> Self {
        (A::zero(), B::zero(), C::zero())
    }
    fn add(&self, rhs: &Self) -> Self {
        (self.0.add(&rhs.0), self.1.add(&rhs.1), self.2.add(&rhs.2))
    }
    fn neg(&self) -> Self {
        (self.0.neg(), self.1.neg(), self.2.neg())
    }
}

/// Level-indexed counts compared lexicographically; index 0 is the innermost
/// (most significant) chain set. Missing trailing entries count as zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelVec(pub Vec<i64>);

impl LevelVec {
    pub fn unit(level: usize, p: usize) -> LevelVec {
        let mut v = vec![0; p];
        v[level] = 1;
        LevelVec(v)
    }
}

impl PartialOrd for LevelVec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LevelVec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let n = self.0.len().max(other.0.len());
        for i in 0..n {
            let a = self.0.get(i).copied().unwrap_or(0);
            let b = other.0.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => {}
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl Weight for LevelVec {
    fn zero() -> Self {
        LevelVec(Vec::new())
    }
    fn add(&self, rhs: &Self) -> Self {
        let n = self.0.len().max(rhs.0.len());
        LevelVec(
            (0..n)
                .map(|i| {
                    self.0.get(i).copied().unwrap_or(0) + rhs.0.get(i).copied().unwrap_or(0)
                })
                .collect(),
        )
    }
    fn neg(&self) -> Self {
        LevelVec(self.0.iter().map(|x| -x).collect())
    }
}

/// `lev_C` values: every ground element carries its chain level in `1..=p`.
#[derive(Clone, Debug)]
pub struct LevelWeights {
    pub level: Vec<u32>,
    pub p: usize,
}

const NONE: u32 = u32::MAX;

struct PathSearch<W> {
    gain: Vec<Option<W>>,
    hops: Vec<u32>,
    pred: Vec<u32>,
}

/// One augmentation step: find a source-to-sink path in the exchange graph
/// maximizing (gain, -hops) and toggle it into `current`. Returns the gain,
/// or None when no path exists.
fn augment<W: Weight>(
    m1: &Matroid,
    m2: &Matroid,
    allowed: &ElemSet,
    weight: &impl Fn(ElementId) -> W,
    current: &mut ElemSet,
) -> Option<W> {
    let ground = allowed.ground_size();
    let inside: Vec<ElementId> = current.iter().collect();
    let outside: Vec<ElementId> = allowed.difference(current).iter().collect();

    // Node gains: adding x gains w(x); dropping y pays w(y).
    let sigma: Vec<Option<W>> = (0..ground)
        .map(|e| {
            if !allowed.contains(e) {
                None
            } else if current.contains(e) {
                Some(weight(e).neg())
            } else {
                Some(weight(e))
            }
        })
        .collect();

    let mut sources = Vec::new();
    let mut is_sink = vec![false; ground];
    for &x in &outside {
        if m1.is_independent(&current.with(x)) {
            sources.push(x);
        }
        if m2.is_independent(&current.with(x)) {
            is_sink[x] = true;
        }
    }

    // Exchange arcs: y->x (y in I, x out) when I-y+x stays independent in
    // m1; x->y when it stays independent in m2.
    let mut arcs: Vec<Vec<u32>> = vec![Vec::new(); ground];
    for &y in &inside {
        let removed = current.without(y);
        for &x in &outside {
            let swapped = removed.with(x);
            if m1.is_independent(&swapped) {
                arcs[y].push(x as u32);
            }
            if m2.is_independent(&swapped) {
                arcs[x].push(y as u32);
            }
        }
    }

    let mut search = PathSearch {
        gain: vec![None; ground],
        hops: vec![0; ground],
        pred: vec![NONE; ground],
    };
    for &s in &sources {
        search.gain[s] = sigma[s].clone();
        search.hops[s] = 1;
    }

    // Bellman-Ford on (gain, hops); no positive cycle exists while the
    // current set is extreme, so node-count rounds suffice.
    let node_count = inside.len() + outside.len();
    for _ in 0..=node_count {
        let mut changed = false;
        for (u, out) in arcs.iter().enumerate() {
            let Some(gu) = search.gain[u].clone() else {
                continue;
            };
            let hu = search.hops[u];
            for &v in out {
                let v = v as usize;
                let cand = gu.add(sigma[v].as_ref().expect("arc into disallowed node"));
                let better = match &search.gain[v] {
                    None => true,
                    Some(gv) => cand > *gv || (cand == *gv && hu + 1 < search.hops[v]),
                };
                if better {
                    search.gain[v] = Some(cand);
                    search.hops[v] = hu + 1;
                    search.pred[v] = u as u32;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut best: Option<ElementId> = None;
    for &t in &outside {
        if !is_sink[t] || search.gain[t].is_none() {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (gb, hb) = (search.gain[b].clone().unwrap(), search.hops[b]);
                let (gt, ht) = (search.gain[t].clone().unwrap(), search.hops[t]);
                gt > gb || (gt == gb && ht < hb)
            }
        };
        if better {
            best = Some(t);
        }
    }
    let target = best?;
    let gain = search.gain[target].clone().unwrap();

    let mut node = target;
    let mut steps = 0;
    loop {
        if current.contains(node) {
            current.remove(node);
        } else {
            current.insert(node);
        }
        if search.pred[node] == NONE {
            break;
        }
        node = search.pred[node] as usize;
        steps += 1;
        assert!(steps <= node_count, "cycle in augmenting path reconstruction");
    }
    Some(gain)
}

/// Augment while the best path has strictly positive gain. Gains along the
/// run are non-increasing, so the first non-positive one ends the search at
/// a global maximum-weight common independent set.
fn run<W: Weight>(
    m1: &Matroid,
    m2: &Matroid,
    allowed: &ElemSet,
    weight: impl Fn(ElementId) -> W,
) -> ElemSet {
    let mut current = ElemSet::empty(allowed.ground_size());
    loop {
        let mut next = current.clone();
        match augment(m1, m2, allowed, &weight, &mut next) {
            Some(gain) if gain > W::zero() => {
                debug_assert_eq!(next.len(), current.len() + 1);
                debug_assert!(m1.is_independent(&next));
                debug_assert!(m2.is_independent(&next));
                current = next;
            }
            _ => return current,
        }
    }
}

fn check_grounds(m1: &Matroid, m2: &Matroid) -> Result<usize, Error> {
    let (g1, g2) = (m1.ground_size(), m2.ground_size());
    if g1 != g2 {
        return Err(Error::GroundMismatch(g1, g2));
    }
    Ok(g1)
}

/// Maximum-cardinality common independent set.
pub fn max_common_independent(m1: &Matroid, m2: &Matroid) -> Result<ElemSet, Error> {
    let ground = check_grounds(m1, m2)?;
    Ok(run(m1, m2, &ElemSet::full(ground), |_| 1i64))
}

/// Common independent set inside `allowed` whose profile
/// `(|I with level <= 1|, ..., |I with level <= p|)` is lexicographically
/// maximum. Comparing per-level counts lexicographically is equivalent.
pub fn lex_max_common_independent(
    m1: &Matroid,
    m2: &Matroid,
    weights: &LevelWeights,
    allowed: &ElemSet,
) -> ElemSet {
    debug_assert_eq!(weights.level.len(), allowed.ground_size());
    let p = weights.p;
    run(m1, m2, allowed, |e| {
        LevelVec::unit(weights.level[e] as usize - 1, p)
    })
}

/// Maximum-weight common base (generic weights, selection limited to
/// `allowed`). Errors when no common base lies within `allowed`.
pub fn max_weight_common_base_in<W: Weight>(
    m1: &Matroid,
    m2: &Matroid,
    allowed: &ElemSet,
    weight: impl Fn(ElementId) -> W,
) -> Result<(ElemSet, W), Error> {
    let ground = check_grounds(m1, m2)?;
    let full = ElemSet::full(ground);
    let (r1, r2) = (m1.rank(&full), m2.rank(&full));
    let base = run(m1, m2, allowed, |e| (1i64, weight(e)));
    if r1 != r2 || base.len() != r1 {
        return Err(Error::NoCommonBase);
    }
    let total = base
        .iter()
        .fold(W::zero(), |acc, e| acc.add(&weight(e)));
    Ok((base, total))
}

/// Maximum-weight common base with integer weights over the full ground.
pub fn max_weight_common_base(
    m1: &Matroid,
    m2: &Matroid,
    w: &[i64],
) -> Result<(ElemSet, i64), Error> {
    let ground = check_grounds(m1, m2)?;
    let (base, total) = max_weight_common_base_in(m1, m2, &ElemSet::full(ground), |e| w[e])?;
    Ok((base, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn subsets(ground: usize) -> impl Iterator<Item = ElemSet> {
        (0u32..(1 << ground))
            .map(move |mask| ElemSet::from_iter(ground, (0..ground).filter(|e| mask >> e & 1 == 1)))
    }

    fn random_graphic(rng: &mut ChaCha8Rng, ground: usize, n_vertices: usize) -> Matroid {
        let endpoints = (0..ground)
            .map(|_| {
                (
                    rng.gen_range(0..n_vertices) as u32,
                    rng.gen_range(0..n_vertices) as u32,
                )
            })
            .collect();
        Matroid::graphic(n_vertices, endpoints)
    }

    fn random_partition(rng: &mut ChaCha8Rng, ground: usize, classes: usize) -> Matroid {
        let class_of = (0..ground).map(|_| rng.gen_range(0..classes) as u32).collect();
        Matroid::partition(class_of, vec![1; classes])
    }

    /// Composite oracles stress the generic code paths of the engine.
    fn random_composite(rng: &mut ChaCha8Rng, ground: usize) -> Matroid {
        let verts = rng.gen_range(3..6);
        let graphic = random_graphic(rng, ground, verts);
        match rng.gen_range(0..4) {
            0 => graphic.truncate(rng.gen_range(1..=3)),
            1 => {
                let keep = ElemSet::from_iter(ground, (0..ground).filter(|_| rng.gen_bool(0.5)));
                let sub = graphic.greedy_basis_of(&keep);
                graphic.contract(sub)
            }
            2 => {
                let split = rng.gen_range(1..ground);
                let left = ElemSet::from_iter(ground, 0..split);
                let right = ElemSet::from_iter(ground, split..ground);
                let cap = rng.gen_range(1..=2);
                Matroid::direct_sum(
                    ground,
                    vec![
                        (left.clone(), Matroid::uniform(ground, left, cap)),
                        (right.clone(), graphic.restrict(right)),
                    ],
                )
                .unwrap()
            }
            _ => {
                let keep = ElemSet::from_iter(ground, (0..ground).filter(|_| rng.gen_bool(0.7)));
                graphic.restrict(keep).truncate(rng.gen_range(1..=4))
            }
        }
    }

    #[test]
    fn composite_matroids_match_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..80 {
            let ground = rng.gen_range(5..=9);
            let classes = rng.gen_range(2..5);
            let m1 = random_partition(&mut rng, ground, classes);
            let m2 = random_composite(&mut rng, ground);
            let got = max_common_independent(&m1, &m2).unwrap();
            assert!(m1.is_independent(&got) && m2.is_independent(&got));
            let best = subsets(ground)
                .filter(|s| m1.is_independent(s) && m2.is_independent(s))
                .map(|s| s.len())
                .max()
                .unwrap();
            assert_eq!(got.len(), best, "trial {trial}");

            // Lexicographic objective over the same composite pair.
            let p = rng.gen_range(1..=3);
            let level: Vec<u32> = (0..ground).map(|_| rng.gen_range(1..=p as u32)).collect();
            let weights = LevelWeights {
                level: level.clone(),
                p,
            };
            let allowed = ElemSet::full(ground);
            let profile = |s: &ElemSet| -> Vec<i64> {
                let mut v = vec![0; p];
                for e in s.iter() {
                    v[level[e] as usize - 1] += 1;
                }
                v
            };
            let lex = lex_max_common_independent(&m1, &m2, &weights, &allowed);
            let best = subsets(ground)
                .filter(|s| m1.is_independent(s) && m2.is_independent(s))
                .map(|s| profile(&s))
                .max()
                .unwrap();
            assert_eq!(profile(&lex), best, "trial {trial} (lex)");
        }
    }

    #[test]
    fn empty_ground() {
        let m = Matroid::free(0);
        assert!(max_common_independent(&m, &m).unwrap().is_empty());
    }

    #[test]
    fn max_cardinality_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let ground = 8;
            let classes = rng.gen_range(2..5);
            let m1 = random_partition(&mut rng, ground, classes);
            let verts = rng.gen_range(3..6);
            let m2 = random_graphic(&mut rng, ground, verts);
            let got = max_common_independent(&m1, &m2).unwrap();
            assert!(m1.is_independent(&got) && m2.is_independent(&got));
            let best = subsets(ground)
                .filter(|s| m1.is_independent(s) && m2.is_independent(s))
                .map(|s| s.len())
                .max()
                .unwrap();
            assert_eq!(got.len(), best, "trial {trial}");
        }
    }

    #[test]
    fn lex_profile_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..60 {
            let ground = rng.gen_range(6..=10);
            let p = rng.gen_range(1..=3);
            let classes = rng.gen_range(2..5);
            let m1 = random_partition(&mut rng, ground, classes);
            let verts = rng.gen_range(3..6);
            let m2 = random_graphic(&mut rng, ground, verts);
            let level: Vec<u32> = (0..ground).map(|_| rng.gen_range(1..=p as u32)).collect();
            let weights = LevelWeights {
                level: level.clone(),
                p,
            };
            let mut allowed = ElemSet::empty(ground);
            for e in 0..ground {
                if rng.gen_bool(0.8) {
                    allowed.insert(e);
                }
            }
            let profile = |s: &ElemSet| -> Vec<i64> {
                let mut v = vec![0; p];
                for e in s.iter() {
                    v[level[e] as usize - 1] += 1;
                }
                v
            };
            let got = lex_max_common_independent(&m1, &m2, &weights, &allowed);
            assert!(got.is_subset(&allowed));
            let got_profile = profile(&got);
            let best = subsets(ground)
                .filter(|s| {
                    s.is_subset(&allowed) && m1.is_independent(s) && m2.is_independent(s)
                })
                .map(|s| profile(&s))
                .max()
                .unwrap();
            assert_eq!(got_profile, best, "trial {trial}");
        }
    }

    #[test]
    fn single_level_reduces_to_max_cardinality() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let ground = 8;
            let m1 = random_partition(&mut rng, ground, 4);
            let m2 = random_graphic(&mut rng, ground, 5);
            let weights = LevelWeights {
                level: vec![1; ground],
                p: 1,
            };
            let lex = lex_max_common_independent(&m1, &m2, &weights, &ElemSet::full(ground));
            let max = max_common_independent(&m1, &m2).unwrap();
            assert_eq!(lex.len(), max.len());
        }
    }

    #[test]
    fn max_weight_base_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut seen_feasible = 0;
        for _ in 0..120 {
            let ground = rng.gen_range(5..=9);
            let classes = rng.gen_range(2..4);
            let m1 = random_partition(&mut rng, ground, classes);
            let verts = rng.gen_range(3..5);
            let m2 = random_graphic(&mut rng, ground, verts);
            let w: Vec<i64> = (0..ground).map(|_| rng.gen_range(-1..=1)).collect();
            let full = ElemSet::full(ground);
            let (r1, r2) = (m1.rank(&full), m2.rank(&full));
            let brute = subsets(ground)
                .filter(|s| {
                    m1.is_independent(s)
                        && m2.is_independent(s)
                        && s.len() == r1
                        && s.len() == r2
                })
                .map(|s| s.iter().map(|e| w[e]).sum::<i64>())
                .max();
            match (max_weight_common_base(&m1, &m2, &w), brute) {
                (Ok((base, total)), Some(best)) => {
                    assert_eq!(base.len(), r1);
                    assert_eq!(total, best);
                    seen_feasible += 1;
                }
                (Err(Error::NoCommonBase), None) => {}
                (got, want) => panic!("engine {got:?} vs brute {want:?}"),
            }
        }
        assert!(seen_feasible > 10, "test generated too few feasible cases");
    }

    #[test]
    fn example1_intersection_has_a_size_four_base() {
        // Partition by heads against the graphic matroid of the A.1 graph.
        let endpoints = vec![
            (1, 2),
            (2, 1),
            (3, 4),
            (4, 3),
            (3, 1),
            (4, 2),
            (1, 3),
            (2, 4),
            (0, 1),
            (0, 2),
            (0, 3),
        ];
        let heads = vec![1u32, 0, 3, 2, 0, 1, 2, 3, 0, 1, 2];
        let m1 = Matroid::partition(heads, vec![1; 4]);
        let m2 = Matroid::graphic(5, endpoints);
        assert_eq!(max_common_independent(&m1, &m2).unwrap().len(), 4);
    }

    #[test]
    fn zero_weights_accept_any_base() {
        // Two disjoint classes, graphic path of two edges: the unique
        // max-cardinality profile has total weight zero.
        let m1 = Matroid::partition(vec![0, 1], vec![1, 1]);
        let m2 = Matroid::graphic(3, vec![(0, 1), (1, 2)]);
        let (base, total) = max_weight_common_base(&m1, &m2, &[0, 0]).unwrap();
        assert_eq!(base.len(), 2);
        assert_eq!(total, 0);
    }
}
