//! Matroid oracles over a shared ground set of dense element ids.
//!
//! Every oracle answers `is_independent`, `rank`, and `span` for subsets of
//! one common ground `0..ground_size`. Minor-style constructions
//! (restriction, contraction, truncation, direct sum) keep the original ids,
//! so element identity is stable across compositions. Elements outside an
//! oracle's support behave as loops: no independent set contains them.

use crate::elements::ElemSet;
use crate::error::Error;

/// Union-find with path halving; rebuilt per query.
struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra as usize] = rb;
        true
    }
}

#[derive(Clone, Debug)]
pub enum Matroid {
    /// Every subset independent.
    Free { ground: usize },
    /// Subsets of `support` with at most `limit` elements.
    Uniform {
        ground: usize,
        support: ElemSet,
        limit: usize,
    },
    /// Acyclic edge sets of an undirected multigraph; element `e` is the
    /// edge `endpoints[e]`.
    Graphic {
        n_vertices: usize,
        endpoints: Vec<(u32, u32)>,
    },
    /// At most `cap[c]` elements from each class; `class_of[e]` is the class
    /// of element `e`.
    Partition { class_of: Vec<u32>, cap: Vec<u32> },
    Truncation { inner: Box<Matroid>, limit: usize },
    Restriction { inner: Box<Matroid>, subset: ElemSet },
    /// Contraction by `subset`; `base` is a fixed base of `subset` in the
    /// inner matroid (greedy in id order, so contraction is deterministic).
    Contraction {
        inner: Box<Matroid>,
        subset: ElemSet,
        base: ElemSet,
    },
    /// Disjoint union: independent iff the restriction to every part's
    /// support is independent there and nothing lies outside all supports.
    DirectSum { ground: usize, parts: Vec<(ElemSet, Matroid)> },
}

impl Matroid {
    pub fn free(ground: usize) -> Matroid {
        Matroid::Free { ground }
    }

    pub fn uniform(ground: usize, support: ElemSet, limit: usize) -> Matroid {
        Matroid::Uniform {
            ground,
            support,
            limit,
        }
    }

    pub fn graphic(n_vertices: usize, endpoints: Vec<(u32, u32)>) -> Matroid {
        Matroid::Graphic {
            n_vertices,
            endpoints,
        }
    }

    pub fn partition(class_of: Vec<u32>, cap: Vec<u32>) -> Matroid {
        Matroid::Partition { class_of, cap }
    }

    pub fn truncate(self, limit: usize) -> Matroid {
        Matroid::Truncation {
            inner: Box::new(self),
            limit,
        }
    }

    pub fn restrict(self, subset: ElemSet) -> Matroid {
        Matroid::Restriction {
            inner: Box::new(self),
            subset,
        }
    }

    /// Contract `subset`, fixing the greedy id-order base of `subset`.
    pub fn contract(self, subset: ElemSet) -> Matroid {
        let mut base = ElemSet::empty(self.ground_size());
        for e in subset.iter() {
            if self.is_independent(&base.with(e)) {
                base.insert(e);
            }
        }
        Matroid::Contraction {
            inner: Box::new(self),
            subset,
            base,
        }
    }

    pub fn direct_sum(ground: usize, parts: Vec<(ElemSet, Matroid)>) -> Result<Matroid, Error> {
        let mut seen = ElemSet::empty(ground);
        for (support, _) in &parts {
            if !support.intersection(&seen).is_empty() {
                return Err(Error::OverlappingDirectSum);
            }
            seen = seen.union(support);
        }
        Ok(Matroid::DirectSum { ground, parts })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Matroid::Free { ground } => *ground,
            Matroid::Uniform { ground, .. } => *ground,
            Matroid::Graphic { endpoints, .. } => endpoints.len(),
            Matroid::Partition { class_of, .. } => class_of.len(),
            Matroid::Truncation { inner, .. } => inner.ground_size(),
            Matroid::Restriction { inner, .. } => inner.ground_size(),
            Matroid::Contraction { inner, .. } => inner.ground_size(),
            Matroid::DirectSum { ground, .. } => *ground,
        }
    }

    pub fn is_independent(&self, s: &ElemSet) -> bool {
        debug_assert_eq!(s.ground_size(), self.ground_size());
        match self {
            Matroid::Free { .. } => true,
            Matroid::Uniform { support, limit, .. } => {
                s.is_subset(support) && s.len() <= *limit
            }
            Matroid::Graphic {
                n_vertices,
                endpoints,
            } => {
                let mut dsu = Dsu::new(*n_vertices);
                for e in s.iter() {
                    let (u, v) = endpoints[e];
                    if u == v || !dsu.union(u, v) {
                        return false;
                    }
                }
                true
            }
            Matroid::Partition { class_of, cap } => {
                let mut counts = vec![0u32; cap.len()];
                for e in s.iter() {
                    let c = class_of[e] as usize;
                    counts[c] += 1;
                    if counts[c] > cap[c] {
                        return false;
                    }
                }
                true
            }
            Matroid::Truncation { inner, limit } => {
                s.len() <= *limit && inner.is_independent(s)
            }
            Matroid::Restriction { inner, subset } => {
                s.is_subset(subset) && inner.is_independent(s)
            }
            Matroid::Contraction {
                inner,
                subset,
                base,
            } => s.intersection(subset).is_empty() && inner.is_independent(&s.union(base)),
            Matroid::DirectSum { parts, .. } => {
                let mut rest = s.clone();
                for (support, m) in parts {
                    if !m.is_independent(&s.intersection(support)) {
                        return false;
                    }
                    rest = rest.difference(support);
                }
                rest.is_empty()
            }
        }
    }

    pub fn rank(&self, s: &ElemSet) -> usize {
        match self {
            Matroid::Free { .. } => s.len(),
            Matroid::Uniform { support, limit, .. } => {
                s.intersection(support).len().min(*limit)
            }
            Matroid::Graphic {
                n_vertices,
                endpoints,
            } => {
                let mut dsu = Dsu::new(*n_vertices);
                let mut rank = 0;
                for e in s.iter() {
                    let (u, v) = endpoints[e];
                    if u != v && dsu.union(u, v) {
                        rank += 1;
                    }
                }
                rank
            }
            Matroid::Partition { class_of, cap } => {
                let mut counts = vec![0u32; cap.len()];
                for e in s.iter() {
                    counts[class_of[e] as usize] += 1;
                }
                counts
                    .iter()
                    .zip(cap.iter())
                    .map(|(n, c)| (*n).min(*c) as usize)
                    .sum()
            }
            Matroid::Truncation { inner, limit } => inner.rank(s).min(*limit),
            Matroid::Restriction { inner, subset } => inner.rank(&s.intersection(subset)),
            Matroid::Contraction {
                inner,
                subset,
                base,
            } => {
                let projected = s.difference(subset);
                inner.rank(&projected.union(base)) - base.len()
            }
            Matroid::DirectSum { parts, .. } => parts
                .iter()
                .map(|(support, m)| m.rank(&s.intersection(support)))
                .sum(),
        }
    }

    /// Greedy maximum independent subset of `s`, scanning ids in order.
    pub fn greedy_basis_of(&self, s: &ElemSet) -> ElemSet {
        let mut out = ElemSet::empty(self.ground_size());
        for e in s.iter() {
            if self.is_independent(&out.with(e)) {
                out.insert(e);
            }
        }
        out
    }

    /// All elements whose addition does not increase `rank(s)`.
    pub fn span(&self, s: &ElemSet) -> ElemSet {
        if let Matroid::Graphic {
            n_vertices,
            endpoints,
        } = self
        {
            // An edge is spanned iff its endpoints are already connected.
            let mut dsu = Dsu::new(*n_vertices);
            for e in s.iter() {
                let (u, v) = endpoints[e];
                dsu.union(u, v);
            }
            let mut out = ElemSet::empty(self.ground_size());
            for (e, &(u, v)) in endpoints.iter().enumerate() {
                if dsu.find(u) == dsu.find(v) {
                    out.insert(e);
                }
            }
            return out;
        }
        let base = self.greedy_basis_of(s);
        let r = base.len();
        debug_assert_eq!(r, self.rank(s));
        let mut out = ElemSet::empty(self.ground_size());
        for e in 0..self.ground_size() {
            if s.contains(e) || self.rank(&base.with(e)) == r {
                out.insert(e);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle for graphic independence: depth-first search for a
    /// cycle over the selected edges, no union-find involved.
    fn acyclic_dfs(n: usize, endpoints: &[(u32, u32)], s: &ElemSet) -> bool {
        let mut adj = vec![Vec::new(); n];
        for e in s.iter() {
            let (u, v) = endpoints[e];
            if u == v {
                return false;
            }
            adj[u as usize].push((v as usize, e));
            adj[v as usize].push((u as usize, e));
        }
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![(start, usize::MAX)];
            seen[start] = true;
            while let Some((u, via)) = stack.pop() {
                for &(v, e) in &adj[u] {
                    if e == via {
                        continue;
                    }
                    if seen[v] {
                        return false;
                    }
                    seen[v] = true;
                    stack.push((v, e));
                }
            }
        }
        true
    }

    // Example-1 graph: vertices r,a,b,c,d = 0..4; edges in fixture id order.
    fn example1_graphic() -> Matroid {
        let endpoints = vec![
            (1, 2), // 0 (a,b)
            (2, 1), // 1 (b,a)
            (3, 4), // 2 (c,d)
            (4, 3), // 3 (d,c)
            (3, 1), // 4 (c,a)
            (4, 2), // 5 (d,b)
            (1, 3), // 6 (a,c)
            (2, 4), // 7 (b,d)
            (0, 1), // 8 (r,a)
            (0, 2), // 9 (r,b)
            (0, 3), // 10 (r,c)
        ];
        Matroid::graphic(5, endpoints)
    }

    #[test]
    fn graphic_independence_examples() {
        let m = example1_graphic();
        // {(a,b),(c,d)} is acyclic.
        assert!(m.is_independent(&ElemSet::from_iter(11, [0, 2])));
        // Empty set.
        assert!(m.is_independent(&ElemSet::empty(11)));
        // Parallel pair {(a,b),(b,a)} closes an undirected cycle.
        assert!(!m.is_independent(&ElemSet::from_iter(11, [0, 1])));
    }

    #[test]
    fn graphic_matches_dfs_oracle() {
        let m = example1_graphic();
        let endpoints = match &m {
            Matroid::Graphic { endpoints, .. } => endpoints.clone(),
            _ => unreachable!(),
        };
        // Exhaust all subsets of the first 8 edges plus a few root edges.
        for mask in 0u32..(1 << 11) {
            let s = ElemSet::from_iter(11, (0..11).filter(|e| mask >> e & 1 == 1));
            assert_eq!(
                m.is_independent(&s),
                acyclic_dfs(5, &endpoints, &s),
                "mask {mask:b}"
            );
        }
    }

    #[test]
    fn rank_examples() {
        let m = example1_graphic();
        assert_eq!(m.rank(&ElemSet::full(11)), 4);
        assert_eq!(m.rank(&ElemSet::empty(11)), 0);
        // E1 = first-rank edges {(b,a),(a,b),(d,c),(c,d)} has rank 2.
        assert_eq!(m.rank(&ElemSet::from_iter(11, [0, 1, 2, 3])), 2);
    }

    #[test]
    fn span_examples() {
        let m = example1_graphic();
        // span({(a,b),(c,d)}) = E1.
        assert_eq!(
            m.span(&ElemSet::from_iter(11, [0, 2])).to_vec(),
            vec![0, 1, 2, 3]
        );
        assert!(m.span(&ElemSet::empty(11)).is_empty());
    }

    #[test]
    fn span_on_the_path_example() {
        // Example-3 graph: r,a,b,c,d = 0..4 with the fixture id order.
        let m = Matroid::graphic(
            5,
            vec![
                (2, 1), // 0 (b,a)
                (3, 2), // 1 (c,b)
                (3, 4), // 2 (c,d)
                (4, 3), // 3 (d,c)
                (0, 1), // 4 (r,a)
                (1, 2), // 5 (a,b)
                (2, 3), // 6 (b,c)
            ],
        );
        // span({(c,b),(c,d)}) is everything inside {b,c,d}.
        assert_eq!(
            m.span(&ElemSet::from_iter(7, [1, 2])).to_vec(),
            vec![1, 2, 3, 6]
        );
    }

    #[test]
    fn truncation_examples() {
        let m = example1_graphic();
        let t0 = m.clone().truncate(0);
        assert!(t0.is_independent(&ElemSet::empty(11)));
        assert!(!t0.is_independent(&ElemSet::from_iter(11, [0])));
        assert_eq!(t0.rank(&ElemSet::full(11)), 0);

        // Truncating at the full rank changes nothing.
        let t = m.clone().truncate(4);
        for mask in 0u32..(1 << 11) {
            let s = ElemSet::from_iter(11, (0..11).filter(|e| mask >> e & 1 == 1));
            assert_eq!(m.is_independent(&s), t.is_independent(&s));
        }
    }

    #[test]
    fn restrict_contract_direct_sum() {
        let m = example1_graphic();
        let sub = ElemSet::from_iter(11, [0, 2, 4]);
        let r = m.clone().restrict(sub.clone());
        assert_eq!(r.rank(&ElemSet::full(11)), m.rank(&sub));

        // Triangle a-b, b-c, c-a; contracting one edge leaves rank 1.
        let tri = Matroid::graphic(3, vec![(0, 1), (1, 2), (2, 0)]);
        let c = tri.clone().contract(ElemSet::from_iter(3, [0]));
        assert_eq!(c.rank(&ElemSet::full(3)), 1);
        // Brute-force contraction oracle: Y independent in M/{0} iff Y+0
        // independent in M (element 0 is independent on its own).
        for mask in 0u32..8 {
            if mask & 1 == 1 {
                continue;
            }
            let y = ElemSet::from_iter(3, (0..3).filter(|e| mask >> e & 1 == 1));
            assert_eq!(c.is_independent(&y), tri.is_independent(&y.with(0)));
        }

        let f2 = Matroid::uniform(5, ElemSet::from_iter(5, [0, 1]), 2);
        let f3 = Matroid::uniform(5, ElemSet::from_iter(5, [2, 3, 4]), 3);
        let ds = Matroid::direct_sum(
            5,
            vec![
                (ElemSet::from_iter(5, [0, 1]), f2),
                (ElemSet::from_iter(5, [2, 3, 4]), f3),
            ],
        )
        .unwrap();
        assert_eq!(ds.rank(&ElemSet::full(5)), 5);

        let g = Matroid::free(5);
        let overlap = Matroid::direct_sum(
            5,
            vec![
                (ElemSet::from_iter(5, [0, 1]), g.clone()),
                (ElemSet::from_iter(5, [1, 2]), g),
            ],
        );
        assert!(overlap.is_err());
    }
}
