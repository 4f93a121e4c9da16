//! Dense element ids and element sets over a fixed ground set.

use fixedbitset::FixedBitSet;
use std::fmt;

/// Index into the ground set. Ids are dense: `0..ground_size`.
pub type ElementId = usize;

/// A set of ground elements, backed by a fixed-width bitset.
///
/// All iteration is in ascending id order, which keeps every derived
/// artifact (spans, chains, traces) deterministic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElemSet {
    bits: FixedBitSet,
}

impl ElemSet {
    pub fn empty(ground_size: usize) -> Self {
        ElemSet {
            bits: FixedBitSet::with_capacity(ground_size),
        }
    }

    pub fn full(ground_size: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(ground_size);
        bits.insert_range(..);
        ElemSet { bits }
    }

    pub fn from_iter<I: IntoIterator<Item = ElementId>>(ground_size: usize, iter: I) -> Self {
        let mut s = Self::empty(ground_size);
        for e in iter {
            s.insert(e);
        }
        s
    }

    pub fn ground_size(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.bits.contains(e)
    }

    pub fn insert(&mut self, e: ElementId) {
        self.bits.insert(e);
    }

    pub fn remove(&mut self, e: ElementId) {
        self.bits.set(e, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<ElementId> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union(&self, other: &ElemSet) -> ElemSet {
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        out
    }

    pub fn intersection(&self, other: &ElemSet) -> ElemSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &ElemSet) -> ElemSet {
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }

    pub fn with(&self, e: ElementId) -> ElemSet {
        let mut out = self.clone();
        out.insert(e);
        out
    }

    pub fn without(&self, e: ElementId) -> ElemSet {
        let mut out = self.clone();
        out.remove(e);
        out
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
