use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

/// A result whose magnitude is below this fraction of the summed absolute
/// contributions is indistinguishable from rounding and is discarded.
pub const NOISE_REL: f64 = 8.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Cell {
    pub sum: f64,
    pub mass: f64,
}

/// Coefficient accumulator that tracks the absolute mass of all contributions
/// so cancellation residue can be told apart from genuine small terms.
#[derive(Debug)]
pub(crate) struct Accumulator<K> {
    map: HashMap<K, Cell>,
    pub dropped: f64,
}

impl<K: Hash + Eq + Ord + Copy> Accumulator<K> {
    pub fn new() -> Self {
        Self { map: HashMap::new(), dropped: 0.0 }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { map: HashMap::with_capacity(n), dropped: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, key: K, c: f64) {
        let cell = self.map.entry(key).or_default();
        cell.sum += c;
        cell.mass += c.abs();
    }

    #[inline]
    pub fn add_with_mass(&mut self, key: K, c: f64, mass: f64) {
        let cell = self.map.entry(key).or_default();
        cell.sum += c;
        cell.mass += mass;
    }

    /// Adds another accumulator's cells. Callers merge in a fixed order.
    pub fn merge(&mut self, other: Accumulator<K>) {
        self.dropped += other.dropped;
        if self.map.is_empty() {
            self.map = other.map;
            return;
        }
        for (k, c) in other.map {
            let cell = self.map.entry(k).or_default();
            cell.sum += c.sum;
            cell.mass += c.mass;
        }
    }

    pub fn finish(self) -> (BTreeMap<K, f64>, f64) {
        let mut out = BTreeMap::new();
        for (k, c) in self.map {
            if c.sum != 0.0 && c.sum.abs() > NOISE_REL * c.mass {
                out.insert(k, c.sum);
            }
        }
        (out, self.dropped)
    }
}

/// Merges block accumulators in block order.
pub(crate) fn merge_all<K: Hash + Eq + Ord + Copy>(blocks: Vec<Accumulator<K>>) -> Accumulator<K> {
    let mut it = blocks.into_iter();
    let mut acc = it.next().unwrap_or_else(Accumulator::new);
    for b in it {
        acc.merge(b);
    }
    acc
}
