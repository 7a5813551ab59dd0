//! Functional-dependency checks: "A determines B" over a finite list of
//! observed instances.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::Serialize;

/// Two instances with the same source key but different target values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision<K, V> {
    pub key: K,
    /// Index of the first instance in input order.
    pub first: usize,
    pub first_value: V,
    /// Index of the first later instance disagreeing with it.
    pub second: usize,
    pub second_value: V,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminationResult<K, V> {
    pub functional: bool,
    pub witness: Option<Collision<K, V>>,
    /// Number of distinct source keys seen.
    pub keys: usize,
    pub instances: usize,
}

/// Streaming determination checker: feed instances, stop at the first collision.
#[derive(Debug, Clone)]
pub struct Determiner<K, V> {
    seen: BTreeMap<K, (usize, V)>,
    count: usize,
    witness: Option<Collision<K, V>>,
}

impl<K: Ord + Clone + Debug, V: Eq + Clone + Debug> Default for Determiner<K, V> {
    fn default() -> Self {
        Determiner { seen: BTreeMap::new(), count: 0, witness: None }
    }
}

impl<K: Ord + Clone + Debug, V: Eq + Clone + Debug> Determiner<K, V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one instance; returns `false` once a collision has been found.
    pub fn add(&mut self, key: K, value: V) -> bool {
        let idx = self.count;
        self.count += 1;
        if self.witness.is_some() {
            return false;
        }
        match self.seen.get(&key) {
            Some((first, v)) if *v != value => {
                self.witness = Some(Collision {
                    key,
                    first: *first,
                    first_value: v.clone(),
                    second: idx,
                    second_value: value,
                });
                false
            }
            Some(_) => true,
            None => {
                self.seen.insert(key, (idx, value));
                true
            }
        }
    }

    pub fn is_functional(&self) -> bool {
        self.witness.is_none()
    }

    pub fn get(&self, key: &K) -> Option<&V> {
        self.seen.get(key).map(|(_, v)| v)
    }

    pub fn table(&self) -> impl Iterator<Item = (&K, &V)> {
        self.seen.iter().map(|(k, (_, v))| (k, v))
    }

    pub fn finish(self) -> DeterminationResult<K, V> {
        DeterminationResult {
            functional: self.witness.is_none(),
            keys: self.seen.len(),
            instances: self.count,
            witness: self.witness,
        }
    }
}

/// Whether the map `key ↦ value` over `instances` is well defined. On failure
/// the witness is the earliest collision in instance order.
pub fn theory_determines<K, V>(instances: impl IntoIterator<Item = (K, V)>) -> DeterminationResult<K, V>
where
    K: Ord + Clone + Debug,
    V: Eq + Clone + Debug,
{
    let mut d = Determiner::new();
    for (k, v) in instances {
        if !d.add(k, v) {
            break;
        }
    }
    d.finish()
}
