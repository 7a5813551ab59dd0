//! Composition tables: functional maps from composite keys to global types,
//! populated from corpus sweeps and checked for collisions on every insert.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::Serialize;

use crate::error::Result;
use crate::theory::types::TypeN;

/// A concrete `(spec, tuple)` pair that produced an entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    /// Position of the spec in the corpus.
    pub spec: usize,
    pub tuple: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TableEntry {
    pub value: TypeN,
    pub count: usize,
    pub witness: Instance,
}

#[derive(Debug, Clone)]
pub struct TableCollision<K> {
    pub key: K,
    pub first: Instance,
    pub first_value: TypeN,
    pub second: Instance,
    pub second_value: TypeN,
}

#[derive(Debug, Clone)]
pub enum TableOutcome<K> {
    Functional(CompositionTable<K>),
    Collision(TableCollision<K>),
}

impl<K> TableOutcome<K> {
    pub fn is_functional(&self) -> bool {
        matches!(self, TableOutcome::Functional(_))
    }
}

/// Keys whose components can be rendered as type digests for export.
pub trait KeyDigest {
    fn digest_parts(&self) -> Vec<String>;
}

#[derive(Debug, Clone)]
pub struct CompositionTable<K> {
    pub n: u32,
    pub ell: u32,
    entries: BTreeMap<K, TableEntry>,
}

impl<K: Ord + Clone + Debug> CompositionTable<K> {
    pub fn new(n: u32, ell: u32) -> Self {
        CompositionTable { n, ell, entries: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of instances recorded.
    pub fn instances(&self) -> usize {
        self.entries.values().map(|e| e.count).sum()
    }

    pub fn get(&self, key: &K) -> Option<TypeN> {
        self.entries.get(key).map(|e| e.value)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&K, &TableEntry)> {
        self.entries.iter()
    }

    /// Records an instance; returns the collision if `key` already maps elsewhere.
    pub fn insert(&mut self, key: K, value: TypeN, at: Instance) -> Result<Option<TableCollision<K>>> {
        match self.entries.get_mut(&key) {
            Some(e) if e.value != value => Ok(Some(TableCollision {
                key,
                first: e.witness.clone(),
                first_value: e.value,
                second: at,
                second_value: value,
            })),
            Some(e) => {
                e.count += 1;
                Ok(None)
            }
            None => {
                self.entries.insert(key, TableEntry { value, count: 1, witness: at });
                Ok(None)
            }
        }
    }

    /// Union of two tables built over disjoint parts of a corpus. `offset` is
    /// added to the spec positions of `other`'s witnesses.
    pub fn merge(mut self, other: CompositionTable<K>, offset: usize) -> std::result::Result<Self, TableCollision<K>> {
        for (k, mut e) in other.entries {
            e.witness.spec += offset;
            match self.entries.get_mut(&k) {
                Some(mine) if mine.value != e.value => {
                    return Err(TableCollision {
                        key: k,
                        first: mine.witness.clone(),
                        first_value: mine.value,
                        second: e.witness,
                        second_value: e.value,
                    })
                }
                Some(mine) => mine.count += e.count,
                None => {
                    self.entries.insert(k, e);
                }
            }
        }
        Ok(self)
    }
}

impl<K: Ord + Clone + Debug + KeyDigest> CompositionTable<K> {
    /// Canonical text export: one line per entry, sorted, keyed by type digests.
    ///
    /// ```text
    /// table n=<n> l=<l> entries=<count>
    /// <digest>[,<digest>..] -> <digest> x<count>
    /// ```
    pub fn export(&self) -> String {
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|(k, e)| format!("{} -> {} x{}", k.digest_parts().join(","), e.value.digest(), e.count))
            .collect();
        lines.sort();
        let mut out = format!("table n={} l={} entries={}\n", self.n, self.ell, lines.len());
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}
