//! Finite relational structures, Gaifman distances, metric index spaces and
//! `n`-component partitions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature. No constants, no function symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Symbol> = Vec::new();
        for (name, arity) in symbols {
            let name = name.into();
            if arity == 0 {
                return domain(format!("symbol {name} has arity 0"));
            }
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return domain(format!("invalid symbol name {name:?}"));
            }
            if out.iter().any(|s| s.name == name) {
                return domain(format!("duplicate symbol {name}"));
            }
            out.push(Symbol { name, arity });
        }
        Ok(Signature { symbols: out })
    }

    pub fn empty() -> Self {
        Signature { symbols: Vec::new() }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity(&self, sym: usize) -> usize {
        self.symbols[sym].arity
    }

    /// Largest arity, or 0 for the empty signature.
    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

/// A distance that is either a natural number or infinite.
///
/// Addition saturates at [`ExtDistance::Infinite`]; the derived order puts every
/// finite value below infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtDistance {
    Finite(u32),
    Infinite,
}

impl ExtDistance {
    pub const ZERO: ExtDistance = ExtDistance::Finite(0);

    pub fn finite(self) -> Option<u32> {
        match self {
            ExtDistance::Finite(v) => Some(v),
            ExtDistance::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ExtDistance::Infinite
    }

    /// `self <= k`.
    pub fn within(self, k: u64) -> bool {
        match self {
            ExtDistance::Finite(v) => (v as u64) <= k,
            ExtDistance::Infinite => false,
        }
    }

    pub fn saturating_add(self, other: ExtDistance) -> ExtDistance {
        match (self, other) {
            (ExtDistance::Finite(a), ExtDistance::Finite(b)) => match a.checked_add(b) {
                Some(v) => ExtDistance::Finite(v),
                None => ExtDistance::Infinite,
            },
            _ => ExtDistance::Infinite,
        }
    }
}

impl fmt::Display for ExtDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtDistance::Finite(v) => write!(f, "{v}"),
            ExtDistance::Infinite => write!(f, "inf"),
        }
    }
}

/// `2^n` as a threshold, saturating far beyond any distance a finite structure can have.
pub fn pow2(n: u32) -> u64 {
    if n >= 63 {
        u64::MAX
    } else {
        1u64 << n
    }
}

/// The family of binary distance predicates `D^k = {(x,y) : d(x,y) <= k}` for
/// every `k <= cap`, stored as one distance matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DistancePredicates {
    pub cap: u32,
    dist: Arc<Vec<ExtDistance>>,
    size: usize,
}

impl DistancePredicates {
    pub fn new(size: usize, dist: Vec<ExtDistance>, cap: u32) -> Result<Self> {
        if dist.len() != size * size {
            return domain("distance predicate matrix has the wrong shape");
        }
        Ok(DistancePredicates { cap, dist: Arc::new(dist), size })
    }

    pub fn distance(&self, x: usize, y: usize) -> ExtDistance {
        self.dist[x * self.size + y]
    }

    /// Distance clamped to `0..=cap+1`, where `cap+1` stands for "more than cap".
    /// Two pairs with equal capped values satisfy exactly the same `D^k`.
    pub fn capped(&self, x: usize, y: usize) -> u32 {
        match self.distance(x, y) {
            ExtDistance::Finite(v) if v <= self.cap => v,
            _ => self.cap.saturating_add(1),
        }
    }

    fn restrict(&self, elems: &[usize]) -> DistancePredicates {
        let n = elems.len();
        let mut dist = Vec::with_capacity(n * n);
        for &x in elems {
            for &y in elems {
                dist.push(self.distance(x, y));
            }
        }
        DistancePredicates { cap: self.cap, dist: Arc::new(dist), size: n }
    }
}

/// A finite relational structure. Elements are `0..size()`; names are kept for I/O.
///
/// Gaifman distances are computed once, at construction.
#[derive(Clone)]
pub struct Structure {
    signature: Arc<Signature>,
    names: Vec<String>,
    relations: Vec<BTreeSet<Vec<usize>>>,
    distance_preds: Option<DistancePredicates>,
    gaifman: Vec<ExtDistance>,
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Structure")
            .field("names", &self.names)
            .field("relations", &self.relations)
            .finish()
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.names == other.names
            && self.relations == other.relations
            && self.distance_preds == other.distance_preds
    }
}

impl Eq for Structure {}

impl Structure {
    pub fn new(
        signature: Arc<Signature>,
        names: Vec<String>,
        relations: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        Self::with_distance_predicates(signature, names, relations, None)
    }

    pub fn with_distance_predicates(
        signature: Arc<Signature>,
        names: Vec<String>,
        relations: Vec<Vec<Vec<usize>>>,
        distance_preds: Option<DistancePredicates>,
    ) -> Result<Self> {
        if relations.len() != signature.len() {
            return domain(format!(
                "{} relations given for a signature of {} symbols",
                relations.len(),
                signature.len()
            ));
        }
        let size = names.len();
        {
            let mut seen = std::collections::HashSet::new();
            for n in &names {
                if !seen.insert(n.as_str()) {
                    return domain(format!("duplicate element name {n}"));
                }
            }
        }
        let mut rels = Vec::with_capacity(relations.len());
        for (sym, tuples) in relations.into_iter().enumerate() {
            let arity = signature.arity(sym);
            let mut set = BTreeSet::new();
            for t in tuples {
                if t.len() != arity {
                    return domain(format!(
                        "tuple of length {} for {} of arity {arity}",
                        t.len(),
                        signature.symbols()[sym].name
                    ));
                }
                if let Some(&bad) = t.iter().find(|&&e| e >= size) {
                    return domain(format!("element {bad} outside universe of size {size}"));
                }
                set.insert(t);
            }
            rels.push(set);
        }
        if let Some(dp) = &distance_preds {
            if dp.size != size {
                return domain("distance predicates do not match the universe");
            }
        }
        let gaifman = all_pairs_gaifman(size, &rels, distance_preds.as_ref());
        Ok(Structure { signature, names, relations: rels, distance_preds, gaifman })
    }

    /// Convenience constructor with element names and tuples given by name.
    pub fn from_names(
        signature: Arc<Signature>,
        names: &[&str],
        tuples: &[(&str, &[&str])],
    ) -> Result<Self> {
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut rels = vec![Vec::new(); signature.len()];
        for (sym, args) in tuples {
            let s = signature
                .index_of(sym)
                .ok_or_else(|| Error::Domain(format!("unknown symbol {sym}")))?;
            let t = args
                .iter()
                .map(|a| index.get(a).copied().ok_or_else(|| Error::Domain(format!("unknown element {a}"))))
                .collect::<Result<Vec<_>>>()?;
            rels[s].push(t);
        }
        Structure::new(signature, names.iter().map(|s| s.to_string()).collect(), rels)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn relation(&self, sym: usize) -> &BTreeSet<Vec<usize>> {
        &self.relations[sym]
    }

    pub fn holds(&self, sym: usize, tuple: &[usize]) -> bool {
        self.relations[sym].contains(tuple)
    }

    pub fn distance_predicates(&self) -> Option<&DistancePredicates> {
        self.distance_preds.as_ref()
    }

    pub fn check_element(&self, e: usize) -> Result<()> {
        if e < self.size() {
            Ok(())
        } else {
            domain(format!("element {e} not in universe of size {}", self.size()))
        }
    }

    /// Gaifman distance; panics on out-of-range elements (see [`gaifman_distance`]).
    pub fn dist(&self, a: usize, b: usize) -> ExtDistance {
        self.gaifman[a * self.size() + b]
    }

    /// `d(ā, b) = min_i d(a_i, b)`; infinite for the empty tuple.
    pub fn dist_to_tuple(&self, tuple: &[usize], b: usize) -> ExtDistance {
        tuple.iter().map(|&a| self.dist(a, b)).min().unwrap_or(ExtDistance::Infinite)
    }

    /// Induced substructure on `elems` (duplicates ignored, parent order kept).
    pub fn induced(&self, elems: &[usize]) -> Substructure {
        let mut keep: Vec<usize> = elems.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut from_parent = vec![None; self.size()];
        for (i, &e) in keep.iter().enumerate() {
            from_parent[e] = Some(i);
        }
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .filter_map(|t| t.iter().map(|&e| from_parent[e]).collect::<Option<Vec<_>>>())
                    .collect()
            })
            .collect();
        let names = keep.iter().map(|&e| self.names[e].clone()).collect();
        let dp = self.distance_preds.as_ref().map(|d| d.restrict(&keep));
        let structure = Structure::with_distance_predicates(self.signature.clone(), names, relations, dp)
            .expect("induced substructure of a valid structure is valid");
        Substructure { structure, to_parent: keep, from_parent }
    }

    /// Stable fingerprint over the canonical text of the structure.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for s in self.signature.symbols() {
            h.update(format!("{}/{};", s.name, s.arity));
        }
        h.update(b"|");
        for n in &self.names {
            h.update(n.as_bytes());
            h.update(b",");
        }
        for (i, rel) in self.relations.iter().enumerate() {
            h.update(format!("|{i}:"));
            for t in rel {
                h.update(format!("{t:?}"));
            }
        }
        if let Some(dp) = &self.distance_preds {
            h.update(format!("|cap{}:", dp.cap));
            for d in dp.dist.iter() {
                h.update(d.to_string());
                h.update(b",");
            }
        }
        hex16(&h.finalize())
    }
}

pub(crate) fn hex16(bytes: &[u8]) -> String {
    bytes.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn all_pairs_gaifman(
    size: usize,
    relations: &[BTreeSet<Vec<usize>>],
    dp: Option<&DistancePredicates>,
) -> Vec<ExtDistance> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); size];
    for rel in relations {
        for t in rel {
            for &x in t {
                for &y in t {
                    if x != y {
                        adj[x].insert(y);
                    }
                }
            }
        }
    }
    if let Some(dp) = dp {
        if dp.cap >= 1 {
            for x in 0..size {
                for y in 0..size {
                    if x != y && dp.distance(x, y).within(dp.cap as u64) {
                        adj[x].insert(y);
                    }
                }
            }
        }
    }
    let mut out = vec![ExtDistance::Infinite; size * size];
    let mut queue = VecDeque::new();
    for src in 0..size {
        let row = &mut out[src * size..(src + 1) * size];
        row[src] = ExtDistance::ZERO;
        queue.clear();
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            let dx = row[x].finite().unwrap();
            for &y in &adj[x] {
                if row[y].is_infinite() {
                    row[y] = ExtDistance::Finite(dx + 1);
                    queue.push_back(y);
                }
            }
        }
    }
    out
}

/// An induced substructure together with its embedding into the parent.
#[derive(Debug, Clone)]
pub struct Substructure {
    pub structure: Structure,
    /// Local element `i` is parent element `to_parent[i]`.
    pub to_parent: Vec<usize>,
    pub from_parent: Vec<Option<usize>>,
}

impl Substructure {
    /// Translate a tuple of parent elements; entries outside the substructure become `None`.
    pub fn locate(&self, tuple: &[usize]) -> Vec<Option<usize>> {
        tuple.iter().map(|&e| self.from_parent[e]).collect()
    }

    pub fn contains(&self, parent_elem: usize) -> bool {
        self.from_parent[parent_elem].is_some()
    }
}

/// Gaifman distance between two elements.
pub fn gaifman_distance(m: &Structure, a: usize, b: usize) -> Result<ExtDistance> {
    m.check_element(a)?;
    m.check_element(b)?;
    Ok(m.dist(a, b))
}

/// The induced substructure on `V^k(ā)`. An empty tuple yields the empty structure.
pub fn neighborhood(m: &Structure, tuple: &[usize], k: u32) -> Result<Substructure> {
    for &a in tuple {
        m.check_element(a)?;
    }
    let elems: Vec<usize> = (0..m.size())
        .filter(|&t| m.dist_to_tuple(tuple, t).within(k as u64))
        .collect();
    Ok(m.induced(&elems))
}

/// A finite metric space on points `0..len()` with natural-number-or-infinite distances.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetricIndex {
    size: usize,
    dist: Vec<ExtDistance>,
}

impl MetricIndex {
    /// Validates the metric axioms (saturating triangle inequality).
    pub fn new(rows: Vec<Vec<ExtDistance>>) -> Result<Self> {
        let size = rows.len();
        let mut dist = Vec::with_capacity(size * size);
        for r in &rows {
            if r.len() != size {
                return domain("metric matrix is not square");
            }
            dist.extend_from_slice(r);
        }
        let m = MetricIndex { size, dist };
        m.validate()?;
        Ok(m)
    }

    /// The metric induced by Gaifman distance on a structure.
    pub fn from_structure(m: &Structure) -> Self {
        let size = m.size();
        let mut dist = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                dist.push(m.dist(a, b));
            }
        }
        MetricIndex { size, dist }
    }

    /// All off-diagonal distances equal to `d`.
    pub fn uniform(size: usize, d: ExtDistance) -> Result<Self> {
        let rows = (0..size)
            .map(|i| (0..size).map(|j| if i == j { ExtDistance::ZERO } else { d }).collect())
            .collect();
        MetricIndex::new(rows)
    }

    fn validate(&self) -> Result<()> {
        let n = self.size;
        for s in 0..n {
            if self.get(s, s) != ExtDistance::ZERO {
                return domain(format!("d({s},{s}) != 0"));
            }
            for t in 0..n {
                if self.get(s, t) != self.get(t, s) {
                    return domain(format!("d({s},{t}) != d({t},{s})"));
                }
                if s != t && self.get(s, t) == ExtDistance::ZERO {
                    return domain(format!("d({s},{t}) = 0 for distinct points"));
                }
                for u in 0..n {
                    if self.get(s, u) > self.get(s, t).saturating_add(self.get(t, u)) {
                        return domain(format!("triangle inequality fails at ({s},{t},{u})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn get(&self, s: usize, t: usize) -> ExtDistance {
        self.dist[s * self.size + t]
    }

    /// `d(s̄, t) = min_i d(s_i, t)`; infinite for the empty tuple.
    pub fn to_tuple(&self, tuple: &[usize], t: usize) -> ExtDistance {
        tuple.iter().map(|&s| self.get(s, t)).min().unwrap_or(ExtDistance::Infinite)
    }

    /// Largest finite distance, 0 for fewer than two points.
    pub fn max_finite(&self) -> u32 {
        self.dist.iter().filter_map(|d| d.finite()).max().unwrap_or(0)
    }

    pub fn matrix(&self) -> Vec<ExtDistance> {
        self.dist.clone()
    }
}

/// Disjoint nonempty blocks covering a set, each block sorted, blocks sorted by
/// least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonicalizes the given blocks.
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
            b.dedup();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, x: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&x).is_ok())
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks.iter().all(|b| {
            let target = other.block_of(b[0]);
            target.is_some() && b.iter().all(|&x| other.block_of(x) == target)
        })
    }
}

fn closure_blocks(items: &[usize], linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut seen = vec![false; items.len()];
    let mut blocks = Vec::new();
    for start in 0..items.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut block = vec![items[start]];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..items.len() {
                if !seen[j] && linked(items[i], items[j]) {
                    seen[j] = true;
                    block.push(items[j]);
                    stack.push(j);
                }
            }
        }
        blocks.push(block);
    }
    blocks
}

/// The partition of `j` into classes of `E_J^n`: the transitive closure, inside
/// `j`, of "distance at most `2^n`".
pub fn component_partition(j: &[usize], n: u32, d: &MetricIndex) -> Result<Partition> {
    if let Some(&bad) = j.iter().find(|&&p| p >= d.len()) {
        return domain(format!("point {bad} not in metric of size {}", d.len()));
    }
    let threshold = pow2(n);
    let mut items = j.to_vec();
    items.sort_unstable();
    items.dedup();
    Ok(Partition::from_blocks(closure_blocks(&items, |s, t| d.get(s, t).within(threshold))))
}

/// Component partition of a tuple of points, lifted to tuple positions.
pub fn tuple_components(points: &[usize], n: u32, d: &MetricIndex) -> Result<Partition> {
    if let Some(&bad) = points.iter().find(|&&p| p >= d.len()) {
        return domain(format!("point {bad} not in metric of size {}", d.len()));
    }
    let threshold = pow2(n);
    let positions: Vec<usize> = (0..points.len()).collect();
    Ok(Partition::from_blocks(closure_blocks(&positions, |i, k| {
        d.get(points[i], points[k]).within(threshold)
    })))
}
