//! Interned bounded-depth types.
//!
//! A [`TypeN`] of depth 0 is the atomic diagram of a tuple ([`Type0`]); a type
//! of depth `n+1` is the atomic diagram together with the set of depth-`n`
//! types of the one-point extensions by points outside the tuple. Extensions
//! repeating a parameter are a function of the depth-`n` reduct, so this is
//! equivalent to the usual definition and keeps every stored tuple injective.
//! Every node lives in one process-wide hash-consing table, so equality and
//! hashing of types are integer operations.
//!
//! # Canonical serialization
//!
//! ```text
//! leaf  := "L" arity "[" classes "][" atoms "][" dist "]"
//! inner := "N" depth "/" arity "/" len ":" leaf "/" count "{" (len ":" child)* "}"
//! ```
//!
//! `classes` lists, per parameter, the index of the first parameter equal to it
//! or `_` when the parameter lies outside the carrier. `atoms` lists the true
//! atoms `Name(p,q,..)` sorted by name then positions. `dist` is `-` when the
//! structure has no distance predicates, else `cap=<c>:` followed by the capped
//! distances of present pairs `i<j` (`_` when either is absent). Children are
//! sorted by their own serialization and each is prefixed with its byte length.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, Mutex, RwLock};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::structure::Structure;

/// Process-wide table of relation-symbol names.
static SYMBOLS: LazyLock<RwLock<(HashMap<String, u32>, Vec<String>)>> =
    LazyLock::new(|| RwLock::new((HashMap::new(), Vec::new())));

pub(crate) fn sym_id(name: &str) -> u32 {
    if let Some(&id) = SYMBOLS.read().unwrap().0.get(name) {
        return id;
    }
    let mut w = SYMBOLS.write().unwrap();
    if let Some(&id) = w.0.get(name) {
        return id;
    }
    let id = w.1.len() as u32;
    w.1.push(name.to_string());
    w.0.insert(name.to_string(), id);
    id
}

pub(crate) fn sym_name(id: u32) -> String {
    SYMBOLS.read().unwrap().1[id as usize].clone()
}

/// Atomic diagram of a tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Type0 {
    classes: Vec<Option<u16>>,
    atoms: Vec<(u32, Vec<u16>)>,
    dist: Option<(u32, Vec<u32>)>,
}

const ABSENT_DIST: u32 = u32::MAX;

fn cartesian(lists: &[&Vec<u16>], cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    if cur.len() == lists.len() {
        out.push(cur.clone());
        return;
    }
    for &x in lists[cur.len()] {
        cur.push(x);
        cartesian(lists, cur, out);
        cur.pop();
    }
}

fn pair_index(arity: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < arity);
    i * (2 * arity - i - 1) / 2 + (j - i - 1)
}

impl Type0 {
    pub fn arity(&self) -> usize {
        self.classes.len()
    }

    pub fn is_present(&self, p: usize) -> bool {
        self.classes[p].is_some()
    }

    /// Index of the first parameter equal to `p`, `None` when `p` is absent.
    pub fn class_of(&self, p: usize) -> Option<usize> {
        self.classes[p].map(|c| c as usize)
    }

    /// True atoms as `(symbol name, positions)`.
    pub fn atoms(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = self
            .atoms
            .iter()
            .map(|(s, ps)| (sym_name(*s), ps.iter().map(|&p| p as usize).collect()))
            .collect();
        out.sort();
        out
    }

    pub fn holds(&self, name: &str, positions: &[usize]) -> bool {
        let id = sym_id(name);
        let ps: Vec<u16> = positions.iter().map(|&p| p as u16).collect();
        self.atoms.binary_search(&(id, ps)).is_ok()
    }

    pub fn distance_cap(&self) -> Option<u32> {
        self.dist.as_ref().map(|d| d.0)
    }

    /// Capped distance between two present parameters (`cap+1` means "beyond cap").
    pub fn capped_distance(&self, i: usize, j: usize) -> Option<u32> {
        let (_, v) = self.dist.as_ref()?;
        if i == j {
            return self.is_present(i).then_some(0);
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let d = v[pair_index(self.arity(), a, b)];
        (d != ABSENT_DIST).then_some(d)
    }

    fn reindex(&self, map: &[Option<u16>]) -> Type0 {
        let key: Vec<Option<u16>> = map
            .iter()
            .map(|m| m.and_then(|p| self.classes[p as usize]))
            .collect();
        let classes: Vec<Option<u16>> = key
            .iter()
            .map(|k| k.map(|c| key.iter().position(|x| *x == Some(c)).unwrap() as u16))
            .collect();
        let arity = map.len();
        let mut preimage: Vec<Vec<u16>> = vec![Vec::new(); self.arity()];
        for (j, m) in map.iter().enumerate() {
            if let (Some(p), Some(_)) = (m, key[j]) {
                preimage[*p as usize].push(j as u16);
            }
        }
        let mut atoms = Vec::new();
        for (s, ps) in &self.atoms {
            let lists: Vec<&Vec<u16>> = ps.iter().map(|&p| &preimage[p as usize]).collect();
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            let mut combos = Vec::new();
            cartesian(&lists, &mut Vec::with_capacity(lists.len()), &mut combos);
            atoms.extend(combos.into_iter().map(|c| (*s, c)));
        }
        atoms.sort();
        atoms.dedup();
        let dist = self.dist.as_ref().map(|(cap, _)| {
            let mut v = Vec::with_capacity(arity * arity.saturating_sub(1) / 2);
            for i in 0..arity {
                for j in i + 1..arity {
                    let d = match (classes[i], classes[j]) {
                        (Some(a), Some(b)) if a == b => 0,
                        (Some(_), Some(_)) => {
                            let (p, q) = (map[i].unwrap() as usize, map[j].unwrap() as usize);
                            self.capped_distance(p, q).unwrap_or(ABSENT_DIST)
                        }
                        _ => ABSENT_DIST,
                    };
                    v.push(d);
                }
            }
            (*cap, v)
        });
        Type0 { classes, atoms, dist }
    }

    fn disjoint_union(&self, other: &Type0) -> Result<Type0> {
        let shift = self.arity() as u16;
        let mut classes = self.classes.clone();
        classes.extend(other.classes.iter().map(|c| c.map(|x| x + shift)));
        let mut atoms = self.atoms.clone();
        atoms.extend(
            other
                .atoms
                .iter()
                .map(|(s, ps)| (*s, ps.iter().map(|p| p + shift).collect())),
        );
        atoms.sort();
        let dist = match (&self.dist, &other.dist) {
            (None, None) => None,
            (Some((c1, _)), Some((c2, _))) if c1 == c2 => {
                let arity = classes.len();
                let beyond = c1.saturating_add(1);
                let mut v = Vec::new();
                for i in 0..arity {
                    for j in i + 1..arity {
                        let left = self.arity();
                        let d = if classes[i].is_none() || classes[j].is_none() {
                            ABSENT_DIST
                        } else if j < left {
                            self.capped_distance(i, j).unwrap_or(ABSENT_DIST)
                        } else if i >= left {
                            other.capped_distance(i - left, j - left).unwrap_or(ABSENT_DIST)
                        } else {
                            beyond
                        };
                        v.push(d);
                    }
                }
                Some((*c1, v))
            }
            _ => return domain("disjoint union of types with different distance predicates"),
        };
        Ok(Type0 { classes, atoms, dist })
    }

    fn serialize(&self) -> String {
        let classes: Vec<String> = self
            .classes
            .iter()
            .map(|c| c.map_or("_".to_string(), |v| v.to_string()))
            .collect();
        let atoms: Vec<String> = self
            .atoms()
            .into_iter()
            .map(|(n, ps)| {
                let ps: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                format!("{n}({})", ps.join(","))
            })
            .collect();
        let dist = match &self.dist {
            None => "-".to_string(),
            Some((cap, v)) => {
                let vals: Vec<String> = v
                    .iter()
                    .map(|&d| if d == ABSENT_DIST { "_".into() } else { d.to_string() })
                    .collect();
                format!("cap={cap}:{}", vals.join(","))
            }
        };
        format!("L{}[{}][{}][{}]", self.arity(), classes.join(","), atoms.join(","), dist)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Leaf(Type0),
    /// `base` is the depth-0 type of the same tuple; `children` are the types
    /// of extensions by points not already among the parameters.
    Inner { depth: u32, arity: u16, base: TypeN, children: Vec<TypeN> },
}

#[derive(Default)]
struct Table {
    ids: HashMap<Arc<Node>, u32>,
    nodes: Vec<Arc<Node>>,
}

static TABLE: LazyLock<RwLock<Table>> = LazyLock::new(|| RwLock::new(Table::default()));

#[derive(Default)]
struct Caches {
    reindex: HashMap<(u32, Vec<Option<u16>>), TypeN>,
    reduce: HashMap<(u32, u32), TypeN>,
    union: HashMap<(u32, u32), TypeN>,
    digest: HashMap<u32, TypeDigest>,
}

static CACHES: LazyLock<Mutex<Caches>> = LazyLock::new(|| Mutex::new(Caches::default()));

fn intern(node: Node) -> TypeN {
    if let Some(&id) = TABLE.read().unwrap().ids.get(&node) {
        return TypeN(id);
    }
    let mut w = TABLE.write().unwrap();
    if let Some(&id) = w.ids.get(&node) {
        return TypeN(id);
    }
    let id = w.nodes.len() as u32;
    let node = Arc::new(node);
    w.nodes.push(node.clone());
    w.ids.insert(node, id);
    TypeN(id)
}

/// Number of distinct type nodes interned so far in this process.
pub fn interned_count() -> usize {
    TABLE.read().unwrap().nodes.len()
}

/// SHA-256 of a type's canonical form. Comparable across structures and runs
/// without interning, which keeps high-depth identity checks cheap.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeDigest(pub [u8; 32]);

impl fmt::Display for TypeDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TypeDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeDigest({})", &self.to_string()[..16])
    }
}

impl Serialize for TypeDigest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn leaf_digest(t: &Type0) -> TypeDigest {
    TypeDigest(Sha256::digest(t.serialize().as_bytes()).into())
}

fn inner_digest(depth: u32, arity: usize, base: TypeDigest, mut kids: Vec<TypeDigest>) -> TypeDigest {
    kids.sort_unstable();
    kids.dedup();
    let mut h = Sha256::new();
    h.update(format!("N{depth}/{arity}/"));
    h.update(base.0);
    h.update(format!("/{}", kids.len()));
    for d in kids {
        h.update(d.0);
    }
    TypeDigest(h.finalize().into())
}

/// An interned type `Th^n(M; ā)`. Equality is identity of the interned node.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeN(u32);

impl fmt::Debug for TypeN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeN(d{} a{} {})", self.depth(), self.arity(), &self.digest()[..12])
    }
}

impl TypeN {
    fn node(self) -> Arc<Node> {
        TABLE.read().unwrap().nodes[self.0 as usize].clone()
    }

    pub fn leaf(t: Type0) -> TypeN {
        intern(Node::Leaf(t))
    }

    fn inner(depth: u32, base: TypeN, mut children: Vec<TypeN>) -> TypeN {
        debug_assert!(depth > 0 && base.depth() == 0);
        children.sort_unstable();
        children.dedup();
        intern(Node::Inner { depth, arity: base.arity() as u16, base, children })
    }

    pub fn depth(self) -> u32 {
        match &*self.node() {
            Node::Leaf(_) => 0,
            Node::Inner { depth, .. } => *depth,
        }
    }

    /// Number of parameters.
    pub fn arity(self) -> usize {
        match &*self.node() {
            Node::Leaf(t) => t.arity(),
            Node::Inner { arity, .. } => *arity as usize,
        }
    }

    /// Types (depth `n-1`, arity `ℓ+1`) of the extensions by a point that is
    /// not one of the parameters. Extensions repeating a parameter are
    /// determined by the depth `n-1` reduct and are not stored.
    pub fn children(self) -> Vec<TypeN> {
        match &*self.node() {
            Node::Leaf(_) => Vec::new(),
            Node::Inner { children, .. } => children.clone(),
        }
    }

    /// The atomic diagram, for leaves only.
    pub fn type0(self) -> Option<Type0> {
        match &*self.node() {
            Node::Leaf(t) => Some(t.clone()),
            Node::Inner { .. } => None,
        }
    }

    /// The atomic diagram of the parameters, at any depth.
    pub fn base(self) -> Type0 {
        match &*self.node() {
            Node::Leaf(t) => t.clone(),
            Node::Inner { base, .. } => base.type0().unwrap(),
        }
    }

    /// Hex SHA-256 over the canonical structure; stable across runs.
    pub fn digest(self) -> String {
        self.type_digest().to_string()
    }

    pub fn type_digest(self) -> TypeDigest {
        if let Some(d) = CACHES.lock().unwrap().digest.get(&self.0) {
            return *d;
        }
        let out = match &*self.node() {
            Node::Leaf(t) => leaf_digest(t),
            Node::Inner { depth, arity, base, children } => inner_digest(
                *depth,
                *arity as usize,
                base.type_digest(),
                children.iter().map(|c| c.type_digest()).collect(),
            ),
        };
        CACHES.lock().unwrap().digest.insert(self.0, out);
        out
    }

    /// Full nested canonical serialization (exponential in depth; intended for
    /// small types and golden files).
    pub fn serialize(self) -> String {
        match &*self.node() {
            Node::Leaf(t) => t.serialize(),
            Node::Inner { depth, arity, base, children } => {
                let mut parts: Vec<String> = children.iter().map(|c| c.serialize()).collect();
                parts.sort();
                let b = base.serialize();
                let mut s = format!("N{depth}/{arity}/{}:{b}/{}{{", b.len(), parts.len());
                for p in parts {
                    s.push_str(&format!("{}:{p}", p.len()));
                }
                s.push('}');
                s
            }
        }
    }

    /// The type of `ā∘map`: parameter `j` of the result is parameter `map[j]` of
    /// `self`, or absent when `map[j]` is `None`. Covers projection, permutation
    /// and duplication of parameters.
    pub fn reindex(self, map: &[Option<usize>]) -> Result<TypeN> {
        let arity = self.arity();
        if let Some(bad) = map.iter().flatten().find(|&&p| p >= arity) {
            return domain(format!("parameter {bad} out of range for arity {arity}"));
        }
        let map: Vec<Option<u16>> = map.iter().map(|m| m.map(|p| p as u16)).collect();
        Ok(self.reindex_raw(&map))
    }

    fn reindex_raw(self, map: &[Option<u16>]) -> TypeN {
        let arity = self.arity();
        if map.len() == arity && map.iter().enumerate().all(|(i, m)| *m == Some(i as u16)) {
            return self;
        }
        let key = (self.0, map.to_vec());
        if let Some(&t) = CACHES.lock().unwrap().reindex.get(&key) {
            return t;
        }
        let out = match &*self.node() {
            Node::Leaf(t0) => TypeN::leaf(t0.reindex(map)),
            Node::Inner { depth, base, children, .. } => {
                let b0 = base.type0().unwrap();
                let mut child_map = map.to_vec();
                child_map.push(Some(arity as u16));
                let mut kids: Vec<TypeN> = children.iter().map(|c| c.reindex_raw(&child_map)).collect();
                // parameters dropped by the map become fresh points of the result
                let kept: Vec<usize> = map.iter().flatten().filter_map(|&p| b0.class_of(p as usize)).collect();
                let dropped: Vec<usize> = (0..arity)
                    .filter(|&p| b0.class_of(p) == Some(p) && !kept.contains(&p))
                    .collect();
                if !dropped.is_empty() {
                    let low = self.reduce_raw(depth - 1);
                    for p in dropped {
                        child_map[map.len()] = Some(p as u16);
                        kids.push(low.reindex_raw(&child_map));
                    }
                }
                TypeN::inner(*depth, base.reindex_raw(map), kids)
            }
        };
        CACHES.lock().unwrap().reindex.insert(key, out);
        out
    }

    /// Parameter projection onto strictly increasing `positions`.
    pub fn project_params(self, positions: &[usize]) -> Result<TypeN> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return domain("projection positions must be strictly increasing");
        }
        let map: Vec<Option<usize>> = positions.iter().map(|&p| Some(p)).collect();
        self.reindex(&map)
    }

    /// The depth-`target` type of any tuple realizing `self`.
    pub fn reduce_depth(self, target: u32) -> Result<TypeN> {
        let depth = self.depth();
        if target > depth {
            return domain(format!("cannot raise depth {depth} to {target}"));
        }
        Ok(self.reduce_raw(target))
    }

    fn reduce_raw(self, target: u32) -> TypeN {
        if target == self.depth() {
            return self;
        }
        let key = (self.0, target);
        if let Some(&t) = CACHES.lock().unwrap().reduce.get(&key) {
            return t;
        }
        let Node::Inner { base, children, .. } = &*self.node() else { unreachable!() };
        let out = if target == 0 {
            *base
        } else {
            let kids = children.iter().map(|c| c.reduce_raw(target - 1)).collect();
            TypeN::inner(target, *base, kids)
        };
        CACHES.lock().unwrap().reduce.insert(key, out);
        out
    }

    /// Type of `ā⌢b̄` in the disjoint union `A ⊔ B` (no tuples across), from
    /// `self = Th^n(A; ā)` and `other = Th^n(B; b̄)`.
    pub fn disjoint_union(self, other: TypeN) -> Result<TypeN> {
        if self.depth() != other.depth() {
            return domain("disjoint union of types of different depth");
        }
        self.union_raw(other)
    }

    fn union_raw(self, other: TypeN) -> Result<TypeN> {
        let key = (self.0, other.0);
        if let Some(&t) = CACHES.lock().unwrap().union.get(&key) {
            return Ok(t);
        }
        let depth = self.depth();
        let base = TypeN::leaf(self.base().disjoint_union(&other.base())?);
        let out = if depth == 0 {
            base
        } else {
            let (la, lb) = (self.arity(), other.arity());
            let other_low = other.reduce_raw(depth - 1);
            let self_low = self.reduce_raw(depth - 1);
            // children of self carry the new point right after ā; move it to the end
            let mut order: Vec<Option<u16>> = (0..la as u16).map(Some).collect();
            order.extend((0..lb as u16).map(|i| Some(la as u16 + 1 + i)));
            order.push(Some(la as u16));
            let mut kids = Vec::new();
            for c in self.children() {
                kids.push(c.union_raw(other_low)?.reindex_raw(&order));
            }
            for c in other.children() {
                kids.push(self_low.union_raw(c)?);
            }
            TypeN::inner(depth, base, kids)
        };
        CACHES.lock().unwrap().union.insert(key, out);
        Ok(out)
    }
}

/// Limits guarding the non-elementary growth of type computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of memoized (tuple, depth) entries per evaluator.
    pub max_nodes: usize,
    pub max_depth: u32,
    pub max_universe: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: 4_000_000, max_depth: 24, max_universe: 20_000 }
    }
}

const ABSENT: u16 = u16::MAX;

/// Where evaluated nodes go: the global interning table or plain digests.
trait Sink {
    type Out: Copy + Ord;
    fn memo(&mut self) -> &mut HashMap<(Vec<u16>, u32), Self::Out>;
    fn leaf(&mut self, t: Type0) -> Self::Out;
    fn inner(&mut self, depth: u32, arity: usize, base: Self::Out, kids: Vec<Self::Out>) -> Self::Out;
}

#[derive(Default)]
struct Interning(HashMap<(Vec<u16>, u32), TypeN>);

impl Sink for Interning {
    type Out = TypeN;
    fn memo(&mut self) -> &mut HashMap<(Vec<u16>, u32), TypeN> {
        &mut self.0
    }
    fn leaf(&mut self, t: Type0) -> TypeN {
        TypeN::leaf(t)
    }
    fn inner(&mut self, depth: u32, _arity: usize, base: TypeN, kids: Vec<TypeN>) -> TypeN {
        TypeN::inner(depth, base, kids)
    }
}

#[derive(Default)]
struct Hashing(HashMap<(Vec<u16>, u32), TypeDigest>);

impl Sink for Hashing {
    type Out = TypeDigest;
    fn memo(&mut self) -> &mut HashMap<(Vec<u16>, u32), TypeDigest> {
        &mut self.0
    }
    fn leaf(&mut self, t: Type0) -> TypeDigest {
        leaf_digest(&t)
    }
    fn inner(&mut self, depth: u32, arity: usize, base: TypeDigest, kids: Vec<TypeDigest>) -> TypeDigest {
        inner_digest(depth, arity, base, kids)
    }
}

struct Ctx<'a> {
    m: &'a Structure,
    budget: Budget,
    /// Per element: the relation tuples whose least element it is.
    incidence: Vec<Vec<(u32, Vec<usize>)>>,
}

/// Computes types of tuples in one structure, memoizing per (tuple, depth).
///
/// Only extensions by points outside the current tuple are explored, so the
/// work for a depth-`n` type grows like `|M|^n` at most and stops growing
/// once a tuple exhausts the universe.
pub struct Evaluator<'a> {
    ctx: Ctx<'a>,
    interning: Interning,
    hashing: Hashing,
}

impl<'a> Evaluator<'a> {
    pub fn new(m: &'a Structure) -> Self {
        Self::with_budget(m, Budget::default())
    }

    pub fn with_budget(m: &'a Structure, budget: Budget) -> Self {
        let mut incidence = vec![Vec::new(); m.size()];
        for (i, s) in m.signature().symbols().iter().enumerate() {
            let id = sym_id(&s.name);
            for t in m.relation(i) {
                if let Some(&least) = t.iter().min() {
                    incidence[least].push((id, t.clone()));
                }
            }
        }
        Evaluator {
            ctx: Ctx { m, budget, incidence },
            interning: Interning::default(),
            hashing: Hashing::default(),
        }
    }

    pub fn structure(&self) -> &Structure {
        self.ctx.m
    }

    fn prepare(&self, tuple: &[Option<usize>], n: u32) -> Result<Vec<u16>> {
        let m = self.ctx.m;
        let limit = self.ctx.budget.max_universe.min(ABSENT as usize);
        if m.size() > limit {
            return Err(Error::Budget(format!("universe of size {} exceeds {limit}", m.size())));
        }
        if n > self.ctx.budget.max_depth {
            return Err(Error::Budget(format!("depth {n} exceeds {}", self.ctx.budget.max_depth)));
        }
        let mut out = Vec::with_capacity(tuple.len());
        for e in tuple {
            match e {
                Some(e) => {
                    m.check_element(*e)?;
                    out.push(*e as u16);
                }
                None => out.push(ABSENT),
            }
        }
        Ok(out)
    }

    /// `Th^n(M; ā)` where `None` entries are parameters outside the carrier.
    pub fn type_of(&mut self, tuple: &[Option<usize>], n: u32) -> Result<TypeN> {
        let mut t = self.prepare(tuple, n)?;
        self.ctx.eval(&mut self.interning, &mut t, n)
    }

    pub fn thn(&mut self, tuple: &[usize], n: u32) -> Result<TypeN> {
        let t: Vec<Option<usize>> = tuple.iter().map(|&e| Some(e)).collect();
        self.type_of(&t, n)
    }

    /// Digest of `Th^n(M; ā)` without interning; equal to
    /// `type_of(tuple, n)?.type_digest()`.
    pub fn digest_of(&mut self, tuple: &[Option<usize>], n: u32) -> Result<TypeDigest> {
        let mut t = self.prepare(tuple, n)?;
        self.ctx.eval(&mut self.hashing, &mut t, n)
    }
}

impl Ctx<'_> {
    fn eval<S: Sink>(&self, sink: &mut S, tuple: &mut Vec<u16>, k: u32) -> Result<S::Out> {
        if let Some(&t) = sink.memo().get(&(tuple.clone(), k)) {
            return Ok(t);
        }
        if sink.memo().len() >= self.budget.max_nodes {
            return Err(Error::Budget(format!("more than {} memoized type nodes", self.budget.max_nodes)));
        }
        let out = if k == 0 {
            sink.leaf(self.atomic(tuple))
        } else {
            let base = self.eval(sink, tuple, 0)?;
            let mut kids = Vec::new();
            for b in 0..self.m.size() as u16 {
                if tuple.contains(&b) {
                    continue;
                }
                tuple.push(b);
                let r = self.eval(sink, tuple, k - 1);
                tuple.pop();
                kids.push(r?);
            }
            sink.inner(k, tuple.len(), base, kids)
        };
        sink.memo().insert((tuple.clone(), k), out);
        Ok(out)
    }

    fn atomic(&self, tuple: &[u16]) -> Type0 {
        let classes: Vec<Option<u16>> = tuple
            .iter()
            .map(|&e| (e != ABSENT).then(|| tuple.iter().position(|&x| x == e).unwrap() as u16))
            .collect();
        let positions = |e: usize| -> Vec<u16> {
            (0..tuple.len() as u16).filter(|&p| tuple[p as usize] as usize == e).collect()
        };
        let mut atoms = Vec::new();
        for (p, &e) in tuple.iter().enumerate() {
            if e == ABSENT || classes[p] != Some(p as u16) {
                continue;
            }
            for (id, t) in &self.incidence[e as usize] {
                let lists: Vec<Vec<u16>> = t.iter().map(|&x| positions(x)).collect();
                if lists.iter().any(|l| l.is_empty()) {
                    continue;
                }
                let refs: Vec<&Vec<u16>> = lists.iter().collect();
                let mut combos = Vec::new();
                cartesian(&refs, &mut Vec::with_capacity(refs.len()), &mut combos);
                atoms.extend(combos.into_iter().map(|c| (*id, c)));
            }
        }
        atoms.sort();
        let dist = self.m.distance_predicates().map(|dp| {
            let mut v = Vec::new();
            for i in 0..tuple.len() {
                for j in i + 1..tuple.len() {
                    v.push(if tuple[i] == ABSENT || tuple[j] == ABSENT {
                        ABSENT_DIST
                    } else {
                        dp.capped(tuple[i] as usize, tuple[j] as usize)
                    });
                }
            }
            (dp.cap, v)
        });
        Type0 { classes, atoms, dist }
    }
}

/// `Th^0(M; ā)`.
pub fn th0(m: &Structure, tuple: &[Option<usize>]) -> Result<Type0> {
    Ok(Evaluator::new(m).type_of(tuple, 0)?.type0().unwrap())
}

/// `Th^n(M; ā)` with a fresh evaluator.
pub fn thn(m: &Structure, tuple: &[usize], n: u32) -> Result<TypeN> {
    Evaluator::new(m).thn(tuple, n)
}
