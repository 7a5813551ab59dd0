//! Distorted sums of models: a global structure partitioned into blocks `A_t`
//! indexed by the points of a metric space, with windows
//! `M_t = ⋃{A_s : d(t,s) ≤ 1}`.

pub mod abstract_lemma;
pub mod corpus;
pub mod table;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::structure::{pow2, DistancePredicates, ExtDistance, MetricIndex, Signature, Structure, Substructure};
use crate::theory::types::{Budget, Evaluator, TypeDigest, TypeN};

use serde::Serialize;

pub use abstract_lemma::{
    abstract_expansion, check_otimes, dtheory, verify_abstract_lemma, AbstractKey, BaseExpansion, DTheory, RadiusSchedule,
};
pub use table::{CompositionTable, Instance, TableCollision, TableOutcome};

/// Index structure with its metric, global structure, and the block map `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistortedSumSpec {
    pub index: Structure,
    pub metric: MetricIndex,
    pub global: Structure,
    /// `h[a]` is the index point whose block contains global element `a`.
    pub h: Vec<usize>,
}

/// An element of a two-sorted model, named by where it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    M(usize),
    I(usize),
}

impl DistortedSumSpec {
    pub fn new(index: Structure, metric: MetricIndex, global: Structure, h: Vec<usize>) -> Result<Self> {
        if metric.len() != index.size() {
            return domain(format!("metric on {} points for an index of size {}", metric.len(), index.size()));
        }
        if h.len() != global.size() {
            return domain(format!("h defined on {} elements, global has {}", h.len(), global.size()));
        }
        if let Some(&bad) = h.iter().find(|&&t| t >= index.size()) {
            return domain(format!("h maps into index point {bad}, outside the index"));
        }
        Ok(DistortedSumSpec { index, metric, global, h })
    }

    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.index.fingerprint());
        hasher.update(self.global.fingerprint());
        for d in self.metric.matrix() {
            hasher.update(d.to_string());
            hasher.update(b",");
        }
        hasher.update(format!("{:?}", self.h));
        crate::structure::hex16(&hasher.finalize())
    }

    /// `A_t`.
    pub fn block(&self, t: usize) -> Vec<usize> {
        (0..self.h.len()).filter(|&a| self.h[a] == t).collect()
    }

    /// Elements of the window `M_t`.
    pub fn window(&self, t: usize) -> Vec<usize> {
        (0..self.h.len()).filter(|&a| self.metric.get(t, self.h[a]).within(1)).collect()
    }

    /// `d(x, y)` read through `h` for global elements.
    pub fn distance(&self, x: Point, y: Point) -> ExtDistance {
        self.metric.get(self.point_of(x), self.point_of(y))
    }

    fn point_of(&self, x: Point) -> usize {
        match x {
            Point::M(a) => self.h[a],
            Point::I(t) => t,
        }
    }

    pub fn h_tuple(&self, tuple: &[usize]) -> Vec<usize> {
        tuple.iter().map(|&a| self.h[a]).collect()
    }
}

/// The local model `M_t`: the global structure induced on the window of `t`.
pub fn local_model(spec: &DistortedSumSpec, t: usize) -> Result<Substructure> {
    spec.index.check_element(t)?;
    Ok(spec.global.induced(&spec.window(t)))
}

/// The two-sorted model `M^n(ā)` built around a set of index points, carrying
/// `Q1_R` (global relations on the M-sort), `Q0_R` (index relations on the
/// I-sort), the graph `H` of `h`, sort predicates `InM`/`InI`, and distance
/// predicates `D^k` for `k ≤ radius`.
#[derive(Debug, Clone)]
pub struct TwoSortedModel {
    pub structure: Structure,
    /// Carrier position of each global element / index point, if present.
    pub m_pos: Vec<Option<usize>>,
    pub i_pos: Vec<Option<usize>>,
}

impl TwoSortedModel {
    pub fn locate(&self, x: Point) -> Option<usize> {
        match x {
            Point::M(a) => self.m_pos[a],
            Point::I(t) => self.i_pos[t],
        }
    }

    pub fn locate_all(&self, xs: &[Point]) -> Vec<Option<usize>> {
        xs.iter().map(|&x| self.locate(x)).collect()
    }
}

fn two_sorted_signature(spec: &DistortedSumSpec) -> Result<Arc<Signature>> {
    let mut syms: Vec<(String, usize)> = Vec::new();
    for s in spec.global.signature().symbols() {
        syms.push((format!("Q1_{}", s.name), s.arity));
    }
    for s in spec.index.signature().symbols() {
        syms.push((format!("Q0_{}", s.name), s.arity));
    }
    syms.push(("H".into(), 2));
    syms.push(("InM".into(), 1));
    syms.push(("InI".into(), 1));
    Ok(Arc::new(Signature::new(syms)?))
}

/// `M^n(s̄)` for index points `s̄` at the given radius (`2^n` in the
/// distorted sum lemma, `r(n)` in the abstract version).
pub fn neighborhood_model_at(spec: &DistortedSumSpec, points: &[usize], radius: u64) -> Result<TwoSortedModel> {
    for &s in points {
        spec.index.check_element(s)?;
    }
    let cap = u32::try_from(radius).map_err(|_| Error::Budget(format!("radius {radius} too large")))?;
    let near: Vec<usize> = (0..spec.index.size())
        .filter(|&t| spec.metric.to_tuple(points, t).within(radius))
        .collect();
    let m_elems: Vec<usize> = (0..spec.global.size())
        .filter(|&a| near.iter().any(|&t| spec.metric.get(t, spec.h[a]).within(1)))
        .collect();
    let mut m_pos = vec![None; spec.global.size()];
    let mut i_pos = vec![None; spec.index.size()];
    let mut names = Vec::new();
    let mut carrier = Vec::new();
    for &a in &m_elems {
        m_pos[a] = Some(names.len());
        names.push(format!("m:{}", spec.global.name(a)));
        carrier.push(Point::M(a));
    }
    for &t in &near {
        i_pos[t] = Some(names.len());
        names.push(format!("i:{}", spec.index.name(t)));
        carrier.push(Point::I(t));
    }
    let sig = two_sorted_signature(spec)?;
    let mut rels: Vec<Vec<Vec<usize>>> = Vec::with_capacity(sig.len());
    for sym in 0..spec.global.signature().len() {
        rels.push(
            spec.global
                .relation(sym)
                .iter()
                .filter_map(|t| t.iter().map(|&a| m_pos[a]).collect::<Option<Vec<_>>>())
                .collect(),
        );
    }
    for sym in 0..spec.index.signature().len() {
        rels.push(
            spec.index
                .relation(sym)
                .iter()
                .filter_map(|t| t.iter().map(|&s| i_pos[s]).collect::<Option<Vec<_>>>())
                .collect(),
        );
    }
    let mut graph_h = Vec::new();
    for &a in &m_elems {
        if let Some(u) = i_pos[spec.h[a]] {
            graph_h.push(vec![m_pos[a].unwrap(), u]);
        }
    }
    rels.push(graph_h);
    rels.push(m_elems.iter().map(|&a| vec![m_pos[a].unwrap()]).collect());
    rels.push(near.iter().map(|&t| vec![i_pos[t].unwrap()]).collect());
    let size = carrier.len();
    let mut dist = Vec::with_capacity(size * size);
    for &x in &carrier {
        for &y in &carrier {
            dist.push(spec.distance(x, y));
        }
    }
    let dp = DistancePredicates::new(size, dist, cap)?;
    let structure = Structure::with_distance_predicates(sig, names, rels, Some(dp))?;
    Ok(TwoSortedModel { structure, m_pos, i_pos })
}

/// `M^n(ā)` for global elements `ā`; depends only on `h(ā)`.
pub fn neighborhood_model(spec: &DistortedSumSpec, tuple: &[usize], n: u32) -> Result<TwoSortedModel> {
    for &a in tuple {
        spec.global.check_element(a)?;
    }
    neighborhood_model_at(spec, &spec.h_tuple(tuple), pow2(n))
}

/// `α(0,ℓ) = 0`, `α(n,ℓ) = α(n−1,ℓ+1) + ℓ + 2`.
pub fn alpha(n: u32, ell: u32) -> u32 {
    if n == 0 {
        0
    } else {
        alpha(n - 1, ell + 1) + ell + 2
    }
}

/// Name of the materialized predicate `R^t_{n,k,ℓ}`.
fn fv_predicate_name(n: u32, k: usize, ell: u32, t: TypeDigest) -> String {
    format!("R{n}_{k}_{ell}#{}", &t.to_string()[..16])
}

/// Depth of the local type recorded by the predicates `R^t_{n,k,ℓ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PredicateDepth {
    /// `α(n−1,ℓ+1)` for every `k`.
    Uniform,
    /// `α(n,ℓ)` for `k = 0` and `α(n−1,ℓ+1)` otherwise. With `Uniform`, the
    /// `k = 0` predicates of level 1 have depth 0 and say nothing about the
    /// block, so e.g. whether `M` is empty is not determined by the index.
    #[default]
    FullAtRoot,
}

impl PredicateDepth {
    pub fn depth(self, n: u32, k: usize, ell: u32) -> u32 {
        match self {
            PredicateDepth::FullAtRoot if k == 0 => alpha(n, ell),
            _ => alpha(n - 1, ell + 1),
        }
    }
}

/// Every tuple over `0..base` of the given length, in lexicographic order.
pub(crate) fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

/// Relations of an index expansion, before they are assembled into a structure.
type RelationMap = std::collections::BTreeMap<String, (usize, Vec<Vec<usize>>)>;

/// The index expansion `I^{n,ℓ}`: the index plus the distorted
/// Feferman–Vaught predicates of every level `1..=n` (only those realized),
/// plus distance predicates `D^k` for `k ≤ 2^n` when `n ≥ 1`.
pub fn index_expansion(spec: &DistortedSumSpec, n: u32, ell: u32, budget: Budget) -> Result<Structure> {
    index_expansion_with(spec, n, ell, PredicateDepth::default(), budget)
}

pub fn index_expansion_with(
    spec: &DistortedSumSpec,
    n: u32,
    ell: u32,
    rule: PredicateDepth,
    budget: Budget,
) -> Result<Structure> {
    let mut rels = RelationMap::new();
    for (i, s) in spec.index.signature().symbols().iter().enumerate() {
        rels.insert(s.name.clone(), (s.arity, spec.index.relation(i).iter().cloned().collect()));
    }
    add_fv_predicates(spec, n, ell, rule, budget, &mut rels)?;
    let sig = Arc::new(Signature::new(rels.iter().map(|(name, (arity, _))| (name.clone(), *arity)))?);
    let relations = rels.into_values().map(|(_, t)| t).collect();
    let dp = if n == 0 {
        None
    } else {
        let size = spec.index.size();
        Some(DistancePredicates::new(size, spec.metric.matrix(), pow2(n) as u32)?)
    };
    Structure::with_distance_predicates(sig, spec.index.names().to_vec(), relations, dp)
}

fn add_fv_predicates(
    spec: &DistortedSumSpec,
    n: u32,
    ell: u32,
    rule: PredicateDepth,
    budget: Budget,
    rels: &mut RelationMap,
) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    add_fv_predicates(spec, n - 1, ell + 1, rule, budget, rels)?;
    let size = spec.index.size();
    // group the candidate tuples by the point set they span, which fixes M^n(ū)
    let mut by_set: std::collections::BTreeMap<Vec<usize>, Vec<Vec<usize>>> = Default::default();
    for k in 0..=ell as usize {
        for u in tuples(size, k + 1) {
            if crate::structure::tuple_components(&u, n, &spec.metric)?.len() != 1 {
                continue;
            }
            let mut set = u.clone();
            set.sort_unstable();
            set.dedup();
            by_set.entry(set).or_default().push(u);
        }
    }
    for (set, us) in by_set {
        let model = neighborhood_model_at(spec, &set, pow2(n))?;
        let mut ev = Evaluator::with_budget(&model.structure, budget);
        for u in us {
            let k = u.len() - 1;
            let depth = rule.depth(n, k, ell);
            let blocks: Vec<Vec<usize>> = u[..k].iter().map(|&s| spec.block(s)).collect();
            let last = model.locate(Point::I(u[k]));
            for choice in product(&blocks) {
                let mut tuple: Vec<Option<usize>> = choice.iter().map(|&c| model.locate(Point::M(c))).collect();
                tuple.push(last);
                let t = ev.digest_of(&tuple, depth)?;
                let entry = rels.entry(fv_predicate_name(n, k, ell, t)).or_insert((k + 1, Vec::new()));
                if !entry.1.contains(&u) {
                    entry.1.push(u.clone());
                }
            }
        }
    }
    Ok(())
}

/// Cartesian product of the given lists.
pub(crate) fn product(lists: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        out = out
            .into_iter()
            .flat_map(|t| {
                l.iter().map(move |&e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

/// Key of the depth-0 composition map: the index diagram of
/// `h(b̄)` and, for every position, the diagram of `b̄` in the window of that
/// position's block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LemmaKey {
    pub index: TypeN,
    pub locals: Vec<TypeN>,
}

impl table::KeyDigest for LemmaKey {
    fn digest_parts(&self) -> Vec<String> {
        std::iter::once(self.index).chain(self.locals.iter().copied()).map(TypeN::digest).collect()
    }
}

/// Checks that `th^0(M; b̄)` is a function of the window data for every tuple
/// of length `≤ max_len`, jointly over the corpus.
pub fn verify_distorted_sum(corpus: &[DistortedSumSpec], max_len: usize) -> Result<TableOutcome<LemmaKey>> {
    let mut table = CompositionTable::new(0, max_len as u32);
    for (si, spec) in corpus.iter().enumerate() {
        let locals: Vec<Substructure> =
            (0..spec.index.size()).map(|t| local_model(spec, t)).collect::<Result<_>>()?;
        let mut ev_index = Evaluator::new(&spec.index);
        let mut ev_global = Evaluator::new(&spec.global);
        let mut ev_locals: Vec<Evaluator> = locals.iter().map(|l| Evaluator::new(&l.structure)).collect();
        for len in 0..=max_len {
            for b in tuples(spec.global.size(), len) {
                let key = LemmaKey {
                    index: ev_index.thn(&spec.h_tuple(&b), 0)?,
                    locals: b
                        .iter()
                        .map(|&x| ev_locals[spec.h[x]].type_of(&locals[spec.h[x]].locate(&b), 0))
                        .collect::<Result<_>>()?,
                };
                let value = ev_global.thn(&b, 0)?;
                if let Some(c) = table.insert(key, value, Instance { spec: si, tuple: b })? {
                    return Ok(TableOutcome::Collision(c));
                }
            }
        }
    }
    Ok(TableOutcome::Functional(table))
}

/// Per-spec cache of neighborhood models keyed by (point set, radius).
pub(crate) struct ModelCache<'s> {
    spec: &'s DistortedSumSpec,
    models: HashMap<(Vec<usize>, u64), usize>,
    store: Vec<TwoSortedModel>,
}

impl<'s> ModelCache<'s> {
    pub(crate) fn new(spec: &'s DistortedSumSpec) -> Self {
        ModelCache { spec, models: HashMap::new(), store: Vec::new() }
    }

    /// Builds (once) the model for `points` and returns its slot.
    pub(crate) fn slot(&mut self, points: &[usize], radius: u64) -> Result<usize> {
        let mut set = points.to_vec();
        set.sort_unstable();
        set.dedup();
        if let Some(&i) = self.models.get(&(set.clone(), radius)) {
            return Ok(i);
        }
        let m = neighborhood_model_at(self.spec, &set, radius)?;
        self.store.push(m);
        self.models.insert((set, radius), self.store.len() - 1);
        Ok(self.store.len() - 1)
    }

    pub(crate) fn get(&self, slot: usize) -> &TwoSortedModel {
        &self.store[slot]
    }
}

/// Evaluators over the models of a [`ModelCache`], created on demand.
pub(crate) struct Evaluators<'m> {
    evs: HashMap<usize, Evaluator<'m>>,
    budget: Budget,
}

impl<'m> Evaluators<'m> {
    pub(crate) fn new(budget: Budget) -> Self {
        Evaluators { evs: HashMap::new(), budget }
    }

    pub(crate) fn type_of(&mut self, cache: &'m ModelCache<'_>, slot: usize, tuple: &[Point], n: u32) -> Result<TypeN> {
        let model = cache.get(slot);
        let budget = self.budget;
        let ev = self.evs.entry(slot).or_insert_with(|| Evaluator::with_budget(&model.structure, budget));
        ev.type_of(&model.locate_all(tuple), n)
    }

    pub(crate) fn digest_of(
        &mut self,
        cache: &'m ModelCache<'_>,
        slot: usize,
        tuple: &[Point],
        n: u32,
    ) -> Result<TypeDigest> {
        let model = cache.get(slot);
        let budget = self.budget;
        let ev = self.evs.entry(slot).or_insert_with(|| Evaluator::with_budget(&model.structure, budget));
        ev.digest_of(&model.locate_all(tuple), n)
    }
}

/// Checks the distorted sum lemma on a corpus: `th^n(M; ā)` as a function of
/// `th^n(I^{n,ℓ}; h(ā))` and the types of the `n`-components `ā^i` of `ā` in
/// `M^{α(n,ℓ)}(ā^i)`. Components are listed by least position.
pub fn verify_distorted_sum_lemma(
    corpus: &[DistortedSumSpec],
    n: u32,
    ell: usize,
    rule: PredicateDepth,
    budget: Budget,
) -> Result<TableOutcome<LemmaKey>> {
    let mut table = CompositionTable::new(n, ell as u32);
    let radius = pow2(alpha(n, ell as u32));
    for (si, spec) in corpus.iter().enumerate() {
        let ie = index_expansion_with(spec, n, ell as u32, rule, budget)?;
        let mut ev_index = Evaluator::with_budget(&ie, budget);
        let mut ev_global = Evaluator::with_budget(&spec.global, budget);
        let mut cache = ModelCache::new(spec);
        let all = tuples(spec.global.size(), ell);
        // build every model first so evaluators can borrow them
        let mut plans = Vec::with_capacity(all.len());
        for a in &all {
            let s = spec.h_tuple(a);
            let parts = crate::structure::tuple_components(&s, n, &spec.metric)?;
            let mut comps = Vec::new();
            for block in parts.blocks() {
                let sub: Vec<usize> = block.iter().map(|&p| a[p]).collect();
                let pts: Vec<usize> = block.iter().map(|&p| s[p]).collect();
                comps.push((cache.slot(&pts, radius)?, sub));
            }
            plans.push((s, comps));
        }
        let mut evs = Evaluators::new(budget);
        for (a, (s, comps)) in all.iter().zip(plans) {
            let mut locals = Vec::with_capacity(comps.len());
            for (slot, sub) in comps {
                let pts: Vec<Point> = sub.iter().map(|&x| Point::M(x)).collect();
                locals.push(evs.type_of(&cache, slot, &pts, n)?);
            }
            let key = LemmaKey { index: ev_index.thn(&s, n)?, locals };
            let value = ev_global.thn(a, n)?;
            if let Some(c) = table.insert(key, value, Instance { spec: si, tuple: a.clone() })? {
                return Ok(TableOutcome::Collision(c));
            }
        }
    }
    Ok(TableOutcome::Functional(table))
}

/// Looks up `F_{n,ℓ}` at `key`.
pub fn compose_theory<K: Ord + Clone + std::fmt::Debug>(table: &CompositionTable<K>, key: &K) -> Result<TypeN> {
    table.get(key).ok_or_else(|| Error::UnknownKey(format!("{key:?}")))
}
