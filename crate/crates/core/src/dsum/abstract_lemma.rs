//! The abstract distorted sum lemma: unary Feferman–Vaught expansions `I^n`,
//! distant-element theories `DTh^k`, and the `⊗` hypothesis.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::table::{CompositionTable, Instance, KeyDigest, TableOutcome};
use super::{neighborhood_model_at, tuples, DistortedSumSpec, Evaluators, ModelCache, Point};
use crate::error::{domain, Result};
use crate::structure::{Signature, Structure};
use crate::theory::determine::{DeterminationResult, Determiner};
use crate::theory::types::{Budget, Evaluator, TypeDigest, TypeN};

/// What the level-0 expansion `I^0` carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BaseExpansion {
    /// `I^0` is the bare index.
    Bare,
    /// `I^0` carries `Q_0` predicates like every other level. `DTh^1` only
    /// reads `I^0`, so without them `th^1(M; ⟨⟩)` (is `M` nonempty?) is not
    /// determined by `DTh^1(I^1; ⟨⟩)`.
    #[default]
    Typed,
}

/// Depths `β(n)` and radii `r(n) = 2^{m(n)}` indexed by `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusSchedule {
    beta: Vec<u32>,
    radius: Vec<u64>,
    base: BaseExpansion,
}

impl RadiusSchedule {
    /// Checks `β` strictly increasing with `β(n) ≥ n`, and `r` strictly
    /// increasing with `r(n+1) ≥ 3·r(n)`.
    pub fn new(beta: Vec<u32>, radius: Vec<u64>) -> Result<Self> {
        if beta.len() != radius.len() || beta.is_empty() {
            return domain("schedule needs equally many depths and radii, at least one");
        }
        for (n, &b) in beta.iter().enumerate() {
            if (b as usize) < n {
                return domain(format!("beta({n}) = {b} is below {n}"));
            }
        }
        if beta.windows(2).any(|w| w[1] <= w[0]) {
            return domain("beta must be strictly increasing");
        }
        if radius.windows(2).any(|w| w[1] <= w[0] || w[1] < 3 * w[0]) {
            return domain("radii must grow by a factor of at least 3");
        }
        Ok(RadiusSchedule { beta, radius, base: BaseExpansion::default() })
    }

    pub fn with_base(mut self, base: BaseExpansion) -> Self {
        self.base = base;
        self
    }

    pub fn base(&self) -> BaseExpansion {
        self.base
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn beta(&self, n: u32) -> Result<u32> {
        self.beta.get(n as usize).copied().map_or_else(|| domain(format!("schedule has no level {n}")), Ok)
    }

    pub fn radius(&self, n: u32) -> Result<u64> {
        self.radius.get(n as usize).copied().map_or_else(|| domain(format!("schedule has no level {n}")), Ok)
    }

    pub fn betas(&self) -> &[u32] {
        &self.beta
    }

    pub fn radii(&self) -> &[u64] {
        &self.radius
    }
}

/// `DTh^k(I^n; s̄)`: at level 0 the atomic diagram, above it the set of pairs
/// (`DTh^{k-1}` of an extension, its atomic diagram) over distant points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DTheory {
    Base(TypeN),
    Set { level: u32, pairs: Arc<Vec<(DTheory, TypeN)>> },
}

impl DTheory {
    pub fn level(&self) -> u32 {
        match self {
            DTheory::Base(_) => 0,
            DTheory::Set { level, .. } => *level,
        }
    }

    /// Canonical serialization, pairs sorted by their own serialization.
    pub fn serialize(&self) -> String {
        match self {
            DTheory::Base(t) => format!("D0({})", t.serialize()),
            DTheory::Set { level, pairs } => {
                let mut parts: Vec<String> =
                    pairs.iter().map(|(d, t)| format!("<{}|{}>", d.serialize(), t.serialize())).collect();
                parts.sort();
                format!("D{level}{{{}}}", parts.join(""))
            }
        }
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.serialize());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The unary expansion `I^n`: the index plus `Q^t_n(u)` for every realized
/// `t = th^{β(n)}(M^{m(n)}(u); c)` with `h(c) = u`. With [`BaseExpansion::Bare`]
/// `I^0` is the index itself.
pub fn abstract_expansion(spec: &DistortedSumSpec, schedule: &RadiusSchedule, n: u32, budget: Budget) -> Result<Structure> {
    if n == 0 && schedule.base() == BaseExpansion::Bare {
        return Ok(spec.index.clone());
    }
    let depth = schedule.beta(n)?;
    let radius = schedule.radius(n)?;
    let mut preds: std::collections::BTreeMap<String, Vec<Vec<usize>>> = Default::default();
    for u in 0..spec.index.size() {
        let block = spec.block(u);
        if block.is_empty() {
            continue;
        }
        let model = neighborhood_model_at(spec, &[u], radius)?;
        let mut ev = Evaluator::with_budget(&model.structure, budget);
        for c in block {
            let t = ev.digest_of(&[model.locate(Point::M(c))], depth)?;
            let rows = preds.entry(format!("Q{n}#{}", &t.to_string()[..16])).or_default();
            if !rows.contains(&vec![u]) {
                rows.push(vec![u]);
            }
        }
    }
    let mut syms: Vec<(String, usize)> =
        spec.index.signature().symbols().iter().map(|s| (s.name.clone(), s.arity)).collect();
    let mut rels: Vec<Vec<Vec<usize>>> =
        (0..spec.index.signature().len()).map(|i| spec.index.relation(i).iter().cloned().collect()).collect();
    for (name, rows) in preds {
        syms.push((name, 1));
        rels.push(rows);
    }
    Structure::new(Arc::new(Signature::new(syms)?), spec.index.names().to_vec(), rels)
}

/// Evaluates `DTh^k(I^n; s̄)` with the expansions `I^0..I^n` computed once.
pub struct DTheoryContext<'s> {
    spec: &'s DistortedSumSpec,
    schedule: &'s RadiusSchedule,
    budget: Budget,
    expansions: HashMap<u32, Structure>,
    memo: HashMap<(u32, u32, Vec<usize>), DTheory>,
}

impl<'s> DTheoryContext<'s> {
    pub fn new(spec: &'s DistortedSumSpec, schedule: &'s RadiusSchedule, budget: Budget) -> Self {
        DTheoryContext { spec, schedule, budget, expansions: HashMap::new(), memo: HashMap::new() }
    }

    fn expansion(&mut self, n: u32) -> Result<&Structure> {
        if !self.expansions.contains_key(&n) {
            let e = abstract_expansion(self.spec, self.schedule, n, self.budget)?;
            self.expansions.insert(n, e);
        }
        Ok(&self.expansions[&n])
    }

    fn th0(&mut self, n: u32, s: &[usize]) -> Result<TypeN> {
        let e = self.expansion(n)?;
        Evaluator::new(e).thn(s, 0)
    }

    /// `n` is the expansion level, clamped at 0 as in `I^{-n} = I^0`.
    pub fn dtheory(&mut self, n: u32, k: u32, s: &[usize]) -> Result<DTheory> {
        let key = (n, k, s.to_vec());
        if let Some(d) = self.memo.get(&key) {
            return Ok(d.clone());
        }
        let out = if k == 0 {
            DTheory::Base(self.th0(n, s)?)
        } else {
            let below = n.saturating_sub(1);
            let threshold = self.schedule.radius(k - 1)?;
            let mut pairs = Vec::new();
            for t in 0..self.spec.index.size() {
                if self.spec.metric.to_tuple(s, t).within(threshold) {
                    continue;
                }
                let mut ext = s.to_vec();
                ext.push(t);
                pairs.push((self.dtheory(below, k - 1, &ext)?, self.th0(below, &ext)?));
            }
            pairs.sort();
            pairs.dedup();
            DTheory::Set { level: k, pairs: Arc::new(pairs) }
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// `DTh^k(I^n; s̄)` for index points `s̄`.
pub fn dtheory(
    spec: &DistortedSumSpec,
    schedule: &RadiusSchedule,
    n: u32,
    k: u32,
    s: &[usize],
    budget: Budget,
) -> Result<DTheory> {
    for &p in s {
        spec.index.check_element(p)?;
    }
    DTheoryContext::new(spec, schedule, budget).dtheory(n, k, s)
}

/// `Th^depth(M^radius(x̄); ȳ)`: one type of `ȳ` per entry of `x̄`, each in the
/// model around that entry alone.
pub(crate) fn th_sequence<'m>(
    cache: &'m ModelCache<'_>,
    evs: &mut Evaluators<'m>,
    slots: &[usize],
    y: &[Point],
    depth: u32,
) -> Result<Vec<TypeDigest>> {
    slots.iter().map(|&slot| evs.digest_of(cache, slot, y, depth)).collect()
}

/// A determination check together with the corpus instances behind a collision.
#[derive(Debug, Clone)]
pub struct DeterminationReport<K, V> {
    pub result: DeterminationResult<K, V>,
    pub witnesses: Option<(Instance, Instance)>,
}

impl<K, V> DeterminationReport<K, V> {
    pub fn functional(&self) -> bool {
        self.result.functional
    }
}

pub(crate) fn report<K: Ord + Clone + std::fmt::Debug, V: Eq + Clone + std::fmt::Debug>(
    det: Determiner<K, V>,
    instances: &[Instance],
) -> DeterminationReport<K, V> {
    let result = det.finish();
    let witnesses = result
        .witness
        .as_ref()
        .map(|w| (instances[w.first].clone(), instances[w.second].clone()));
    DeterminationReport { result, witnesses }
}

/// Source side of the `⊗` hypothesis at level `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OtimesKey {
    pub k: u32,
    pub dth: DTheory,
    pub local: Vec<TypeDigest>,
}

/// For every `k ≤ n` and `(ā, b)` with `d(ā,b) ≤ r(k−1)`, checks that
/// `DTh^{k−1}(I^{k−1}; h(ā)⌢h(b))` is a function of `DTh^k(I^k; h(ā))` and
/// `Th^{β(k)−1}(M^{m(k−1)}(ā); ā⌢b)`. Tuples `ā` have length `1..=max_len`.
pub fn check_otimes(
    corpus: &[DistortedSumSpec],
    schedule: &RadiusSchedule,
    n: u32,
    max_len: usize,
    budget: Budget,
) -> Result<DeterminationReport<OtimesKey, DTheory>> {
    let mut det = Determiner::new();
    let mut instances = Vec::new();
    for k in 1..=n {
        let close = schedule.radius(k - 1)?;
        let depth = schedule.beta(k)? - 1;
        for (si, spec) in corpus.iter().enumerate() {
            let mut ctx = DTheoryContext::new(spec, schedule, budget);
            let mut cache = ModelCache::new(spec);
            let mut jobs = Vec::new();
            for len in 1..=max_len {
                for a in tuples(spec.global.size(), len) {
                    let s = spec.h_tuple(&a);
                    let slots: Vec<usize> = s.iter().map(|&p| cache.slot(&[p], close)).collect::<Result<_>>()?;
                    for b in 0..spec.global.size() {
                        if spec.metric.to_tuple(&s, spec.h[b]).within(close) {
                            jobs.push((a.clone(), s.clone(), slots.clone(), b));
                        }
                    }
                }
            }
            let mut evs = Evaluators::new(budget);
            for (a, s, slots, b) in jobs {
                let mut y: Vec<Point> = a.iter().map(|&x| Point::M(x)).collect();
                y.push(Point::M(b));
                let key = OtimesKey { k, dth: ctx.dtheory(k, k, &s)?, local: th_sequence(&cache, &mut evs, &slots, &y, depth)? };
                let mut sb = s.clone();
                sb.push(spec.h[b]);
                let target = ctx.dtheory(k - 1, k - 1, &sb)?;
                let mut tuple = a.clone();
                tuple.push(b);
                instances.push(Instance { spec: si, tuple });
                if !det.add(key, target) {
                    return Ok(report(det, &instances));
                }
            }
        }
    }
    Ok(report(det, &instances))
}

/// Key of the abstract lemma: `DTh^n(I^n; h(ā))` and `Th^{β(n)}(M^{m(n)}(ā); ā)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractKey {
    pub dth: DTheory,
    pub local: Vec<TypeDigest>,
}

impl KeyDigest for AbstractKey {
    fn digest_parts(&self) -> Vec<String> {
        std::iter::once(self.dth.digest()).chain(self.local.iter().map(|t| t.to_string())).collect()
    }
}

/// Checks that `th^n(M; ā)` is a function of the abstract key over the corpus.
pub fn verify_abstract_lemma(
    corpus: &[DistortedSumSpec],
    schedule: &RadiusSchedule,
    n: u32,
    ell: usize,
    budget: Budget,
) -> Result<TableOutcome<AbstractKey>> {
    let mut table = CompositionTable::new(n, ell as u32);
    let radius = schedule.radius(n)?;
    let depth = schedule.beta(n)?;
    for (si, spec) in corpus.iter().enumerate() {
        let mut ctx = DTheoryContext::new(spec, schedule, budget);
        let mut ev_global = Evaluator::with_budget(&spec.global, budget);
        let mut cache = ModelCache::new(spec);
        let all = tuples(spec.global.size(), ell);
        let mut plans = Vec::with_capacity(all.len());
        for a in &all {
            let s = spec.h_tuple(a);
            let slots: Vec<usize> = s.iter().map(|&p| cache.slot(&[p], radius)).collect::<Result<_>>()?;
            plans.push((s, slots));
        }
        let mut evs = Evaluators::new(budget);
        for (a, (s, slots)) in all.iter().zip(plans) {
            let y: Vec<Point> = a.iter().map(|&x| Point::M(x)).collect();
            let key = AbstractKey { dth: ctx.dtheory(n, n, &s)?, local: th_sequence(&cache, &mut evs, &slots, &y, depth)? };
            let value = ev_global.thn(a, n)?;
            if let Some(c) = table.insert(key, value, Instance { spec: si, tuple: a.clone() })? {
                return Ok(TableOutcome::Collision(c));
            }
        }
    }
    Ok(TableOutcome::Functional(table))
}
