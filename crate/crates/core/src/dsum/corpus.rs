//! Corpora of small distorted sums.
//!
//! Every generated spec uses one binary relation `R` on the index and one
//! binary relation `E` on the global structure, with `E`-tuples only between
//! elements whose blocks are at index distance `≤ 1`. Under that restriction
//! the window data determines atomic diagrams, so all specs of a corpus share
//! one composition map at depth 0.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use super::DistortedSumSpec;
use crate::error::{Error, Result};
use crate::structure::{ExtDistance, MetricIndex, Signature, Structure};
use crate::theory::enumerate::permutations;

/// Which binary relations a corpus ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationShape {
    /// Arbitrary binary relations, loops and one-way pairs included.
    Any,
    /// Symmetric irreflexive relations (simple graphs).
    Graph,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusParams {
    pub max_index: usize,
    pub max_block: usize,
    /// Allowed off-diagonal index distances.
    pub distances: Vec<ExtDistance>,
    pub index_relation: RelationShape,
    /// Restrict index tuples to points at distance `≤ 1`, as in a Gaifman
    /// index where related points are adjacent.
    pub index_local: bool,
    pub global_relation: RelationShape,
    /// Cap on the number of labeled candidates visited.
    pub max_candidates: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_index: 3,
            max_block: 2,
            distances: vec![
                ExtDistance::Finite(1),
                ExtDistance::Finite(2),
                ExtDistance::Finite(3),
                ExtDistance::Finite(5),
                ExtDistance::Infinite,
            ],
            index_relation: RelationShape::Any,
            index_local: false,
            global_relation: RelationShape::Graph,
            max_candidates: 2_000_000,
        }
    }
}

fn index_signature() -> Arc<Signature> {
    Arc::new(Signature::new([("R", 2)]).expect("valid signature"))
}

fn global_signature() -> Arc<Signature> {
    Arc::new(Signature::new([("E", 2)]).expect("valid signature"))
}

/// Candidate relation slots on `0..n`, filtered by `allowed`. For graphs a
/// slot is an unordered pair.
fn slots(n: usize, shape: RelationShape, allowed: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let ok = match shape {
                RelationShape::Any => true,
                RelationShape::Graph => i < j,
            };
            if ok && allowed(i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

fn relation_from_bits(slots: &[(usize, usize)], bits: u64, shape: RelationShape) -> Vec<Vec<usize>> {
    let mut rel = Vec::new();
    for (k, &(i, j)) in slots.iter().enumerate() {
        if bits >> k & 1 == 1 {
            rel.push(vec![i, j]);
            if shape == RelationShape::Graph {
                rel.push(vec![j, i]);
            }
        }
    }
    rel
}

/// All metrics on `p` points with off-diagonal values from `values`.
fn metrics(p: usize, values: &[ExtDistance]) -> Vec<MetricIndex> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let total = values.len().pow(pairs.len() as u32);
    for code in 0..total {
        let mut rows = vec![vec![ExtDistance::ZERO; p]; p];
        let mut c = code;
        for &(i, j) in &pairs {
            let v = values[c % values.len()];
            c /= values.len();
            rows[i][j] = v;
            rows[j][i] = v;
        }
        if let Ok(m) = MetricIndex::new(rows) {
            out.push(m);
        }
    }
    out
}

fn profiles(p: usize, max_block: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                (0..=max_block).map(move |s| {
                    let mut v = v.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

/// Builds a spec from block sizes, metric and relation tuples. Global
/// elements are numbered block by block.
pub fn spec_from_parts(
    metric: MetricIndex,
    sizes: &[usize],
    index_rel: Vec<Vec<usize>>,
    global_rel: Vec<Vec<usize>>,
) -> Result<DistortedSumSpec> {
    let p = sizes.len();
    let index = Structure::new(index_signature(), (0..p).map(|i| format!("s{i}")).collect(), vec![index_rel])?;
    let h: Vec<usize> = sizes.iter().enumerate().flat_map(|(t, &k)| std::iter::repeat_n(t, k)).collect();
    let global = Structure::new(global_signature(), (0..h.len()).map(|i| format!("a{i}")).collect(), vec![global_rel])?;
    DistortedSumSpec::new(index, metric, global, h)
}

/// Canonical text of a spec under a relabeling: index permutation `pi`
/// and global permutation `sigma`.
fn relabeled_code(spec: &DistortedSumSpec, pi: &[usize], sigma: &[usize]) -> String {
    let p = pi.len();
    let mut inv_pi = vec![0; p];
    for (i, &x) in pi.iter().enumerate() {
        inv_pi[x] = i;
    }
    let mut s = String::new();
    for i in 0..p {
        for j in 0..p {
            s.push_str(&spec.metric.get(inv_pi[i], inv_pi[j]).to_string());
            s.push(',');
        }
    }
    let m = sigma.len();
    let mut inv_sigma = vec![0; m];
    for (i, &x) in sigma.iter().enumerate() {
        inv_sigma[x] = i;
    }
    s.push('|');
    for a in 0..m {
        s.push_str(&pi[spec.h[inv_sigma[a]]].to_string());
        s.push(',');
    }
    s.push('|');
    let mut r: Vec<(usize, usize)> = spec.index.relation(0).iter().map(|t| (pi[t[0]], pi[t[1]])).collect();
    r.sort_unstable();
    s.push_str(&format!("{r:?}|"));
    let mut e: Vec<(usize, usize)> = spec.global.relation(0).iter().map(|t| (sigma[t[0]], sigma[t[1]])).collect();
    e.sort_unstable();
    s.push_str(&format!("{e:?}"));
    s
}

/// Smallest relabeled code over index permutations that keep global elements
/// numbered block by block, combined with permutations inside blocks.
fn canonical_code(spec: &DistortedSumSpec, index_perms: &[Vec<usize>]) -> String {
    let p = spec.index.size();
    let sizes: Vec<usize> = (0..p).map(|t| spec.block(t).len()).collect();
    let mut best: Option<String> = None;
    for pi in index_perms {
        // new block order: points sorted by their image under pi
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by_key(|&t| pi[t]);
        let new_sizes: Vec<usize> = order.iter().map(|&t| sizes[t]).collect();
        let mut starts = vec![0; p];
        for t in 1..p {
            starts[t] = starts[t - 1] + new_sizes[t - 1];
        }
        // all ways to permute inside each block
        let block_perms: Vec<Vec<Vec<usize>>> = (0..p).map(|t| permutations(sizes[t])).collect();
        let mut choice = vec![0usize; p];
        loop {
            let mut sigma = vec![0; spec.h.len()];
            for t in 0..p {
                let block = spec.block(t);
                let perm = &block_perms[t][choice[t]];
                for (i, &a) in block.iter().enumerate() {
                    sigma[a] = starts[pi[t]] + perm[i];
                }
            }
            let code = relabeled_code(spec, pi, &sigma);
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
            let mut t = 0;
            while t < p {
                choice[t] += 1;
                if choice[t] < block_perms[t].len() {
                    break;
                }
                choice[t] = 0;
                t += 1;
            }
            if t == p {
                break;
            }
        }
    }
    best.unwrap_or_default()
}

fn index_slots(p: usize, params: &CorpusParams, metric: &MetricIndex) -> Vec<(usize, usize)> {
    slots(p, params.index_relation, |i, j| !params.index_local || metric.get(i, j).within(1))
}

/// Number of labeled candidates `exhaustive_corpus` would visit.
pub fn candidate_count(params: &CorpusParams) -> u64 {
    let mut total = 0u64;
    for p in 1..=params.max_index {
        for metric in metrics(p, &params.distances) {
            let idx_slots = index_slots(p, params, &metric).len() as u32;
            for sizes in profiles(p, params.max_block) {
                let h: Vec<usize> = sizes.iter().enumerate().flat_map(|(t, &k)| std::iter::repeat_n(t, k)).collect();
                let g = slots(h.len(), params.global_relation, |i, j| metric.get(h[i], h[j]).within(1)).len() as u32;
                total = total.saturating_add(1u64.checked_shl(idx_slots + g).unwrap_or(u64::MAX));
            }
        }
    }
    total
}

/// Every spec within `params`, one per isomorphism class, in a deterministic order.
pub fn exhaustive_corpus(params: &CorpusParams) -> Result<Vec<DistortedSumSpec>> {
    let count = candidate_count(params);
    if count > params.max_candidates {
        return Err(Error::Budget(format!(
            "{count} candidate specs exceed the corpus budget {}",
            params.max_candidates
        )));
    }
    let mut out = Vec::new();
    for p in 1..=params.max_index {
        let perms = permutations(p);
        let mut seen = BTreeSet::new();
        for metric in metrics(p, &params.distances) {
            let idx_slots = index_slots(p, params, &metric);
            for sizes in profiles(p, params.max_block) {
                let h: Vec<usize> = sizes.iter().enumerate().flat_map(|(t, &k)| std::iter::repeat_n(t, k)).collect();
                let g_slots = slots(h.len(), params.global_relation, |i, j| metric.get(h[i], h[j]).within(1));
                for rb in 0..(1u64 << idx_slots.len()) {
                    for gb in 0..(1u64 << g_slots.len()) {
                        let spec = spec_from_parts(
                            metric.clone(),
                            &sizes,
                            relation_from_bits(&idx_slots, rb, params.index_relation),
                            relation_from_bits(&g_slots, gb, params.global_relation),
                        )?;
                        if seen.insert(canonical_code(&spec, &perms)) {
                            out.push(spec);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A uniformly drawn spec with exactly `p` index points.
pub fn random_spec<R: Rng>(rng: &mut R, params: &CorpusParams, p: usize) -> Result<DistortedSumSpec> {
    let all = metrics(p, &params.distances);
    let metric = all[rng.gen_range(0..all.len())].clone();
    let sizes: Vec<usize> = (0..p).map(|_| rng.gen_range(0..=params.max_block)).collect();
    let h: Vec<usize> = sizes.iter().enumerate().flat_map(|(t, &k)| std::iter::repeat_n(t, k)).collect();
    let idx_slots = index_slots(p, params, &metric);
    let g_slots = slots(h.len(), params.global_relation, |i, j| metric.get(h[i], h[j]).within(1));
    let rb: u64 = rng.gen_range(0..(1u64 << idx_slots.len()));
    let gb: u64 = rng.gen_range(0..(1u64 << g_slots.len()));
    spec_from_parts(
        metric,
        &sizes,
        relation_from_bits(&idx_slots, rb, params.index_relation),
        relation_from_bits(&g_slots, gb, params.global_relation),
    )
}

/// Two specs with identical window data, one of which has an `E`-edge between
/// blocks at index distance 2. Together they violate the depth-0 composition
/// requirement.
pub fn violating_pair() -> Result<(DistortedSumSpec, DistortedSumSpec)> {
    let metric = || {
        MetricIndex::new(vec![
            vec![ExtDistance::ZERO, ExtDistance::Finite(2)],
            vec![ExtDistance::Finite(2), ExtDistance::ZERO],
        ])
    };
    let with_edge = spec_from_parts(metric()?, &[1, 1], vec![], vec![vec![0, 1], vec![1, 0]])?;
    let without = spec_from_parts(metric()?, &[1, 1], vec![], vec![])?;
    Ok((with_edge, without))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_corpus_counts() {
        let params = CorpusParams { max_index: 1, max_block: 2, ..Default::default() };
        // R: 2 choices (loop or not); blocks of size 0, 1, 2 with 1, 1, 2 graphs
        assert_eq!(exhaustive_corpus(&params).unwrap().len(), 8);
    }

    #[test]
    fn isomorphic_relabelings_collapse() {
        let m = MetricIndex::uniform(2, ExtDistance::Finite(2)).unwrap();
        let a = spec_from_parts(m.clone(), &[1, 0], vec![vec![0, 0]], vec![]).unwrap();
        let b = spec_from_parts(m, &[0, 1], vec![vec![1, 1]], vec![]).unwrap();
        let perms = permutations(2);
        assert_eq!(canonical_code(&a, &perms), canonical_code(&b, &perms));
    }

    #[test]
    fn budget_guard() {
        let params = CorpusParams { max_candidates: 10, ..Default::default() };
        assert!(matches!(exhaustive_corpus(&params), Err(Error::Budget(_))));
    }
}
