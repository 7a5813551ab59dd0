//! Exhaustive and random generation of small structures.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::structure::{Signature, Structure};

/// Default cap on the number of labeled structures a single call may visit.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 22;

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn all_tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

fn element_names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// All structures over `sig` with universes of size `1..=max_size`, by size
/// and then by the bit pattern of their relations. With `up_to_iso` only the
/// first member of each isomorphism class is kept.
pub fn enumerate_structures(sig: &Arc<Signature>, max_size: usize, up_to_iso: bool, budget: u64) -> Result<Vec<Structure>> {
    let mut out = Vec::new();
    for n in 1..=max_size {
        let slots: Vec<(usize, Vec<usize>)> = sig
            .symbols()
            .iter()
            .enumerate()
            .flat_map(|(s, sym)| all_tuples(n, sym.arity).into_iter().map(move |t| (s, t)))
            .collect();
        if slots.len() >= 63 || (1u64 << slots.len()) > budget {
            return Err(Error::Budget(format!(
                "{} candidate tuples at size {n} exceed the enumeration budget {budget}",
                slots.len()
            )));
        }
        let perms = if up_to_iso { permutations(n) } else { Vec::new() };
        // for each permutation, where each slot goes
        let slot_maps: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                slots
                    .iter()
                    .map(|(s, t)| {
                        let img: Vec<usize> = t.iter().map(|&e| p[e]).collect();
                        slots.iter().position(|(s2, t2)| s2 == s && *t2 == img).unwrap()
                    })
                    .collect()
            })
            .collect();
        let mut seen = BTreeSet::new();
        for code in 0..(1u64 << slots.len()) {
            if up_to_iso {
                let canon = slot_maps
                    .iter()
                    .map(|map| {
                        map.iter().enumerate().fold(0u64, |acc, (i, &j)| acc | (((code >> i) & 1) << j))
                    })
                    .min()
                    .unwrap();
                if !seen.insert(canon) {
                    continue;
                }
            }
            let mut rels = vec![Vec::new(); sig.len()];
            for (i, (s, t)) in slots.iter().enumerate() {
                if code >> i & 1 == 1 {
                    rels[*s].push(t.clone());
                }
            }
            out.push(Structure::new(sig.clone(), element_names(n), rels)?);
        }
    }
    Ok(out)
}

/// All simple graphs on `1..=max_size` vertices up to isomorphism, by size
/// and then by the least bit pattern of their edge sets.
pub fn enumerate_graphs(max_size: usize) -> Result<Vec<Structure>> {
    if max_size > 8 {
        return Err(Error::Budget(format!("graph enumeration stops at 8 vertices, asked for {max_size}")));
    }
    let mut out = Vec::new();
    for n in 1..=max_size {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let slot = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
        let maps: Vec<Vec<usize>> =
            permutations(n).iter().map(|p| pairs.iter().map(|&(i, j)| slot(p[i], p[j])).collect()).collect();
        let mut seen = BTreeSet::new();
        for code in 0..(1u64 << pairs.len()) {
            let canon = maps
                .iter()
                .map(|map| map.iter().enumerate().fold(0u64, |acc, (i, &j)| acc | (((code >> i) & 1) << j)))
                .min()
                .unwrap();
            if seen.insert(canon) {
                let edges: Vec<(usize, usize)> =
                    pairs.iter().enumerate().filter(|(i, _)| canon >> i & 1 == 1).map(|(_, &p)| p).collect();
                out.push(graph(n, &edges)?);
            }
        }
    }
    Ok(out)
}

/// Signature with a single binary symbol `E`.
pub fn graph_signature() -> Arc<Signature> {
    Arc::new(Signature::new([("E", 2)]).expect("valid signature"))
}

/// A simple undirected graph: each unordered pair is an edge (stored in both
/// directions) with probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Structure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push(vec![i, j]);
                edges.push(vec![j, i]);
            }
        }
    }
    Structure::new(graph_signature(), element_names(n), vec![edges]).expect("valid graph")
}

/// Simple undirected graph from an edge list.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Result<Structure> {
    let mut rel = Vec::new();
    for &(a, b) in edges {
        rel.push(vec![a, b]);
        rel.push(vec![b, a]);
    }
    Structure::new(graph_signature(), element_names(n), vec![rel])
}

/// A graph with a unary colour predicate `C`.
pub fn coloured_graph(n: usize, edges: &[(usize, usize)], colour: &[usize]) -> Result<Structure> {
    let sig = Arc::new(Signature::new([("E", 2), ("C", 1)])?);
    let mut rel = Vec::new();
    for &(a, b) in edges {
        rel.push(vec![a, b]);
        rel.push(vec![b, a]);
    }
    let c = colour.iter().map(|&x| vec![x]).collect();
    Structure::new(sig, element_names(n), vec![rel, c])
}
