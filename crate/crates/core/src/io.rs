//! The line-based structure file format.
//!
//! ```text
//! # comment
//! signature E/2 C/1
//! universe a b c
//! rel E a b          # one tuple
//! edge E b c         # both directions
//! rel C a
//! ```
//!
//! A file that also has index lines describes a distorted sum:
//!
//! ```text
//! index-signature R/2
//! index s t
//! index-rel R s t
//! dist s t 1         # symmetric, off-diagonal default inf
//! part a s           # h(a) = s, required for every element
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::dsum::DistortedSumSpec;
use crate::error::{Error, Result};
use crate::structure::{ExtDistance, MetricIndex, Signature, Structure};

#[derive(Debug, Clone)]
pub enum StructureFile {
    Structure(Structure),
    Sum(DistortedSumSpec),
}

impl StructureFile {
    /// The global structure of either kind.
    pub fn structure(&self) -> &Structure {
        match self {
            StructureFile::Structure(m) => m,
            StructureFile::Sum(s) => &s.global,
        }
    }

    pub fn fingerprint(&self) -> String {
        match self {
            StructureFile::Structure(m) => m.fingerprint(),
            StructureFile::Sum(s) => s.fingerprint(),
        }
    }
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

#[derive(Default)]
struct Side {
    sig: Option<(usize, Vec<(String, usize)>)>,
    names: Option<(usize, Vec<String>)>,
    tuples: Vec<(usize, String, Vec<String>)>,
}

impl Side {
    fn build(self, what: &str) -> Result<Structure> {
        let (_, syms) = self.sig.unwrap_or_default();
        let (uline, names) = self.names.ok_or(Error::Parse { line: 0, msg: format!("missing {what} universe") })?;
        let sig = Arc::new(Signature::new(syms.clone()).map_err(|e| Error::Parse { line: uline, msg: e.to_string() })?);
        let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut rels = vec![Vec::new(); syms.len()];
        for (line, sym, args) in &self.tuples {
            let Some(s) = sig.index_of(sym) else {
                return err(*line, format!("unknown symbol {sym}"));
            };
            if args.len() != sig.arity(s) {
                return err(*line, format!("{sym} has arity {}, got {} arguments", sig.arity(s), args.len()));
            }
            let mut t = Vec::with_capacity(args.len());
            for a in args {
                match pos.get(a.as_str()) {
                    Some(&i) => t.push(i),
                    None => return err(*line, format!("unknown element {a}")),
                }
            }
            rels[s].push(t);
        }
        Structure::new(sig, names, rels).map_err(|e| Error::Parse { line: uline, msg: e.to_string() })
    }
}

fn parse_signature(line: usize, words: &[&str]) -> Result<Vec<(String, usize)>> {
    words
        .iter()
        .map(|w| {
            let (name, arity) = w.split_once('/').ok_or(Error::Parse { line, msg: format!("expected NAME/ARITY, got {w}") })?;
            let arity = arity.parse().map_err(|_| Error::Parse { line, msg: format!("bad arity in {w}") })?;
            Ok((name.to_string(), arity))
        })
        .collect()
}

fn parse_distance(line: usize, w: &str) -> Result<ExtDistance> {
    if w == "inf" {
        return Ok(ExtDistance::Infinite);
    }
    w.parse().map(ExtDistance::Finite).map_err(|_| Error::Parse { line, msg: format!("bad distance {w}") })
}

pub fn parse_structure_file(text: &str) -> Result<StructureFile> {
    let mut global = Side::default();
    let mut index = Side::default();
    let mut dists: Vec<(usize, String, String, ExtDistance)> = Vec::new();
    let mut parts: Vec<(usize, String, String)> = Vec::new();
    let mut has_index = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, rest)) = words.split_first() else { continue };
        match head {
            "signature" | "index-signature" => {
                let side = if head == "signature" { &mut global } else { &mut index };
                if side.sig.is_some() {
                    return err(line, format!("duplicate {head} line"));
                }
                side.sig = Some((line, parse_signature(line, rest)?));
                has_index |= head == "index-signature";
            }
            "universe" | "index" => {
                let side = if head == "universe" { &mut global } else { &mut index };
                if side.names.is_some() {
                    return err(line, format!("duplicate {head} line"));
                }
                side.names = Some((line, rest.iter().map(|s| s.to_string()).collect()));
                has_index |= head == "index";
            }
            "rel" | "edge" | "index-rel" => {
                let Some((&sym, args)) = rest.split_first() else {
                    return err(line, format!("{head} needs a symbol"));
                };
                let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
                let side = if head == "index-rel" { &mut index } else { &mut global };
                if head == "edge" {
                    if args.len() != 2 {
                        return err(line, "edge takes exactly two elements");
                    }
                    side.tuples.push((line, sym.to_string(), vec![args[1].clone(), args[0].clone()]));
                }
                side.tuples.push((line, sym.to_string(), args));
                has_index |= head == "index-rel";
            }
            "dist" => {
                let [s, t, d] = rest else { return err(line, "dist takes two index points and a distance") };
                dists.push((line, s.to_string(), t.to_string(), parse_distance(line, d)?));
                has_index = true;
            }
            "part" => {
                let [a, s] = rest else { return err(line, "part takes an element and an index point") };
                parts.push((line, a.to_string(), s.to_string()));
                has_index = true;
            }
            other => return err(line, format!("unknown directive {other}")),
        }
    }
    let m = global.build("global")?;
    if !has_index {
        return Ok(StructureFile::Structure(m));
    }
    let idx = index.build("index")?;
    let ipos = |line: usize, name: &str| idx.element(name).ok_or(Error::Parse { line, msg: format!("unknown index point {name}") });
    let k = idx.size();
    let mut rows = vec![vec![ExtDistance::Infinite; k]; k];
    for (s, row) in rows.iter_mut().enumerate() {
        row[s] = ExtDistance::ZERO;
    }
    for (line, s, t, d) in &dists {
        let (s, t) = (ipos(*line, s)?, ipos(*line, t)?);
        if s == t && *d != ExtDistance::ZERO {
            return err(*line, "a point is at distance 0 from itself");
        }
        rows[s][t] = *d;
        rows[t][s] = *d;
    }
    let metric = MetricIndex::new(rows).map_err(|e| Error::Parse { line: dists.first().map_or(0, |d| d.0), msg: e.to_string() })?;
    let mut h = vec![None; m.size()];
    for (line, a, s) in &parts {
        let e = m.element(a).ok_or(Error::Parse { line: *line, msg: format!("unknown element {a}") })?;
        if h[e].is_some() {
            return err(*line, format!("element {a} placed twice"));
        }
        h[e] = Some(ipos(*line, s)?);
    }
    let h = h
        .into_iter()
        .enumerate()
        .map(|(e, p)| p.ok_or(Error::Parse { line: 0, msg: format!("element {} has no part line", m.name(e)) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(StructureFile::Sum(DistortedSumSpec::new(idx, metric, m, h)?))
}

pub fn load_structure_file(path: &Path) -> Result<StructureFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_structure_file(&text)
}

fn write_side(out: &mut String, m: &Structure, sig_kw: &str, uni_kw: &str, rel_kw: &str) {
    let syms: Vec<String> = m.signature().symbols().iter().map(|s| format!("{}/{}", s.name, s.arity)).collect();
    if !syms.is_empty() {
        let _ = writeln!(out, "{sig_kw} {}", syms.join(" "));
    }
    let _ = writeln!(out, "{uni_kw} {}", m.names().join(" "));
    for (i, s) in m.signature().symbols().iter().enumerate() {
        for t in m.relation(i) {
            let args: Vec<&str> = t.iter().map(|&e| m.name(e)).collect();
            let _ = writeln!(out, "{rel_kw} {} {}", s.name, args.join(" "));
        }
    }
}

/// Canonical text of a structure; parses back to an equal structure.
pub fn write_structure(m: &Structure) -> String {
    let mut out = String::new();
    write_side(&mut out, m, "signature", "universe", "rel");
    out
}

pub fn write_spec(spec: &DistortedSumSpec) -> String {
    let mut out = write_structure(&spec.global);
    write_side(&mut out, &spec.index, "index-signature", "index", "index-rel");
    let k = spec.index.size();
    for s in 0..k {
        for t in s + 1..k {
            let d = spec.metric.get(s, t);
            if !d.is_infinite() {
                let _ = writeln!(out, "dist {} {} {d}", spec.index.name(s), spec.index.name(t));
            }
        }
    }
    for (a, &s) in spec.h.iter().enumerate() {
        let _ = writeln!(out, "part {} {}", spec.global.name(a), spec.index.name(s));
    }
    out
}

/// Resolves a comma-separated list of element names; the empty string is the
/// empty tuple.
pub fn parse_tuple(m: &Structure, text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| m.element(name).ok_or_else(|| Error::Domain(format!("unknown element {name}"))))
        .collect()
}
