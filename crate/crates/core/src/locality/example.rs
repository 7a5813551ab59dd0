//! A finite graph on which radius 2 cannot see a distant element of `C` that
//! radius 3 can.
//!
//! `C = L ∪ {c*}` with `|L| = f`, no edges inside `C`. `a` is adjacent to `L`,
//! `b` to all of `C`. Distance-one and distance-two witnesses are supplied by
//! hubs outside `C`: `f` hubs adjacent to all of `C`, for every `l ∈ L` another
//! `f` hubs adjacent to `C ∖ {l}`, and `f − 1` hubs adjacent to `L` only. Then
//! `d(a, c*) = 3`, every `c ∈ C` is at distance `≤ 1` from `b`, and members
//! of `C` are pairwise at distance 2.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::structure::Structure;
use crate::theory::enumerate::coloured_graph;
use crate::theory::types::Evaluator;

use super::distant::{distant_exists_brute, Ball};
use super::DefinableSet;

/// The checked facts about a constructed instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Example23Certificate {
    pub depth: u32,
    pub radius2_equal: bool,
    pub radius3_equal: bool,
    pub distant_a: bool,
    pub distant_b: bool,
    pub radius2_digest: String,
    pub radius3_digest_a: String,
    pub radius3_digest_b: String,
}

#[derive(Debug, Clone)]
pub struct Example23 {
    pub structure: Structure,
    pub c: DefinableSet,
    pub a: usize,
    pub b: usize,
    pub c_star: usize,
    pub fanout: usize,
    pub certificate: Example23Certificate,
}

/// Builds the graph with the given fanout and checks the certificate at
/// `depth`; fails if radius 2 already separates `a` from `b`.
pub fn build_example_23(fanout: usize, depth: u32) -> Result<Example23> {
    if fanout < 2 {
        return domain(format!("fanout {fanout} is below 2"));
    }
    let f = fanout;
    let (a, b, c_star) = (0, 1, 2);
    let l: Vec<usize> = (3..3 + f).collect();
    let mut edges = Vec::new();
    let mut next = 3 + f;
    let mut hub = |adj: &[usize], edges: &mut Vec<(usize, usize)>| {
        for &x in adj {
            edges.push((next, x));
        }
        next += 1;
    };
    for &x in &l {
        edges.push((a, x));
    }
    let all: Vec<usize> = std::iter::once(c_star).chain(l.iter().copied()).collect();
    for &x in &all {
        edges.push((b, x));
    }
    for _ in 0..f {
        hub(&all, &mut edges);
    }
    for &skip in &l {
        let rest: Vec<usize> = all.iter().copied().filter(|&x| x != skip).collect();
        for _ in 0..f {
            hub(&rest, &mut edges);
        }
    }
    for _ in 0..f - 1 {
        hub(&l, &mut edges);
    }
    let size = 3 + f + f + f * f + (f - 1);
    let structure = coloured_graph(size, &edges, &all)?;
    let c = DefinableSet::predicate("C");

    let digest = |x: usize, r: u32| -> Result<String> {
        let ball = Ball::new(&structure, &[x], r)?;
        Ok(Evaluator::new(&ball.structure).digest_of(&[Some(ball.center[0])], depth)?.to_string())
    };
    let (a2, b2) = (digest(a, 2)?, digest(b, 2)?);
    let (a3, b3) = (digest(a, 3)?, digest(b, 3)?);
    let certificate = Example23Certificate {
        depth,
        radius2_equal: a2 == b2,
        radius3_equal: a3 == b3,
        distant_a: distant_exists_brute(&structure, &[a], &c, 1)?,
        distant_b: distant_exists_brute(&structure, &[b], &c, 1)?,
        radius2_digest: a2,
        radius3_digest_a: a3,
        radius3_digest_b: b3,
    };
    if !certificate.radius2_equal {
        return domain(format!("fanout {f} is too small: radius-2 types of a and b differ at depth {depth}"));
    }
    if certificate.distant_a == certificate.distant_b {
        return domain("distant answers of a and b agree");
    }
    Ok(Example23 { structure, c, a, b, c_star, fanout: f, certificate })
}

/// The least fanout in `2..=max_fanout` whose certificate holds at `depth`.
pub fn example_23_auto(depth: u32, max_fanout: usize) -> Result<Example23> {
    let mut last = None;
    for f in 2..=max_fanout {
        match build_example_23(f, depth) {
            Ok(e) => return Ok(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| crate::Error::Domain(format!("no fanout up to {max_fanout}"))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::ef_equivalent;

    #[test]
    fn certificate_at_depth_two() {
        let e = example_23_auto(2, 6).unwrap();
        let cert = &e.certificate;
        assert!(cert.radius2_equal);
        assert!(!cert.radius3_equal);
        assert!(cert.distant_a && !cert.distant_b);
        let g = &e.structure;
        assert_eq!(g.dist(e.a, e.c_star).finite(), Some(3));
        let cs = e.c.members(g).unwrap();
        for &x in &cs {
            assert!(g.dist(e.b, x).within(1));
            for &y in &cs {
                assert!(g.dist(x, y).within(2));
            }
        }
    }

    #[test]
    fn certificate_agrees_with_games() {
        let e = example_23_auto(2, 6).unwrap();
        let ba = Ball::new(&e.structure, &[e.a], 2).unwrap();
        let bb = Ball::new(&e.structure, &[e.b], 2).unwrap();
        assert!(ef_equivalent(&ba.structure, &ba.center, &bb.structure, &bb.center, 2));
        let ba = Ball::new(&e.structure, &[e.a], 3).unwrap();
        let bb = Ball::new(&e.structure, &[e.b], 3).unwrap();
        assert!(!ef_equivalent(&ba.structure, &ba.center, &bb.structure, &bb.center, 2));
    }

    #[test]
    fn small_fanout_is_rejected() {
        assert!(build_example_23(1, 2).is_err());
    }
}
