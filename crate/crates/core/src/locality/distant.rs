//! Distant elements of a definable set: scattered sequences and the local
//! decision procedure that reads the answer off a ball of radius `3m`.

use crate::error::{domain, Error, Result};
use crate::structure::{neighborhood, Structure};

use super::distance::distance_depth;
use super::DefinableSet;

/// Largest `k ≤ cap` such that `k` members of `C` are pairwise at distance
/// `> 2m`.
pub fn scattered_max(m: &Structure, c: &DefinableSet, radius: u32, cap: usize) -> Result<usize> {
    if cap == 0 {
        return domain("scattered search needs cap ≥ 1");
    }
    Ok(scattered_among(m, &c.members(m)?, radius, cap))
}

/// Exact branch and bound over `members`, least-conflicted candidates first.
pub(crate) fn scattered_among(m: &Structure, members: &[usize], radius: u32, cap: usize) -> usize {
    let far = |x: usize, y: usize| !m.dist(x, y).within(2 * radius as u64);
    let mut order = members.to_vec();
    order.sort_by_key(|&x| (members.iter().filter(|&&y| y != x && !far(x, y)).count(), x));
    let mut best = 0;
    extend(&order, 0, &far, cap, &mut best);
    best
}

fn extend(cands: &[usize], size: usize, far: &impl Fn(usize, usize) -> bool, cap: usize, best: &mut usize) {
    *best = (*best).max(size);
    for (i, &x) in cands.iter().enumerate() {
        if *best >= cap || size + (cands.len() - i) <= *best {
            return;
        }
        let rest: Vec<usize> = cands[i + 1..].iter().copied().filter(|&y| far(x, y)).collect();
        extend(&rest, size + 1, far, cap, best);
    }
}

/// `(∃e ∈ C) d(ā, e) > m`, by scanning `C`.
pub fn distant_exists_brute(m: &Structure, tuple: &[usize], c: &DefinableSet, radius: u32) -> Result<bool> {
    for &a in tuple {
        m.check_element(a)?;
    }
    Ok(c.members(m)?.into_iter().any(|e| !m.dist_to_tuple(tuple, e).within(radius as u64)))
}

/// The ball `V^radius(ā)` as a structure of its own, with `ā` relocated.
#[derive(Debug, Clone)]
pub struct Ball {
    pub structure: Structure,
    pub center: Vec<usize>,
    pub radius: u32,
    /// Ball element `i` is element `to_parent[i]` of the ambient structure.
    pub to_parent: Vec<usize>,
}

impl Ball {
    pub fn new(m: &Structure, tuple: &[usize], radius: u32) -> Result<Ball> {
        let sub = neighborhood(m, tuple, radius)?;
        let center = sub.locate(tuple).into_iter().map(|e| e.expect("tuple lies in its own ball")).collect();
        Ok(Ball { structure: sub.structure, center, radius, to_parent: sub.to_parent })
    }
}

/// Decides `(∃e ∈ C) d(ā, e) > m` from `V^{3m}(ā)` plus one global number,
/// `global_scatter = scattered_max(M, C, m, ℓ+1)`:
///
/// 1. a scattered sequence of length `ℓ+1` exists: some member of it is far
///    from every `a_i`;
/// 2. otherwise let `k = global_scatter`; if `V^m(ā)` holds a scattered
///    `k`-sequence, every member of `C` lies within `3m` of `ā` and the ball
///    answers directly;
/// 3. otherwise some scattered `k`-sequence leaves `V^m(ā)`.
///
/// Distances and membership in `C` are computed inside the ball.
pub fn distant_exists_local(ball: &Ball, c: &DefinableSet, radius: u32, global_scatter: usize) -> Result<bool> {
    if ball.radius < 3 * radius {
        return Err(Error::Precondition(format!("ball of radius {} is smaller than 3m = {}", ball.radius, 3 * radius)));
    }
    let ell = ball.center.len();
    if global_scatter > ell {
        return Ok(true);
    }
    let k = global_scatter;
    let b = &ball.structure;
    let members = c.members(b)?;
    let near: Vec<usize> = members.iter().copied().filter(|&x| b.dist_to_tuple(&ball.center, x).within(radius as u64)).collect();
    if k == 0 || scattered_among(b, &near, radius, k) >= k {
        return Ok(members.iter().any(|&x| !b.dist_to_tuple(&ball.center, x).within(radius as u64)));
    }
    Ok(true)
}

/// Depth of the ball theory that makes the transfer work: the depth of `C`,
/// plus the depth of `d(x,y) ≤ 2m`, plus the length of `ā`.
pub fn lemma22_depth(c: &DefinableSet, max_arity: usize, radius: u32, ell: usize) -> Result<u32> {
    if radius == 0 {
        return domain("the transfer needs m ≥ 1");
    }
    let log = (2 * radius as u64).next_power_of_two().trailing_zeros();
    Ok(c.depth() + distance_depth(max_arity, log)? + ell as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::enumerate::coloured_graph;

    fn all_c(n: usize, edges: &[(usize, usize)]) -> Structure {
        coloured_graph(n, edges, &(0..n).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn scattered_examples() {
        let c = DefinableSet::predicate("C");
        let empty = coloured_graph(4, &[(0, 1)], &[]).unwrap();
        assert_eq!(scattered_max(&empty, &c, 1, 3).unwrap(), 0);
        assert_eq!(scattered_max(&all_c(5, &[]), &c, 1, 3).unwrap(), 3);
        let clique = all_c(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(scattered_max(&clique, &c, 1, 4).unwrap(), 1);
        assert!(scattered_max(&clique, &c, 1, 0).is_err());
    }

    #[test]
    fn scattered_is_exact_on_a_path() {
        // P7 with m = 1: pairwise distance > 2 means every third vertex
        let p7 = all_c(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]);
        assert_eq!(scattered_max(&p7, &DefinableSet::predicate("C"), 1, 10).unwrap(), 3);
        // a bad greedy start (the centre) still finds three
        let star = all_c(7, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 5), (3, 6)]);
        assert_eq!(scattered_max(&star, &DefinableSet::predicate("C"), 1, 10).unwrap(), 3);
    }

    #[test]
    fn brute_examples() {
        let c = DefinableSet::predicate("C");
        let empty = coloured_graph(3, &[], &[]).unwrap();
        assert!(!distant_exists_brute(&empty, &[0], &c, 1).unwrap());
        let m = all_c(2, &[]);
        assert!(distant_exists_brute(&m, &[0], &c, 0).unwrap());
    }

    #[test]
    fn local_examples() {
        let c = DefinableSet::predicate("C");
        let empty = coloured_graph(3, &[(0, 1)], &[]).unwrap();
        let ball = Ball::new(&empty, &[0], 3).unwrap();
        assert!(!distant_exists_local(&ball, &c, 1, 0).unwrap());
        let far = coloured_graph(3, &[(0, 1)], &[2]).unwrap();
        let g = scattered_max(&far, &c, 1, 2).unwrap();
        let ball = Ball::new(&far, &[0], 3).unwrap();
        assert!(distant_exists_local(&ball, &c, 1, g).unwrap());
        let small = Ball::new(&far, &[0], 2).unwrap();
        assert!(matches!(distant_exists_local(&small, &c, 1, g), Err(Error::Precondition(_))));
    }

    #[test]
    fn pinned_depth() {
        let c = DefinableSet::predicate("C");
        assert_eq!(lemma22_depth(&c, 2, 1, 1).unwrap(), 2);
        assert_eq!(lemma22_depth(&c, 2, 2, 2).unwrap(), 4);
        assert_eq!(lemma22_depth(&c, 2, 3, 0).unwrap(), 3);
    }
}
