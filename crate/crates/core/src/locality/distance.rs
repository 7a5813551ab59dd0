//! First-order definitions of Gaifman distance thresholds.

use crate::error::{domain, Result};
use crate::structure::Signature;
use crate::theory::formula::{Formula, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    Greater,
}

/// Depth sufficient to express `d(x,y) ≤ 2^n` and `d(x,y) > 2^n` when the
/// largest arity is `max_arity`: `n + max_arity − 2`.
pub fn distance_depth(max_arity: usize, n: u32) -> Result<u32> {
    if max_arity < 2 {
        return domain(format!("distance is degenerate for maximal arity {max_arity}"));
    }
    Ok(n + max_arity as u32 - 2)
}

/// A formula in `x0, x1` comparing `d(x0, x1)` with `threshold = 2^n`.
///
/// `d ≤ 1` is equality or co-occurrence in a tuple, with the other positions
/// of the tuple existentially quantified; `d ≤ 2^{n+1}` is
/// `∃z (d(x0,z) ≤ 2^n ∧ d(z,x1) ≤ 2^n)`.
pub fn distance_formula(sig: &Signature, threshold: u64, cmp: Comparison) -> Result<Formula> {
    if !threshold.is_power_of_two() {
        return domain(format!("threshold {threshold} is not a power of two"));
    }
    if sig.max_arity() < 2 {
        return domain("distance is degenerate without relations of arity at least 2");
    }
    let le = at_most(sig, threshold.trailing_zeros(), 0, 1, 2);
    Ok(match cmp {
        Comparison::AtMost => le,
        Comparison::Greater => Formula::not(le),
    })
}

fn at_most(sig: &Signature, n: u32, x: Var, y: Var, fresh: Var) -> Formula {
    if n == 0 {
        let mut alts = vec![Formula::Eq(x, y)];
        alts.extend(adjacent(sig, x, y, fresh));
        return Formula::Or(alts);
    }
    let z = fresh;
    Formula::exists(
        z,
        Formula::And(vec![at_most(sig, n - 1, x, z, fresh + 1), at_most(sig, n - 1, z, y, fresh + 1)]),
    )
}

/// `x` and `y` occur at two distinct positions of some tuple.
fn adjacent(sig: &Signature, x: Var, y: Var, fresh: Var) -> Vec<Formula> {
    let mut out = Vec::new();
    for (sym, s) in sig.symbols().iter().enumerate() {
        for i in 0..s.arity {
            for j in 0..s.arity {
                if i == j {
                    continue;
                }
                let mut next = fresh;
                let mut bound = Vec::new();
                let args: Vec<Var> = (0..s.arity)
                    .map(|p| {
                        if p == i {
                            x
                        } else if p == j {
                            y
                        } else {
                            bound.push(next);
                            next += 1;
                            next - 1
                        }
                    })
                    .collect();
                let mut f = Formula::rel(sym, args);
                for v in bound.into_iter().rev() {
                    f = Formula::exists(v, f);
                }
                out.push(f);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Structure;
    use crate::theory::enumerate::random_graph;
    use crate::theory::formula::eval_formula;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn depths() {
        assert_eq!(distance_depth(2, 0).unwrap(), 0);
        assert_eq!(distance_depth(2, 3).unwrap(), 3);
        assert_eq!(distance_depth(3, 1).unwrap(), 2);
        assert!(distance_depth(1, 2).is_err());
    }

    #[test]
    fn unit_threshold_is_quantifier_free_for_graphs() {
        let sig = Signature::new([("E", 2)]).unwrap();
        let f = distance_formula(&sig, 1, Comparison::AtMost).unwrap();
        assert_eq!(f.depth(), 0);
        assert_eq!(f.to_string(), "(or (= x0 x1) (R0 x0 x1) (R0 x1 x0))");
        assert!(distance_formula(&sig, 3, Comparison::AtMost).is_err());
    }

    #[test]
    fn depth_matches_bound() {
        for (sig, k) in [(Signature::new([("E", 2)]).unwrap(), 2), (Signature::new([("T", 3), ("P", 1)]).unwrap(), 3)] {
            for n in 0..4 {
                let f = distance_formula(&sig, 1 << n, Comparison::Greater).unwrap();
                assert_eq!(f.depth(), distance_depth(k, n).unwrap());
            }
        }
    }

    #[test]
    fn agrees_with_gaifman_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sig = Signature::new([("E", 2)]).unwrap();
        let fs: Vec<_> = (0..3).map(|n| distance_formula(&sig, 1 << n, Comparison::AtMost).unwrap()).collect();
        for _ in 0..200 {
            let size = 1 + (rand::Rng::gen_range(&mut rng, 0..10));
            let m = random_graph(&mut rng, size, 0.25);
            for a in 0..size {
                for b in 0..size {
                    for (n, f) in fs.iter().enumerate() {
                        assert_eq!(eval_formula(&m, f, &[a, b]).unwrap(), m.dist(a, b).within(1 << n));
                    }
                }
            }
        }
    }

    #[test]
    fn ternary_adjacency() {
        let sig = Arc::new(Signature::new([("T", 3)]).unwrap());
        let m = Structure::new(sig.clone(), (0..5).map(|i| i.to_string()).collect(), vec![vec![vec![0, 1, 2], vec![2, 3, 3]]]).unwrap();
        let f = distance_formula(&sig, 2, Comparison::AtMost).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(eval_formula(&m, &f, &[a, b]).unwrap(), m.dist(a, b).within(2), "{a} {b}");
            }
        }
    }
}
