//! Ehrenfeucht–Fraïssé games, written directly against the structures so that
//! they serve as an oracle independent of the type machinery.

use crate::structure::Structure;

/// Duplicator wins the `n`-round game on `(M, ā)` vs `(N, b̄)`.
///
/// Relation symbols are matched by name; a symbol missing on one side is
/// treated as empty there.
pub fn ef_equivalent(m: &Structure, a: &[usize], n: &Structure, b: &[usize], rounds: u32) -> bool {
    assert_eq!(a.len(), b.len(), "EF game needs tuples of equal length");
    let pairs = matched_symbols(m, n);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    play(m, n, &pairs, &mut a, &mut b, rounds, 0)
}

fn matched_symbols(m: &Structure, n: &Structure) -> Vec<(Option<usize>, Option<usize>, usize)> {
    let mut out = Vec::new();
    for (i, s) in m.signature().symbols().iter().enumerate() {
        out.push((Some(i), n.signature().index_of(&s.name), s.arity));
    }
    for (j, s) in n.signature().symbols().iter().enumerate() {
        if m.signature().index_of(&s.name).is_none() {
            out.push((None, Some(j), s.arity));
        }
    }
    out
}

fn play(
    m: &Structure,
    n: &Structure,
    syms: &[(Option<usize>, Option<usize>, usize)],
    a: &mut Vec<usize>,
    b: &mut Vec<usize>,
    rounds: u32,
    fresh: usize,
) -> bool {
    if !partial_iso(m, n, syms, a, b, fresh) {
        return false;
    }
    if rounds == 0 {
        return true;
    }
    let next = a.len();
    // Spoiler picks in M, then in N; Duplicator must answer every pick.
    for x in 0..m.size() {
        a.push(x);
        let ok = (0..n.size()).any(|y| {
            b.push(y);
            let r = play(m, n, syms, a, b, rounds - 1, next);
            b.pop();
            r
        });
        a.pop();
        if !ok {
            return false;
        }
    }
    for y in 0..n.size() {
        b.push(y);
        let ok = (0..m.size()).any(|x| {
            a.push(x);
            let r = play(m, n, syms, a, b, rounds - 1, next);
            a.pop();
            r
        });
        b.pop();
        if !ok {
            return false;
        }
    }
    true
}

/// Checks that `ā ↦ b̄` is a partial isomorphism, assuming it already is on
/// the positions before `fresh`.
fn partial_iso(
    m: &Structure,
    n: &Structure,
    syms: &[(Option<usize>, Option<usize>, usize)],
    a: &[usize],
    b: &[usize],
    fresh: usize,
) -> bool {
    let len = a.len();
    for i in fresh..len {
        for j in 0..len {
            if (a[i] == a[j]) != (b[i] == b[j]) {
                return false;
            }
        }
    }
    match (m.distance_predicates(), n.distance_predicates()) {
        (None, None) => {}
        (Some(dm), Some(dn)) => {
            let cap = dm.cap.min(dn.cap);
            for i in fresh..len {
                for j in 0..len {
                    for k in 0..=cap {
                        if dm.distance(a[i], a[j]).within(k as u64) != dn.distance(b[i], b[j]).within(k as u64) {
                            return false;
                        }
                    }
                }
            }
        }
        _ => return false,
    }
    if len == 0 || fresh >= len {
        return true;
    }
    let mut idx = Vec::new();
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    for &(sm, sn, arity) in syms {
        idx.clear();
        idx.resize(arity, 0usize);
        loop {
            if idx.iter().any(|&i| i >= fresh) {
                ta.clear();
                tb.clear();
                ta.extend(idx.iter().map(|&i| a[i]));
                tb.extend(idx.iter().map(|&i| b[i]));
                let ha = sm.is_some_and(|s| m.holds(s, &ta));
                let hb = sn.is_some_and(|s| n.holds(s, &tb));
                if ha != hb {
                    return false;
                }
            }
            // odometer over position tuples
            let mut k = arity;
            while k > 0 {
                idx[k - 1] += 1;
                if idx[k - 1] < len {
                    break;
                }
                idx[k - 1] = 0;
                k -= 1;
            }
            if k == 0 {
                break;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;
    use std::sync::Arc;

    fn set(k: usize) -> Structure {
        let sig = Arc::new(Signature::empty());
        Structure::new(sig, (0..k).map(|i| i.to_string()).collect(), vec![]).unwrap()
    }

    #[test]
    fn identity_strategy() {
        let sig = Arc::new(Signature::new([("E", 2)]).unwrap());
        let m = Structure::from_names(sig, &["a", "b", "c"], &[("E", &["a", "b"]), ("E", &["b", "c"])]).unwrap();
        for a in 0..3 {
            assert!(ef_equivalent(&m, &[a], &m, &[a], 3));
        }
    }

    #[test]
    fn counting_pure_sets() {
        // sizes 2 and 3 agree for 2 rounds, differ at 3
        assert!(ef_equivalent(&set(2), &[], &set(3), &[], 2));
        assert!(!ef_equivalent(&set(2), &[], &set(3), &[], 3));
        assert!(ef_equivalent(&set(4), &[], &set(5), &[], 4));
        assert!(!ef_equivalent(&set(4), &[], &set(5), &[], 5));
    }

    #[test]
    fn distinguishes_edge_direction() {
        let sig = Arc::new(Signature::new([("E", 2)]).unwrap());
        let m = Structure::from_names(sig, &["a", "b"], &[("E", &["a", "b"])]).unwrap();
        assert!(!ef_equivalent(&m, &[0, 1], &m, &[1, 0], 0));
        assert!(!ef_equivalent(&m, &[0], &m, &[1], 1));
        assert!(ef_equivalent(&m, &[0], &m, &[1], 0));
    }
}
