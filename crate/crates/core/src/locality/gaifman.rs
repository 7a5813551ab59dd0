//! Parameters of Gaifman normal forms and basic local sentences.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::structure::Structure;
use crate::theory::formula::{eval_formula, Bound, Formula, Var};

use super::distant::scattered_among;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GaifmanVariant {
    /// Radii growing like `7^n`.
    Classical,
    /// Radii growing like `4^n`.
    Improved,
}

/// Bounds for a depth-`n` formula in `m` free variables: locality radius `r`
/// of the basic local sentences, their count `s`, and the radius `t` of the
/// local formulas around the free variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaifmanParams {
    pub variant: GaifmanVariant,
    pub r: u64,
    pub s: u64,
    pub t: u64,
}

pub fn gaifman_params(n: u32, m: u32, variant: GaifmanVariant) -> Result<GaifmanParams> {
    if n == 0 {
        return domain("a quantifier-free formula has no Gaifman parameters");
    }
    let s = m as u64 + n as u64;
    let (r, t) = match variant {
        GaifmanVariant::Classical => {
            let r = 7u64.checked_pow(n - 1);
            let t = 7u64.checked_pow(n).map(|x| (x - 1) / 2);
            (r, t)
        }
        GaifmanVariant::Improved => {
            let r = 4u64.checked_pow(n - 1).and_then(|x| x.checked_mul(3));
            (r, r)
        }
    };
    match (r, t) {
        (Some(r), Some(t)) => Ok(GaifmanParams { variant, r, s, t }),
        _ => Err(crate::Error::Budget(format!("radius for depth {n} overflows"))),
    }
}

/// `(n, improved r, classical r)` for `n = 1..=n_max`.
pub fn crossover_table(n_max: u32) -> Result<Vec<(u32, u64, u64)>> {
    (1..=n_max)
        .map(|n| {
            let i = gaifman_params(n, 0, GaifmanVariant::Improved)?;
            let c = gaifman_params(n, 0, GaifmanVariant::Classical)?;
            Ok((n, i.r, c.r))
        })
        .collect()
}

/// `∃v_0..v_{s−1} (⋀ ψ^{(r)}(v_i) ∧ ⋀_{i<j} d(v_i, v_j) > 2r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicLocalSentence {
    pub count: usize,
    pub radius: u32,
    /// Free in `x0` only, every quantifier bounded by `V^radius`.
    pub psi: Formula,
}

impl BasicLocalSentence {
    pub fn new(count: usize, radius: u32, psi: Formula) -> Result<Self> {
        if psi.free_vars().iter().any(|&v| v != 0) {
            return domain("ψ may only have x0 free");
        }
        if !psi.is_local(radius) {
            return domain(format!("ψ is not {radius}-local"));
        }
        Ok(BasicLocalSentence { count, radius, psi })
    }

    /// Relativizes every quantifier of `psi` to `V^radius(x0)`.
    pub fn localize(count: usize, radius: u32, psi: &Formula) -> Result<Self> {
        Self::new(count, radius, psi.relativize(radius, &[0]))
    }

    /// The sentence written out as a single formula. Separation is
    /// `¬∃z ∈ V^{2r}(v_i) (z = v_j)`, so no distance predicates are needed.
    pub fn expand(&self) -> Formula {
        let width = self.psi.max_var().map_or(1, |v| v + 1);
        let s = self.count;
        // v_i is variable i; copy i of ψ lives at s + 1 + i·width, and s is the
        // scratch variable of the separation clauses
        let copy = |i: usize| shift(&self.psi, s + 1 + i * width, i);
        let mut conj: Vec<Formula> = (0..s).map(copy).collect();
        for i in 0..s {
            for j in i + 1..s {
                conj.push(Formula::not(Formula::Exists {
                    var: s,
                    bound: Some(Bound { radius: 2 * self.radius, centers: vec![i] }),
                    body: Box::new(Formula::Eq(s, j)),
                }));
            }
        }
        let mut f = Formula::And(conj);
        for v in (0..s).rev() {
            f = Formula::exists(v, f);
        }
        f
    }
}

/// Renames `x0` to `center` and every other variable `v` to `base + v`.
fn shift(f: &Formula, base: Var, center: Var) -> Formula {
    let r = |v: Var| if v == 0 { center } else { base + v };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Rel { sym, args } => Formula::rel(*sym, args.iter().map(|&v| r(v)).collect()),
        Formula::Eq(x, y) => Formula::Eq(r(*x), r(*y)),
        Formula::Dist { k, x, y } => Formula::Dist { k: *k, x: r(*x), y: r(*y) },
        Formula::Not(g) => Formula::not(shift(g, base, center)),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| shift(g, base, center)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| shift(g, base, center)).collect()),
        Formula::Exists { var, bound, body } | Formula::Forall { var, bound, body } => {
            let bound = bound.as_ref().map(|b| Bound { radius: b.radius, centers: b.centers.iter().map(|&c| r(c)).collect() });
            let body = Box::new(shift(body, base, center));
            if matches!(f, Formula::Exists { .. }) {
                Formula::Exists { var: r(*var), bound, body }
            } else {
                Formula::Forall { var: r(*var), bound, body }
            }
        }
    }
}

/// Filters the universe by `ψ` and looks for `s` survivors pairwise more than
/// `2r` apart.
pub fn eval_basic_local(m: &Structure, sentence: &BasicLocalSentence) -> Result<bool> {
    if sentence.count == 0 {
        return Ok(true);
    }
    let mut sat = Vec::new();
    for v in 0..m.size() {
        if eval_formula(m, &sentence.psi, &[v])? {
            sat.push(v);
        }
    }
    Ok(scattered_among(m, &sat, sentence.radius, sentence.count) >= sentence.count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::enumerate::graph;

    #[test]
    fn printed_bounds() {
        let i = gaifman_params(2, 1, GaifmanVariant::Improved).unwrap();
        assert_eq!((i.r, i.s, i.t), (12, 3, 12));
        let c = gaifman_params(2, 1, GaifmanVariant::Classical).unwrap();
        assert_eq!((c.r, c.s, c.t), (7, 3, 24));
        assert!(gaifman_params(0, 1, GaifmanVariant::Improved).is_err());
        for (n, i, c) in crossover_table(6).unwrap() {
            if n >= 3 {
                assert!(i < c);
            }
        }
    }

    #[test]
    fn basic_local_examples() {
        let edgeless = graph(4, &[]).unwrap();
        let s = BasicLocalSentence::new(4, 1, Formula::True).unwrap();
        assert!(eval_basic_local(&edgeless, &s).unwrap());
        let s = BasicLocalSentence::new(5, 1, Formula::True).unwrap();
        assert!(!eval_basic_local(&edgeless, &s).unwrap());
        // x0 has a neighbour: one such vertex in a single edge
        let psi = Formula::exists(1, Formula::rel(0, vec![0, 1]));
        let m = graph(3, &[(0, 1)]).unwrap();
        assert!(eval_basic_local(&m, &BasicLocalSentence::localize(1, 1, &psi).unwrap()).unwrap());
        assert!(!eval_basic_local(&m, &BasicLocalSentence::localize(2, 1, &psi).unwrap()).unwrap());
        assert!(BasicLocalSentence::new(1, 1, psi).is_err());
    }

    #[test]
    fn expansion_agrees_on_paths() {
        let psi = Formula::exists(1, Formula::rel(0, vec![0, 1]));
        for n in 1..8 {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            let m = graph(n, &edges).unwrap();
            for count in 0..4 {
                for r in 0..3 {
                    let s = BasicLocalSentence::localize(count, r, &psi).unwrap();
                    assert_eq!(eval_basic_local(&m, &s).unwrap(), eval_formula(&m, &s.expand(), &[]).unwrap());
                }
            }
        }
    }
}
