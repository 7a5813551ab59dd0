//! Radius schedules, merging of local types, and corpus-relative probes of
//! how large a ball must be to determine a global type.

use serde::Serialize;

use crate::dsum::abstract_lemma::{DTheory, DTheoryContext, RadiusSchedule};
use crate::dsum::DistortedSumSpec;
use crate::error::{Error, Result};
use crate::structure::{neighborhood, Structure};
use crate::theory::determine::Determiner;
use crate::theory::types::{Budget, Evaluator, TypeDigest, TypeN};

use super::distance::distance_depth;
use super::distant::Ball;

/// How `β(n+1)` grows over `β(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BetaRule {
    /// The depth needed to define distances up to `r(n+1)`.
    Printed,
    /// One more quantifier per level, for stepping from an element to its
    /// index point in the two-sorted neighbourhood models. With the printed
    /// rule `β(1) − 1 = 1` cannot relate `h(a)` and `h(b)` there.
    #[default]
    WithProjection,
}

/// `r(0) = 1`, `r(1) = 3`, `r(n+1) = 4·r(n)`; `β(0) = 0` and `β` grows by
/// the [`BetaRule`] for binary signatures.
pub fn radius_schedule(n_max: u32) -> Result<RadiusSchedule> {
    radius_schedule_with(n_max, 2, BetaRule::default())
}

pub fn radius_schedule_with(n_max: u32, max_arity: usize, rule: BetaRule) -> Result<RadiusSchedule> {
    let mut radius = vec![1u64];
    let mut beta = vec![0u32];
    for n in 1..=n_max as usize {
        let r = if n == 1 { 3 } else { 4 * radius[n - 1] };
        let log = r.next_power_of_two().trailing_zeros();
        let step = distance_depth(max_arity, log)? + u32::from(rule == BetaRule::WithProjection);
        radius.push(r);
        beta.push(beta[n - 1] + step.max(1));
    }
    RadiusSchedule::new(beta, radius)
}

/// `th^n(V^m(ā⌢b); ā⌢b)` assembled from local pieces. If `d(ā,b) ≤ 2m+1`
/// the ball `V^m(ā⌢b)` is cut out of `V^{3m+1}(ā)`; otherwise no tuple of
/// `V^m(ā⌢b)` meets both `V^m(ā)` and `V^m(b)` and the two types are combined
/// as a disjoint union.
pub fn merge_local(m: &Structure, tuple: &[usize], b: usize, n: u32, radius: u32) -> Result<TypeN> {
    m.check_element(b)?;
    if m.dist_to_tuple(tuple, b).within(2 * radius as u64 + 1) {
        let outer = Ball::new(m, tuple, 3 * radius + 1)?;
        let mut inside = outer.center.clone();
        inside.push(outer.to_parent.iter().position(|&x| x == b).expect("b lies in V^{3m+1}(a)"));
        let ball = neighborhood(&outer.structure, &inside, radius)?;
        let located: Vec<Option<usize>> = ball.locate(&inside);
        return Evaluator::new(&ball.structure).type_of(&located, n);
    }
    let left = Ball::new(m, tuple, radius)?;
    let right = Ball::new(m, &[b], radius)?;
    let tl = Evaluator::new(&left.structure).thn(&left.center, n)?;
    let tr = Evaluator::new(&right.structure).thn(&right.center, n)?;
    tl.disjoint_union(tr)
}

/// Which balls form the local datum of a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BallMode {
    /// `th(V^k(ā); ā)` for the union ball.
    #[default]
    Union,
    /// `⟨th(V^k(a_i); ā) : i < ℓ⟩`, entries outside a ball left absent.
    PerPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RadiusSearch {
    pub tuple_len: usize,
    pub mode: BallMode,
    pub max_radius: u32,
}

impl Default for RadiusSearch {
    fn default() -> Self {
        RadiusSearch { tuple_len: 1, mode: BallMode::Union, max_radius: 16 }
    }
}

/// Two tuples of one structure with equal local data and different global types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiusWitness {
    pub radius: u32,
    pub structure: usize,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinRadius {
    pub radius: u32,
    /// A collision at `radius − 1`; absent when the radius is 0.
    pub witness: Option<RadiusWitness>,
}

/// Smallest `k` such that, within every structure of the corpus, the local
/// datum at radius `k` and the given depth determines `th^n(M; ā)`. This is
/// a lower-bound probe relative to the corpus, not the value of `k(n)`.
pub fn min_radius_search(
    corpus: &[Structure],
    n: u32,
    depth: u32,
    search: RadiusSearch,
    budget: Budget,
) -> Result<MinRadius> {
    let mut targets = Vec::with_capacity(corpus.len());
    for m in corpus {
        let mut ev = Evaluator::with_budget(m, budget);
        let tuples = crate::dsum::tuples(m.size(), search.tuple_len);
        let t = tuples.iter().map(|a| ev.digest_of(&some(a), n)).collect::<Result<Vec<_>>>()?;
        targets.push((tuples, t));
    }
    let mut witness = None;
    for k in 0..=search.max_radius {
        match collision_at(corpus, &targets, k, depth, search.mode, budget)? {
            None => return Ok(MinRadius { radius: k, witness }),
            Some(w) => witness = Some(w),
        }
    }
    Err(Error::Budget(format!("no radius up to {} determines th^{n}", search.max_radius)))
}

fn some(a: &[usize]) -> Vec<Option<usize>> {
    a.iter().map(|&x| Some(x)).collect()
}

fn local_datum(m: &Structure, a: &[usize], k: u32, depth: u32, mode: BallMode, budget: Budget) -> Result<Vec<TypeDigest>> {
    match mode {
        BallMode::Union => {
            let ball = Ball::new(m, a, k)?;
            Ok(vec![Evaluator::with_budget(&ball.structure, budget).digest_of(&some(&ball.center), depth)?])
        }
        BallMode::PerPoint => a
            .iter()
            .map(|&x| {
                let ball = neighborhood(m, &[x], k)?;
                Evaluator::with_budget(&ball.structure, budget).digest_of(&ball.locate(a), depth)
            })
            .collect(),
    }
}

type Targets = (Vec<Vec<usize>>, Vec<TypeDigest>);

fn collision_at(
    corpus: &[Structure],
    targets: &[Targets],
    k: u32,
    depth: u32,
    mode: BallMode,
    budget: Budget,
) -> Result<Option<RadiusWitness>> {
    for (si, (m, (tuples, values))) in corpus.iter().zip(targets).enumerate() {
        let mut det = Determiner::new();
        for (a, v) in tuples.iter().zip(values) {
            if !det.add(local_datum(m, a, k, depth, mode, budget)?, *v) {
                let c = det.finish().witness.expect("collision recorded");
                return Ok(Some(RadiusWitness {
                    radius: k,
                    structure: si,
                    first: tuples[c.first].clone(),
                    second: tuples[c.second].clone(),
                }));
            }
        }
    }
    Ok(None)
}

/// Outcome of checking that the ball theory determines `DTh^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubclaimReport {
    pub n: u32,
    pub depth: u32,
    pub radius: u64,
    pub functional: bool,
    pub instances: usize,
    pub keys: usize,
    /// Spec position and two colliding tuples.
    pub witness: Option<(usize, Vec<usize>, Vec<usize>)>,
}

/// Checks, within each spec, that `th^{β(n)}(V^{r(n)}(ā); ā)` determines
/// `DTh^n(I^n; h(ā))` for tuples of length `≤ max_len`.
pub fn check_subclaim(
    corpus: &[DistortedSumSpec],
    schedule: &RadiusSchedule,
    n: u32,
    max_len: usize,
    budget: Budget,
) -> Result<SubclaimReport> {
    let depth = schedule.beta(n)?;
    let radius = schedule.radius(n)?;
    let r = u32::try_from(radius).map_err(|_| Error::Budget(format!("radius {radius} too large")))?;
    let mut det: Determiner<(usize, TypeDigest), DTheory> = Determiner::new();
    let mut seen = Vec::new();
    for (si, spec) in corpus.iter().enumerate() {
        let mut ctx = DTheoryContext::new(spec, schedule, budget);
        for len in 0..=max_len {
            for a in crate::dsum::tuples(spec.global.size(), len) {
                let ball = Ball::new(&spec.global, &a, r)?;
                let src = Evaluator::with_budget(&ball.structure, budget).digest_of(&some(&ball.center), depth)?;
                let target = ctx.dtheory(n, n, &spec.h_tuple(&a))?;
                seen.push((si, a));
                if !det.add((si, src), target) {
                    break;
                }
            }
            if !det.is_functional() {
                break;
            }
        }
        if !det.is_functional() {
            break;
        }
    }
    let res = det.finish();
    let witness = res.witness.as_ref().map(|c| (seen[c.first].0, seen[c.first].1.clone(), seen[c.second].1.clone()));
    Ok(SubclaimReport { n, depth, radius, functional: res.functional, instances: res.instances, keys: res.keys, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locality::as_distorted_sum;
    use crate::theory::enumerate::{coloured_graph, graph};

    #[test]
    fn schedule_tables() {
        let s = radius_schedule(3).unwrap();
        assert_eq!(s.radii(), &[1, 3, 12, 48]);
        assert_eq!(s.betas(), &[0, 3, 8, 15]);
        let p = radius_schedule_with(3, 2, BetaRule::Printed).unwrap();
        assert_eq!(p.betas(), &[0, 2, 6, 12]);
        let s = radius_schedule(6).unwrap();
        for n in 1..6 {
            assert_eq!(s.radius(n + 1).unwrap(), 4 * s.radius(n).unwrap());
            assert!(s.beta(n).unwrap() >= n);
        }
    }

    #[test]
    fn merge_cases() {
        let p5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let direct = |a: &[usize], b: usize, n: u32, r: u32| {
            let mut t = a.to_vec();
            t.push(b);
            let ball = neighborhood(&p5, &t, r).unwrap();
            Evaluator::new(&ball.structure).type_of(&ball.locate(&t), n).unwrap()
        };
        assert_eq!(merge_local(&p5, &[2], 2, 2, 1).unwrap(), direct(&[2], 2, 2, 1));
        assert_eq!(merge_local(&p5, &[0], 4, 2, 1).unwrap(), direct(&[0], 4, 2, 1));
        let two = graph(4, &[(0, 1), (2, 3)]).unwrap();
        let t = merge_local(&two, &[0], 3, 2, 1).unwrap();
        let ball = neighborhood(&two, &[0, 3], 1).unwrap();
        assert_eq!(t, Evaluator::new(&ball.structure).thn(&[0, 3], 2).unwrap());
    }

    #[test]
    fn edgeless_radius_zero_suffices() {
        let corpus: Vec<Structure> = (1..5).map(|k| graph(k, &[]).unwrap()).collect();
        let r = min_radius_search(&corpus, 1, 1, RadiusSearch::default(), Budget::default()).unwrap();
        assert_eq!(r.radius, 0);
        assert!(r.witness.is_none());
    }

    #[test]
    fn depth_zero_needs_radius_one_per_point() {
        let m = graph(3, &[(0, 1)]).unwrap();
        let search = RadiusSearch { tuple_len: 2, mode: BallMode::PerPoint, max_radius: 4 };
        let r = min_radius_search(std::slice::from_ref(&m), 0, 0, search, Budget::default()).unwrap();
        assert_eq!(r.radius, 1);
        let w = r.witness.unwrap();
        assert_eq!(w.radius, 0);
        let union = RadiusSearch { mode: BallMode::Union, ..search };
        assert_eq!(min_radius_search(&[m], 0, 0, union, Budget::default()).unwrap().radius, 0);
    }

    #[test]
    fn budget_error_when_radius_runs_out() {
        let m = coloured_graph(4, &[(0, 1), (1, 2), (2, 3)], &[3]).unwrap();
        let search = RadiusSearch { max_radius: 1, ..RadiusSearch::default() };
        assert!(matches!(min_radius_search(&[m], 1, 1, search, Budget::default()), Err(Error::Budget(_))));
    }

    #[test]
    fn subclaim_small_cases() {
        let s = radius_schedule(2).unwrap();
        let single = as_distorted_sum(&graph(1, &[]).unwrap()).unwrap();
        assert!(check_subclaim(&[single], &s, 1, 2, Budget::default()).unwrap().functional);
        let p4 = as_distorted_sum(&graph(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()).unwrap();
        assert!(check_subclaim(std::slice::from_ref(&p4), &s, 0, 2, Budget::default()).unwrap().functional);
        assert!(check_subclaim(&[p4], &s, 1, 1, Budget::default()).unwrap().functional);
    }
}
