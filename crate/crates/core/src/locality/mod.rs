//! Locality for structures with Gaifman distance: the structure as a distorted
//! sum of its unit balls, distance formulas, the scattered-sequence procedure
//! for distant elements, radius schedules and determination probes, and the
//! parameters of Gaifman normal forms.

pub mod distance;
pub mod distant;
pub mod example;
pub mod gaifman;
pub mod radius;

use crate::dsum::DistortedSumSpec;
use crate::error::{domain, Result};
use crate::structure::{MetricIndex, Structure};
use crate::theory::formula::{eval_formula, Formula};

pub use distance::{distance_depth, distance_formula, Comparison};
pub use distant::{distant_exists_brute, distant_exists_local, lemma22_depth, scattered_max, Ball};
pub use example::{build_example_23, example_23_auto, Example23, Example23Certificate};
pub use gaifman::{crossover_table, eval_basic_local, gaifman_params, BasicLocalSentence, GaifmanParams, GaifmanVariant};
pub use radius::{
    check_subclaim, merge_local, min_radius_search, radius_schedule, radius_schedule_with, BallMode, BetaRule, MinRadius,
    RadiusSearch, RadiusWitness, SubclaimReport,
};

/// `M` as a distorted sum of the balls `M_b = V^1(b)`: the index is `M`
/// itself under its Gaifman metric, every block is a singleton and `h` is the
/// identity.
pub fn as_distorted_sum(m: &Structure) -> Result<DistortedSumSpec> {
    DistortedSumSpec::new(m.clone(), MetricIndex::from_structure(m), m.clone(), (0..m.size()).collect())
}

/// A set given by a unary predicate or by a formula in one free variable `x0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefinableSet {
    Predicate(String),
    Formula(Formula),
}

impl DefinableSet {
    pub fn predicate(name: impl Into<String>) -> Self {
        DefinableSet::Predicate(name.into())
    }

    pub fn formula(phi: Formula) -> Result<Self> {
        if phi.free_vars().iter().any(|&v| v != 0) {
            return domain("a defining formula may only have x0 free");
        }
        Ok(DefinableSet::Formula(phi))
    }

    /// Quantifier depth of the definition.
    pub fn depth(&self) -> u32 {
        match self {
            DefinableSet::Predicate(_) => 0,
            DefinableSet::Formula(f) => f.depth(),
        }
    }

    /// Membership vector over the universe of `m`.
    pub fn extension(&self, m: &Structure) -> Result<Vec<bool>> {
        match self {
            DefinableSet::Predicate(name) => {
                let sym = m
                    .signature()
                    .index_of(name)
                    .ok_or_else(|| crate::Error::Domain(format!("no predicate {name} in the signature")))?;
                if m.signature().arity(sym) != 1 {
                    return domain(format!("{name} is not unary"));
                }
                Ok((0..m.size()).map(|c| m.holds(sym, &[c])).collect())
            }
            DefinableSet::Formula(f) => (0..m.size()).map(|c| eval_formula(m, f, &[c])).collect(),
        }
    }

    pub fn members(&self, m: &Structure) -> Result<Vec<usize>> {
        Ok(self.extension(m)?.iter().enumerate().filter(|(_, &b)| b).map(|(c, _)| c).collect())
    }
}
