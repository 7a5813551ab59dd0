//! `Th^n` types, formulas, the Ehrenfeucht–Fraïssé oracle and the
//! determination checker.

pub mod determine;
pub mod ef;
pub mod enumerate;
pub mod formula;
pub mod types;

pub use determine::{theory_determines, Collision, DeterminationResult, Determiner};
pub use ef::ef_equivalent;
pub use enumerate::enumerate_structures;
pub use formula::{characteristic_formula, eval_formula, parse_formula, Bound, Formula};
pub use types::{th0, thn, Budget, Evaluator, Type0, TypeN};
