//! Duration-set arithmetic and symbolic encodings of duration sets.

mod formula;
mod lpsl;
mod periodic;
mod smt;

use crate::geometry::GeometryError;
use crate::pet::PetError;

pub use formula::{build_div_formula, eval_div_formula, AtomRel, DivFormula, LinAtom};
pub use lpsl::{to_lpsl, Affine, LpSlInterval, LpSlResult, LpSlSet, LpSlTerm};
pub use periodic::{interval_star, interval_star_unbounded, PeriodicSet};
pub use smt::{check_smt, emit_smt};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("expected exactly one parameter, found {0}")]
    ParamCount(usize),
    #[error("row {0} does not bound d by an affine function of the parameter")]
    Shape(String),
    #[error("bound {0} has a coefficient that is not a natural number")]
    NonNatural(String),
    #[error("strict row {0} (double the model first)")]
    StrictRow(String),
    #[error("integer overflow in {0}")]
    Overflow(String),
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error(transparent)]
    Pet(#[from] PetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
