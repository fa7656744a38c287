//! Finite-dimensional toolkit for conjugations, C-symmetric linear relations
//! and the parameterization of their C-self-adjoint extensions.

pub mod antilinear;
pub mod checks;
pub mod csym;
pub mod doubling;
pub mod error;
pub mod extensions;
pub mod fixtures;
pub mod linalg;
pub mod polar;
pub mod powers;
pub mod random;
pub mod relations;

pub use antilinear::{AntiLinearMap, Conjugation, PartialConjugation};
pub use checks::{Check, CheckMode};
pub use error::{CsymError, Result};
pub use linalg::{CMat, CVec, Subspace, Tolerance, C64};
pub use relations::{DomainOperator, LinearRelation, Regime};
