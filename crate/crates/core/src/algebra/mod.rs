//! Exact algebra kernel: Q(ζ₈) coefficients, variable tables, and sparse
//! Laurent polynomials with differentiation, substitution and evaluation.

mod cyclo;
mod poly;
mod vars;

pub use cyclo::CycloRat;
pub use poly::{Bindings, LaurentPoly, Monomial};
pub use vars::{Var, VarTable, DEFAULT_DEGREE_CAP};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands live over different variable tables")]
    TableMismatch,
    #[error("monomial degree {degree} exceeds the cap of {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("negative exponent on non-Laurent variable `{var}`")]
    NegativeExponent { var: String },
    #[error("cannot substitute for `{var}`: it occurs with a negative power and its binding is not an invertible monomial")]
    NonUnitBinding { var: String },
    #[error("variable `{var}` is not bound")]
    UnboundVariable { var: String },
    #[error("evaluation of negative powers of `{var}` at zero")]
    SingularEvaluation { var: String },
    #[error("invalid variable name `{0}`")]
    BadVariableName(String),
    #[error("polynomial is not an invertible monomial")]
    NotInvertible,
}
