//! Polynomial Hamiltonian families with exact certificates.
//!
//! The crate builds three families of polynomial Hamiltonians in one degree
//! of freedom, derives their second-order equations of motion, checks first
//! integrals and birational symplectic symmetries in exact arithmetic over
//! Q(ζ₈), and integrates the complex-valued flows numerically.

pub mod algebra;
pub mod hamiltonian;
pub mod integrate;
pub mod symmetry;
pub mod verify;

pub use algebra::{AlgebraError, Bindings, CycloRat, LaurentPoly, Monomial, Var, VarTable};
pub use hamiltonian::{Family, HamSystem, HamiltonianError, SecondOrderOde};
pub use integrate::{
    CompiledField, IntegrateError, Method, NumericParams, Termination, Trajectory,
};
pub use symmetry::{AffineParamMap, BirationalMap, Branch, SymmetryError, TimeRule};
