//! Shared fixtures for the criterion benches.

use hamfam_core::{BirationalMap, CompiledField, Family, HamSystem, NumericParams, SecondOrderOde};
use num_complex::Complex64;

/// The general family at order `n` and its reference equation.
pub fn general_fixture(n: u32) -> (HamSystem, SecondOrderOde) {
    let sys = HamSystem::general_n(n).expect("valid order");
    let ode = hamfam_core::hamiltonian::reference_ode(Family::GeneralN(n)).expect("reference equation");
    (sys, ode)
}

pub fn nonautonomous_map() -> BirationalMap {
    BirationalMap::nonautonomous_map(Default::default())
}

/// Compiled field for the five-term autonomous family with unit parameters.
pub fn autonomous5_field() -> CompiledField {
    let sys = HamSystem::autonomous5();
    CompiledField::new(&sys, &NumericParams::ones(Family::Autonomous5)).expect("compiles")
}

pub fn generic_start() -> (Complex64, Complex64) {
    (Complex64::new(0.0, 0.5), Complex64::new(0.5, 0.0))
}
