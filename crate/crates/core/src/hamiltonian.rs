//! The three Hamiltonian families and the calculus linking Hamiltonian form
//! to a single second-order equation in `q`.
//!
//! All families share the shape `H = qⁿp² + A(q,t)·p + B(q,t)`, so
//! `∂H/∂p = 2qⁿp + A` can be solved for `p` and the pair of first-order
//! equations collapses to `q̈ = F(q, q̇, t)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::algebra::{AlgebraError, Bindings, CycloRat, LaurentPoly, Var, VarTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HamiltonianError {
    #[error("family order n must be at least 2, got {0}")]
    InvalidOrder(u32),
    #[error("Hamiltonian is not quadratic in p")]
    NotQuadraticInMomentum,
    #[error("coefficient of p² is not a monomial in q")]
    LeadingCoefficientNotMonomial,
    #[error("Hamiltonian has negative powers of q")]
    NotPolynomial,
    #[error("unknown family `{0}` (expected autonomous5, general:<n> or nonautonomous3)")]
    UnknownFamily(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Result<T> = std::result::Result<T, HamiltonianError>;

/// Which Hamiltonian a [`HamSystem`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `(q⁵p + αq⁴ + η₁q³ + η₂)p`.
    Autonomous5,
    /// `(qⁿp + αqⁿ⁻¹ + η₁qⁿ⁻² + … + ηₙ₋₁)p`.
    GeneralN(u32),
    /// `(q⁵p + (α₁+1)q⁴ + tq³ + 1)p + α₃q³ + α₂tq²`.
    NonAutonomous3,
}

impl Family {
    pub fn is_autonomous(self) -> bool {
        !matches!(self, Family::NonAutonomous3)
    }

    pub fn param_names(self) -> Vec<String> {
        match self {
            Family::Autonomous5 => vec!["alpha".into(), "eta1".into(), "eta2".into()],
            Family::GeneralN(n) => std::iter::once("alpha".to_string())
                .chain((1..n).map(|i| format!("eta{i}")))
                .collect(),
            Family::NonAutonomous3 => vec!["alpha1".into(), "alpha2".into(), "alpha3".into()],
        }
    }

    pub fn table(self) -> Result<VarTable> {
        if let Family::GeneralN(n) = self {
            if n < 2 {
                return Err(HamiltonianError::InvalidOrder(n));
            }
        }
        Ok(VarTable::new(&self.param_names())?)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Autonomous5 => write!(f, "autonomous5"),
            Family::GeneralN(n) => write!(f, "general:{n}"),
            Family::NonAutonomous3 => write!(f, "nonautonomous3"),
        }
    }
}

impl FromStr for Family {
    type Err = HamiltonianError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "autonomous5" => Ok(Family::Autonomous5),
            "nonautonomous3" => Ok(Family::NonAutonomous3),
            _ => {
                let n = s
                    .strip_prefix("general:")
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| HamiltonianError::UnknownFamily(s.to_string()))?;
                if n < 2 {
                    return Err(HamiltonianError::InvalidOrder(n));
                }
                Ok(Family::GeneralN(n))
            }
        }
    }
}

/// `q̈ = numerator / q^q_power`.
///
/// Any rational constant in the denominator is folded into the numerator,
/// and `q_power` is the smallest power that leaves the numerator free of
/// negative `q` exponents. Two equations are therefore equal exactly when
/// their fields are.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondOrderOde {
    numerator: LaurentPoly,
    q_power: u32,
}

impl SecondOrderOde {
    /// Clears the `q`-denominators of a Laurent right-hand side.
    pub fn from_laurent(rhs: &LaurentPoly) -> Result<Self> {
        let lo = rhs.exponent_range(Var::Q).map_or(0, |(lo, _)| lo).min(0);
        let q_power = lo.unsigned_abs();
        let shift = q_power_poly(rhs.table(), q_power as i32)?;
        Ok(SecondOrderOde {
            numerator: rhs.mul(&shift)?,
            q_power,
        })
    }

    pub fn numerator(&self) -> &LaurentPoly {
        &self.numerator
    }

    pub fn q_power(&self) -> u32 {
        self.q_power
    }

    /// The right-hand side as a single Laurent polynomial.
    pub fn rhs(&self) -> Result<LaurentPoly> {
        let shift = q_power_poly(self.numerator.table(), -(self.q_power as i32))?;
        Ok(self.numerator.mul(&shift)?)
    }

    /// Difference of the two numerators over the common denominator.
    pub fn residual(&self, other: &SecondOrderOde) -> Result<LaurentPoly> {
        let k = self.q_power.max(other.q_power);
        let table = self.numerator.table();
        let a = self.numerator.mul(&q_power_poly(table, (k - self.q_power) as i32)?)?;
        let b = other.numerator.mul(&q_power_poly(table, (k - other.q_power) as i32)?)?;
        Ok(a.sub(&b)?)
    }
}

impl fmt::Display for SecondOrderOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "qddot = [{}] / q^{}", self.numerator, self.q_power)
    }
}

fn q_power_poly(table: &VarTable, k: i32) -> Result<LaurentPoly> {
    Ok(LaurentPoly::term(table, CycloRat::one(), &[(Var::Q, k)])?)
}

/// A polynomial Hamiltonian together with its family metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamSystem {
    h: LaurentPoly,
    family: Family,
}

struct Builder<'a> {
    table: &'a VarTable,
}

impl Builder<'_> {
    fn var(&self, name: &str) -> LaurentPoly {
        LaurentPoly::var(self.table, self.table.var(name).expect("family parameter"))
    }

    fn q(&self, k: i32) -> Result<LaurentPoly> {
        q_power_poly(self.table, k)
    }

    fn c(&self, num: i64, den: i64) -> LaurentPoly {
        LaurentPoly::constant(self.table, CycloRat::ratio(num, den))
    }

    fn sum(&self, parts: impl IntoIterator<Item = Result<LaurentPoly>>) -> Result<LaurentPoly> {
        parts
            .into_iter()
            .try_fold(LaurentPoly::zero(self.table), |acc, p| Ok(acc.add(&p?)?))
    }

    fn prod(&self, parts: impl IntoIterator<Item = Result<LaurentPoly>>) -> Result<LaurentPoly> {
        parts
            .into_iter()
            .try_fold(LaurentPoly::one(self.table), |acc, p| Ok(acc.mul(&p?)?))
    }

    /// Σ ηⱼ-weighted powers: `c₀qᵐ + c₁qᵐ⁻¹ + …` with c₀ = α, cⱼ = ηⱼ, j < len,
    /// each term optionally scaled by `weight(j)`.
    fn alpha_eta_series(&self, len: u32, top: i32, weight: impl Fn(u32) -> i64) -> Result<LaurentPoly> {
        self.sum((0..len).map(|j| {
            let coeff = if j == 0 { self.var("alpha") } else { self.var(&format!("eta{j}")) };
            let w = LaurentPoly::constant(self.table, CycloRat::from_integer(weight(j)));
            Ok(coeff.mul(&w)?.mul(&self.q(top - j as i32)?)?)
        }))
    }
}

impl HamSystem {
    /// `H = (q⁵p + αq⁴ + η₁q³ + η₂)p`.
    pub fn autonomous5() -> Self {
        let table = Family::Autonomous5.table().expect("fixed table");
        let b = Builder { table: &table };
        let inner = b
            .sum([
                b.prod([b.q(5), Ok(b.var("p"))]),
                b.prod([Ok(b.var("alpha")), b.q(4)]),
                b.prod([Ok(b.var("eta1")), b.q(3)]),
                Ok(b.var("eta2")),
            ])
            .expect("small polynomial");
        HamSystem {
            h: inner.mul(&b.var("p")).expect("small polynomial"),
            family: Family::Autonomous5,
        }
    }

    /// `H = (qⁿp + αqⁿ⁻¹ + η₁qⁿ⁻² + … + ηₙ₋₁)p`, n ≥ 2.
    pub fn general_n(n: u32) -> Result<Self> {
        let family = Family::GeneralN(n);
        let table = family.table()?;
        let b = Builder { table: &table };
        let n_i = n as i32;
        let inner = b.sum([
            b.prod([b.q(n_i), Ok(b.var("p"))]),
            b.alpha_eta_series(n, n_i - 1, |_| 1),
        ])?;
        Ok(HamSystem {
            h: inner.mul(&b.var("p"))?,
            family,
        })
    }

    /// `H = (q⁵p + (α₁+1)q⁴ + tq³ + 1)p + α₃q³ + α₂tq²`.
    pub fn nonautonomous3() -> Self {
        let table = Family::NonAutonomous3.table().expect("fixed table");
        let b = Builder { table: &table };
        let build = || -> Result<LaurentPoly> {
            let inner = b.sum([
                b.prod([b.q(5), Ok(b.var("p"))]),
                b.prod([b.sum([Ok(b.var("alpha1")), Ok(b.c(1, 1))]), b.q(4)]),
                b.prod([Ok(b.var("t")), b.q(3)]),
                Ok(b.c(1, 1)),
            ])?;
            b.sum([
                Ok(inner.mul(&b.var("p"))?),
                b.prod([Ok(b.var("alpha3")), b.q(3)]),
                b.prod([Ok(b.var("alpha2")), Ok(b.var("t")), b.q(2)]),
            ])
        };
        HamSystem {
            h: build().expect("small polynomial"),
            family: Family::NonAutonomous3,
        }
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::Autonomous5 => Ok(HamSystem::autonomous5()),
            Family::GeneralN(n) => HamSystem::general_n(n),
            Family::NonAutonomous3 => Ok(HamSystem::nonautonomous3()),
        }
    }

    /// Same family metadata, different Hamiltonian (used for mutation controls).
    pub fn with_hamiltonian(&self, h: LaurentPoly) -> Result<Self> {
        if h.table() != self.h.table() {
            return Err(AlgebraError::TableMismatch.into());
        }
        if h.exponent_range(Var::Q).is_some_and(|(lo, _)| lo < 0) {
            return Err(HamiltonianError::NotPolynomial);
        }
        Ok(HamSystem { h, family: self.family })
    }

    pub fn hamiltonian(&self) -> &LaurentPoly {
        &self.h
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn table(&self) -> &VarTable {
        self.h.table()
    }

    pub fn is_autonomous(&self) -> bool {
        self.family.is_autonomous()
    }

    /// Parameters that must be nonzero for the numerical flow to be generic.
    pub fn eta_params(&self) -> Vec<Var> {
        self.table()
            .params()
            .filter(|&v| self.table().name(v).starts_with("eta"))
            .collect()
    }

    /// `(∂H/∂p, −∂H/∂q)`.
    pub fn hamilton_equations(&self) -> (LaurentPoly, LaurentPoly) {
        (self.h.diff(Var::P), -self.h.diff(Var::Q))
    }

    /// Solves `q̇ = ∂H/∂p` for `p`, as a Laurent polynomial in `q`, `q̇`, `t`
    /// and the parameters.
    pub fn eliminate_momentum(&self) -> Result<LaurentPoly> {
        match self.h.exponent_range(Var::P) {
            Some((_, 2)) => {}
            _ => return Err(HamiltonianError::NotQuadraticInMomentum),
        }
        let lead = self.h.coefficient_of(Var::P, 2);
        let linear = self.h.coefficient_of(Var::P, 1);
        let only_q = lead.as_unit().is_some_and(|(_, m)| {
            self.table().vars().all(|v| v == Var::Q || m.exponent(v) == 0)
        });
        if !only_q {
            return Err(HamiltonianError::LeadingCoefficientNotMonomial);
        }
        let half_inv = lead.unit_inverse()?.scale(&CycloRat::ratio(1, 2));
        let qdot = LaurentPoly::var(self.table(), Var::QDOT);
        Ok(qdot.sub(&linear)?.mul(&half_inv)?)
    }

    /// `q̈ = ∂f_q/∂q·q̇ + ∂f_q/∂p·f_p + ∂f_q/∂t` with `p` eliminated.
    pub fn second_order_form(&self) -> Result<SecondOrderOde> {
        let (fq, fp) = self.hamilton_equations();
        let qdot = LaurentPoly::var(self.table(), Var::QDOT);
        let chain = fq
            .diff(Var::Q)
            .mul(&qdot)?
            .add(&fq.diff(Var::P).mul(&fp)?)?
            .add(&fq.diff(Var::T))?;
        let mut bind = Bindings::new();
        bind.insert(Var::P, self.eliminate_momentum()?);
        SecondOrderOde::from_laurent(&chain.substitute(&bind)?)
    }

    /// Same equation, derived the other way round: differentiate the
    /// eliminated momentum along the flow and solve `ṗ = f_p` for `q̈`.
    pub fn second_order_form_via_momentum(&self) -> Result<SecondOrderOde> {
        let (_, fp) = self.hamilton_equations();
        let p_of_qdot = self.eliminate_momentum()?;
        let mut bind = Bindings::new();
        bind.insert(Var::P, p_of_qdot.clone());
        let fp_sub = fp.substitute(&bind)?;
        let qdot = LaurentPoly::var(self.table(), Var::QDOT);
        let rest = fp_sub
            .sub(&p_of_qdot.diff(Var::Q).mul(&qdot)?)?
            .sub(&p_of_qdot.diff(Var::T))?;
        let qddot = rest.mul(&p_of_qdot.diff(Var::QDOT).unit_inverse()?)?;
        SecondOrderOde::from_laurent(&qddot)
    }

    /// Second-order form minus `target`, over a common denominator. Zero
    /// certifies that the Hamiltonian system and `target` are equivalent.
    pub fn verify_equivalence(&self, target: &SecondOrderOde) -> Result<LaurentPoly> {
        self.second_order_form()?.residual(target)
    }

    /// `dH/dt` along the flow: `∂H/∂q·f_q + ∂H/∂p·f_p + ∂H/∂t`.
    pub fn time_derivative_of_h(&self) -> Result<LaurentPoly> {
        let (fq, fp) = self.hamilton_equations();
        Ok(self
            .h
            .diff(Var::Q)
            .mul(&fq)?
            .add(&self.h.diff(Var::P).mul(&fp)?)?
            .add(&self.h.diff(Var::T))?)
    }
}

/// `q̈ = (5/2q)(q̇+η₂)(q̇−η₂) + (q²/2)(3α²q⁵ + 4αη₁q⁴ + η₁²q³ − 2αη₂q − 4η₁η₂)`,
/// built directly from its closed form.
pub fn reference_ode_autonomous5() -> Result<SecondOrderOde> {
    let table = Family::Autonomous5.table()?;
    let b = Builder { table: &table };
    let (a, e1, e2, qd) = (b.var("alpha"), b.var("eta1"), b.var("eta2"), b.var("qdot"));
    let kinetic = b.prod([Ok(b.c(5, 2)), b.q(-1), Ok(qd.add(&e2)?), Ok(qd.sub(&e2)?)])?;
    let bracket = b.sum([
        b.prod([Ok(b.c(3, 1)), Ok(a.clone()), Ok(a.clone()), b.q(5)]),
        b.prod([Ok(b.c(4, 1)), Ok(a.clone()), Ok(e1.clone()), b.q(4)]),
        b.prod([Ok(e1.clone()), Ok(e1.clone()), b.q(3)]),
        b.prod([Ok(b.c(-2, 1)), Ok(a), Ok(e2.clone()), b.q(1)]),
        b.prod([Ok(b.c(-4, 1)), Ok(e1), Ok(e2)]),
    ])?;
    let potential = b.prod([Ok(b.c(1, 2)), b.q(2), Ok(bracket)])?;
    SecondOrderOde::from_laurent(&kinetic.add(&potential)?)
}

/// The three-parameter equation
/// `q̈ = (5/2q)(q̇+1)(q̇−1) + (3/2)(α₁²+2α₁−4α₃+1)q⁷ + 2(α₁−2α₂+1)tq⁶
///      + (t²/2)q⁵ − α₁q³ − 2tq²`.
pub fn reference_ode_nonautonomous3() -> Result<SecondOrderOde> {
    let table = Family::NonAutonomous3.table()?;
    let b = Builder { table: &table };
    let (a1, a2, a3, t, qd) = (b.var("alpha1"), b.var("alpha2"), b.var("alpha3"), b.var("t"), b.var("qdot"));
    let one = b.c(1, 1);
    let kinetic = b.prod([Ok(b.c(5, 2)), b.q(-1), Ok(qd.add(&one)?), Ok(qd.sub(&one)?)])?;
    let k7 = b.sum([
        Ok(a1.mul(&a1)?),
        Ok(a1.scale(&CycloRat::from_integer(2))),
        Ok(a3.scale(&CycloRat::from_integer(-4))),
        Ok(one.clone()),
    ])?;
    let k6 = b.sum([Ok(a1.clone()), Ok(a2.scale(&CycloRat::from_integer(-2))), Ok(one)])?;
    let rhs = b.sum([
        Ok(kinetic),
        b.prod([Ok(b.c(3, 2)), Ok(k7), b.q(7)]),
        b.prod([Ok(b.c(2, 1)), Ok(k6), Ok(t.clone()), b.q(6)]),
        b.prod([Ok(b.c(1, 2)), Ok(t.clone()), Ok(t.clone()), b.q(5)]),
        b.prod([Ok(b.c(-1, 1)), Ok(a1), b.q(3)]),
        b.prod([Ok(b.c(-2, 1)), Ok(t), b.q(2)]),
    ])?;
    SecondOrderOde::from_laurent(&rhs)
}

/// The order-n generalization, written with
/// `B = αqⁿ⁻² + η₁qⁿ⁻³ + … + ηₙ₋₂`, `A = qB + ηₙ₋₁` and
/// `D = (n−1)αqⁿ⁻² + (n−2)η₁qⁿ⁻³ + … + ηₙ₋₂`:
/// `q̈ = (n/2q)(q̇+ηₙ₋₁)(q̇−ηₙ₋₁) − (n/2)·B·(qB + 2ηₙ₋₁) + A·D`.
pub fn reference_ode_general(n: u32) -> Result<SecondOrderOde> {
    let table = Family::GeneralN(n).table()?;
    let b = Builder { table: &table };
    let n_i = n as i32;
    let last = b.var(&format!("eta{}", n - 1));
    let qd = b.var("qdot");
    let big_b = b.alpha_eta_series(n - 1, n_i - 2, |_| 1)?;
    let big_a = b.alpha_eta_series(n, n_i - 1, |_| 1)?;
    let big_d = b.alpha_eta_series(n - 1, n_i - 2, |j| (n - 1 - j) as i64)?;
    let kinetic = b.prod([Ok(b.c(n as i64, 2)), b.q(-1), Ok(qd.add(&last)?), Ok(qd.sub(&last)?)])?;
    let inner = b.sum([
        b.prod([b.q(1), Ok(big_b.clone())]),
        Ok(last.scale(&CycloRat::from_integer(2))),
    ])?;
    let middle = b.prod([Ok(b.c(-(n as i64), 2)), Ok(big_b), Ok(inner)])?;
    let rhs = b.sum([Ok(kinetic), Ok(middle), Ok(big_a.mul(&big_d)?)])?;
    SecondOrderOde::from_laurent(&rhs)
}

/// The reference equation for any family.
pub fn reference_ode(family: Family) -> Result<SecondOrderOde> {
    match family {
        Family::Autonomous5 => reference_ode_autonomous5(),
        Family::GeneralN(n) => reference_ode_general(n),
        Family::NonAutonomous3 => reference_ode_nonautonomous3(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Monomial;

    fn term(t: &VarTable, c: i64, powers: &[(&str, i32)]) -> LaurentPoly {
        let powers: Vec<_> = powers.iter().map(|(n, e)| (t.var(n).unwrap(), *e)).collect();
        LaurentPoly::term(t, CycloRat::from_integer(c), &powers).unwrap()
    }

    fn sum(parts: &[LaurentPoly]) -> LaurentPoly {
        parts.iter().fold(LaurentPoly::zero(parts[0].table()), |a, b| a.add(b).unwrap())
    }

    #[test]
    fn autonomous5_expansion() {
        let sys = HamSystem::autonomous5();
        let t = sys.table().clone();
        let h = sys.hamiltonian();
        assert_eq!(h.len(), 4);
        let lead = Monomial::new(&t, &[(Var::Q, 5), (Var::P, 2)]).unwrap();
        assert_eq!(h.coeff(&lead), Some(&CycloRat::one()));
        let expected = sum(&[
            term(&t, 1, &[("q", 5), ("p", 2)]),
            term(&t, 1, &[("alpha", 1), ("q", 4), ("p", 1)]),
            term(&t, 1, &[("eta1", 1), ("q", 3), ("p", 1)]),
            term(&t, 1, &[("eta2", 1), ("p", 1)]),
        ]);
        assert_eq!(h, &expected);
    }

    #[test]
    fn autonomous5_velocity_at_zero_momentum() {
        let sys = HamSystem::autonomous5();
        let t = sys.table().clone();
        let mut bind = Bindings::new();
        bind.insert(Var::P, LaurentPoly::zero(&t));
        let fq0 = sys.hamiltonian().diff(Var::P).substitute(&bind).unwrap();
        let expected = sum(&[
            term(&t, 1, &[("alpha", 1), ("q", 4)]),
            term(&t, 1, &[("eta1", 1), ("q", 3)]),
            term(&t, 1, &[("eta2", 1)]),
        ]);
        assert_eq!(fq0, expected);
    }

    #[test]
    fn general_n_shapes() {
        let sys = HamSystem::general_n(2).unwrap();
        let t = sys.table().clone();
        let expected = sum(&[
            term(&t, 1, &[("q", 2), ("p", 2)]),
            term(&t, 1, &[("alpha", 1), ("q", 1), ("p", 1)]),
            term(&t, 1, &[("eta1", 1), ("p", 1)]),
        ]);
        assert_eq!(sys.hamiltonian(), &expected);
        for n in 2..=9 {
            assert_eq!(HamSystem::general_n(n).unwrap().hamiltonian().len(), n as usize + 1);
        }
        assert_eq!(HamSystem::general_n(1).unwrap_err(), HamiltonianError::InvalidOrder(1));
    }

    #[test]
    fn general_five_reduces_to_autonomous5_after_renaming() {
        let g = HamSystem::general_n(5).unwrap();
        let gt = g.table().clone();
        let mut bind = Bindings::new();
        bind.insert(gt.var("eta2").unwrap(), LaurentPoly::zero(&gt));
        bind.insert(gt.var("eta3").unwrap(), LaurentPoly::zero(&gt));
        let reduced = g.hamiltonian().substitute(&bind).unwrap();
        let a5 = HamSystem::autonomous5();
        let at = a5.table().clone();
        let renamed = reduced
            .reindex(&at, |v| {
                let name = gt.name(v);
                let target = if name == "eta4" { "eta2" } else { name };
                at.var(target)
            })
            .unwrap();
        assert_eq!(&renamed, a5.hamiltonian());
    }

    #[test]
    fn nonautonomous3_shape() {
        let sys = HamSystem::nonautonomous3();
        let t = sys.table().clone();
        assert!(!sys.is_autonomous());
        assert_eq!(sys.hamiltonian().len(), 7);
        let support: std::collections::BTreeSet<_> = sys
            .hamiltonian()
            .terms()
            .map(|(m, _)| (m.exponent(Var::Q), m.exponent(Var::P), m.exponent(Var::T)))
            .collect();
        assert_eq!(support.len(), 6);
        let dt = sys.hamiltonian().diff(Var::T);
        let expected = sum(&[term(&t, 1, &[("q", 3), ("p", 1)]), term(&t, 1, &[("alpha2", 1), ("q", 2)])]);
        assert_eq!(dt, expected);
    }

    #[test]
    fn hamilton_equations_autonomous5() {
        let sys = HamSystem::autonomous5();
        let t = sys.table().clone();
        let (fq, fp) = sys.hamilton_equations();
        let fq_expected = sum(&[
            term(&t, 2, &[("q", 5), ("p", 1)]),
            term(&t, 1, &[("alpha", 1), ("q", 4)]),
            term(&t, 1, &[("eta1", 1), ("q", 3)]),
            term(&t, 1, &[("eta2", 1)]),
        ]);
        let fp_expected = sum(&[
            term(&t, -5, &[("q", 4), ("p", 2)]),
            term(&t, -4, &[("alpha", 1), ("q", 3), ("p", 1)]),
            term(&t, -3, &[("eta1", 1), ("q", 2), ("p", 1)]),
        ]);
        assert_eq!(fq, fq_expected);
        assert_eq!(fp, fp_expected);

        let g2 = HamSystem::general_n(2).unwrap();
        let t2 = g2.table().clone();
        let (fq2, _) = g2.hamilton_equations();
        assert_eq!(
            fq2,
            sum(&[
                term(&t2, 2, &[("q", 2), ("p", 1)]),
                term(&t2, 1, &[("alpha", 1), ("q", 1)]),
                term(&t2, 1, &[("eta1", 1)]),
            ])
        );
    }

    #[test]
    fn momentum_formula() {
        for n in 2..=8u32 {
            let sys = HamSystem::general_n(n).unwrap();
            let t = sys.table().clone();
            let b = Builder { table: &t };
            let series = b.alpha_eta_series(n, n as i32 - 1, |_| 1).unwrap();
            let expected = b
                .var("qdot")
                .sub(&series)
                .unwrap()
                .mul(&b.q(-(n as i32)).unwrap())
                .unwrap()
                .scale(&CycloRat::ratio(1, 2));
            assert_eq!(sys.eliminate_momentum().unwrap(), expected);
        }
    }

    #[test]
    fn momentum_inverts_velocity() {
        for sys in [HamSystem::autonomous5(), HamSystem::nonautonomous3(), HamSystem::general_n(6).unwrap()] {
            let mut bind = Bindings::new();
            bind.insert(Var::P, sys.eliminate_momentum().unwrap());
            let back = sys.hamiltonian().diff(Var::P).substitute(&bind).unwrap();
            assert_eq!(back, LaurentPoly::var(sys.table(), Var::QDOT));
        }
    }

    #[test]
    fn momentum_elimination_errors() {
        let sys = HamSystem::autonomous5();
        let t = sys.table().clone();
        let cubic = sys.with_hamiltonian(term(&t, 1, &[("q", 1), ("p", 3)])).unwrap();
        assert_eq!(cubic.eliminate_momentum().unwrap_err(), HamiltonianError::NotQuadraticInMomentum);
        let bad_lead = sys
            .with_hamiltonian(sum(&[term(&t, 1, &[("q", 1), ("p", 2)]), term(&t, 1, &[("p", 2)])]))
            .unwrap();
        assert_eq!(bad_lead.eliminate_momentum().unwrap_err(), HamiltonianError::LeadingCoefficientNotMonomial);
        assert_eq!(
            sys.with_hamiltonian(term(&t, 1, &[("q", -1)])).unwrap_err(),
            HamiltonianError::NotPolynomial
        );
    }

    #[test]
    fn equivalence_certificates() {
        let r = HamSystem::autonomous5().verify_equivalence(&reference_ode_autonomous5().unwrap()).unwrap();
        assert!(r.is_zero(), "residual {r}");
        let r = HamSystem::nonautonomous3()
            .verify_equivalence(&reference_ode_nonautonomous3().unwrap())
            .unwrap();
        assert!(r.is_zero(), "residual {r}");
        for n in 2..=8 {
            let r = HamSystem::general_n(n).unwrap().verify_equivalence(&reference_ode_general(n).unwrap()).unwrap();
            assert!(r.is_zero(), "n = {n}: residual {r}");
        }
    }

    #[test]
    fn denominator_is_single_q_power() {
        let ode = reference_ode_autonomous5().unwrap();
        assert_eq!(ode.q_power(), 1);
        assert!(ode.numerator().exponent_range(Var::Q).unwrap().0 >= 0);
    }

    #[test]
    fn both_derivation_routes_agree() {
        for sys in [HamSystem::autonomous5(), HamSystem::nonautonomous3(), HamSystem::general_n(4).unwrap()] {
            assert_eq!(sys.second_order_form().unwrap(), sys.second_order_form_via_momentum().unwrap());
        }
    }

    #[test]
    fn first_integrals() {
        assert!(HamSystem::autonomous5().time_derivative_of_h().unwrap().is_zero());
        for n in 2..=8 {
            assert!(HamSystem::general_n(n).unwrap().time_derivative_of_h().unwrap().is_zero());
        }
        let sys = HamSystem::nonautonomous3();
        let t = sys.table().clone();
        assert_eq!(
            sys.time_derivative_of_h().unwrap(),
            sum(&[term(&t, 1, &[("q", 3), ("p", 1)]), term(&t, 1, &[("alpha2", 1), ("q", 2)])])
        );
    }

    #[test]
    fn family_names_round_trip() {
        for f in [Family::Autonomous5, Family::GeneralN(7), Family::NonAutonomous3] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("general:1".parse::<Family>().is_err());
        assert!("painleve".parse::<Family>().is_err());
    }
}
