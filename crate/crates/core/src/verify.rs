//! The certificate suite: every exact check for a family, with optional
//! single-sign mutations used as controls.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, CycloRat, LaurentPoly, Var, VarTable};
use crate::hamiltonian::{reference_ode, Family, HamSystem, HamiltonianError, SecondOrderOde};
use crate::symmetry::{BirationalMap, Branch, SymmetryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("bad mutation spec `{0}` (expected ode:<k>, ham:<k>, map-q:<k>, map-p:<k>, map-t:<k>, map-param:<r>,<c> or map-offset:<i>)")]
    BadMutation(String),
    #[error("mutation {0} does not apply: the targeted term does not exist or is zero")]
    MutationOutOfRange(Mutation),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Result<T> = std::result::Result<T, VerifyError>;

/// A single sign flip in one of the objects the suite checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// k-th term of the reference second-order equation's numerator.
    OdeTerm(usize),
    /// k-th term of the Hamiltonian.
    HamiltonianTerm(usize),
    MapQTerm(usize),
    MapPTerm(usize),
    MapTTerm(usize),
    /// Entry of the parameter matrix.
    MapParam(usize, usize),
    /// Entry of the parameter offset.
    MapOffset(usize),
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::OdeTerm(k) => write!(f, "ode:{k}"),
            Mutation::HamiltonianTerm(k) => write!(f, "ham:{k}"),
            Mutation::MapQTerm(k) => write!(f, "map-q:{k}"),
            Mutation::MapPTerm(k) => write!(f, "map-p:{k}"),
            Mutation::MapTTerm(k) => write!(f, "map-t:{k}"),
            Mutation::MapParam(r, c) => write!(f, "map-param:{r},{c}"),
            Mutation::MapOffset(i) => write!(f, "map-offset:{i}"),
        }
    }
}

impl FromStr for Mutation {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || VerifyError::BadMutation(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let idx = |a: &str| a.trim().parse::<usize>().map_err(|_| bad());
        Ok(match kind {
            "ode" => Mutation::OdeTerm(idx(arg)?),
            "ham" => Mutation::HamiltonianTerm(idx(arg)?),
            "map-q" => Mutation::MapQTerm(idx(arg)?),
            "map-p" => Mutation::MapPTerm(idx(arg)?),
            "map-t" => Mutation::MapTTerm(idx(arg)?),
            "map-offset" => Mutation::MapOffset(idx(arg)?),
            "map-param" => {
                let (r, c) = arg.split_once(',').ok_or_else(bad)?;
                Mutation::MapParam(idx(r)?, idx(c)?)
            }
            _ => return Err(bad()),
        })
    }
}

/// Negates the k-th term (in canonical order) of `poly`.
pub fn flip_term(poly: &LaurentPoly, k: usize) -> Option<LaurentPoly> {
    let (m, c) = poly.terms().nth(k)?;
    let twice = LaurentPoly::from_terms(poly.table(), [(m.clone(), c * CycloRat::from_integer(2))]).ok()?;
    poly.sub(&twice).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub family: String,
    pub name: String,
    pub passed: bool,
    /// Canonical text of the nonzero residual, on failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

impl CheckResult {
    fn zero(family: Family, name: impl Into<String>, residual: &LaurentPoly) -> Self {
        CheckResult {
            family: family.to_string(),
            name: name.into(),
            passed: residual.is_zero(),
            residual: (!residual.is_zero()).then(|| residual.to_string()),
        }
    }

    fn flag(family: Family, name: impl Into<String>, passed: bool, detail: impl FnOnce() -> String) -> Self {
        CheckResult {
            family: family.to_string(),
            name: name.into(),
            passed,
            residual: (!passed).then(detail),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{}] {}: {verdict}", self.family, self.name)?;
        if let Some(r) = &self.residual {
            write!(f, "\n    residual: {r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "{passed}/{} checks passed", self.checks.len())
    }
}

/// The symmetry the suite uses for a family.
pub fn default_map(family: Family, branch: Branch) -> Result<BirationalMap> {
    Ok(match family {
        Family::Autonomous5 => BirationalMap::autonomous5_map(),
        Family::GeneralN(n) => BirationalMap::autonomous_map(n)?,
        Family::NonAutonomous3 => BirationalMap::nonautonomous_map(branch),
    })
}

/// `(QⁿP − αQⁿ⁻¹ − η₁Qⁿ⁻² − … − ηₙ₋₁)P`, the closed form of the pushed-
/// forward Hamiltonian of the order-n family.
pub fn expected_pushforward(n: u32) -> Result<LaurentPoly> {
    let table = Family::GeneralN(n).table()?;
    let term = |name: &str, k: i32| -> Result<LaurentPoly> {
        let v = table.var(name).expect("family parameter");
        Ok(LaurentPoly::term(&table, -CycloRat::one(), &[(v, 1), (Var::Q, k)])?)
    };
    let n_i = n as i32;
    let mut inner = LaurentPoly::term(&table, CycloRat::one(), &[(Var::Q, n_i), (Var::P, 1)])?;
    inner = inner.add(&term("alpha", n_i - 1)?)?;
    for i in 1..n {
        inner = inner.add(&term(&format!("eta{i}"), n_i - 1 - i as i32)?)?;
    }
    Ok(inner.mul(&LaurentPoly::var(&table, Var::P))?)
}

/// `q³p + α₂q²`.
pub fn expected_nonautonomous_dhdt() -> Result<LaurentPoly> {
    let table = Family::NonAutonomous3.table()?;
    let a2 = table.var("alpha2").expect("alpha2");
    let one = CycloRat::one();
    Ok(LaurentPoly::term(&table, one.clone(), &[(Var::Q, 3), (Var::P, 1)])?
        .add(&LaurentPoly::term(&table, one, &[(a2, 1), (Var::Q, 2)])?)?)
}

fn mutate_ode(ode: &SecondOrderOde, k: usize, m: Mutation) -> Result<SecondOrderOde> {
    let num = flip_term(ode.numerator(), k).ok_or(VerifyError::MutationOutOfRange(m))?;
    let table = num.table().clone();
    let den = LaurentPoly::term(&table, CycloRat::one(), &[(Var::Q, -(ode.q_power() as i32))])?;
    Ok(SecondOrderOde::from_laurent(&num.mul(&den)?)?)
}

fn mutate_map(map: &BirationalMap, m: Mutation) -> Result<BirationalMap> {
    let out_of_range = VerifyError::MutationOutOfRange(m);
    let mut q = map.q_rule().clone();
    let mut p = map.p_rule().clone();
    let mut t = map.t_rule().clone();
    let mut params = map.param_map().clone();
    match m {
        Mutation::MapQTerm(k) => q = flip_term(&q, k).ok_or(out_of_range)?,
        Mutation::MapPTerm(k) => p = flip_term(&p, k).ok_or(out_of_range)?,
        Mutation::MapTTerm(k) => t = flip_term(&t, k).ok_or(out_of_range)?,
        Mutation::MapParam(r, c) => {
            let mut mat = params.matrix().to_vec();
            let entry = mat.get_mut(r).and_then(|row| row.get_mut(c)).ok_or(out_of_range.clone())?;
            if entry.is_zero() {
                return Err(out_of_range);
            }
            *entry = -entry.clone();
            params = crate::symmetry::AffineParamMap::new(mat, params.offset().to_vec())?;
        }
        Mutation::MapOffset(i) => {
            let mut off = params.offset().to_vec();
            let entry = off.get_mut(i).ok_or(out_of_range.clone())?;
            if entry.is_zero() {
                return Err(out_of_range);
            }
            *entry = -entry.clone();
            params = crate::symmetry::AffineParamMap::new(params.matrix().to_vec(), off)?;
        }
        _ => return Ok(map.clone()),
    }
    Ok(BirationalMap::new(format!("{}[{m}]", map.name()), q, p, t, params)?)
}

fn one(table: &VarTable) -> LaurentPoly {
    LaurentPoly::one(table)
}

fn map_minus_identity(map: &BirationalMap) -> String {
    let id = BirationalMap::identity(map.table());
    let d = |a: &LaurentPoly, b: &LaurentPoly| a.sub(b).map(|r| r.to_string()).unwrap_or_default();
    format!(
        "q: {}; p: {}; t: {}; params identity: {}",
        d(map.q_rule(), id.q_rule()),
        d(map.p_rule(), id.p_rule()),
        d(map.t_rule(), id.t_rule()),
        map.param_map().is_identity()
    )
}

/// Every certificate for one family.
pub fn verify_family(family: Family, branch: Branch, mutation: Option<Mutation>) -> Result<Report> {
    let mut sys = HamSystem::from_family(family)?;
    let mut ode = reference_ode(family)?;
    let mut map = default_map(family, branch)?;
    match mutation {
        Some(m @ Mutation::OdeTerm(k)) => ode = mutate_ode(&ode, k, m)?,
        Some(m @ Mutation::HamiltonianTerm(k)) => {
            let h = flip_term(sys.hamiltonian(), k).ok_or(VerifyError::MutationOutOfRange(m))?;
            sys = sys.with_hamiltonian(h)?;
        }
        Some(m) => map = mutate_map(&map, m)?,
        None => {}
    }

    let mut checks = Vec::new();
    checks.push(CheckResult::zero(
        family,
        "equivalence with the second-order equation",
        &sys.verify_equivalence(&ode)?,
    ));

    let dhdt = sys.time_derivative_of_h()?;
    if family.is_autonomous() {
        checks.push(CheckResult::zero(family, "dH/dt = 0", &dhdt));
    } else {
        let r = dhdt.sub(&expected_nonautonomous_dhdt()?)?;
        checks.push(CheckResult::zero(family, "dH/dt = q^3*p + alpha2*q^2", &r));
    }

    if let Family::GeneralN(n) = family {
        let r = map.pushforward_h(&sys)?.sub(&expected_pushforward(n)?)?;
        checks.push(CheckResult::zero(family, "pushforward of H closed form", &r));
    }

    let inv = map.verify_invariance(&sys)?;
    checks.push(CheckResult::flag(family, format!("invariance under {}", map.name()), inv.is_zero(), || {
        inv.to_string()
    }));

    let jac = map.jacobian_determinant()?.sub(&one(map.table()))?;
    checks.push(CheckResult::zero(family, "jacobian = 1", &jac));

    let order = if family.is_autonomous() { 2 } else { 8 };
    let full = map.power(order)?;
    checks.push(CheckResult::flag(family, format!("s^{order} = identity"), full.is_identity(), || {
        map_minus_identity(&full)
    }));
    let divisors: &[u32] = if family.is_autonomous() { &[1] } else { &[1, 2, 4] };
    for &k in divisors {
        let sk = map.power(k)?;
        checks.push(CheckResult::flag(family, format!("s^{k} != identity"), !sk.is_identity(), || {
            "map power is the identity".to_string()
        }));
    }
    Ok(Report { checks })
}

/// The suite for `general:n` over a range of n, checked in parallel and
/// reported in increasing n.
pub fn verify_general_range(ns: std::ops::RangeInclusive<u32>, mutation: Option<Mutation>) -> Result<Report> {
    let reports: Vec<Report> = ns
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| verify_family(Family::GeneralN(n), Branch::default(), mutation))
        .collect::<Result<_>>()?;
    let mut out = Report::default();
    for r in reports {
        out.extend(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suites_pass() {
        for fam in [Family::Autonomous5, Family::NonAutonomous3, Family::GeneralN(3)] {
            let r = verify_family(fam, Branch::default(), None).unwrap();
            assert!(r.all_passed(), "{r}");
        }
        let r = verify_family(Family::NonAutonomous3, Branch::CONJUGATE, None).unwrap();
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn nonautonomous_report_mentions_order_eight() {
        let r = verify_family(Family::NonAutonomous3, Branch::default(), None).unwrap();
        assert!(r.to_string().contains("s^8 = identity: PASS"));
    }

    #[test]
    fn general_range_is_ordered() {
        let r = verify_general_range(2..=4, None).unwrap();
        let fams: Vec<_> = r.checks.iter().map(|c| c.family.clone()).collect();
        let mut sorted = fams.clone();
        sorted.sort();
        assert_eq!(fams, sorted);
        assert_eq!(r.checks.len(), 3 * 7);
    }

    #[test]
    fn mutation_parsing_round_trips() {
        for s in ["ode:3", "ham:0", "map-q:0", "map-p:2", "map-t:0", "map-param:2,0", "map-offset:1"] {
            assert_eq!(s.parse::<Mutation>().unwrap().to_string(), s);
        }
        assert!("ode".parse::<Mutation>().is_err());
        assert!("foo:1".parse::<Mutation>().is_err());
    }

    #[test]
    fn ode_mutation_fails_with_residual() {
        let r = verify_family(Family::Autonomous5, Branch::default(), Some(Mutation::OdeTerm(0))).unwrap();
        let f: Vec<_> = r.failures().collect();
        assert_eq!(f.len(), 1);
        assert!(f[0].name.starts_with("equivalence"));
        assert!(f[0].residual.as_deref().is_some_and(|s| s != "0"));
    }

    #[test]
    fn out_of_range_mutations_are_errors() {
        assert!(matches!(
            verify_family(Family::Autonomous5, Branch::default(), Some(Mutation::HamiltonianTerm(99))),
            Err(VerifyError::MutationOutOfRange(_))
        ));
        assert!(matches!(
            verify_family(Family::Autonomous5, Branch::default(), Some(Mutation::MapOffset(0))),
            Err(VerifyError::MutationOutOfRange(_))
        ));
    }
}
