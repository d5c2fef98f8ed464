//! Sparse multivariate Laurent polynomials over Q(ζ₈).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Neg;

use num_complex::Complex64;

use super::{AlgebraError, CycloRat, Var, VarTable};

type Result<T> = std::result::Result<T, AlgebraError>;

/// Simultaneous substitution `variable ↦ polynomial`.
pub type Bindings = BTreeMap<Var, LaurentPoly>;

/// Exponent vector over a [`VarTable`]. Ordering is lexicographic in table order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial(Box<[i32]>);

impl Monomial {
    pub fn one(table: &VarTable) -> Self {
        Monomial(vec![0; table.len()].into_boxed_slice())
    }

    pub fn new(table: &VarTable, powers: &[(Var, i32)]) -> Result<Self> {
        let mut e = vec![0; table.len()];
        for &(v, k) in powers {
            e[v.index()] += k;
        }
        let m = Monomial(e.into_boxed_slice());
        m.validate(table)?;
        Ok(m)
    }

    fn validate(&self, table: &VarTable) -> Result<()> {
        for v in table.vars() {
            if !table.is_laurent(v) && self.exponent(v) < 0 {
                return Err(AlgebraError::NegativeExponent {
                    var: table.name(v).to_string(),
                });
            }
        }
        let degree = self.total_degree();
        if degree > table.degree_cap() {
            return Err(AlgebraError::DegreeCapExceeded {
                degree,
                cap: table.degree_cap(),
            });
        }
        Ok(())
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn exponent(&self, v: Var) -> i32 {
        self.0[v.index()]
    }

    /// Σ|eᵢ|.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|e| e.unsigned_abs()).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|e| -e).collect())
    }

    fn with_exponent(&self, v: Var, e: i32) -> Monomial {
        let mut out = self.clone();
        out.0[v.index()] = e;
        out
    }

    fn fmt_with(&self, table: &VarTable, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in table.vars() {
            let e = self.exponent(v);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", table.name(v))?;
            } else {
                write!(f, "{}^{}", table.name(v), e)?;
            }
        }
        Ok(())
    }
}

/// A Laurent polynomial: negative exponents are allowed in `q` only.
///
/// The term map never stores zero coefficients, so two polynomials are equal
/// exactly when their term maps are.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    table: VarTable,
    terms: BTreeMap<Monomial, CycloRat>,
}

fn accumulate(terms: &mut BTreeMap<Monomial, CycloRat>, m: Monomial, c: CycloRat) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match terms.entry(m) {
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if slot.get().is_zero() {
                slot.remove();
            }
        }
    }
}

impl LaurentPoly {
    pub fn zero(table: &VarTable) -> Self {
        LaurentPoly {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(table: &VarTable) -> Self {
        LaurentPoly::constant(table, CycloRat::one())
    }

    pub fn constant(table: &VarTable, c: CycloRat) -> Self {
        let mut p = LaurentPoly::zero(table);
        accumulate(&mut p.terms, Monomial::one(table), c);
        p
    }

    pub fn var(table: &VarTable, v: Var) -> Self {
        LaurentPoly::term(table, CycloRat::one(), &[(v, 1)]).expect("a single variable is a valid monomial")
    }

    /// `c · Π vᵏ`.
    pub fn term(table: &VarTable, c: CycloRat, powers: &[(Var, i32)]) -> Result<Self> {
        let m = Monomial::new(table, powers)?;
        let mut p = LaurentPoly::zero(table);
        accumulate(&mut p.terms, m, c);
        Ok(p)
    }

    pub fn from_terms(
        table: &VarTable,
        terms: impl IntoIterator<Item = (Monomial, CycloRat)>,
    ) -> Result<Self> {
        let mut p = LaurentPoly::zero(table);
        for (m, c) in terms {
            if m.0.len() != table.len() {
                return Err(AlgebraError::TableMismatch);
            }
            m.validate(table)?;
            accumulate(&mut p.terms, m, c);
        }
        Ok(p)
    }

    pub fn table(&self) -> &VarTable {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CycloRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&CycloRat> {
        self.terms.get(m)
    }

    /// The value of a constant polynomial (zero included).
    pub fn constant_value(&self) -> Option<CycloRat> {
        match self.terms.len() {
            0 => Some(CycloRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn check_table(&self, other: &LaurentPoly) -> Result<()> {
        if self.table == other.table {
            Ok(())
        } else {
            Err(AlgebraError::TableMismatch)
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            accumulate(&mut out.terms, m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.add(&-other)
    }

    pub fn scale(&self, c: &CycloRat) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.table);
        for (m, k) in &self.terms {
            accumulate(&mut out.terms, m.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check_table(other)?;
        let cap = self.table.degree_cap();
        let mut out = LaurentPoly::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let degree = m.total_degree();
                if degree > cap {
                    return Err(AlgebraError::DegreeCapExceeded { degree, cap });
                }
                accumulate(&mut out.terms, m, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<LaurentPoly> {
        let mut acc = LaurentPoly::one(&self.table);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative. d(vᵏ)/dv = k·vᵏ⁻¹ for every integer k.
    pub fn diff(&self, v: Var) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.table);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let dm = m.with_exponent(v, e - 1);
            accumulate(&mut out.terms, dm, c * &CycloRat::from_integer(e as i64));
        }
        out
    }

    /// Smallest and largest exponent of `v` over all terms.
    pub fn exponent_range(&self, v: Var) -> Option<(i32, i32)> {
        let mut it = self.terms.keys().map(|m| m.exponent(v));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), e| (lo.min(e), hi.max(e))))
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) != 0)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.table.vars().filter(|&v| self.depends_on(v)).collect()
    }

    /// Coefficient of `vᵏ` when the polynomial is read as a Laurent
    /// polynomial in `v` alone.
    pub fn coefficient_of(&self, v: Var, k: i32) -> LaurentPoly {
        let mut out = LaurentPoly::zero(&self.table);
        for (m, c) in &self.terms {
            if m.exponent(v) == k {
                accumulate(&mut out.terms, m.with_exponent(v, 0), c.clone());
            }
        }
        out
    }

    /// The single term of a one-term polynomial.
    pub fn as_unit(&self) -> Option<(&CycloRat, &Monomial)> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            Some((c, m))
        } else {
            None
        }
    }

    /// Inverse of a one-term polynomial whose monomial only involves `q`.
    pub fn unit_inverse(&self) -> Result<LaurentPoly> {
        let (c, m) = self.as_unit().ok_or(AlgebraError::NotInvertible)?;
        let inv_m = m.inverse();
        inv_m.validate(&self.table).map_err(|_| AlgebraError::NotInvertible)?;
        let inv_c = c.inv().ok_or(AlgebraError::NotInvertible)?;
        let mut out = LaurentPoly::zero(&self.table);
        accumulate(&mut out.terms, inv_m, inv_c);
        Ok(out)
    }

    /// Simultaneous substitution, fully expanded.
    ///
    /// A variable that occurs with a negative exponent must be bound to a
    /// single invertible monomial; anything else would need rational
    /// functions.
    pub fn substitute(&self, bindings: &Bindings) -> Result<LaurentPoly> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        for (&v, b) in bindings {
            self.check_table(b)?;
            if v.index() >= self.table.len() {
                return Err(AlgebraError::TableMismatch);
            }
        }
        let mut cache: HashMap<(Var, i32), LaurentPoly> = HashMap::new();
        let mut out = LaurentPoly::zero(&self.table);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut factor = LaurentPoly::one(&self.table);
            for (&v, b) in bindings {
                let e = m.exponent(v);
                if e == 0 {
                    continue;
                }
                rest = rest.with_exponent(v, 0);
                let pw = power_cached(&mut cache, &self.table, v, b, e)?;
                factor = factor.mul(&pw)?;
            }
            let mut lead = LaurentPoly::zero(&self.table);
            accumulate(&mut lead.terms, rest, c.clone());
            for (fm, fc) in lead.mul(&factor)?.terms {
                accumulate(&mut out.terms, fm, fc);
            }
        }
        Ok(out)
    }

    /// Numerical value with ζ ↦ exp(iπ/4).
    ///
    /// Accumulation is Horner-style, one variable at a time in table order.
    pub fn eval_numeric(&self, point: &BTreeMap<Var, Complex64>) -> Result<Complex64> {
        let n = self.table.len();
        let mut values: Vec<Option<Complex64>> = vec![None; n];
        for (&v, &x) in point {
            if v.index() >= n {
                return Err(AlgebraError::TableMismatch);
            }
            values[v.index()] = Some(x);
        }
        for v in self.table.vars() {
            if let Some((lo, hi)) = self.exponent_range(v) {
                if lo == 0 && hi == 0 {
                    continue;
                }
                let x = values[v.index()].ok_or_else(|| AlgebraError::UnboundVariable {
                    var: self.table.name(v).to_string(),
                })?;
                if lo < 0 && x == Complex64::new(0.0, 0.0) {
                    return Err(AlgebraError::SingularEvaluation {
                        var: self.table.name(v).to_string(),
                    });
                }
            }
        }
        let terms: Vec<(&[i32], Complex64)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.exponents(), c.to_complex()))
            .collect();
        Ok(horner(&terms, 0, &values))
    }

    /// Moves the polynomial onto another table; `map` gives the image of
    /// every variable that actually occurs.
    pub fn reindex(&self, target: &VarTable, map: impl Fn(Var) -> Option<Var>) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero(target);
        for (m, c) in &self.terms {
            let mut powers = Vec::new();
            for v in self.table.vars() {
                let e = m.exponent(v);
                if e == 0 {
                    continue;
                }
                let w = map(v).ok_or_else(|| AlgebraError::UnboundVariable {
                    var: self.table.name(v).to_string(),
                })?;
                powers.push((w, e));
            }
            accumulate(&mut out.terms, Monomial::new(target, &powers)?, c.clone());
        }
        Ok(out)
    }
}

fn power_cached(
    cache: &mut HashMap<(Var, i32), LaurentPoly>,
    table: &VarTable,
    v: Var,
    base: &LaurentPoly,
    e: i32,
) -> Result<LaurentPoly> {
    if let Some(p) = cache.get(&(v, e)) {
        return Ok(p.clone());
    }
    let step = if e > 0 {
        base.clone()
    } else {
        base.unit_inverse().map_err(|_| AlgebraError::NonUnitBinding {
            var: table.name(v).to_string(),
        })?
    };
    let unit = e.signum();
    let mut k = unit;
    let mut acc = step.clone();
    cache.insert((v, k), acc.clone());
    while k != e {
        k += unit;
        acc = match cache.get(&(v, k)) {
            Some(p) => p.clone(),
            None => {
                let next = acc.mul(&step)?;
                cache.insert((v, k), next.clone());
                next
            }
        };
    }
    Ok(acc)
}

fn horner(terms: &[(&[i32], Complex64)], var: usize, values: &[Option<Complex64>]) -> Complex64 {
    if terms.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    if var == values.len() {
        return terms.iter().map(|t| t.1).sum();
    }
    let mut groups: Vec<(i32, Complex64)> = Vec::new();
    let mut start = 0;
    while start < terms.len() {
        let e = terms[start].0[var];
        let mut end = start;
        while end < terms.len() && terms[end].0[var] == e {
            end += 1;
        }
        groups.push((e, horner(&terms[start..end], var + 1, values)));
        start = end;
    }
    if groups.len() == 1 && groups[0].0 == 0 {
        return groups[0].1;
    }
    let x = values[var].expect("bound variables checked before evaluation");
    let mut acc = groups[groups.len() - 1].1;
    for j in (0..groups.len() - 1).rev() {
        acc = groups[j].1 + acc * x.powi(groups[j + 1].0 - groups[j].0);
    }
    acc * x.powi(groups[0].0)
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// Canonical serialization: `(coeff)*monomial` terms in ascending
/// lexicographic exponent order, joined by ` + `; the zero polynomial is `0`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if !m.is_one() {
                write!(f, "*")?;
                m.fmt_with(&self.table, f)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}
