//! Birational symplectic maps acting on `(q, p, t)` and the parameters.
//!
//! A map is stored as three Laurent rules `Q(q,p,t,θ)`, `P(q,p,t,θ)`,
//! `T(q,p,t,θ)` plus an affine action `θ ↦ Mθ + b` on the parameter vector.
//! Composition, inversion and the invariance checks are all exact.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{AlgebraError, Bindings, CycloRat, LaurentPoly, Var, VarTable};
use crate::hamiltonian::HamSystem;
use crate::integrate::SINGULARITY_FLOOR;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("family order n must be at least 2, got {0}")]
    InvalidOrder(u32),
    #[error("branch must be an odd power of zeta (a root of x^4 = -1), got zeta^{0}")]
    InvalidBranch(i64),
    #[error("map cannot be resolved for (q, p, t): {0}")]
    NotResolvable(&'static str),
    #[error("dT/dt is not a nonzero constant")]
    TimeScaleNotConstant,
    #[error("parameter map has dimension {got}, table has {expected} parameters")]
    ParamDimension { expected: usize, got: usize },
    #[error("p-rule must be of degree at most 1 in p")]
    NotAShear,
    #[error("|q| = {0:e} is inside the singularity floor")]
    Singular(f64),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Result<T> = std::result::Result<T, SymmetryError>;

/// Choice of the fourth root of −1: ω = ζʲ with j odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Branch(u8);

impl Branch {
    /// ω = ζ = exp(iπ/4).
    pub const PRINCIPAL: Branch = Branch(1);
    /// ω = ζ⁷, the complex conjugate of the principal root.
    pub const CONJUGATE: Branch = Branch(7);

    pub fn from_zeta_power(j: i64) -> Result<Self> {
        let r = j.rem_euclid(8);
        if r % 2 == 1 {
            Ok(Branch(r as u8))
        } else {
            Err(SymmetryError::InvalidBranch(j))
        }
    }

    /// The k-th branch, ω = ζ^(2k+1).
    pub fn from_index(k: i64) -> Self {
        Branch((2 * k + 1).rem_euclid(8) as u8)
    }

    pub fn zeta_power(self) -> i64 {
        self.0 as i64
    }

    pub fn root(self) -> CycloRat {
        CycloRat::zeta_pow(self.0 as i64)
    }

    pub fn all() -> [Branch; 4] {
        [Branch(1), Branch(3), Branch(5), Branch(7)]
    }
}

impl Default for Branch {
    fn default() -> Self {
        Branch::PRINCIPAL
    }
}

/// Time rule of the non-autonomous map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TimeRule {
    /// `T = ω·t`. Preserves the system.
    #[default]
    Root,
    /// `T = −ω³·t`. Still of order 8, but the chain-rule defects do not vanish.
    NegCube,
}

/// `θ ↦ Mθ + b` over Q(ζ₈).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineParamMap {
    matrix: Vec<Vec<CycloRat>>,
    offset: Vec<CycloRat>,
}

impl AffineParamMap {
    pub fn new(matrix: Vec<Vec<CycloRat>>, offset: Vec<CycloRat>) -> Result<Self> {
        let k = offset.len();
        if matrix.len() != k || matrix.iter().any(|row| row.len() != k) {
            return Err(SymmetryError::ParamDimension {
                expected: k,
                got: matrix.len(),
            });
        }
        Ok(AffineParamMap { matrix, offset })
    }

    pub fn identity(k: usize) -> Self {
        AffineParamMap::scaled_identity(k, CycloRat::one())
    }

    /// θ ↦ −θ.
    pub fn negation(k: usize) -> Self {
        AffineParamMap::scaled_identity(k, -CycloRat::one())
    }

    fn scaled_identity(k: usize, s: CycloRat) -> Self {
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { s.clone() } else { CycloRat::zero() })
                    .collect()
            })
            .collect();
        AffineParamMap {
            matrix,
            offset: vec![CycloRat::zero(); k],
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<CycloRat>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[CycloRat] {
        &self.offset
    }

    pub fn is_identity(&self) -> bool {
        *self == AffineParamMap::identity(self.dim())
    }

    /// `self ∘ inner`: θ ↦ M(M'θ + b') + b.
    pub fn after(&self, inner: &AffineParamMap) -> AffineParamMap {
        let k = self.dim();
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let mut acc = CycloRat::zero();
                        for l in 0..k {
                            acc += &self.matrix[i][l] * &inner.matrix[l][j];
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let offset = (0..k)
            .map(|i| {
                let mut acc = self.offset[i].clone();
                for l in 0..k {
                    acc += &self.matrix[i][l] * &inner.offset[l];
                }
                acc
            })
            .collect();
        AffineParamMap { matrix, offset }
    }

    /// Gauss–Jordan inverse; `None` when M is singular.
    pub fn inverse(&self) -> Option<AffineParamMap> {
        let k = self.dim();
        let mut a: Vec<Vec<CycloRat>> = self.matrix.clone();
        let mut inv = AffineParamMap::identity(k).matrix;
        for col in 0..k {
            let pivot = (col..k).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let s = a[col][col].inv()?;
            for j in 0..k {
                a[col][j] = &a[col][j] * &s;
                inv[col][j] = &inv[col][j] * &s;
            }
            for r in 0..k {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..k {
                    a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                    inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
                }
            }
        }
        let offset = (0..k)
            .map(|i| {
                let mut acc = CycloRat::zero();
                for (m, b) in inv[i].iter().zip(&self.offset) {
                    acc += m * b;
                }
                -acc
            })
            .collect();
        Some(AffineParamMap { matrix: inv, offset })
    }

    /// Bindings `θᵢ ↦ Σⱼ Mᵢⱼθⱼ + bᵢ` over `table`.
    pub fn bindings(&self, table: &VarTable) -> Result<Bindings> {
        if table.param_count() != self.dim() {
            return Err(SymmetryError::ParamDimension {
                expected: table.param_count(),
                got: self.dim(),
            });
        }
        let mut out = Bindings::new();
        for i in 0..self.dim() {
            let mut rule = LaurentPoly::constant(table, self.offset[i].clone());
            for j in 0..self.dim() {
                let theta = LaurentPoly::var(table, table.param_at(j));
                rule = rule.add(&theta.scale(&self.matrix[i][j]))?;
            }
            out.insert(table.param_at(i), rule);
        }
        Ok(out)
    }

    pub fn apply_numeric(&self, theta: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|i| {
                let mut acc = self.offset[i].to_complex();
                for (j, x) in theta.iter().enumerate() {
                    acc += self.matrix[i][j].to_complex() * x;
                }
                acc
            })
            .collect()
    }
}

/// Outcome of an invariance check; zero components certify invariance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvarianceResidual {
    /// Pushed-forward Hamiltonian minus the Hamiltonian at mapped parameters.
    Hamiltonian(LaurentPoly),
    /// `dQ/dT − ∂H̃/∂P` and `dP/dT + ∂H̃/∂Q`.
    ChainRule { q: LaurentPoly, p: LaurentPoly },
}

impl InvarianceResidual {
    pub fn is_zero(&self) -> bool {
        match self {
            InvarianceResidual::Hamiltonian(r) => r.is_zero(),
            InvarianceResidual::ChainRule { q, p } => q.is_zero() && p.is_zero(),
        }
    }
}

impl fmt::Display for InvarianceResidual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvarianceResidual::Hamiltonian(r) => write!(f, "{r}"),
            InvarianceResidual::ChainRule { q, p } => write!(f, "dQ/dT defect: {q}; dP/dT defect: {p}"),
        }
    }
}

/// Numerical image of a point under a map.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedPoint {
    pub q: Complex64,
    pub p: Complex64,
    pub t: Complex64,
    pub params: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BirationalMap {
    name: String,
    q_rule: LaurentPoly,
    p_rule: LaurentPoly,
    t_rule: LaurentPoly,
    params: AffineParamMap,
}

fn q_pow(table: &VarTable, k: i32) -> LaurentPoly {
    LaurentPoly::term(table, CycloRat::one(), &[(Var::Q, k)]).expect("small power of q")
}

impl BirationalMap {
    pub fn new(
        name: impl Into<String>,
        q_rule: LaurentPoly,
        p_rule: LaurentPoly,
        t_rule: LaurentPoly,
        params: AffineParamMap,
    ) -> Result<Self> {
        let table = q_rule.table().clone();
        if p_rule.table() != &table || t_rule.table() != &table {
            return Err(AlgebraError::TableMismatch.into());
        }
        if table.param_count() != params.dim() {
            return Err(SymmetryError::ParamDimension {
                expected: table.param_count(),
                got: params.dim(),
            });
        }
        if p_rule.exponent_range(Var::P).is_some_and(|(_, hi)| hi > 1) {
            return Err(SymmetryError::NotAShear);
        }
        Ok(BirationalMap {
            name: name.into(),
            q_rule,
            p_rule,
            t_rule,
            params,
        })
    }

    pub fn identity(table: &VarTable) -> Self {
        BirationalMap {
            name: "id".into(),
            q_rule: LaurentPoly::var(table, Var::Q),
            p_rule: LaurentPoly::var(table, Var::P),
            t_rule: LaurentPoly::var(table, Var::T),
            params: AffineParamMap::identity(table.param_count()),
        }
    }

    /// `(q, p; α, η) ↦ (q, p + α/q + η₁/q² + … + ηₙ₋₁/qⁿ; −α, −η)` over the
    /// order-n family.
    pub fn autonomous_map(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(SymmetryError::InvalidOrder(n));
        }
        let table = crate::hamiltonian::Family::GeneralN(n)
            .table()
            .map_err(|_| SymmetryError::InvalidOrder(n))?;
        let mut shift = LaurentPoly::var(&table, Var::P);
        let alpha = table.var("alpha").expect("alpha");
        shift = shift.add(&LaurentPoly::var(&table, alpha).mul(&q_pow(&table, -1))?)?;
        for i in 1..n {
            let eta = table.var(&format!("eta{i}")).expect("eta");
            shift = shift.add(&LaurentPoly::var(&table, eta).mul(&q_pow(&table, -(i as i32) - 1))?)?;
        }
        BirationalMap::new(
            format!("s-auto:{n}"),
            LaurentPoly::var(&table, Var::Q),
            shift,
            LaurentPoly::var(&table, Var::T),
            AffineParamMap::negation(table.param_count()),
        )
    }

    /// `(q, p; η₁, η₂, α) ↦ (q, p + α/q + η₁/q² + η₂/q⁵; −η₁, −η₂, −α)`.
    pub fn autonomous5_map() -> Self {
        let table = crate::hamiltonian::Family::Autonomous5.table().expect("fixed table");
        let v = |name: &str| LaurentPoly::var(&table, table.var(name).unwrap());
        let p_rule = [("alpha", -1), ("eta1", -2), ("eta2", -5)]
            .iter()
            .try_fold(LaurentPoly::var(&table, Var::P), |acc, &(name, k)| {
                acc.add(&v(name).mul(&q_pow(&table, k))?)
            })
            .expect("small polynomial");
        BirationalMap::new(
            "s-auto5",
            LaurentPoly::var(&table, Var::Q),
            p_rule,
            LaurentPoly::var(&table, Var::T),
            AffineParamMap::negation(3),
        )
        .expect("well-formed map")
    }

    /// `(q, p, t; α₁, α₂, α₃) ↦ (−ωq, −ω⁻¹(p + α₁/q + t/q² + 1/q⁵), ωt;
    /// −α₁, 1−α₂, α₃−α₁)` with ω the chosen fourth root of −1.
    pub fn nonautonomous_map(branch: Branch) -> Self {
        BirationalMap::nonautonomous_map_with(branch, TimeRule::Root)
    }

    pub fn nonautonomous_map_with(branch: Branch, time_rule: TimeRule) -> Self {
        let table = crate::hamiltonian::Family::NonAutonomous3.table().expect("fixed table");
        let omega = branch.root();
        let omega_inv = omega.inv().expect("root of unity");
        let q = LaurentPoly::var(&table, Var::Q);
        let t = LaurentPoly::var(&table, Var::T);
        let a1 = LaurentPoly::var(&table, table.var("alpha1").unwrap());
        let build = || -> std::result::Result<LaurentPoly, AlgebraError> {
            LaurentPoly::var(&table, Var::P)
                .add(&a1.mul(&q_pow(&table, -1))?)?
                .add(&t.mul(&q_pow(&table, -2))?)?
                .add(&q_pow(&table, -5))
        };
        let p_rule = build().expect("small polynomial").scale(&-omega_inv);
        let t_scale = match time_rule {
            TimeRule::Root => omega.clone(),
            TimeRule::NegCube => -omega.pow(3).unwrap(),
        };
        let c = |n: i64| CycloRat::from_integer(n);
        let params = AffineParamMap::new(
            vec![
                vec![c(-1), c(0), c(0)],
                vec![c(0), c(-1), c(0)],
                vec![c(-1), c(0), c(1)],
            ],
            vec![c(0), c(1), c(0)],
        )
        .expect("3x3");
        let suffix = match time_rule {
            TimeRule::Root => "",
            TimeRule::NegCube => "-negcube",
        };
        BirationalMap::new(
            format!("s-nonauto{suffix}[z^{}]", branch.zeta_power()),
            q.scale(&-omega),
            p_rule,
            t.scale(&t_scale),
            params,
        )
        .expect("well-formed map")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn table(&self) -> &VarTable {
        self.q_rule.table()
    }

    pub fn q_rule(&self) -> &LaurentPoly {
        &self.q_rule
    }

    pub fn p_rule(&self) -> &LaurentPoly {
        &self.p_rule
    }

    pub fn t_rule(&self) -> &LaurentPoly {
        &self.t_rule
    }

    pub fn param_map(&self) -> &AffineParamMap {
        &self.params
    }

    fn forward_bindings(&self) -> Result<Bindings> {
        let mut b = self.params.bindings(self.table())?;
        b.insert(Var::Q, self.q_rule.clone());
        b.insert(Var::P, self.p_rule.clone());
        b.insert(Var::T, self.t_rule.clone());
        Ok(b)
    }

    /// `f ∘ self`: every variable of `f` replaced by its image.
    pub fn pullback(&self, f: &LaurentPoly) -> Result<LaurentPoly> {
        Ok(f.substitute(&self.forward_bindings()?)?)
    }

    /// `self ∘ inner` (apply `inner` first).
    pub fn compose(&self, inner: &BirationalMap) -> Result<BirationalMap> {
        if self.table() != inner.table() {
            return Err(AlgebraError::TableMismatch.into());
        }
        BirationalMap::new(
            format!("{}∘{}", self.name, inner.name),
            inner.pullback(&self.q_rule)?,
            inner.pullback(&self.p_rule)?,
            inner.pullback(&self.t_rule)?,
            self.params.after(&inner.params),
        )
    }

    /// k-fold composition; `power(0)` is the identity.
    pub fn power(&self, k: u32) -> Result<BirationalMap> {
        let mut acc = BirationalMap::identity(self.table());
        for _ in 0..k {
            acc = self.compose(&acc)?;
        }
        Ok(acc.with_name(format!("{}^{k}", self.name)))
    }

    /// Identity on `(q, p, t)` and on the parameters.
    pub fn is_identity(&self) -> bool {
        let id = BirationalMap::identity(self.table());
        self.q_rule == id.q_rule
            && self.p_rule == id.p_rule
            && self.t_rule == id.t_rule
            && self.params.is_identity()
    }

    /// Smallest k in 1..=max with selfᵏ = id.
    pub fn order(&self, max: u32) -> Result<Option<u32>> {
        let mut acc = BirationalMap::identity(self.table());
        for k in 1..=max {
            acc = self.compose(&acc)?;
            if acc.is_identity() {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// `dT/dt`, required to be a nonzero constant with `T` free of `q`, `p`.
    pub fn time_scale(&self) -> Result<CycloRat> {
        if self.t_rule.depends_on(Var::Q) || self.t_rule.depends_on(Var::P) {
            return Err(SymmetryError::TimeScaleNotConstant);
        }
        match self.t_rule.diff(Var::T).constant_value() {
            Some(d) if !d.is_zero() => Ok(d),
            _ => Err(SymmetryError::TimeScaleNotConstant),
        }
    }

    /// Solves the rules for the old coordinates: bindings `q, p, t ↦` rules
    /// in the new coordinates (stored in the same slots), with parameters left
    /// untouched.
    pub fn resolve_coordinates(&self) -> Result<Bindings> {
        let table = self.table().clone();
        let (c, m) = self
            .q_rule
            .as_unit()
            .ok_or(SymmetryError::NotResolvable("q-rule is not a monomial"))?;
        let is_q = table
            .vars()
            .all(|v| m.exponent(v) == if v == Var::Q { 1 } else { 0 });
        if !is_q {
            return Err(SymmetryError::NotResolvable("q-rule is not a multiple of q"));
        }
        let c_inv = c.inv().ok_or(SymmetryError::NotResolvable("q-rule vanishes"))?;
        let q_inv = LaurentPoly::var(&table, Var::Q).scale(&c_inv);

        let d = self.time_scale()?;
        let t_offset = self.t_rule.sub(&LaurentPoly::var(&table, Var::T).scale(&d))?;
        let d_inv = d.inv().expect("nonzero");
        let t_inv = LaurentPoly::var(&table, Var::T).sub(&t_offset)?.scale(&d_inv);

        let a = self.p_rule.coefficient_of(Var::P, 1);
        let b = self.p_rule.coefficient_of(Var::P, 0);
        let a_only_q = a.as_unit().is_some_and(|(_, m)| {
            table.vars().all(|v| v == Var::Q || m.exponent(v) == 0)
        });
        if !a_only_q {
            return Err(SymmetryError::NotResolvable("p-coefficient is not a monomial in q"));
        }
        let mut qt = Bindings::new();
        qt.insert(Var::Q, q_inv.clone());
        qt.insert(Var::T, t_inv.clone());
        let a_inv = a.unit_inverse()?.substitute(&qt)?;
        let b_sub = b.substitute(&qt)?;
        let p_inv = LaurentPoly::var(&table, Var::P).sub(&b_sub)?.mul(&a_inv)?;

        let mut out = Bindings::new();
        out.insert(Var::Q, q_inv);
        out.insert(Var::P, p_inv);
        out.insert(Var::T, t_inv);
        Ok(out)
    }

    /// The inverse map, with the parameter action inverted as well.
    pub fn inverse(&self) -> Result<BirationalMap> {
        let coords = self.resolve_coordinates()?;
        let pinv = self
            .params
            .inverse()
            .ok_or(SymmetryError::NotResolvable("parameter matrix is singular"))?;
        let theta = pinv.bindings(self.table())?;
        let rule = |v: Var| -> Result<LaurentPoly> { Ok(coords[&v].substitute(&theta)?) };
        BirationalMap::new(
            format!("{}^-1", self.name),
            rule(Var::Q)?,
            rule(Var::P)?,
            rule(Var::T)?,
            pinv,
        )
    }

    /// `∂Q/∂q·∂P/∂p − ∂Q/∂p·∂P/∂q`.
    pub fn jacobian_determinant(&self) -> Result<LaurentPoly> {
        let a = self.q_rule.diff(Var::Q).mul(&self.p_rule.diff(Var::P))?;
        let b = self.q_rule.diff(Var::P).mul(&self.p_rule.diff(Var::Q))?;
        Ok(a.sub(&b)?)
    }

    /// H rewritten in the new coordinates: the resolved rules substituted
    /// into H, parameters unchanged.
    pub fn pushforward_h(&self, sys: &HamSystem) -> Result<LaurentPoly> {
        self.check_system(sys)?;
        Ok(sys.hamiltonian().substitute(&self.resolve_coordinates()?)?)
    }

    fn check_system(&self, sys: &HamSystem) -> Result<()> {
        if sys.table() != self.table() {
            Err(AlgebraError::TableMismatch.into())
        } else {
            Ok(())
        }
    }

    /// H evaluated at the mapped parameters, `H(q, p, t; Mθ + b)`.
    pub fn hamiltonian_at_mapped_params(&self, sys: &HamSystem) -> Result<LaurentPoly> {
        Ok(sys.hamiltonian().substitute(&self.params.bindings(self.table())?)?)
    }

    /// `dQ/dT − ∂H̃/∂P` and `dP/dT + ∂H̃/∂Q`, where the time derivatives
    /// follow the flow of `sys` through the chain rule and H̃ is H with
    /// mapped parameters, evaluated at the image point.
    pub fn chain_rule_defects(&self, sys: &HamSystem) -> Result<(LaurentPoly, LaurentPoly)> {
        self.check_system(sys)?;
        let d_inv = self.time_scale()?.inv().expect("nonzero");
        let (fq, fp) = sys.hamilton_equations();
        let along_flow = |rule: &LaurentPoly| -> Result<LaurentPoly> {
            let v = rule
                .diff(Var::Q)
                .mul(&fq)?
                .add(&rule.diff(Var::P).mul(&fp)?)?
                .add(&rule.diff(Var::T))?;
            Ok(v.scale(&d_inv))
        };
        let h = sys.hamiltonian();
        let hp = self.pullback(&h.diff(Var::P))?;
        let hq = self.pullback(&h.diff(Var::Q))?;
        let dq = along_flow(&self.q_rule)?.sub(&hp)?;
        let dp = along_flow(&self.p_rule)?.add(&hq)?;
        Ok((dq, dp))
    }

    /// Exact invariance residual.
    ///
    /// For an autonomous system and a time-preserving map this is
    /// `pushforward_h − H(θ ↦ Mθ + b)`; otherwise the chain-rule defects.
    pub fn verify_invariance(&self, sys: &HamSystem) -> Result<InvarianceResidual> {
        let keeps_time = self.t_rule == LaurentPoly::var(self.table(), Var::T);
        if sys.is_autonomous() && keeps_time {
            let r = self.pushforward_h(sys)?.sub(&self.hamiltonian_at_mapped_params(sys)?)?;
            Ok(InvarianceResidual::Hamiltonian(r))
        } else {
            let (q, p) = self.chain_rule_defects(sys)?;
            Ok(InvarianceResidual::ChainRule { q, p })
        }
    }

    /// Image of a numerical point. `params` are in table order.
    pub fn apply_numeric(&self, q: Complex64, p: Complex64, t: Complex64, params: &[Complex64]) -> Result<MappedPoint> {
        if q.norm() <= SINGULARITY_FLOOR {
            return Err(SymmetryError::Singular(q.norm()));
        }
        let table = self.table();
        if params.len() != table.param_count() {
            return Err(SymmetryError::ParamDimension {
                expected: table.param_count(),
                got: params.len(),
            });
        }
        let mut point = BTreeMap::new();
        point.insert(Var::Q, q);
        point.insert(Var::P, p);
        point.insert(Var::T, t);
        for (i, x) in params.iter().enumerate() {
            point.insert(table.param_at(i), *x);
        }
        Ok(MappedPoint {
            q: self.q_rule.eval_numeric(&point)?,
            p: self.p_rule.eval_numeric(&point)?,
            t: self.t_rule.eval_numeric(&point)?,
            params: self.params.apply_numeric(params),
        })
    }
}

impl fmt::Display for BirationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}:", self.name)?;
        writeln!(f, "  q -> {}", self.q_rule)?;
        writeln!(f, "  p -> {}", self.p_rule)?;
        writeln!(f, "  t -> {}", self.t_rule)?;
        let table = self.table();
        let bindings = self.params.bindings(table).map_err(|_| fmt::Error)?;
        for (v, rule) in bindings {
            writeln!(f, "  {} -> {}", table.name(v), rule)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(t: &VarTable, c: CycloRat, powers: &[(&str, i32)]) -> LaurentPoly {
        let powers: Vec<_> = powers.iter().map(|(n, e)| (t.var(n).unwrap(), *e)).collect();
        LaurentPoly::term(t, c, &powers).unwrap()
    }

    #[test]
    fn autonomous5_map_rules() {
        let s = BirationalMap::autonomous5_map();
        let t = s.table().clone();
        let one = CycloRat::one();
        let expected = [
            term(&t, one.clone(), &[("p", 1)]),
            term(&t, one.clone(), &[("alpha", 1), ("q", -1)]),
            term(&t, one.clone(), &[("eta1", 1), ("q", -2)]),
            term(&t, one.clone(), &[("eta2", 1), ("q", -5)]),
        ]
        .iter()
        .fold(LaurentPoly::zero(&t), |a, b| a.add(b).unwrap());
        assert_eq!(s.p_rule(), &expected);
        assert_eq!(s.q_rule(), &LaurentPoly::var(&t, Var::Q));
        assert_eq!(s.param_map(), &AffineParamMap::negation(3));
    }

    #[test]
    fn nonautonomous_map_rules() {
        let s = BirationalMap::nonautonomous_map(Branch::PRINCIPAL);
        let t = s.table().clone();
        assert_eq!(s.q_rule(), &term(&t, -CycloRat::zeta(), &[("q", 1)]));
        assert_eq!(s.t_rule(), &term(&t, CycloRat::zeta(), &[("t", 1)]));
        let printed = BirationalMap::nonautonomous_map_with(Branch::PRINCIPAL, TimeRule::NegCube);
        assert_eq!(printed.t_rule(), &term(&t, -CycloRat::zeta_pow(3), &[("t", 1)]));
        // affine action squared is the identity
        let pm = s.param_map();
        assert!(pm.after(pm).is_identity());
    }

    #[test]
    fn branches() {
        assert_eq!(Branch::from_index(3), Branch::CONJUGATE);
        assert!(Branch::from_zeta_power(2).is_err());
        assert_eq!(Branch::from_zeta_power(-1).unwrap(), Branch::CONJUGATE);
        for b in Branch::all() {
            assert_eq!(b.root().pow(4).unwrap(), -CycloRat::one());
        }
    }

    #[test]
    fn affine_inverse() {
        let s = BirationalMap::nonautonomous_map(Branch::PRINCIPAL);
        let pm = s.param_map();
        let inv = pm.inverse().unwrap();
        assert!(inv.after(pm).is_identity());
        assert!(pm.after(&inv).is_identity());
        let singular = AffineParamMap::new(vec![vec![CycloRat::zero()]], vec![CycloRat::one()]).unwrap();
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn jacobians_are_one() {
        for n in 2..=8 {
            let j = BirationalMap::autonomous_map(n).unwrap().jacobian_determinant().unwrap();
            assert_eq!(j.constant_value(), Some(CycloRat::one()));
        }
        for b in Branch::all() {
            let j = BirationalMap::nonautonomous_map(b).jacobian_determinant().unwrap();
            assert_eq!(j.constant_value(), Some(CycloRat::one()));
        }
        let id = BirationalMap::identity(BirationalMap::autonomous5_map().table());
        assert_eq!(id.jacobian_determinant().unwrap().constant_value(), Some(CycloRat::one()));
    }

    #[test]
    fn autonomous_pushforward_matches_closed_form() {
        for n in 2..=8u32 {
            let sys = HamSystem::general_n(n).unwrap();
            let s = BirationalMap::autonomous_map(n).unwrap();
            let t = sys.table().clone();
            // (QⁿP − αQⁿ⁻¹ − η₁Qⁿ⁻² − … − ηₙ₋₁)P
            let mut inner = term(&t, CycloRat::one(), &[("q", n as i32), ("p", 1)]);
            inner = inner.sub(&term(&t, CycloRat::one(), &[("alpha", 1), ("q", n as i32 - 1)])).unwrap();
            for i in 1..n {
                inner = inner
                    .sub(&term(&t, CycloRat::one(), &[(&format!("eta{i}"), 1), ("q", (n - 1 - i) as i32)]))
                    .unwrap();
            }
            let expected = inner.mul(&LaurentPoly::var(&t, Var::P)).unwrap();
            assert_eq!(s.pushforward_h(&sys).unwrap(), expected, "n = {n}");
            assert!(s.verify_invariance(&sys).unwrap().is_zero());
        }
    }

    #[test]
    fn pushforward_n2_by_hand() {
        // H = (q²p + αq + η₁)p, p = P − α/Q − η₁/Q²:
        // q²p + αq + η₁ = Q²P, so S(H) = Q²P(P − α/Q − η₁/Q²) = Q²P² − αQP − η₁P.
        let sys = HamSystem::general_n(2).unwrap();
        let t = sys.table().clone();
        let one = CycloRat::one();
        let m1 = -CycloRat::one();
        let expected = term(&t, one, &[("q", 2), ("p", 2)])
            .add(&term(&t, m1.clone(), &[("alpha", 1), ("q", 1), ("p", 1)]))
            .unwrap()
            .add(&term(&t, m1, &[("eta1", 1), ("p", 1)]))
            .unwrap();
        let s = BirationalMap::autonomous_map(2).unwrap();
        assert_eq!(s.pushforward_h(&sys).unwrap(), expected);
        let negated = s.hamiltonian_at_mapped_params(&sys).unwrap();
        assert_eq!(negated, expected);
    }

    #[test]
    fn nonautonomous_invariance_all_branches() {
        let sys = HamSystem::nonautonomous3();
        for b in Branch::all() {
            let r = BirationalMap::nonautonomous_map(b).verify_invariance(&sys).unwrap();
            assert!(r.is_zero(), "branch {b:?}: {r}");
        }
    }

    #[test]
    fn negcube_time_rule_breaks_invariance() {
        let sys = HamSystem::nonautonomous3();
        for b in [Branch::PRINCIPAL, Branch::CONJUGATE] {
            let s = BirationalMap::nonautonomous_map_with(b, TimeRule::NegCube);
            assert!(!s.verify_invariance(&sys).unwrap().is_zero());
            assert_eq!(s.order(8).unwrap(), Some(8));
        }
    }

    #[test]
    fn autonomous_chain_rule_defects_vanish_too() {
        let sys = HamSystem::autonomous5();
        let (dq, dp) = BirationalMap::autonomous5_map().chain_rule_defects(&sys).unwrap();
        assert!(dq.is_zero() && dp.is_zero());
    }

    #[test]
    fn group_orders() {
        for n in 2..=8 {
            assert_eq!(BirationalMap::autonomous_map(n).unwrap().order(16).unwrap(), Some(2));
        }
        assert_eq!(BirationalMap::autonomous5_map().order(16).unwrap(), Some(2));
        for b in Branch::all() {
            let s = BirationalMap::nonautonomous_map(b);
            assert_eq!(s.order(16).unwrap(), Some(8));
            let s4 = s.power(4).unwrap();
            let t = s.table().clone();
            assert_eq!(s4.q_rule(), &LaurentPoly::var(&t, Var::Q).scale(&-CycloRat::one()));
            assert!(!s4.is_identity());
        }
    }

    #[test]
    fn inverse_round_trip() {
        let s = BirationalMap::nonautonomous_map(Branch::PRINCIPAL);
        let inv = s.inverse().unwrap();
        assert!(s.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&s).unwrap().is_identity());
        let a = BirationalMap::autonomous_map(4).unwrap();
        assert!(a.compose(&a.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn mutated_map_is_detected() {
        let sys = HamSystem::autonomous5();
        let s = BirationalMap::autonomous5_map();
        let t = s.table().clone();
        let dropped = s
            .p_rule()
            .sub(&term(&t, CycloRat::one(), &[("eta2", 1), ("q", -5)]))
            .unwrap();
        let m = BirationalMap::new("mut", s.q_rule().clone(), dropped, s.t_rule().clone(), s.param_map().clone()).unwrap();
        assert!(!m.verify_invariance(&sys).unwrap().is_zero());
    }

    #[test]
    fn numeric_application() {
        let s = BirationalMap::autonomous5_map();
        let one = Complex64::new(1.0, 0.0);
        let img = s.apply_numeric(one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), &[one, one, one]).unwrap();
        assert_eq!(img.p, Complex64::new(3.0, 0.0));
        assert_eq!(img.params, vec![-one, -one, -one]);
        assert!(matches!(
            s.apply_numeric(Complex64::new(0.0, 0.0), one, one, &[one, one, one]),
            Err(SymmetryError::Singular(_))
        ));
    }

    #[test]
    fn invalid_order() {
        assert_eq!(BirationalMap::autonomous_map(1).unwrap_err(), SymmetryError::InvalidOrder(1));
    }
}
