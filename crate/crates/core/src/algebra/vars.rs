use std::fmt;
use std::sync::Arc;

use super::AlgebraError;

/// Default bound on the total degree Σ|eᵢ| of any monomial.
pub const DEFAULT_DEGREE_CAP: u32 = 64;

/// Index of a variable in a [`VarTable`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(usize);

impl Var {
    /// Position. The only variable allowed negative exponents.
    pub const Q: Var = Var(0);
    /// Momentum.
    pub const P: Var = Var(1);
    /// Time.
    pub const T: Var = Var(2);
    /// Velocity dq/dt, used once momentum has been eliminated.
    pub const QDOT: Var = Var(3);

    pub fn index(self) -> usize {
        self.0
    }
}

const FIXED: [&str; 4] = ["q", "p", "t", "qdot"];

/// The ordered list of symbols a family of polynomials lives over.
///
/// Slots 0..4 are always `q, p, t, qdot`; parameters follow in the order
/// given at construction. Tables are cheap to clone and compare.
#[derive(Clone)]
pub struct VarTable {
    inner: Arc<TableInner>,
}

#[derive(PartialEq, Eq)]
struct TableInner {
    names: Vec<String>,
    degree_cap: u32,
}

impl VarTable {
    pub fn new<S: AsRef<str>>(params: &[S]) -> Result<Self, AlgebraError> {
        let mut names: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
        for p in params {
            let p = p.as_ref();
            if p.is_empty() || names.iter().any(|n| n == p) {
                return Err(AlgebraError::BadVariableName(p.to_string()));
            }
            names.push(p.to_string());
        }
        Ok(VarTable {
            inner: Arc::new(TableInner {
                names,
                degree_cap: DEFAULT_DEGREE_CAP,
            }),
        })
    }

    pub fn with_degree_cap(&self, cap: u32) -> Self {
        VarTable {
            inner: Arc::new(TableInner {
                names: self.inner.names.clone(),
                degree_cap: cap,
            }),
        }
    }

    pub fn degree_cap(&self) -> u32 {
        self.inner.degree_cap
    }

    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.names.is_empty()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.inner.names[v.0]
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.inner.names.iter().position(|n| n == name).map(Var)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.len()).map(Var)
    }

    /// Parameter slots, in table order.
    pub fn params(&self) -> impl Iterator<Item = Var> {
        (FIXED.len()..self.len()).map(Var)
    }

    pub fn param_count(&self) -> usize {
        self.len() - FIXED.len()
    }

    /// Position of a parameter among the parameters (0-based).
    pub fn param_position(&self, v: Var) -> Option<usize> {
        v.0.checked_sub(FIXED.len()).filter(|&i| i < self.param_count())
    }

    pub fn param_at(&self, i: usize) -> Var {
        Var(FIXED.len() + i)
    }

    pub fn is_laurent(&self, v: Var) -> bool {
        v == Var::Q
    }
}

impl PartialEq for VarTable {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for VarTable {}

impl fmt::Debug for VarTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.inner.names).finish()
    }
}
