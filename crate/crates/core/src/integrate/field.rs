use std::collections::BTreeMap;

use num_complex::Complex64;

use super::IntegrateError;
use crate::algebra::{LaurentPoly, Var, VarTable};
use crate::hamiltonian::{Family, HamSystem};

/// Numeric values for every parameter of a family, in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericParams {
    family: Family,
    values: Vec<Complex64>,
}

impl NumericParams {
    pub fn new(family: Family, values: Vec<Complex64>) -> Result<Self, IntegrateError> {
        let expected = family.param_names().len();
        if values.len() != expected {
            return Err(IntegrateError::ParamCount {
                expected,
                got: values.len(),
            });
        }
        let out = NumericParams { family, values };
        for name in out.zero_etas() {
            log::warn!("{name} = 0 lies outside the family's parameter domain");
        }
        Ok(out)
    }

    /// Every parameter set to 1.
    pub fn ones(family: Family) -> Self {
        let n = family.param_names().len();
        NumericParams {
            family,
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Builds from `name = value` pairs; every parameter must be named once.
    pub fn from_pairs(family: Family, pairs: &[(String, Complex64)]) -> Result<Self, IntegrateError> {
        let names = family.param_names();
        let mut values = vec![None; names.len()];
        for (name, v) in pairs {
            let i = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| IntegrateError::UnknownParameter(name.clone()))?;
            values[i] = Some(*v);
        }
        let values = values
            .into_iter()
            .zip(&names)
            .map(|(v, n)| v.ok_or_else(|| IntegrateError::UnboundParameter(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        NumericParams::new(family, values)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        let i = self.family.param_names().iter().position(|n| n == name)?;
        Some(self.values[i])
    }

    /// Names of η parameters set to zero.
    pub fn zero_etas(&self) -> Vec<String> {
        self.family
            .param_names()
            .into_iter()
            .zip(&self.values)
            .filter(|(n, v)| n.starts_with("eta") && **v == Complex64::new(0.0, 0.0))
            .map(|(n, _)| n)
            .collect()
    }
}

/// A Laurent polynomial in `(q, p, t)` with complex coefficients, parameters
/// already bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPoly {
    terms: Vec<([i32; 3], Complex64)>,
    q_range: (i32, i32),
    p_max: i32,
    t_max: i32,
}

impl CompiledPoly {
    pub fn compile(poly: &LaurentPoly, params: &NumericParams) -> Result<Self, IntegrateError> {
        let table = poly.table();
        if poly.depends_on(Var::QDOT) {
            return Err(IntegrateError::UnboundParameter("qdot".into()));
        }
        let bound = param_point(table, params)?;
        let mut acc: BTreeMap<[i32; 3], Complex64> = BTreeMap::new();
        for (m, c) in poly.terms() {
            let mut coeff = c.to_complex();
            for v in table.params() {
                let e = m.exponent(v);
                if e != 0 {
                    coeff *= bound[&v].powi(e);
                }
            }
            let key = [m.exponent(Var::Q), m.exponent(Var::P), m.exponent(Var::T)];
            *acc.entry(key).or_default() += coeff;
        }
        let terms: Vec<_> = acc.into_iter().collect();
        let q_range = terms
            .iter()
            .fold((0, 0), |(lo, hi), (k, _)| (lo.min(k[0]), hi.max(k[0])));
        let p_max = terms.iter().map(|(k, _)| k[1]).max().unwrap_or(0);
        let t_max = terms.iter().map(|(k, _)| k[2]).max().unwrap_or(0);
        Ok(CompiledPoly {
            terms,
            q_range,
            p_max,
            t_max,
        })
    }

    pub fn eval(&self, q: Complex64, p: Complex64, t: Complex64) -> Complex64 {
        let (lo, hi) = self.q_range;
        let q_inv = if lo < 0 { q.inv() } else { Complex64::new(0.0, 0.0) };
        let q_pows = powers(q, hi);
        let q_neg = powers(q_inv, -lo);
        let p_pows = powers(p, self.p_max);
        let t_pows = powers(t, self.t_max);
        self.terms
            .iter()
            .map(|([eq, ep, et], c)| {
                let qk = if *eq >= 0 {
                    q_pows[*eq as usize]
                } else {
                    q_neg[(-eq) as usize]
                };
                c * qk * p_pows[*ep as usize] * t_pows[*et as usize]
            })
            .sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn powers(x: Complex64, max: i32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    out.push(acc);
    for _ in 0..max {
        acc *= x;
        out.push(acc);
    }
    out
}

fn param_point(table: &VarTable, params: &NumericParams) -> Result<BTreeMap<Var, Complex64>, IntegrateError> {
    let names = params.family().param_names();
    if table.param_count() != names.len() || table.params().zip(&names).any(|(v, n)| table.name(v) != n) {
        return Err(IntegrateError::ParamCount {
            expected: table.param_count(),
            got: params.values().len(),
        });
    }
    Ok(table.params().zip(params.values().iter().copied()).collect())
}

/// Hamilton's vector field `(∂H/∂p, −∂H/∂q)` together with `H` and `∂H/∂t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledField {
    h: CompiledPoly,
    fq: CompiledPoly,
    fp: CompiledPoly,
    dhdt: CompiledPoly,
    dhdt_rate: CompiledPoly,
    autonomous: bool,
}

impl CompiledField {
    pub fn new(sys: &HamSystem, params: &NumericParams) -> Result<Self, IntegrateError> {
        if sys.table().param_count() != params.values().len() {
            return Err(IntegrateError::ParamCount {
                expected: sys.table().param_count(),
                got: params.values().len(),
            });
        }
        let (fq, fp) = sys.hamilton_equations();
        let h = sys.hamiltonian();
        let g = h.diff(Var::T);
        let rate = g
            .diff(Var::Q)
            .mul(&fq)?
            .add(&g.diff(Var::P).mul(&fp)?)?
            .add(&g.diff(Var::T))?;
        Ok(CompiledField {
            h: CompiledPoly::compile(h, params)?,
            fq: CompiledPoly::compile(&fq, params)?,
            fp: CompiledPoly::compile(&fp, params)?,
            dhdt: CompiledPoly::compile(&g, params)?,
            dhdt_rate: CompiledPoly::compile(&rate, params)?,
            autonomous: !h.depends_on(Var::T),
        })
    }

    /// `(q̇, ṗ)` at a point; `t` may be complex.
    pub fn eval(&self, q: Complex64, p: Complex64, t: Complex64) -> (Complex64, Complex64) {
        (self.fq.eval(q, p, t), self.fp.eval(q, p, t))
    }

    pub fn hamiltonian(&self, q: Complex64, p: Complex64, t: Complex64) -> Complex64 {
        self.h.eval(q, p, t)
    }

    pub fn dh_dt(&self, q: Complex64, p: Complex64, t: Complex64) -> Complex64 {
        self.dhdt.eval(q, p, t)
    }

    /// Rate of change of `∂H/∂t` along the flow.
    pub fn dh_dt_rate(&self, q: Complex64, p: Complex64, t: Complex64) -> Complex64 {
        self.dhdt_rate.eval(q, p, t)
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }
}
