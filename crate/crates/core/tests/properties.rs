//! Randomized algebraic properties. Set `HAMFAM_SEED` to pin the RNG.

use std::collections::BTreeMap;

use hamfam_core::integrate::{CompiledField, NumericParams};
use hamfam_core::{BirationalMap, Branch, CycloRat, Family, HamSystem, LaurentPoly, Var, VarTable};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32) -> ProptestConfig {
    let mut cfg = ProptestConfig::with_cases(cases);
    if let Some(seed) = std::env::var("HAMFAM_SEED").ok().and_then(|s| s.parse().ok()) {
        cfg.rng_seed = RngSeed::Fixed(seed);
    }
    cfg
}

fn table() -> VarTable {
    Family::NonAutonomous3.table().unwrap()
}

fn coeff() -> impl Strategy<Value = CycloRat> {
    prop::array::uniform4(-3i64..=3).prop_map(CycloRat::from_coords)
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    let term = (coeff(), -3i32..=3, 0i32..=2, 0i32..=1, 0i32..=1);
    prop::collection::vec(term, 0..5).prop_map(|terms| {
        let t = table();
        let a1 = t.var("alpha1").unwrap();
        terms.into_iter().fold(LaurentPoly::zero(&t), |acc, (c, eq, ep, et, ea)| {
            let m = LaurentPoly::term(&t, c, &[(Var::Q, eq), (Var::P, ep), (Var::T, et), (a1, ea)]).unwrap();
            acc.add(&m).unwrap()
        })
    })
}

fn complex(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

fn point() -> impl Strategy<Value = BTreeMap<Var, Complex64>> {
    (complex(0.5, 2.0), prop::array::uniform5(complex(0.1, 1.0))).prop_map(|(q, rest)| {
        let t = table();
        let mut pt = BTreeMap::new();
        pt.insert(Var::Q, q);
        pt.insert(Var::P, rest[0]);
        pt.insert(Var::T, rest[1]);
        for (v, x) in t.params().zip(&rest[2..]) {
            pt.insert(v, *x);
        }
        pt
    })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn leibniz_rule(a in poly(), b in poly(), v in 0usize..3) {
        let v = [Var::Q, Var::P, Var::T][v];
        let lhs = a.mul(&b).unwrap().diff(v);
        let rhs = a.diff(v).mul(&b).unwrap().add(&a.mul(&b.diff(v)).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_is_multiplicative(a in poly(), b in poly(), pt in point()) {
        let ab = a.mul(&b).unwrap().eval_numeric(&pt).unwrap();
        let prod = a.eval_numeric(&pt).unwrap() * b.eval_numeric(&pt).unwrap();
        let scale = a.eval_numeric(&pt).unwrap().norm().max(1.0) * b.eval_numeric(&pt).unwrap().norm().max(1.0);
        prop_assert!((ab - prod).norm() <= 1e-12 * scale.max(ab.norm()) * 10.0, "{} vs {}", ab, prod);
    }

    #[test]
    fn horner_matches_naive_sum(a in poly(), pt in point()) {
        let naive: Complex64 = a
            .terms()
            .map(|(m, c)| {
                table().vars().fold(c.to_complex(), |acc, v| match pt.get(&v) {
                    Some(x) => acc * x.powi(m.exponent(v)),
                    None => acc,
                })
            })
            .sum();
        let h = a.eval_numeric(&pt).unwrap();
        prop_assert!((h - naive).norm() <= 1e-12 * naive.norm().max(1.0) * 10.0);
    }

    #[test]
    fn map_then_inverse_is_identity(a in poly(), k in 0i64..4) {
        let s = BirationalMap::nonautonomous_map(Branch::from_index(k));
        let inv = s.inverse().unwrap();
        prop_assert_eq!(inv.pullback(&s.pullback(&a).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(s.pullback(&inv.pullback(&a).unwrap()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn compiled_field_matches_symbolic(pt in point()) {
        let sys = HamSystem::nonautonomous3();
        let t = sys.table().clone();
        let values: Vec<Complex64> = t.params().map(|v| pt[&v]).collect();
        let params = NumericParams::new(Family::NonAutonomous3, values).unwrap();
        let field = CompiledField::new(&sys, &params).unwrap();
        let (fq, fp) = sys.hamilton_equations();
        let (q, p, tt) = (pt[&Var::Q], pt[&Var::P], pt[&Var::T]);
        let (cq, cp) = field.eval(q, p, tt);
        for (compiled, exact) in [(cq, fq.eval_numeric(&pt).unwrap()), (cp, fp.eval_numeric(&pt).unwrap())] {
            prop_assert!((compiled - exact).norm() <= 1e-12 * exact.norm().max(1e-300) + 1e-300,
                "{} vs {}", compiled, exact);
        }
    }
}

#[test]
fn autonomous_map_round_trip_on_hamiltonian() {
    for n in 2..=8 {
        let s = BirationalMap::autonomous_map(n).unwrap();
        let inv = s.inverse().unwrap();
        let h = HamSystem::general_n(n).unwrap().hamiltonian().clone();
        assert_eq!(inv.pullback(&s.pullback(&h).unwrap()).unwrap(), h);
    }
}
