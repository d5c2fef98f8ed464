//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use hamfam_core::hamiltonian::reference_ode;
use hamfam_core::integrate::{
    check_dhdt, check_symmetry_on_trajectory, drift_order, integrate, sweep, CompiledField, Method,
    NumericParams,
};
use hamfam_core::verify::{default_map, expected_nonautonomous_dhdt, expected_pushforward, verify_family, Mutation};
use hamfam_core::{BirationalMap, Branch, CycloRat, Family, HamSystem};
use num_complex::Complex64;

const EQUIVALENCE_BUDGET_S: f64 = 10.0;
const DRIFT_BOUND: f64 = 1e-8;
const ORDER_RANGE: (f64, f64) = (3.7, 4.3);
const CONSERVATION_BUDGET_S: f64 = 1.0;
const DHDT_REL_BOUND: f64 = 1e-6;
const SYMMETRY_BOUND: f64 = 1e-5;
const STEP: f64 = 1e-3;
const SWEEP: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn all_families() -> Vec<Family> {
    let mut v = vec![Family::Autonomous5, Family::NonAutonomous3];
    v.extend((2..=8).map(Family::GeneralN));
    v
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for fam in all_families() {
        let sys = HamSystem::from_family(fam).unwrap();
        let r = sys.verify_equivalence(&reference_ode(fam).unwrap()).unwrap();
        if !r.is_zero() {
            bad.push(format!("{fam}: {r}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < EQUIVALENCE_BUDGET_S,
        format!("{} families, {} nonzero residuals, {secs:.2} s {}", all_families().len(), bad.len(), bad.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let mut bad = Vec::new();
    for fam in all_families() {
        let d = HamSystem::from_family(fam).unwrap().time_derivative_of_h().unwrap();
        let r = if fam.is_autonomous() {
            d
        } else {
            d.sub(&expected_nonautonomous_dhdt().unwrap()).unwrap()
        };
        if !r.is_zero() {
            bad.push(format!("{fam}: {r}"));
        }
    }
    outcome(bad.is_empty(), format!("dH/dt exact for {} families {}", all_families().len(), bad.join("; ")))
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    for n in 2..=8 {
        let sys = HamSystem::general_n(n).unwrap();
        let s = BirationalMap::autonomous_map(n).unwrap();
        if s.pushforward_h(&sys).unwrap() != expected_pushforward(n).unwrap() {
            bad.push(format!("pushforward n={n}"));
        }
    }
    let pairs = [
        (HamSystem::autonomous5(), BirationalMap::autonomous5_map()),
        (HamSystem::nonautonomous3(), BirationalMap::nonautonomous_map(Branch::PRINCIPAL)),
        (HamSystem::nonautonomous3(), BirationalMap::nonautonomous_map(Branch::CONJUGATE)),
    ];
    let general = (2..=8).map(|n| (HamSystem::general_n(n).unwrap(), BirationalMap::autonomous_map(n).unwrap()));
    for (sys, map) in pairs.into_iter().chain(general) {
        let inv = map.verify_invariance(&sys).unwrap();
        if !inv.is_zero() {
            bad.push(format!("invariance {}: {inv}", map.name()));
        }
        let jac = map.jacobian_determinant().unwrap();
        if jac.constant_value() != Some(CycloRat::one()) {
            bad.push(format!("jacobian {}: {jac}", map.name()));
        }
    }
    outcome(bad.is_empty(), format!("7 pushforwards, 10 maps {}", bad.join("; ")))
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    let mut autos = vec![BirationalMap::autonomous5_map()];
    autos.extend((2..=8).map(|n| BirationalMap::autonomous_map(n).unwrap()));
    for s in &autos {
        if s.is_identity() || !s.power(2).unwrap().is_identity() {
            bad.push(format!("{} order", s.name()));
        }
    }
    for b in [Branch::PRINCIPAL, Branch::CONJUGATE] {
        let s = BirationalMap::nonautonomous_map(b);
        if !s.power(8).unwrap().is_identity() {
            bad.push(format!("{}^8", s.name()));
        }
        for k in [1, 2, 4] {
            if s.power(k).unwrap().is_identity() {
                bad.push(format!("{}^{k} is identity", s.name()));
            }
        }
    }
    outcome(bad.is_empty(), format!("8 autonomous maps of order 2, branches z and z^7 of order 8 {}", bad.join("; ")))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let field = CompiledField::new(&HamSystem::autonomous5(), &NumericParams::ones(Family::Autonomous5)).unwrap();
    let (q0, p0) = (c(1.0, 0.0), c(0.0, 0.0));
    let run = integrate(&field, q0, p0, 0.0, 1.0, Method::FixedRk4 { h: STEP }).unwrap();
    let points = sweep(&field, q0, p0, 0.0, 1.0, &SWEEP).unwrap();
    let drifts: Vec<f64> = points.iter().map(|p| p.drift).collect();
    let order = drift_order(&SWEEP, &drifts);
    let secs = start.elapsed().as_secs_f64();
    let reached_end = run.termination.is_completed();
    let order_ok = order.is_some_and(|o| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&o));
    let passed = reached_end && run.drift <= DRIFT_BOUND && order_ok && secs < CONSERVATION_BUDGET_S;
    outcome(
        passed,
        format!(
            "drift {:.3e} over [0, {:.5}] ({}), sweep drifts {:?}, order {}, {secs:.3} s",
            run.drift,
            run.times.last().unwrap(),
            run.termination,
            drifts,
            order.map_or("undefined".to_string(), |o| format!("{o:.3}")),
        ),
    )
}

fn criterion_6() -> Outcome {
    let sys = HamSystem::nonautonomous3();
    let field = CompiledField::new(&sys, &NumericParams::ones(Family::NonAutonomous3)).unwrap();
    let tr = integrate(&field, c(0.0, 0.5), c(0.5, 0.0), 0.0, 1.0, Method::FixedRk4 { h: STEP }).unwrap();
    let chk = check_dhdt(&tr).unwrap();
    outcome(
        tr.termination.is_completed() && chk.checked > 0 && chk.max_rel_error <= DHDT_REL_BOUND,
        format!(
            "max relative error {:.3e} over {} samples ({} skipped), min |dH/dt| {:.3}",
            chk.max_rel_error, chk.checked, chk.skipped, chk.min_abs_dhdt
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    for fam in [Family::Autonomous5, Family::NonAutonomous3] {
        let sys = HamSystem::from_family(fam).unwrap();
        let params = NumericParams::ones(fam);
        let field = CompiledField::new(&sys, &params).unwrap();
        let tr = integrate(&field, c(0.0, 0.5), c(0.5, 0.0), 0.0, 1.0, Method::FixedRk4 { h: STEP }).unwrap();
        let map = default_map(fam, Branch::PRINCIPAL).unwrap();
        let chk = check_symmetry_on_trajectory(&tr, &map, &sys, &params).unwrap();
        passed &= tr.termination.is_completed() && chk.max_residual <= SYMMETRY_BOUND;
        parts.push(format!("{fam}: {:.3e}", chk.max_residual));
    }
    outcome(passed, parts.join(", "))
}

fn mutations_for(fam: Family) -> Vec<Mutation> {
    let sys = HamSystem::from_family(fam).unwrap();
    let ode = reference_ode(fam).unwrap();
    let map = default_map(fam, Branch::PRINCIPAL).unwrap();
    let mut out = Vec::new();
    out.extend((0..ode.numerator().len()).map(Mutation::OdeTerm));
    out.extend((0..sys.hamiltonian().len()).map(Mutation::HamiltonianTerm));
    out.extend((0..map.q_rule().len()).map(Mutation::MapQTerm));
    out.extend((0..map.p_rule().len()).map(Mutation::MapPTerm));
    out.extend((0..map.t_rule().len()).map(Mutation::MapTTerm));
    let pm = map.param_map();
    for (r, row) in pm.matrix().iter().enumerate() {
        for (col, x) in row.iter().enumerate() {
            if !x.is_zero() {
                out.push(Mutation::MapParam(r, col));
            }
        }
    }
    for (i, x) in pm.offset().iter().enumerate() {
        if !x.is_zero() {
            out.push(Mutation::MapOffset(i));
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let mut total = 0;
    let mut missed = Vec::new();
    for fam in [Family::Autonomous5, Family::NonAutonomous3, Family::GeneralN(4)] {
        for m in mutations_for(fam) {
            total += 1;
            let report = verify_family(fam, Branch::PRINCIPAL, Some(m)).unwrap();
            let detected = report
                .failures()
                .any(|f| f.residual.as_deref().is_some_and(|r| !r.is_empty() && r != "0"));
            let equivalence_failed = report.failures().any(|f| f.name.starts_with("equivalence"));
            let ok = match m {
                Mutation::OdeTerm(_) => equivalence_failed,
                _ => detected,
            };
            if !ok {
                missed.push(format!("{fam} {m}"));
            }
        }
    }
    outcome(missed.is_empty(), format!("{total} single sign flips, {} undetected {}", missed.len(), missed.join("; ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exact equivalence certificates", criterion_1),
        ("first-integral certificates", criterion_2),
        ("symmetry certificates", criterion_3),
        ("group orders", criterion_4),
        ("numerical conservation", criterion_5),
        ("numerical non-conservation", criterion_6),
        ("trajectory-level symmetry", criterion_7),
        ("mutation controls", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        println!("criterion {} {name}: {verdict} ({})", i + 1, o.detail.trim_end());
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
