use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use hamfam_core::integrate::{
    check_symmetry_on_trajectory, drift_order, integrate, sweep, write_csv, CompiledField, Method, NumericParams,
    Trajectory,
};
use hamfam_core::verify::{default_map, verify_family, verify_general_range, Report};
use hamfam_core::{BirationalMap, Family, HamSystem};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{format_complex, FamilySel, Format, MethodKind, Settings};
use crate::error::CliError;

pub const ORDER_RANGE: (f64, f64) = (3.7, 4.3);
pub const SYMMETRY_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// `{"schema": 1, "payload": ..., "metadata": {...}}`. Only `metadata`
/// varies between identical runs.
pub fn envelope(payload: Value) -> Value {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "schema": 1,
        "payload": payload,
        "metadata": {
            "tool": "hamfam",
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": ts,
        }
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn single_family(s: &Settings) -> Result<Family, CliError> {
    match &s.family {
        FamilySel::One(f) => Ok(*f),
        FamilySel::GeneralRange(r) if r.start() == r.end() => Ok(Family::GeneralN(*r.start())),
        FamilySel::GeneralRange(r) => Err(CliError::Usage(format!(
            "this command needs a single n, got {}..{}",
            r.start(),
            r.end()
        ))),
    }
}

/// Unlisted parameters default to 1.
pub fn numeric_params(family: Family, pairs: &[(String, Complex64)]) -> Result<NumericParams, CliError> {
    let names = family.param_names();
    let mut values = vec![Complex64::new(1.0, 0.0); names.len()];
    for (k, v) in pairs {
        let i = names
            .iter()
            .position(|n| n == k)
            .ok_or_else(|| CliError::Usage(format!("family {family} has no parameter `{k}` (has {})", names.join(", "))))?;
        values[i] = *v;
    }
    Ok(NumericParams::new(family, values)?)
}

fn params_json(p: &NumericParams) -> Value {
    let names = p.family().param_names();
    Value::Object(
        names
            .into_iter()
            .zip(p.values())
            .map(|(n, v)| (n, Value::String(format_complex(*v))))
            .collect(),
    )
}

pub fn verify(s: &Settings) -> Result<Status, CliError> {
    let report: Report = match &s.family {
        FamilySel::One(f) => verify_family(*f, s.branch, s.mutation)?,
        FamilySel::GeneralRange(r) => verify_general_range(r.clone(), s.mutation)?,
    };
    let family = match &s.family {
        FamilySel::One(f) => f.to_string(),
        FamilySel::GeneralRange(r) => format!("general:{}..{}", r.start(), r.end()),
    };
    let payload = json!({
        "command": "verify",
        "family": family,
        "branch": format!("z^{}", s.branch.zeta_power()),
        "mutation": s.mutation.map(|m| m.to_string()),
        "all_passed": report.all_passed(),
        "checks": report.checks,
    });
    let doc = serde_json::to_string_pretty(&envelope(payload)).expect("json");
    if let Some(out) = &s.out {
        write_file(out, &(doc.clone() + "\n"))?;
    }
    match s.format {
        Format::Text => println!("{report}"),
        Format::Json => println!("{doc}"),
    }
    Ok(Status::from_bool(report.all_passed()))
}

fn method_of(s: &Settings) -> Method {
    match s.method {
        MethodKind::Rk4 => Method::FixedRk4 { h: s.h },
        MethodKind::Rk45 => Method::AdaptiveRk45 {
            rtol: s.tol,
            atol: s.tol,
        },
    }
}

fn write_trajectory(tr: &Trajectory, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            write_csv(tr, BufWriter::new(f))?;
        }
        None => write_csv(tr, io::stdout().lock())?,
    }
    Ok(())
}

pub fn integrate_cmd(s: &Settings) -> Result<Status, CliError> {
    let family = single_family(s)?;
    let sys = HamSystem::from_family(family)?;
    let params = numeric_params(family, &s.params)?;
    let field = CompiledField::new(&sys, &params)?;
    let method = method_of(s);
    let tr = integrate(&field, s.q0, s.p0, s.t0, s.t1, method)?;
    write_trajectory(&tr, s.out.as_deref())?;

    let mut ok = tr.termination.is_completed();
    let mut sweep_json = Value::Null;
    let mut order_json = Value::Null;
    if !s.sweep.is_empty() {
        let points = sweep(&field, s.q0, s.p0, s.t0, s.t1, &s.sweep)?;
        let drifts: Vec<f64> = points.iter().map(|p| p.drift).collect();
        let order = drift_order(&s.sweep, &drifts);
        if family.is_autonomous() {
            ok &= order.is_some_and(|o| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&o));
        }
        ok &= points.iter().all(|p| p.termination.is_completed());
        sweep_json = points
            .iter()
            .map(|p| json!({"h": p.h, "drift": p.drift, "termination": p.termination.name(), "final_time": p.final_time}))
            .collect();
        order_json = json!(order);
    }
    let (method_name, step) = match method {
        Method::FixedRk4 { h } => ("rk4", json!({ "h": h })),
        Method::AdaptiveRk45 { rtol, atol } => ("rk45", json!({ "rtol": rtol, "atol": atol })),
    };
    let payload = json!({
        "command": "integrate",
        "family": family.to_string(),
        "params": params_json(&params),
        "method": method_name,
        "step": step,
        "t_span": [s.t0, s.t1],
        "q0": format_complex(s.q0),
        "p0": format_complex(s.p0),
        "samples": tr.len(),
        "final_time": tr.times.last(),
        "drift": tr.drift,
        "drift_kind": if tr.autonomous { "max |H(t) - H(t0)|" } else { "max |H(t) - H(t0) - int dH/dt|" },
        "termination": tr.termination.name(),
        "termination_detail": tr.termination.to_string(),
        "sweep": sweep_json,
        "measured_order": order_json,
        "passed": ok,
    });
    let doc = serde_json::to_string_pretty(&envelope(payload)).expect("json");
    if s.out.is_some() {
        println!("{doc}");
    } else {
        eprintln!("{doc}");
    }
    Ok(Status::from_bool(ok))
}

fn select_map(s: &Settings, family: Family) -> Result<BirationalMap, CliError> {
    let mismatch = |name: &str| CliError::Usage(format!("map `{name}` does not act on family {family}"));
    let sys_table = family.table()?;
    let map = match s.map.as_deref() {
        None if family == Family::NonAutonomous3 => BirationalMap::nonautonomous_map_with(s.branch, s.time_rule),
        None => default_map(family, s.branch)?,
        Some("id") => BirationalMap::identity(&sys_table),
        Some("s-auto") => match family {
            Family::NonAutonomous3 => return Err(mismatch("s-auto")),
            f => default_map(f, s.branch)?,
        },
        Some("s-auto5") => BirationalMap::autonomous5_map(),
        Some("s-nonauto") => BirationalMap::nonautonomous_map_with(s.branch, s.time_rule),
        Some(other) => match other.strip_prefix("s-auto:").and_then(|n| n.parse::<u32>().ok()) {
            Some(n) => BirationalMap::autonomous_map(n)?,
            None => {
                return Err(CliError::Usage(format!(
                    "unknown map `{other}` (expected s-auto, s-auto:<n>, s-auto5, s-nonauto or id)"
                )))
            }
        },
    };
    if map.table() != &sys_table {
        return Err(mismatch(s.map.as_deref().unwrap_or_default()));
    }
    Ok(map)
}

pub struct SymmetryArgs {
    pub power: u32,
    pub check_trajectory: bool,
}

pub fn symmetry(s: &Settings, extra: &SymmetryArgs) -> Result<Status, CliError> {
    let family = single_family(s)?;
    let sys = HamSystem::from_family(family)?;
    let params = numeric_params(family, &s.params)?;
    let map = select_map(s, family)?;

    let (mut q, mut p, mut t) = (s.q0, s.p0, Complex64::new(s.t0, 0.0));
    let mut theta = params.values().to_vec();
    for _ in 0..extra.power {
        let img = map.apply_numeric(q, p, t, &theta)?;
        (q, p, t, theta) = (img.q, img.p, img.t, img.params);
    }
    let names = family.param_names();
    let mapped_params: serde_json::Map<String, Value> = names
        .iter()
        .zip(&theta)
        .map(|(n, v)| (n.clone(), Value::String(format_complex(*v))))
        .collect();

    let mut status = Status::Pass;
    let mut check_json = Value::Null;
    if extra.check_trajectory {
        if s.method != MethodKind::Rk4 {
            return Err(CliError::Usage("--check-trajectory needs --method rk4".into()));
        }
        let field = CompiledField::new(&sys, &params)?;
        let tr = integrate(&field, s.q0, s.p0, s.t0, s.t1, Method::FixedRk4 { h: s.h })?;
        let chk = check_symmetry_on_trajectory(&tr, &map, &sys, &params)?;
        let passed = tr.termination.is_completed() && chk.max_residual <= SYMMETRY_TOLERANCE;
        status = Status::from_bool(passed);
        check_json = json!({
            "samples": tr.len(),
            "checked": chk.checked,
            "termination": tr.termination.name(),
            "max_residual": chk.max_residual,
            "tolerance": SYMMETRY_TOLERANCE,
            "passed": passed,
        });
    }

    match s.format {
        Format::Text => {
            let mut out = io::stdout().lock();
            let _ = writeln!(out, "map {} applied {} time(s)", map.name(), extra.power);
            let _ = writeln!(out, "Q = {}", format_complex(q));
            let _ = writeln!(out, "P = {}", format_complex(p));
            let _ = writeln!(out, "T = {}", format_complex(t));
            for (n, v) in names.iter().zip(&theta) {
                let _ = writeln!(out, "{n} = {}", format_complex(*v));
            }
            if let Value::Object(c) = &check_json {
                let verdict = if status == Status::Pass { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    out,
                    "trajectory symmetry residual {:.3e} (tolerance {SYMMETRY_TOLERANCE:e}): {verdict}",
                    c["max_residual"].as_f64().unwrap_or(f64::NAN)
                );
            }
        }
        Format::Json => {
            let payload = json!({
                "command": "symmetry",
                "family": family.to_string(),
                "map": map.name(),
                "power": extra.power,
                "input": {"q": format_complex(s.q0), "p": format_complex(s.p0), "t": s.t0, "params": params_json(&params)},
                "image": {"q": format_complex(q), "p": format_complex(p), "t": format_complex(t), "params": mapped_params},
                "trajectory_check": check_json,
            });
            println!("{}", serde_json::to_string_pretty(&envelope(payload)).expect("json"));
        }
    }
    Ok(status)
}
