//! Post-processing of trajectories: finite differences, convergence orders
//! and numerical symmetry checks.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{integrate, CompiledField, IntegrateError, Method, NumericParams, Termination, Trajectory};
use crate::hamiltonian::HamSystem;
use crate::symmetry::BirationalMap;

/// Samples within this distance of q = 0 are skipped by the pointwise checks.
const NEAR_SINGULAR: f64 = 1e-3;

/// The grid spacing, or an error if the spacing varies by more than 1e-6
/// relative.
pub fn uniform_step(times: &[f64]) -> Result<f64, IntegrateError> {
    if times.len() < 2 {
        return Err(IntegrateError::TooFewSamples {
            need: 2,
            got: times.len(),
        });
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-6 * h);
    if uniform && h > 0.0 {
        Ok(h)
    } else {
        Err(IntegrateError::NonUniformGrid)
    }
}

/// Fourth-order central derivative `(−f₊₂ + 8f₊₁ − 8f₋₁ + f₋₂)/(12h)` at
/// samples `2..len−2`.
pub fn five_point_derivative(values: &[Complex64], h: f64) -> Vec<Complex64> {
    values
        .windows(5)
        .map(|w| (-w[4] + 8.0 * w[3] - 8.0 * w[1] + w[0]) / (12.0 * h))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhdtCheck {
    /// Max of `|FD dH/dt − ∂H/∂t| / |∂H/∂t|` over the checked samples.
    pub max_rel_error: f64,
    pub min_abs_dhdt: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// Compares a finite-difference `dH/dt` along the path with the compiled
/// `∂H/∂t`. Needs a uniform grid.
pub fn check_dhdt(traj: &Trajectory) -> Result<DhdtCheck, IntegrateError> {
    let need = 5;
    if traj.len() < need {
        return Err(IntegrateError::TooFewSamples { need, got: traj.len() });
    }
    let h = uniform_step(&traj.times)?;
    let fd = five_point_derivative(&traj.h_values, h);
    let mut out = DhdtCheck {
        max_rel_error: 0.0,
        min_abs_dhdt: f64::INFINITY,
        checked: 0,
        skipped: 0,
    };
    for (j, d) in fd.iter().enumerate() {
        let k = j + 2;
        let exact = traj.dhdt_values[k];
        if traj.q[k].norm() < NEAR_SINGULAR || exact.norm() == 0.0 {
            out.skipped += 1;
            continue;
        }
        out.max_rel_error = out.max_rel_error.max((d - exact).norm() / exact.norm());
        out.min_abs_dhdt = out.min_abs_dhdt.min(exact.norm());
        out.checked += 1;
    }
    Ok(out)
}

/// Least-squares slope of `ln drift` against `ln h`. `None` unless every
/// drift is positive and finite and there are at least two points.
pub fn drift_order(hs: &[f64], drifts: &[f64]) -> Option<f64> {
    if hs.len() != drifts.len() || hs.len() < 2 {
        return None;
    }
    if drifts.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = drifts.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Observed order from three solutions at steps h, h/2, h/4.
pub fn richardson_order(coarse: Complex64, mid: Complex64, fine: Complex64) -> Option<f64> {
    let a = (coarse - mid).norm();
    let b = (mid - fine).norm();
    (a > 0.0 && b > 0.0).then(|| (a / b).log2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub h: f64,
    pub drift: f64,
    pub termination: Termination,
    pub final_time: f64,
    pub final_q: Complex64,
    pub final_p: Complex64,
}

/// Fixed-step RK4 runs for every `h`, in parallel, results in input order.
pub fn sweep(
    field: &CompiledField,
    q0: Complex64,
    p0: Complex64,
    t0: f64,
    t1: f64,
    hs: &[f64],
) -> Result<Vec<SweepPoint>, IntegrateError> {
    hs.par_iter()
        .map(|&h| {
            let tr = integrate(field, q0, p0, t0, t1, Method::FixedRk4 { h })?;
            let last = tr.last_state();
            Ok(SweepPoint {
                h,
                drift: tr.drift,
                termination: tr.termination,
                final_time: *tr.times.last().unwrap(),
                final_q: last.q,
                final_p: last.p,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    /// Max over interior samples of the transformed-equation defect, scaled
    /// by `max(1, |field|)`.
    pub max_residual: f64,
    pub checked: usize,
}

fn fd_defect(
    qs: &[Complex64],
    ps: &[Complex64],
    ts: &[Complex64],
    dt: Complex64,
    field: &CompiledField,
) -> SymmetryCheck {
    let dq: Vec<_> = qs.windows(5).map(|w| (-w[4] + 8.0 * w[3] - 8.0 * w[1] + w[0]) / (12.0 * dt)).collect();
    let dp: Vec<_> = ps.windows(5).map(|w| (-w[4] + 8.0 * w[3] - 8.0 * w[1] + w[0]) / (12.0 * dt)).collect();
    let mut max_residual: f64 = 0.0;
    for j in 0..dq.len() {
        let k = j + 2;
        let (fq, fp) = field.eval(qs[k], ps[k], ts[k]);
        let scale = fq.norm().max(fp.norm()).max(1.0);
        let defect = (dq[j] - fq).norm().max((dp[j] - fp).norm());
        max_residual = max_residual.max(defect / scale);
    }
    SymmetryCheck {
        max_residual,
        checked: dq.len(),
    }
}

/// Defect of the trajectory itself against its own field, with the same
/// stencil used by [`check_symmetry_on_trajectory`].
pub fn trajectory_fd_defect(traj: &Trajectory, field: &CompiledField) -> Result<SymmetryCheck, IntegrateError> {
    if traj.len() < 5 {
        return Err(IntegrateError::TooFewSamples { need: 5, got: traj.len() });
    }
    let h = uniform_step(&traj.times)?;
    let ts: Vec<_> = traj.times.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    Ok(fd_defect(&traj.q, &traj.p, &ts, Complex64::new(h, 0.0), field))
}

/// Maps every sample, then checks the image path against Hamilton's
/// equations of the same Hamiltonian at the mapped parameters, with
/// `d/dT = (dT/dt)⁻¹ d/dt`.
pub fn check_symmetry_on_trajectory(
    traj: &Trajectory,
    map: &BirationalMap,
    sys: &HamSystem,
    params: &NumericParams,
) -> Result<SymmetryCheck, IntegrateError> {
    if traj.len() < 5 {
        return Err(IntegrateError::TooFewSamples { need: 5, got: traj.len() });
    }
    let h = uniform_step(&traj.times)?;
    let scale = map.time_scale()?.to_complex();
    let mut qs = Vec::with_capacity(traj.len());
    let mut ps = Vec::with_capacity(traj.len());
    let mut ts = Vec::with_capacity(traj.len());
    let mut mapped_params = None;
    for k in 0..traj.len() {
        let img = map.apply_numeric(traj.q[k], traj.p[k], Complex64::new(traj.times[k], 0.0), params.values())?;
        qs.push(img.q);
        ps.push(img.p);
        ts.push(img.t);
        mapped_params.get_or_insert(img.params);
    }
    let mapped = NumericParams::new(params.family(), mapped_params.unwrap())?;
    let field = CompiledField::new(sys, &mapped)?;
    Ok(fd_defect(&qs, &ps, &ts, scale * h, &field))
}
