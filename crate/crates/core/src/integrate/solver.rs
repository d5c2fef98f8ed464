use std::fmt;

use num_complex::Complex64;

use super::{CompiledField, IntegrateError, MIN_STEP, OVERFLOW_LIMIT, SINGULARITY_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub q: Complex64,
    pub p: Complex64,
}

impl State {
    pub fn new(q: Complex64, p: Complex64) -> Self {
        State { q, p }
    }

    fn axpy(self, h: f64, k: (Complex64, Complex64)) -> State {
        State {
            q: self.q + k.0 * h,
            p: self.p + k.1 * h,
        }
    }

    fn is_blown_up(self) -> bool {
        let parts = [self.q.re, self.q.im, self.p.re, self.p.im];
        parts.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_LIMIT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    FixedRk4 { h: f64 },
    AdaptiveRk45 { rtol: f64, atol: f64 },
}

impl Method {
    pub fn adaptive_default() -> Self {
        Method::AdaptiveRk45 { rtol: 1e-9, atol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// A stage point came within the singularity floor.
    Singularity { t: f64, q: Complex64 },
    /// The adaptive controller needed a step below the minimum.
    StepUnderflow { t: f64 },
    /// The state became non-finite or exceeded the overflow limit.
    Overflow { t: f64 },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Singularity { .. } => "singularity",
            Termination::StepUnderflow { .. } => "step-underflow",
            Termination::Overflow { .. } => "overflow",
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::Singularity { t, q } => write!(f, "singularity at t = {t} (q = {q})"),
            Termination::StepUnderflow { t } => write!(f, "step-underflow at t = {t}"),
            Termination::Overflow { t } => write!(f, "overflow at t = {t}"),
        }
    }
}

/// Samples at every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub q: Vec<Complex64>,
    pub p: Vec<Complex64>,
    pub h_values: Vec<Complex64>,
    /// `∂H/∂t` at every sample.
    pub dhdt_values: Vec<Complex64>,
    /// Per-sample drift: `|H(t) − H(t₀)|` for autonomous fields, otherwise
    /// `|H(t) − H(t₀) − ∫ ∂H/∂t|` with the integral by the corrected
    /// trapezoid rule `h/2·(g₀ + g₁) + h²/12·(ġ₀ − ġ₁)`.
    pub drift_series: Vec<f64>,
    pub drift: f64,
    pub termination: Termination,
    pub autonomous: bool,
    integral: Complex64,
    last_rate: Complex64,
}

impl Trajectory {
    fn start(field: &CompiledField, t0: f64, s: State) -> Self {
        let mut tr = Trajectory {
            times: Vec::new(),
            q: Vec::new(),
            p: Vec::new(),
            h_values: Vec::new(),
            dhdt_values: Vec::new(),
            drift_series: Vec::new(),
            drift: 0.0,
            termination: Termination::Completed,
            autonomous: field.is_autonomous(),
            integral: Complex64::new(0.0, 0.0),
            last_rate: Complex64::new(0.0, 0.0),
        };
        tr.push(field, t0, s);
        tr
    }

    fn push(&mut self, field: &CompiledField, t: f64, s: State) {
        let tc = Complex64::new(t, 0.0);
        let h = field.hamiltonian(s.q, s.p, tc);
        let dh = field.dh_dt(s.q, s.p, tc);
        let rate = if self.autonomous {
            Complex64::new(0.0, 0.0)
        } else {
            field.dh_dt_rate(s.q, s.p, tc)
        };
        let d = match (self.times.last(), self.dhdt_values.last()) {
            (Some(&t_prev), Some(&dh_prev)) => {
                let step = t - t_prev;
                self.integral += (dh_prev + dh) * (0.5 * step) + (self.last_rate - rate) * (step * step / 12.0);
                let base = h - self.h_values[0];
                if self.autonomous {
                    base.norm()
                } else {
                    (base - self.integral).norm()
                }
            }
            _ => 0.0,
        };
        self.times.push(t);
        self.q.push(s.q);
        self.p.push(s.p);
        self.h_values.push(h);
        self.dhdt_values.push(dh);
        self.drift_series.push(d);
        self.drift = self.drift.max(d);
        self.last_rate = rate;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> State {
        State::new(*self.q.last().unwrap(), *self.p.last().unwrap())
    }
}

fn eval_checked(field: &CompiledField, t: f64, s: State) -> Result<(Complex64, Complex64), IntegrateError> {
    if s.q.norm() <= SINGULARITY_FLOOR {
        return Err(IntegrateError::Singularity { t, q: s.q });
    }
    Ok(field.eval(s.q, s.p, Complex64::new(t, 0.0)))
}

/// One classical RK4 step.
pub fn step_rk4(field: &CompiledField, s: State, t: f64, h: f64) -> Result<State, IntegrateError> {
    let k1 = eval_checked(field, t, s)?;
    let k2 = eval_checked(field, t + 0.5 * h, s.axpy(0.5 * h, k1))?;
    let k3 = eval_checked(field, t + 0.5 * h, s.axpy(0.5 * h, k2))?;
    let k4 = eval_checked(field, t + h, s.axpy(h, k3))?;
    let w = h / 6.0;
    Ok(State {
        q: s.q + (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * w,
        p: s.p + (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * w,
    })
}

/// Integrates from `t0` to `t1 ≥ t0`.
pub fn integrate(
    field: &CompiledField,
    q0: Complex64,
    p0: Complex64,
    t0: f64,
    t1: f64,
    method: Method,
) -> Result<Trajectory, IntegrateError> {
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(IntegrateError::InvalidSpan(t0, t1));
    }
    if q0.norm() <= SINGULARITY_FLOOR {
        return Err(IntegrateError::SingularInitialCondition(q0.norm()));
    }
    let s0 = State::new(q0, p0);
    if s0.is_blown_up() {
        return Err(IntegrateError::InvalidSpan(t0, t1));
    }
    match method {
        Method::FixedRk4 { h } => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(IntegrateError::InvalidStep(h));
            }
            Ok(fixed(field, s0, t0, t1, h))
        }
        Method::AdaptiveRk45 { rtol, atol } => {
            for x in [rtol, atol] {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(IntegrateError::InvalidStep(x));
                }
            }
            Ok(adaptive(field, s0, t0, t1, rtol, atol))
        }
    }
}

fn fixed(field: &CompiledField, s0: State, t0: f64, t1: f64, h: f64) -> Trajectory {
    let mut tr = Trajectory::start(field, t0, s0);
    let span = t1 - t0;
    let mut n = (span / h).round() as u64;
    if (n as f64) * h < span * (1.0 - 1e-12) {
        n += 1;
    }
    let mut s = s0;
    let mut t = t0;
    for k in 1..=n {
        let t_next = if k == n { t1 } else { t0 + k as f64 * h };
        match step_rk4(field, s, t, t_next - t) {
            Ok(next) if next.is_blown_up() => {
                tr.termination = Termination::Overflow { t: t_next };
                return tr;
            }
            Ok(next) => s = next,
            Err(IntegrateError::Singularity { t, q }) => {
                tr.termination = Termination::Singularity { t, q };
                return tr;
            }
            Err(_) => unreachable!("step_rk4 only signals singularities"),
        }
        t = t_next;
        tr.push(field, t, s);
    }
    tr
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;

/// One embedded step: the 5th-order solution and the scaled error norm.
fn dopri_step(
    field: &CompiledField,
    s: State,
    t: f64,
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<(State, f64), IntegrateError> {
    let mut k = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    for i in 0..7 {
        let mut y = s;
        for j in 0..i {
            y = y.axpy(h * A[i][j], k[j]);
        }
        k[i] = eval_checked(field, t + C[i] * h, y)?;
    }
    let mut y5 = s;
    let mut err = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..7 {
        y5 = y5.axpy(h * B5[i], k[i]);
        err.0 += k[i].0 * (h * (B5[i] - B4[i]));
        err.1 += k[i].1 * (h * (B5[i] - B4[i]));
    }
    let comps = [
        (err.0.re, s.q.re, y5.q.re),
        (err.0.im, s.q.im, y5.q.im),
        (err.1.re, s.p.re, y5.p.re),
        (err.1.im, s.p.im, y5.p.im),
    ];
    let sum: f64 = comps
        .iter()
        .map(|(e, a, b)| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    Ok((y5, (sum / 4.0).sqrt()))
}

fn adaptive(field: &CompiledField, s0: State, t0: f64, t1: f64, rtol: f64, atol: f64) -> Trajectory {
    let mut tr = Trajectory::start(field, t0, s0);
    let span = t1 - t0;
    if span == 0.0 {
        return tr;
    }
    let h_max = span / 10.0;
    let mut h = (span * 1e-3).clamp(MIN_STEP, h_max);
    let mut s = s0;
    let mut t = t0;
    let mut err_prev = 1.0_f64;
    let mut last_singular = None;
    while t < t1 {
        let step = h.min(t1 - t);
        match dopri_step(field, s, t, step, rtol, atol) {
            Ok((y, err)) if err <= 1.0 && !y.is_blown_up() => {
                t = if step == t1 - t { t1 } else { t + step };
                s = y;
                tr.push(field, t, s);
                let err = err.max(1e-10);
                let factor = SAFETY * err.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
                h = (step * factor.clamp(0.2, 5.0)).min(h_max);
                err_prev = err;
                last_singular = None;
                continue;
            }
            Ok((y, err)) => {
                let shrink = if y.is_blown_up() || !err.is_finite() {
                    0.2
                } else {
                    (SAFETY * err.powf(-PI_ALPHA)).clamp(0.2, 1.0)
                };
                h = step * shrink;
            }
            Err(IntegrateError::Singularity { t, q }) => {
                last_singular = Some(Termination::Singularity { t, q });
                h = step * 0.25;
            }
            Err(_) => unreachable!("stage evaluation only signals singularities"),
        }
        if h < MIN_STEP {
            tr.termination = match last_singular {
                Some(term) => term,
                None if s.q.norm() > 1e6 || s.p.norm() > 1e6 => Termination::Overflow { t },
                None => Termination::StepUnderflow { t },
            };
            return tr;
        }
    }
    tr
}
