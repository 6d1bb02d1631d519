//! Explicit time integration over flat state vectors: adaptive
//! Dormand–Prince 5(4) with event stopping, plus fixed-step RK4.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub safety: f64,
    pub max_steps: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            dt_initial: 1e-3,
            dt_min: 1e-12,
            dt_max: 0.1,
            safety: 0.9,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Tight tolerances for norm monitors, where decayed solutions sit far
    /// below the default absolute tolerance.
    pub fn monitor() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("integrator.rel_tol", self.rel_tol),
            ("integrator.abs_tol", self.abs_tol),
            ("integrator.dt_initial", self.dt_initial),
            ("integrator.dt_min", self.dt_min),
            ("integrator.dt_max", self.dt_max),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(WaveError::config(key, format!("{v} must be > 0")));
            }
        }
        if !(self.dt_min <= self.dt_initial && self.dt_initial <= self.dt_max) {
            return Err(WaveError::config(
                "integrator.dt_initial",
                "need dt_min <= dt_initial <= dt_max",
            ));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(WaveError::config("integrator.safety", "must lie in (0, 1)"));
        }
        if self.max_steps == 0 {
            return Err(WaveError::config("integrator.max_steps", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    ReachedTmax,
    Event(String),
    DtUnderflow,
    MaxSteps,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::ReachedTmax => write!(f, "reached_tmax"),
            StopReason::Event(name) => write!(f, "event({name})"),
            StopReason::DtUnderflow => write!(f, "dt_underflow"),
            StopReason::MaxSteps => write!(f, "max_steps"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// Outcome of an integration without stored snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub stop_reason: StopReason,
    pub t_final: f64,
    pub y_final: Vec<f64>,
    pub stats: StepStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stop_reason: StopReason,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times
            .last()
            .map(|&t| (t, self.states.last().map(Vec::as_slice).unwrap_or(&[])))
    }
}

type Predicate = dyn Fn(f64, &[f64]) -> bool + Send + Sync;

/// Named stopping predicate, checked after every accepted step.
pub struct Event {
    pub name: String,
    predicate: Box<Predicate>,
}

impl Event {
    pub fn new(name: impl Into<String>, predicate: impl Fn(f64, &[f64]) -> bool + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            predicate: Box::new(predicate),
        }
    }

    pub fn fired(&self, t: f64, y: &[f64]) -> bool {
        (self.predicate)(t, y)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Event").field("name", &self.name).finish()
    }
}

/// What the integrator reports to an observer.
#[derive(Debug, Clone, Copy)]
pub enum Progress<'a> {
    /// A sample-grid time (linearly interpolated), or the final state.
    Snapshot { t: f64, y: &'a [f64] },
    /// An accepted step.
    Step { t: f64, y: &'a [f64], dt: f64 },
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
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn all_finite(y: &[f64]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Stage derivatives of one Dormand–Prince step; `k[0]` must hold `f(t, y)`.
fn dopri_stages<F>(rhs: &mut F, y: &[f64], t: f64, dt: f64, k: &mut [Vec<f64>; 7], tmp: &mut [f64]) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    for s in 1..7 {
        for i in 0..y.len() {
            let mut acc = 0.0;
            for (j, a) in A[s].iter().enumerate().take(s) {
                acc += a * k[j][i];
            }
            tmp[i] = y[i] + dt * acc;
        }
        rhs(t + C[s] * dt, tmp, &mut k[s])?;
    }
    Ok(())
}

/// One fixed Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
pub fn step_dopri5<F>(mut rhs: F, y: &[f64], t: f64, dt: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    rhs(t, y, &mut k[0])?;
    dopri_stages(&mut rhs, y, t, dt, &mut k, &mut tmp)?;
    let mut y5 = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        let mut e = 0.0;
        for s in 0..7 {
            acc += B[s] * k[s][i];
            e += E[s] * k[s][i];
        }
        y5[i] = y[i] + dt * acc;
        err[i] = dt * e;
    }
    if !all_finite(&y5) {
        return Err(WaveError::Numeric("non-finite state after Dormand-Prince step".into()));
    }
    Ok((y5, err))
}

/// Classical fourth-order Runge–Kutta step.
pub fn step_rk4<F>(mut rhs: F, y: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(dt > 0.0) {
        return Err(WaveError::Usage(format!("step_rk4 needs dt > 0, got {dt}")));
    }
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    rhs(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    rhs(t + 0.5 * dt, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    rhs(t + 0.5 * dt, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + dt * k3[i];
    }
    rhs(t + dt, &tmp, &mut k4)?;
    let out: Vec<f64> = (0..n)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if !all_finite(&out) {
        return Err(WaveError::Numeric("non-finite state after RK4 step".into()));
    }
    Ok(out)
}

/// Errors a trial step may recover from by shrinking `dt`.
fn recoverable(e: &WaveError) -> bool {
    matches!(e, WaveError::Numeric(_) | WaveError::Geometry(_))
}

/// Adaptive integration that streams progress to `observer` instead of
/// storing snapshots.
#[allow(clippy::too_many_arguments)]
pub fn integrate_observed<F, O>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    events: &[Event],
    sample_every: f64,
    mut observer: O,
) -> Result<RunOutcome>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(Progress<'_>),
{
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(WaveError::Usage(format!("need t1 > t0 (got {t0} .. {t1})")));
    }
    if !(sample_every > 0.0 && sample_every.is_finite()) {
        return Err(WaveError::Usage(format!("sample_every must be > 0, got {sample_every}")));
    }
    if !all_finite(y0) {
        return Err(WaveError::Numeric("initial state is not finite".into()));
    }

    let n = y0.len();
    let mut stats = StepStats::default();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut t = t0;

    rhs(t, &y, &mut k[0])?;
    stats.rhs_evals += 1;
    if !all_finite(&k[0]) {
        return Err(WaveError::Numeric(format!("right-hand side is not finite at t = {t}")));
    }

    observer(Progress::Snapshot { t, y: &y });
    let mut next_sample: u64 = 1;
    let sample_time = |m: u64| t0 + m as f64 * sample_every;
    let mut last_emitted = t0;
    let eps_t = 1e-12 * (t1 - t0).abs().max(1.0);

    let mut dt = cfg.dt_initial.min(cfg.dt_max);
    let mut interp = vec![0.0; n];

    let stop_reason = loop {
        if t >= t1 - eps_t {
            break StopReason::ReachedTmax;
        }
        if stats.accepted >= cfg.max_steps {
            break StopReason::MaxSteps;
        }
        let last = t + dt >= t1 - eps_t;
        let h = if last { t1 - t } else { dt };

        let trial = dopri_stages(&mut rhs, &y, t, h, &mut k, &mut tmp);
        stats.rhs_evals += 6;
        let err_norm = match trial {
            Ok(()) => {
                let mut sum = 0.0;
                for i in 0..n {
                    let mut acc = 0.0;
                    let mut e = 0.0;
                    for s in 0..7 {
                        acc += B[s] * k[s][i];
                        e += E[s] * k[s][i];
                    }
                    y_new[i] = y[i] + h * acc;
                    let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                    let r = h * e / sc;
                    sum += r * r;
                }
                let norm = (sum / n.max(1) as f64).sqrt();
                if norm.is_finite() && all_finite(&y_new) {
                    norm
                } else {
                    f64::INFINITY
                }
            }
            Err(e) if recoverable(&e) => f64::INFINITY,
            Err(e) => return Err(e),
        };

        if err_norm <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            while next_sample_due(sample_time(next_sample), t_new, eps_t) {
                let ts = sample_time(next_sample);
                let w = (ts - t) / h;
                for i in 0..n {
                    interp[i] = y[i] + w * (y_new[i] - y[i]);
                }
                if ts > last_emitted + eps_t {
                    observer(Progress::Snapshot { t: ts, y: &interp });
                    last_emitted = ts;
                }
                next_sample += 1;
            }
            std::mem::swap(&mut y, &mut y_new);
            t = t_new;
            // FSAL: the last stage is f(t_new, y_new)
            let (first, rest) = k.split_at_mut(1);
            std::mem::swap(&mut first[0], &mut rest[5]);
            stats.accepted += 1;
            observer(Progress::Step { t, y: &y, dt: h });

            if let Some(ev) = events.iter().find(|e| e.fired(t, &y)) {
                if t > last_emitted + eps_t {
                    observer(Progress::Snapshot { t, y: &y });
                    last_emitted = t;
                }
                break StopReason::Event(ev.name.clone());
            }
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (cfg.safety * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last {
                dt = (h * factor).min(cfg.dt_max);
            }
        } else {
            stats.rejected += 1;
            let factor = if err_norm.is_finite() {
                (cfg.safety * err_norm.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            dt = h * factor;
            if dt < cfg.dt_min {
                break StopReason::DtUnderflow;
            }
        }
    };

    if t > last_emitted + eps_t {
        observer(Progress::Snapshot { t, y: &y });
    }

    Ok(RunOutcome {
        stop_reason,
        t_final: t,
        y_final: y,
        stats,
    })
}

fn next_sample_due(ts: f64, t_new: f64, eps_t: f64) -> bool {
    ts <= t_new + eps_t
}

/// Adaptive Dormand–Prince integration from `t0` to `t1` with snapshots at
/// multiples of `sample_every` (plus the final state).
pub fn integrate<F>(
    rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    events: &[Event],
    sample_every: f64,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let mut times = Vec::new();
    let mut states = Vec::new();
    let outcome = integrate_observed(rhs, y0, t0, t1, cfg, events, sample_every, |p| {
        if let Progress::Snapshot { t, y } = p {
            times.push(t);
            states.push(y.to_vec());
        }
    })?;
    Ok(Trajectory {
        times,
        states,
        stop_reason: outcome.stop_reason,
        stats: outcome.stats,
    })
}
