//! Fixed-step classical Runge-Kutta integration that never steps across a
//! kink of the input.
//!
//! Right-hand sides built from `|u|` or `|du|` are only continuous, so each
//! grid step that contains a signal kink is split there. Every sub-step then
//! integrates a smooth problem and RK4 keeps its fourth order piecewise.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Env;
use crate::model::{ModelSpec, Order};
use crate::signal::Signal;

/// States beyond this magnitude mark a run as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimParams {
    /// Number of input periods to simulate.
    pub periods: usize,
    pub steps_per_period: usize,
    /// Total simulated time for constant inputs, which have no period.
    pub duration: f64,
    /// Split steps at signal kinks. Only disabled to measure what the
    /// splitting buys.
    pub split_kinks: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { periods: 3, steps_per_period: 4096, duration: 100.0, split_kinks: true }
    }
}

impl SimParams {
    pub fn new(periods: usize, steps_per_period: usize) -> Self {
        SimParams { periods, steps_per_period, ..SimParams::default() }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("need at least one period, got {0}")]
    NoPeriods(usize),
    #[error("need at least 64 steps per period, got {0}")]
    TooFewSteps(usize),
    #[error("duration for a constant input must be positive, got {0}")]
    BadDuration(f64),
    #[error("right-hand side is singular (division by zero) at t = {t}")]
    Singular { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub model: String,
    pub signal: Signal,
    pub order: Order,
    pub times: Vec<f64>,
    /// State per sample; the second component is unused for first order.
    pub states: Vec<[f64; 2]>,
    /// `(u, du)` per sample.
    pub inputs: Vec<(f64, f64)>,
    pub steps_per_period: usize,
    /// Index of the first sample that left the finite range, if any. The
    /// stored arrays stop just before it.
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i][..self.order.dim()]
    }

    pub fn x1(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s[0])
    }

    /// Writes `t,u,du,x1[,x2]` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self.order {
            Order::First => w.write_record(["t", "u", "du", "x1"])?,
            Order::Second => w.write_record(["t", "u", "du", "x1", "x2"])?,
        }
        for i in 0..self.len() {
            let (u, du) = self.inputs[i];
            let mut row = vec![sig17(self.times[i]), sig17(u), sig17(du), sig17(self.states[i][0])];
            if self.order == Order::Second {
                row.push(sig17(self.states[i][1]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats with 17 significant digits, enough to round-trip any double.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// The `(u, x1)` curve traced by a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoCurve {
    pub points: Vec<(f64, f64)>,
    /// Trajectory sample index of each point.
    pub indices: Vec<usize>,
    pub steps_per_period: usize,
    pub diverged: bool,
}

impl IoCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `u,x` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "x"])?;
        for &(u, x) in &self.points {
            w.write_record([sig17(u), sig17(x)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn to_io_curve(traj: &Trajectory) -> IoCurve {
    IoCurve {
        points: traj.inputs.iter().zip(traj.x1()).map(|(&(u, _), x)| (u, x)).collect(),
        indices: (0..traj.len()).collect(),
        steps_per_period: traj.steps_per_period,
        diverged: traj.diverged(),
    }
}

struct Rhs<'a> {
    model: &'a ModelSpec,
    signal: &'a Signal,
}

impl Rhs<'_> {
    fn eval(&self, t: f64, piece_ref: f64, x: [f64; 2]) -> Result<[f64; 2], IntegrateError> {
        let env = Env {
            t,
            x1: x[0],
            x2: x[1],
            u: self.signal.value(t),
            du: self.signal.derivative_on_piece(t, piece_ref),
        };
        self.model.derivative(&env).map_err(|_| IntegrateError::Singular { t })
    }
}

fn axpy(x: [f64; 2], h: f64, k: [f64; 2]) -> [f64; 2] {
    [x[0] + h * k[0], x[1] + h * k[1]]
}

fn rk4_step(rhs: &Rhs, t0: f64, t1: f64, x: [f64; 2]) -> Result<[f64; 2], IntegrateError> {
    let h = t1 - t0;
    let mid = t0 + 0.5 * h;
    let k1 = rhs.eval(t0, mid, x)?;
    let k2 = rhs.eval(mid, mid, axpy(x, 0.5 * h, k1))?;
    let k3 = rhs.eval(mid, mid, axpy(x, 0.5 * h, k2))?;
    let k4 = rhs.eval(t1, mid, axpy(x, h, k3))?;
    Ok([
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Integrates `model` under `signal` on a uniform grid of
/// `periods * steps_per_period` steps.
///
/// A run whose state leaves `[-1e12, 1e12]` (or becomes non-finite) is
/// truncated and flagged through [`Trajectory::diverged_at`] rather than
/// reported as an error.
pub fn integrate(model: &ModelSpec, signal: &Signal, params: &SimParams) -> Result<Trajectory, IntegrateError> {
    if params.periods < 1 {
        return Err(IntegrateError::NoPeriods(params.periods));
    }
    if params.steps_per_period < 64 {
        return Err(IntegrateError::TooFewSteps(params.steps_per_period));
    }
    let span = match signal.period() {
        Some(p) => p,
        None if params.duration > 0.0 && params.duration.is_finite() => {
            params.duration / params.periods as f64
        }
        None => return Err(IntegrateError::BadDuration(params.duration)),
    };
    let n = params.periods * params.steps_per_period;
    let h = span / params.steps_per_period as f64;
    let rhs = Rhs { model, signal };

    let mut x = [model.initial_state[0], model.initial_state.get(1).copied().unwrap_or(0.0)];
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut inputs = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(x);
    inputs.push(signal.sample(0.0));
    let mut diverged_at = None;
    let mut cuts = Vec::new();

    for i in 0..n {
        let t0 = i as f64 * h;
        let t1 = (i + 1) as f64 * h;
        cuts.clear();
        cuts.push(t0);
        if params.split_kinks {
            // Kinks within rounding of a grid point count as aligned.
            let eps = 1e-9 * h;
            cuts.extend(signal.kink_times(t0, t1).into_iter().filter(|&k| k > t0 + eps && k < t1 - eps));
        }
        cuts.push(t1);
        for w in cuts.windows(2) {
            x = rk4_step(&rhs, w[0], w[1], x)?;
        }
        if !x.iter().all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT) {
            diverged_at = Some(i + 1);
            break;
        }
        times.push(t1);
        states.push(x);
        inputs.push(signal.sample(t1));
    }

    Ok(Trajectory {
        model: model.name.clone(),
        signal: *signal,
        order: model.order,
        times,
        states,
        inputs,
        steps_per_period: params.steps_per_period,
        diverged_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Order};
    use std::f64::consts::PI;

    #[test]
    fn zero_rhs_keeps_constant_state() {
        let m = build_model(Order::First, "0", &[2.5]).unwrap();
        let tr = integrate(&m, &Signal::sine(1.0), &SimParams::new(1, 64)).unwrap();
        assert!(tr.x1().all(|x| x == 2.5));
        assert_eq!(tr.len(), 65);
    }

    #[test]
    fn rejects_bad_params() {
        let m = build_model(Order::First, "u", &[0.0]).unwrap();
        let s = Signal::sine(1.0);
        assert_eq!(integrate(&m, &s, &SimParams::new(0, 128)), Err(IntegrateError::NoPeriods(0)));
        assert_eq!(integrate(&m, &s, &SimParams::new(1, 10)), Err(IntegrateError::TooFewSteps(10)));
    }

    #[test]
    fn singular_rhs_reports_time() {
        let m = build_model(Order::First, "1/(t - 1)", &[0.0]).unwrap();
        let s = Signal::constant(0.0);
        let p = SimParams { duration: 2.0, ..SimParams::new(1, 64) };
        match integrate(&m, &s, &p) {
            Err(IntegrateError::Singular { t }) => assert!((t - 1.0).abs() < 1e-12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn divergence_truncates() {
        let m = build_model(Order::First, "x^2", &[1.0]).unwrap();
        let p = SimParams { duration: 5.0, ..SimParams::new(1, 4096) };
        let tr = integrate(&m, &Signal::constant(0.0), &p).unwrap();
        assert!(tr.diverged());
        assert!(tr.len() < 4097);
        assert!(tr.x1().all(|x| x.is_finite()));
    }

    #[test]
    fn constant_signal_uses_duration() {
        let m = build_model(Order::First, "u", &[0.0]).unwrap();
        let p = SimParams { duration: 10.0, ..SimParams::new(2, 100) };
        let tr = integrate(&m, &Signal::constant(0.5), &p).unwrap();
        assert!((tr.times.last().unwrap() - 10.0).abs() < 1e-12);
        assert!((tr.x1().last().unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_precision() {
        let m = build_model(Order::Second, "-x1", &[1.0, 0.0]).unwrap();
        let tr = integrate(&m, &Signal::sine(1.0), &SimParams::new(1, 64)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,u,du,x1,x2"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 5);
        assert_eq!(row[3], "1.0000000000000000e0");
        assert_eq!(text.lines().count(), 66);
    }

    #[test]
    fn io_curve_pairs_input_with_first_state() {
        let m = build_model(Order::First, "u", &[-1.0]).unwrap();
        let tr = integrate(&m, &Signal::sine(2.0), &SimParams::new(1, 64)).unwrap();
        let io = to_io_curve(&tr);
        assert_eq!(io.len(), tr.len());
        assert_eq!(io.points[16].0, Signal::sine(2.0).value(tr.times[16]));
        assert_eq!(io.points[16].1, tr.states[16][0]);
        assert!((tr.times[16] - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_forcing_matches_closed_form() {
        // x' = sin(2t), x(0) = -1  =>  x = (1 - cos 2t)/2 - 1
        let m = build_model(Order::First, "u", &[-1.0]).unwrap();
        let tr = integrate(&m, &Signal::sine(2.0), &SimParams::new(1, 4096)).unwrap();
        for (t, x) in tr.times.iter().zip(tr.x1()) {
            let exact = (1.0 - (2.0 * t).cos()) / 2.0 - 1.0;
            assert!((x - exact).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn rate_independent_forcing_matches_piecewise_closed_form() {
        // x' = |cos t| sin t, x(0) = 0.5: x = 0.5 + sin^2/2 where cos >= 0,
        // 1.5 - sin^2/2 elsewhere.
        let m = build_model(Order::First, "abs(du)*u", &[0.5]).unwrap();
        let tr = integrate(&m, &Signal::sine(1.0), &SimParams::new(2, 4096)).unwrap();
        for (t, x) in tr.times.iter().zip(tr.x1()) {
            let s = t.sin();
            let exact = if t.cos() >= 0.0 { 0.5 + s * s / 2.0 } else { 1.5 - s * s / 2.0 };
            assert!((x - exact).abs() < 1e-6, "t={t} x={x} exact={exact}");
        }
    }

    fn linear_error(steps: usize) -> f64 {
        // x' = -x + sin t, x(0) = 0  =>  x = (sin t - cos t + e^-t)/2
        let m = build_model(Order::First, "-x + u", &[0.0]).unwrap();
        let tr = integrate(&m, &Signal::sine(1.0), &SimParams::new(1, steps)).unwrap();
        tr.times
            .iter()
            .zip(tr.x1())
            .map(|(t, x)| (x - (t.sin() - t.cos() + (-t).exp()) / 2.0).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn fourth_order_convergence() {
        let ratio = linear_error(64) / linear_error(128);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn kink_splitting_restores_accuracy() {
        let m = build_model(Order::First, "abs(du)*u", &[0.5]).unwrap();
        let s = Signal::sine(1.0);
        let err = |split| {
            let p = SimParams { split_kinks: split, ..SimParams::new(1, 4099) };
            let tr = integrate(&m, &s, &p).unwrap();
            tr.times
                .iter()
                .zip(tr.x1())
                .map(|(t, x)| {
                    let q = t.sin() * t.sin() / 2.0;
                    let exact = if t.cos() >= 0.0 { 0.5 + q } else { 1.5 - q };
                    (x - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let (with, without) = (err(true), err(false));
        assert!(with < 1e-10 && without > 10.0 * with, "with {with:e} without {without:e}");
    }
}
