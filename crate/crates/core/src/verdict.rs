//! Frequency sweeps and the hysteresis decision.
//!
//! A system is judged hysteretic when its input-output loop stays closed,
//! bounded and of non-vanishing area as the input frequency goes to zero.
//! Any finite sweep only approximates that limit; every threshold used is
//! echoed in the verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{BifurcationSet, MultistabilityVerdict};
use crate::integrator::{integrate, to_io_curve, SimParams};
use crate::loopanal::{extract_steady_loop, loop_distance, LoopOptions, SteadyLoop};
use crate::model::ModelSpec;
use crate::signal::{Signal, SignalKind};

#[derive(Debug, Error)]
pub enum VerdictError {
    #[error("a sweep needs at least 3 frequencies, got {0}")]
    TooFewFrequencies(usize),
    #[error("frequencies must be finite, positive and distinct, got {0:?}")]
    BadFrequencies(Vec<f64>),
    #[error("a frequency sweep needs a periodic input, got {0:?}")]
    NotPeriodic(SignalKind),
    #[error("every frequency failed; first failure: {0}")]
    AllFailed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Periods simulated per frequency; all but the last are transient.
    pub periods: usize,
    pub steps_per_period: usize,
    /// A diverged run is repeated with twice the steps per period, at most
    /// this many times, so fixed-step instability on stiff time-varying
    /// models is not mistaken for growth of the solution.
    pub max_refinements: usize,
    pub loop_options: LoopOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { periods: 6, steps_per_period: 4096, max_refinements: 6, loop_options: LoopOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub diverged: bool,
    /// Steps per period of the run that produced the loop.
    pub steps_per_period: usize,
    /// Missing when the run failed outright, see `error`.
    pub steady_loop: Option<SteadyLoop>,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn closed_loop(&self) -> Option<&SteadyLoop> {
        self.steady_loop.as_ref().filter(|l| l.closed && !self.diverged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub model: String,
    pub signal: SignalKind,
    /// Strictly decreasing.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn at(&self, omega: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.omega == omega)
    }
}

/// Simulates one frequency and extracts its settled loop, refining the step
/// when the run diverges.
pub fn sweep_point(model: &ModelSpec, kind: SignalKind, omega: f64, opts: &SweepOptions) -> SweepPoint {
    let signal = Signal::periodic(kind, omega);
    let mut steps = opts.steps_per_period;
    let mut refinements = 0;
    loop {
        let run = integrate(model, &signal, &SimParams::new(opts.periods, steps)).map_err(|e| e.to_string()).and_then(|tr| {
            extract_steady_loop(&to_io_curve(&tr), steps, opts.periods - 1, &opts.loop_options)
                .map(|lp| (tr.diverged(), lp))
                .map_err(|e| e.to_string())
        });
        match run {
            Ok((true, _)) if refinements < opts.max_refinements => {
                steps *= 2;
                refinements += 1;
            }
            Ok((diverged, lp)) => {
                return SweepPoint { omega, diverged, steps_per_period: steps, steady_loop: Some(lp), error: None }
            }
            Err(e) => return SweepPoint { omega, diverged: false, steps_per_period: steps, steady_loop: None, error: Some(e) },
        }
    }
}

/// Simulates the model at each frequency and extracts the settled loop.
pub fn frequency_sweep(
    model: &ModelSpec,
    kind: SignalKind,
    omegas: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult, VerdictError> {
    if kind == SignalKind::Constant {
        return Err(VerdictError::NotPeriodic(kind));
    }
    if omegas.len() < 3 {
        return Err(VerdictError::TooFewFrequencies(omegas.len()));
    }
    let mut sorted = omegas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted.iter().any(|w| !(w.is_finite() && *w > 0.0)) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(VerdictError::BadFrequencies(omegas.to_vec()));
    }
    let points: Vec<SweepPoint> = sorted.par_iter().map(|&omega| sweep_point(model, kind, omega, opts)).collect();
    if points.iter().all(|p| p.steady_loop.is_none()) {
        let first = points.iter().find_map(|p| p.error.clone()).unwrap_or_default();
        return Err(VerdictError::AllFailed(first));
    }
    Ok(SweepResult { model: model.name.clone(), signal: kind, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Areas growing faster than `omega^-p` for `p` above this are unbounded.
    pub unbounded_exponent: f64,
    /// Loops shrinking below this fraction of the largest-frequency area are
    /// degenerate.
    pub degenerate_fraction: f64,
    /// Loops shrinking like `omega^q` with `q` above this are degenerate too.
    pub shrink_exponent: f64,
    /// Relative loop distance below which the loop is rate independent.
    pub rate_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { unbounded_exponent: 0.5, degenerate_fraction: 0.05, shrink_exponent: 0.75, rate_tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hysteretic,
    Degenerate,
    Unbounded,
    NoLoop,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Hysteretic => "hysteretic",
            Verdict::Degenerate => "degenerate",
            Verdict::Unbounded => "unbounded",
            Verdict::NoLoop => "no_loop",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    Independent,
    Dependent,
    NotApplicable,
}

impl Rate {
    pub fn name(self) -> &'static str {
        match self {
            Rate::Independent => "independent",
            Rate::Dependent => "dependent",
            Rate::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpSummary {
    /// `(omega, number of jumps)` for every closed loop.
    pub counts: Vec<(f64, usize)>,
    /// Jump locations at the smallest frequency with a closed loop.
    pub u_at_smallest: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HysteresisVerdict {
    pub verdict: Verdict,
    pub rate: Rate,
    /// `p` in `A ~ c * omega^-p`, fitted over the three smallest frequencies.
    pub area_exponent: Option<f64>,
    /// Area at the smallest frequency over area at the largest closed one.
    pub area_ratio: Option<f64>,
    /// Loop distance over diameter between the two smallest frequencies.
    pub relative_distance: Option<f64>,
    pub jumps: JumpSummary,
    pub reason: String,
    pub thresholds: Thresholds,
}

/// Least-squares slope of `y` on `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Applies the decision rules in order: no closed loop, unbounded growth,
/// degeneration, and otherwise hysteresis.
pub fn classify(sweep: &SweepResult, th: &Thresholds) -> HysteresisVerdict {
    let mut pts: Vec<&SweepPoint> = sweep.points.iter().collect();
    pts.sort_by(|a, b| b.omega.total_cmp(&a.omega));
    let jumps = JumpSummary {
        counts: pts.iter().filter_map(|p| p.closed_loop().map(|l| (p.omega, l.jumps.len()))).collect(),
        u_at_smallest: pts
            .iter()
            .rev()
            .find_map(|p| p.closed_loop())
            .map(|l| l.jumps.iter().map(|j| j.u_at_jump).collect())
            .unwrap_or_default(),
    };
    let mut out = HysteresisVerdict {
        verdict: Verdict::Inconclusive,
        rate: Rate::NotApplicable,
        area_exponent: None,
        area_ratio: None,
        relative_distance: None,
        jumps,
        reason: String::new(),
        thresholds: *th,
    };
    let area = |p: &SweepPoint| p.closed_loop().map(|l| l.geometric_area);

    if pts.iter().all(|p| p.closed_loop().is_none()) {
        out.verdict = Verdict::NoLoop;
        out.reason = "no frequency produced a closed loop".into();
        return out;
    }

    let smallest = &pts[pts.len().saturating_sub(3)..];
    if smallest.iter().all(|p| area(p).is_some()) {
        let lx: Vec<f64> = smallest.iter().map(|p| p.omega.ln()).collect();
        let ly: Vec<f64> = smallest.iter().map(|p| area(p).unwrap().max(f64::MIN_POSITIVE).ln()).collect();
        out.area_exponent = Some(-slope(&lx, &ly));
    }
    if let Some(d) = pts.iter().find(|p| p.diverged) {
        out.verdict = Verdict::Unbounded;
        out.reason = format!("trajectory diverged at omega = {}", d.omega);
        return out;
    }
    if let Some(p) = out.area_exponent.filter(|&p| p > th.unbounded_exponent) {
        out.verdict = Verdict::Unbounded;
        out.reason = format!("loop area grows like omega^-{p:.3}");
        return out;
    }

    let last = pts[pts.len() - 1];
    let Some(a_min) = area(last) else {
        out.reason = format!("loop at the smallest frequency {} is not closed", last.omega);
        return out;
    };
    let closed: Vec<f64> = pts.iter().filter_map(|p| area(p)).collect();
    let a_ref = closed[0];
    let ratio = if a_ref > 0.0 { a_min / a_ref } else { 0.0 };
    out.area_ratio = Some(ratio);
    // Monotonicity is judged over the fit window only; large-frequency loops
    // are still dominated by the system's own time scale.
    let window: Vec<f64> = smallest.iter().filter_map(|p| area(p)).collect();
    let monotone = window.len() == smallest.len() && window.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let shrinking = out.area_exponent.is_some_and(|p| p < -th.shrink_exponent);
    if monotone && (ratio < th.degenerate_fraction || shrinking) {
        out.verdict = Verdict::Degenerate;
        out.reason = if ratio < th.degenerate_fraction {
            format!("loop area shrinks monotonically to {ratio:.3e} of its largest-frequency value")
        } else {
            format!("loop area shrinks monotonically like omega^{:.3}", -out.area_exponent.unwrap_or(0.0))
        };
        return out;
    }
    if ratio < th.degenerate_fraction {
        out.reason = format!("loop area falls to {ratio:.3e} of its largest-frequency value, but not monotonically");
        return out;
    }

    out.verdict = Verdict::Hysteretic;
    out.reason = format!("closed loop of area {a_min:.4} persists at omega = {}", last.omega);
    let prev = pts[pts.len() - 2];
    if let (Some(a), Some(b)) = (prev.closed_loop(), last.closed_loop()) {
        let (d, diam) = loop_distance(a, b);
        let rel = if diam > 0.0 { d / diam } else { 0.0 };
        out.relative_distance = Some(rel);
        out.rate = if rel < th.rate_tolerance { Rate::Independent } else { Rate::Dependent };
    } else {
        out.rate = Rate::Dependent;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpMatch {
    pub omega: f64,
    pub u_at_jump: f64,
    pub bifurcation: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpMatchTable {
    pub rows: Vec<JumpMatch>,
    /// Largest residual at the smallest and the largest frequency with jumps.
    pub max_residual_smallest: Option<f64>,
    pub max_residual_largest: Option<f64>,
    /// Jumps move toward bifurcation values as the frequency falls.
    pub converging: bool,
}

/// Matches every jump to the nearest bifurcation input level.
pub fn jump_bifurcation_match(sweep: &SweepResult, bif: &BifurcationSet) -> JumpMatchTable {
    let levels = bif.levels(1e-8);
    let mut rows = Vec::new();
    if !levels.is_empty() {
        for p in &sweep.points {
            let Some(lp) = p.closed_loop() else { continue };
            for j in &lp.jumps {
                let nearest = levels
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - j.u_at_jump).abs().total_cmp(&(b - j.u_at_jump).abs()))
                    .unwrap();
                rows.push(JumpMatch {
                    omega: p.omega,
                    u_at_jump: j.u_at_jump,
                    bifurcation: nearest,
                    residual: (j.u_at_jump - nearest).abs(),
                });
            }
        }
    }
    let max_at = |w: f64| rows.iter().filter(|r| r.omega == w).map(|r| r.residual).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let with_jumps: Vec<f64> = {
        let mut w: Vec<f64> = rows.iter().map(|r| r.omega).collect();
        w.sort_by(f64::total_cmp);
        w.dedup();
        w
    };
    let (smallest, largest) = match (with_jumps.first(), with_jumps.last()) {
        (Some(&lo), Some(&hi)) => (max_at(lo), max_at(hi)),
        _ => (None, None),
    };
    let converging = with_jumps.len() >= 2 && matches!((smallest, largest), (Some(s), Some(l)) if s < l);
    JumpMatchTable { rows, max_residual_smallest: smallest, max_residual_largest: largest, converging }
}

/// Per-frequency metrics, without the loop samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopMetrics {
    pub omega: f64,
    pub diverged: bool,
    pub closed: bool,
    pub closure_gap: Option<f64>,
    pub signed_area: Option<f64>,
    pub geometric_area: Option<f64>,
    pub diameter: Option<f64>,
    pub pinch_points: Vec<(f64, f64)>,
    pub jumps: Vec<crate::loopanal::JumpEvent>,
    pub error: Option<String>,
}

impl From<&SweepPoint> for LoopMetrics {
    fn from(p: &SweepPoint) -> Self {
        let l = p.steady_loop.as_ref();
        LoopMetrics {
            omega: p.omega,
            diverged: p.diverged,
            closed: p.closed_loop().is_some(),
            closure_gap: l.map(|l| l.closure_gap),
            signed_area: l.map(|l| l.signed_area),
            geometric_area: l.map(|l| l.geometric_area),
            diameter: l.map(|l| l.diameter),
            pinch_points: l.map(|l| l.pinch_points.clone()).unwrap_or_default(),
            jumps: l.map(|l| l.jumps.clone()).unwrap_or_default(),
            error: p.error.clone(),
        }
    }
}

/// The structured result of a hysteresis run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub model: String,
    pub rhs: String,
    pub order: usize,
    pub signal: SignalKind,
    pub omegas: Vec<f64>,
    pub sweep: SweepOptions,
    pub per_omega: Vec<LoopMetrics>,
    pub verdict: HysteresisVerdict,
    pub multistability: Option<MultistabilityVerdict>,
    pub jump_match: Option<JumpMatchTable>,
}

impl Report {
    pub fn new(model: &ModelSpec, sweep: &SweepResult, opts: &SweepOptions, verdict: HysteresisVerdict) -> Report {
        Report {
            model: model.name.clone(),
            rhs: model.rhs.to_text(),
            order: model.order.dim(),
            signal: sweep.signal,
            omegas: sweep.omegas(),
            sweep: *opts,
            per_omega: sweep.points.iter().map(LoopMetrics::from).collect(),
            verdict,
            multistability: None,
            jump_match: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
