//! Geometry of the settled input-output loop.

pub mod geometry;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{sig17, IoCurve};
use geometry::Point;

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("need {need} samples ({periods} periods of {per} steps), trajectory has {got}")]
    TooFewSamples { need: usize, got: usize, periods: usize, per: usize },
    #[error("samples per period must be at least 4, got {0}")]
    BadPeriod(usize),
    #[error("loop CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("loop CSV has {0} rows, need at least 2")]
    ShortCsv(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopOptions {
    /// Largest relative endpoint gap of a closed loop.
    pub closure_tol: f64,
    /// Minimum `|dx|/|du|` of a jump step.
    pub slope_threshold: f64,
    /// Minimum jump size as a fraction of the loop's x-extent.
    pub jump_height_fraction: f64,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions { closure_tol: 0.02, slope_threshold: 10.0, jump_height_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub u_at_jump: f64,
    pub x_before: f64,
    pub x_after: f64,
    pub max_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyLoop {
    /// One input period of `(u, x)` samples, both endpoints included.
    pub points: Vec<Point>,
    pub closed: bool,
    pub closure_gap: f64,
    pub signed_area: f64,
    pub geometric_area: f64,
    pub diameter: f64,
    pub pinch_points: Vec<Point>,
    pub jumps: Vec<JumpEvent>,
    /// The trajectory diverged; the loop is built from whatever was left.
    pub unbounded_candidate: bool,
}

impl SteadyLoop {
    /// Builds a loop from one period of samples.
    pub fn from_points(points: Vec<Point>, opts: &LoopOptions) -> SteadyLoop {
        let polygon = polygon(&points);
        let diameter = geometry::diameter(&points);
        let closure_gap = match (points.first(), points.last()) {
            (Some(a), Some(b)) if diameter > 0.0 => (a.0 - b.0).hypot(a.1 - b.1) / diameter,
            _ => 0.0,
        };
        let closed = closure_gap < opts.closure_tol;
        let jumps = if closed { locate_jumps(&points, opts.slope_threshold, opts.jump_height_fraction) } else { Vec::new() };
        SteadyLoop {
            signed_area: geometry::signed_area(polygon),
            geometric_area: geometry::geometric_area(polygon),
            pinch_points: detect_pinch(polygon),
            closed,
            closure_gap,
            diameter,
            jumps,
            unbounded_candidate: false,
            points,
        }
    }

    /// Extent of `x` over the loop.
    pub fn height(&self) -> f64 {
        height(&self.points)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "x"])?;
        for &(u, x) in &self.points {
            w.write_record([sig17(u), sig17(x)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a loop written by [`SteadyLoop::write_csv`].
    pub fn read_csv<R: Read>(input: R, opts: &LoopOptions) -> Result<SteadyLoop, LoopError> {
        let mut r = csv::Reader::from_reader(input);
        let points = r.deserialize::<(f64, f64)>().collect::<Result<Vec<_>, _>>()?;
        if points.len() < 2 {
            return Err(LoopError::ShortCsv(points.len()));
        }
        Ok(SteadyLoop::from_points(points, opts))
    }
}

/// The closed polygon of a loop: the repeated final sample is dropped so the
/// closing edge stands in for the last step.
fn polygon(points: &[Point]) -> &[Point] {
    if points.len() > 3 { &points[..points.len() - 1] } else { points }
}

fn height(points: &[Point]) -> f64 {
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if hi >= lo { hi - lo } else { 0.0 }
}

/// Takes the last full input period of `io` once `discard_periods` periods
/// of transient have passed.
pub fn extract_steady_loop(
    io: &IoCurve,
    samples_per_period: usize,
    discard_periods: usize,
    opts: &LoopOptions,
) -> Result<SteadyLoop, LoopError> {
    if samples_per_period < 4 {
        return Err(LoopError::BadPeriod(samples_per_period));
    }
    let n = io.points.len();
    if io.diverged {
        let start = n.saturating_sub(samples_per_period + 1);
        let mut lp = SteadyLoop::from_points(io.points[start..].to_vec(), opts);
        lp.closed = false;
        lp.jumps.clear();
        lp.unbounded_candidate = true;
        return Ok(lp);
    }
    let need = (discard_periods + 1) * samples_per_period + 1;
    if n < need {
        return Err(LoopError::TooFewSamples {
            need,
            got: n,
            periods: discard_periods + 1,
            per: samples_per_period,
        });
    }
    Ok(SteadyLoop::from_points(io.points[n - samples_per_period - 1..].to_vec(), opts))
}

/// Signed (shoelace) and geometric area of a closed curve.
pub fn loop_area(points: &[Point]) -> (f64, f64) {
    (geometry::signed_area(points), geometry::geometric_area(points))
}

/// Self-intersection points of a closed curve.
pub fn detect_pinch(points: &[Point]) -> Vec<Point> {
    geometry::crossings(points).into_iter().map(|c| c.at).collect()
}

/// Near-vertical runs of the loop that carry a large share of its height.
///
/// Steps with `|dx| / (|du| + 1e-9) > slope_threshold` are grouped into
/// maximal runs. A run is a jump when its total `|dx|` reaches
/// `jump_height_fraction` of the loop height. Its location is the `u` where
/// half of that `|dx|` has been covered.
pub fn locate_jumps(points: &[Point], slope_threshold: f64, jump_height_fraction: f64) -> Vec<JumpEvent> {
    let h = height(points);
    if points.len() < 2 || h == 0.0 {
        return Vec::new();
    }
    let slope = |k: usize| {
        let (a, b) = (points[k], points[k + 1]);
        (b.1 - a.1).abs() / ((b.0 - a.0).abs() + 1e-9)
    };
    let mut jumps = Vec::new();
    let mut k = 0;
    while k + 1 < points.len() {
        if slope(k) <= slope_threshold {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < points.len() && slope(k) > slope_threshold {
            k += 1;
        }
        // Steps start..k are steep.
        let mass: f64 = (start..k).map(|m| (points[m + 1].1 - points[m].1).abs()).sum();
        if mass >= jump_height_fraction * h {
            let mut covered = 0.0;
            let mut u_at_jump = points[k].0;
            for m in start..k {
                let dx = (points[m + 1].1 - points[m].1).abs();
                if covered + dx >= 0.5 * mass {
                    let f = if dx > 0.0 { (0.5 * mass - covered) / dx } else { 0.0 };
                    u_at_jump = points[m].0 + f * (points[m + 1].0 - points[m].0);
                    break;
                }
                covered += dx;
            }
            jumps.push(JumpEvent {
                u_at_jump,
                x_before: points[start].1,
                x_after: points[k].1,
                max_slope: (start..k).map(slope).fold(0.0, f64::max),
            });
        }
    }
    jumps
}

/// Root-mean-square distance between two loops after resampling each to
/// 512 points by arc length from its rightmost (largest `u`) point. Returns
/// the distance and the larger of the two diameters.
pub fn loop_distance(a: &SteadyLoop, b: &SteadyLoop) -> (f64, f64) {
    const N: usize = 512;
    let canon = |lp: &SteadyLoop| {
        let poly = polygon(&lp.points);
        let start = poly
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .0.total_cmp(&q.1 .0).then(q.0.cmp(&p.0)))
            .map_or(0, |(i, _)| i);
        geometry::resample(poly, start, N)
    };
    let (ra, rb) = (canon(a), canon(b));
    let sq: f64 = ra.iter().zip(&rb).map(|(p, q)| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sum();
    ((sq / N as f64).sqrt(), a.diameter.max(b.diameter))
}
