//! Periodic inputs with analytic derivatives.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// `A sin(wt)`
    Sine,
    /// `A |sin(wt)|`
    AbsSine,
    /// A constant level.
    Constant,
}

impl SignalKind {
    pub fn from_name(name: &str) -> Option<SignalKind> {
        match name {
            "sine" | "sin" => Some(SignalKind::Sine),
            "abs_sine" | "abs_sin" => Some(SignalKind::AbsSine),
            "constant" | "const" => Some(SignalKind::Constant),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Sine => "sine",
            SignalKind::AbsSine => "abs_sine",
            SignalKind::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub kind: SignalKind,
    pub amplitude: f64,
    /// Angular frequency in rad per time unit.
    pub omega: f64,
    /// Level of a constant signal.
    pub level: f64,
}

impl Signal {
    pub fn sine(omega: f64) -> Signal {
        Signal { kind: SignalKind::Sine, amplitude: 1.0, omega, level: 0.0 }
    }

    pub fn abs_sine(omega: f64) -> Signal {
        Signal { kind: SignalKind::AbsSine, amplitude: 1.0, omega, level: 0.0 }
    }

    pub fn constant(level: f64) -> Signal {
        Signal { kind: SignalKind::Constant, amplitude: 0.0, omega: 0.0, level }
    }

    pub fn periodic(kind: SignalKind, omega: f64) -> Signal {
        match kind {
            SignalKind::Sine => Signal::sine(omega),
            SignalKind::AbsSine => Signal::abs_sine(omega),
            SignalKind::Constant => Signal::constant(0.0),
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Signal {
        self.amplitude = amplitude;
        self
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            SignalKind::Sine => self.amplitude * (self.omega * t).sin(),
            SignalKind::AbsSine => self.amplitude * (self.omega * t).sin().abs(),
            SignalKind::Constant => self.level,
        }
    }

    /// Analytic derivative; `sign(0) = 0` at the kinks of `|sin|`.
    ///
    /// A phase within rounding of a multiple of pi counts as a kink, since
    /// `sin(k pi)` is not exactly zero in floating point.
    pub fn derivative(&self, t: f64) -> f64 {
        if self.kind == SignalKind::AbsSine {
            let phase = self.omega * t;
            if phase.sin().abs() <= 4.0 * f64::EPSILON * phase.abs().max(1.0) {
                return 0.0;
            }
        }
        self.derivative_on_piece(t, t)
    }

    /// Derivative at `t`, taking the branch of any kink from `piece_ref`, a
    /// time strictly inside the smooth piece that `t` is a limit of.
    pub fn derivative_on_piece(&self, t: f64, piece_ref: f64) -> f64 {
        let w = self.omega;
        match self.kind {
            SignalKind::Sine => self.amplitude * w * (w * t).cos(),
            SignalKind::AbsSine => {
                self.amplitude * w * (w * t).cos() * sign((w * piece_ref).sin())
            }
            SignalKind::Constant => 0.0,
        }
    }

    /// `(u, du)` at `t`.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        (self.value(t), self.derivative(t))
    }

    pub fn period(&self) -> Option<f64> {
        match self.kind {
            SignalKind::Sine => Some(2.0 * PI / self.omega),
            SignalKind::AbsSine => Some(PI / self.omega),
            SignalKind::Constant => None,
        }
    }

    /// Times in `[t0, t1]` where `u` or `|du|` is not differentiable.
    ///
    /// For a sine input these are the zeros of `cos(wt)` (kinks of `|du|`);
    /// for `|sin|` they are the zeros of `sin(wt)`.
    pub fn kink_times(&self, t0: f64, t1: f64) -> Vec<f64> {
        let offset = match self.kind {
            SignalKind::Sine => PI / 2.0,
            SignalKind::AbsSine => 0.0,
            SignalKind::Constant => return Vec::new(),
        };
        if t1 < t0 || self.omega <= 0.0 {
            return Vec::new();
        }
        let w = self.omega;
        // Kinks at w t = offset + k pi.
        let k_lo = ((w * t0 - offset) / PI).ceil() as i64;
        let k_hi = ((w * t1 - offset) / PI).floor() as i64;
        (k_lo..=k_hi)
            .map(|k| (offset + k as f64 * PI) / w)
            .filter(|&t| t >= t0 && t <= t1)
            .collect()
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SignalKind::Constant => write!(f, "constant({})", self.level),
            kind => write!(f, "{}(A={}, omega={})", kind.name(), self.amplitude, self.omega),
        }
    }
}
