//! Input levels where an equilibrium loses hyperbolicity: `f = f_x = 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{Env, Expr, Var};
use crate::integrator::sig17;
use crate::model::ModelSpec;

use super::EquilibriumError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    /// Seeds per axis; the grid includes the range boundaries.
    pub seeds_per_axis: usize,
    pub max_iter: usize,
    /// Converged once the max-norm residual is below this...
    pub residual_tol: f64,
    /// ...and the last step was shorter than this.
    pub step_tol: f64,
    pub dedupe: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { seeds_per_axis: 64, max_iter: 50, residual_tol: 1e-11, step_tol: 1e-12, dedupe: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub level: f64,
    pub x: f64,
    pub residual_f: f64,
    pub residual_fx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationSet {
    /// Sorted by input level, then state.
    pub points: Vec<BifurcationPoint>,
    pub input_range: (f64, f64),
    pub state_range: (f64, f64),
    pub seeds_tried: usize,
    pub seeds_singular: usize,
    pub seeds_converged: usize,
}

impl BifurcationSet {
    /// Distinct input levels, merged within `tol`.
    pub fn levels(&self, tol: f64) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.level).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|b, a| (*b - *a).abs() < tol);
        v
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["U", "x", "residual_f", "residual_fx"])?;
        for p in &self.points {
            w.write_record([sig17(p.level), sig17(p.x), sig17(p.residual_f), sig17(p.residual_fx)])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct System {
    f: Expr,
    fx: Expr,
    fu: Expr,
    fxx: Expr,
    fxu: Expr,
}

enum Outcome {
    Converged(f64, f64),
    Singular,
    Failed,
}

impl System {
    fn new(rhs: &Expr) -> System {
        let f = rhs
            .substitute(Var::Du, &Expr::Const(0.0))
            .substitute(Var::X2, &Expr::Const(0.0))
            .simplify();
        let fx = f.differentiate(Var::X1);
        System { fu: f.differentiate(Var::U), fxx: fx.differentiate(Var::X1), fxu: fx.differentiate(Var::U), fx, f }
    }

    fn eval(e: &Expr, x: f64, u: f64) -> f64 {
        e.eval(&Env { x1: x, u, ..Env::default() }).unwrap_or(f64::NAN)
    }

    fn residual(&self, x: f64, u: f64) -> (f64, f64) {
        (Self::eval(&self.f, x, u), Self::eval(&self.fx, x, u))
    }

    fn newton(&self, mut x: f64, mut u: f64, opt: &NewtonOptions) -> Outcome {
        for iter in 0..opt.max_iter {
            let (f, fx) = self.residual(x, u);
            let fu = Self::eval(&self.fu, x, u);
            let fxx = Self::eval(&self.fxx, x, u);
            let fxu = Self::eval(&self.fxu, x, u);
            let det = fx * fxu - fu * fxx;
            if !det.is_finite() || det == 0.0 {
                return if iter == 0 { Outcome::Singular } else { Outcome::Failed };
            }
            let dx = (fxu * f - fu * fx) / det;
            let du = (fx * fx - fxx * f) / det;
            x -= dx;
            u -= du;
            if !x.is_finite() || !u.is_finite() {
                return Outcome::Failed;
            }
            let (f, fx) = self.residual(x, u);
            if f.abs().max(fx.abs()) < opt.residual_tol && dx.abs().max(du.abs()) < opt.step_tol {
                return Outcome::Converged(x, u);
            }
        }
        let (f, fx) = self.residual(x, u);
        if f.abs().max(fx.abs()) < opt.residual_tol {
            Outcome::Converged(x, u)
        } else {
            Outcome::Failed
        }
    }
}

/// Solves `f(x, U) = f_x(x, U) = 0` by Newton's method from a seed grid over
/// `state_range x input_range`. Second-order systems use `f(x1, 0, U)`.
pub fn solve_bifurcations(
    model: &ModelSpec,
    input_range: (f64, f64),
    state_range: (f64, f64),
    opt: &NewtonOptions,
) -> Result<BifurcationSet, EquilibriumError> {
    for (lo, hi) in [input_range, state_range] {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(EquilibriumError::BadInterval(lo, hi));
        }
    }
    let sys = System::new(model.analysis_rhs()?);
    let n = opt.seeds_per_axis.max(2);
    let lin = |r: (f64, f64), i: usize| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64;
    let seeds: Vec<(f64, f64)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (lin(state_range, i), lin(input_range, j))).collect();
    let outcomes: Vec<Outcome> = seeds.par_iter().map(|&(x, u)| sys.newton(x, u, opt)).collect();

    let slack = |r: (f64, f64)| 1e-9 * (r.1 - r.0).max(1.0);
    let inside = |v: f64, r: (f64, f64)| v >= r.0 - slack(r) && v <= r.1 + slack(r);
    let mut points: Vec<BifurcationPoint> = Vec::new();
    let (mut singular, mut converged) = (0, 0);
    for o in &outcomes {
        match *o {
            Outcome::Singular => singular += 1,
            Outcome::Failed => {}
            Outcome::Converged(x, u) => {
                converged += 1;
                if !inside(x, state_range) || !inside(u, input_range) {
                    continue;
                }
                if points.iter().any(|p| (p.x - x).abs() < opt.dedupe && (p.level - u).abs() < opt.dedupe) {
                    continue;
                }
                let (rf, rfx) = sys.residual(x, u);
                points.push(BifurcationPoint { level: u, x, residual_f: rf, residual_fx: rfx });
            }
        }
    }
    points.sort_by(|a, b| a.level.total_cmp(&b.level).then(a.x.total_cmp(&b.x)));
    Ok(BifurcationSet {
        points,
        input_range,
        state_range,
        seeds_tried: seeds.len(),
        seeds_singular: singular,
        seeds_converged: converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, preset, Order, Overrides};

    #[test]
    fn cubic_fold_points() {
        let m = preset("cubic", &Overrides::new()).unwrap();
        let set = solve_bifurcations(&m, (-1.0, 1.0), (-5.0, 5.0), &NewtonOptions::default()).unwrap();
        let exact = 2.0 / (3.0 * 3f64.sqrt());
        let levels = set.levels(1e-8);
        assert_eq!(levels.len(), 2);
        assert!((levels[0] + exact).abs() < 1e-12 && (levels[1] - exact).abs() < 1e-12);
        for p in &set.points {
            assert!(p.residual_f.abs() < 1e-9 && p.residual_fx.abs() < 1e-9);
        }
        assert_eq!(set.seeds_tried, 64 * 64);
    }

    #[test]
    fn second_order_uses_first_state() {
        let m = preset("sonode15", &Overrides::new()).unwrap();
        let set = solve_bifurcations(&m, (-1.0, 1.0), (-5.0, 5.0), &NewtonOptions::default()).unwrap();
        let levels = set.levels(1e-8);
        assert_eq!(levels.len(), 2, "{levels:?}");
        assert!(levels[0].abs() < 1e-9 && (levels[1] - 4.0 / 27.0).abs() < 1e-9);
    }

    #[test]
    fn no_fold_gives_empty_set() {
        let m = build_model(Order::First, "-x + u", &[0.0]).unwrap();
        let set = solve_bifurcations(&m, (-1.0, 1.0), (-5.0, 5.0), &NewtonOptions::default()).unwrap();
        assert!(set.points.is_empty());
    }

    #[test]
    fn csv_header() {
        let m = preset("cubic", &Overrides::new()).unwrap();
        let set = solve_bifurcations(&m, (-1.0, 1.0), (-5.0, 5.0), &NewtonOptions::default()).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("U,x,residual_f,residual_fx\n"));
        assert_eq!(text.lines().count(), 1 + set.points.len());
    }
}
