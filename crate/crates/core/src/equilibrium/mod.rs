//! Equilibria of the input-frozen system and their stability.

mod bifurcation;
mod multistability;

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Env, EvalError, Expr, Var};
use crate::integrator::sig17;
use crate::model::{freeze_expr, is_continuum, FrozenSystem, ModelError, ModelSpec, Order};

pub use bifurcation::{solve_bifurcations, BifurcationPoint, BifurcationSet, NewtonOptions};
pub use multistability::{multistability_check, ImpossibilityRule, MultistabilityVerdict};

/// Half-width of the band around zero in which a slope or eigenvalue real
/// part counts as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Largest residual accepted for a returned equilibrium.
pub const ROOT_RESIDUAL: f64 = 1e-10;
const BISECT_WIDTH: f64 = 1e-13;
const MERGE_DIST: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("search interval [{0}, {1}] is empty")]
    BadInterval(f64, f64),
    #[error("grid needs at least 100 points, got {0}")]
    GridTooSmall(usize),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }

    fn from_real_parts(re: &[f64]) -> Stability {
        if re.iter().any(|&r| r > MARGINAL_TOL || r.is_nan()) {
            Stability::Unstable
        } else if re.iter().all(|&r| r < -MARGINAL_TOL) {
            Stability::Stable
        } else {
            Stability::Marginal
        }
    }
}

/// Linearization at an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearization {
    /// `f_x` of a first-order system.
    Slope(f64),
    /// Eigenvalues of the companion Jacobian `[[0, 1], [b, a]]`.
    Eigenvalues([Complex64; 2]),
}

impl Linearization {
    pub fn real_parts(&self) -> Vec<f64> {
        match self {
            Linearization::Slope(s) => vec![*s],
            Linearization::Eigenvalues(l) => vec![l[0].re, l[1].re],
        }
    }

    pub fn stability(&self) -> Stability {
        Stability::from_real_parts(&self.real_parts())
    }
}

/// Eigenvalues of `x1' = x2, x2' = b x1 + a x2`.
pub fn companion_eigenvalues(a: f64, b: f64) -> [Complex64; 2] {
    let root = Complex64::new(a * a + 4.0 * b, 0.0).sqrt();
    [(a + root) / 2.0, (a - root) / 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    /// Length equals the model order; the second component is always 0.
    pub state: Vec<f64>,
    pub stability: Stability,
    pub linearization: Linearization,
}

impl Equilibrium {
    pub fn x(&self) -> f64 {
        self.state[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub level: f64,
    pub continuum: bool,
    /// Stability of the continuum when the input starts moving, if any.
    pub continuum_stability: Option<Stability>,
    /// Sorted by state; empty for a continuum.
    pub equilibria: Vec<Equilibrium>,
    /// Two or more stable equilibria, or a continuum that is not unstable.
    pub multistable: bool,
}

impl EquilibriumReport {
    pub fn stable_count(&self) -> usize {
        self.equilibria.iter().filter(|e| e.stability == Stability::Stable).count()
    }
}

/// The analysis right-hand side frozen at `level`.
pub fn frozen_analysis(model: &ModelSpec, level: f64) -> Result<FrozenSystem, ModelError> {
    let rhs = model.analysis_rhs()?;
    Ok(FrozenSystem { order: model.order, frozen_rhs: freeze_expr(rhs, level), level })
}

fn eval_x(e: &Expr, x: f64) -> Result<f64, EvalError> {
    e.eval(&Env { x1: x, ..Env::default() })
}

/// Root of `g` in a sign-change bracket, or `None` when the bracket hides a
/// pole or the root does not survive the residual check.
fn refine(g: &Expr, dg: &Expr, mut lo: f64, mut hi: f64, mut glo: f64) -> Option<f64> {
    for _ in 0..200 {
        if hi - lo < BISECT_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = eval_x(g, mid).ok()?;
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut gx = eval_x(g, x).ok()?;
    if let (Ok(d), true) = (eval_x(dg, x), gx != 0.0) {
        let polished = x - gx / d;
        if polished.is_finite() && (polished - x).abs() <= 1e-10 * x.abs().max(1.0) {
            if let Ok(gp) = eval_x(g, polished) {
                if gp.abs() <= gx.abs() {
                    x = polished;
                    gx = gp;
                }
            }
        }
    }
    (gx.abs() < ROOT_RESIDUAL).then_some(x)
}

/// All sign-change roots of a scalar function of `x1` on `[lo, hi]`.
pub fn scalar_roots(g: &Expr, lo: f64, hi: f64, grid_n: usize) -> Vec<f64> {
    let dg = g.differentiate(Var::X1);
    let step = (hi - lo) / (grid_n - 1) as f64;
    let xs: Vec<f64> = (0..grid_n).map(|i| if i + 1 == grid_n { hi } else { lo + i as f64 * step }).collect();
    let gs: Vec<Option<f64>> = xs.iter().map(|&x| eval_x(g, x).ok().filter(|v| v.is_finite())).collect();
    let mut roots = Vec::new();
    for i in 0..grid_n {
        if gs[i] == Some(0.0) {
            roots.push(xs[i]);
        }
        if i + 1 < grid_n {
            if let (Some(a), Some(b)) = (gs[i], gs[i + 1]) {
                if a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
                    roots.extend(refine(g, &dg, xs[i], xs[i + 1], a));
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() < MERGE_DIST);
    roots
}

/// Linearization of the frozen system at `(x1, 0)`.
pub fn linearize(frozen: &FrozenSystem, x1: f64) -> Linearization {
    let at = |e: &Expr| e.eval(&Env { x1, ..Env::default() }).unwrap_or(f64::NAN);
    match frozen.order {
        Order::First => Linearization::Slope(at(&frozen.frozen_rhs.differentiate(Var::X1))),
        Order::Second => {
            let a = at(&frozen.frozen_rhs.differentiate(Var::X2));
            let b = at(&frozen.frozen_rhs.differentiate(Var::X1));
            Linearization::Eigenvalues(companion_eigenvalues(a, b))
        }
    }
}

/// Stability of the equilibrium at `x1` when the input is held at `level`.
pub fn classify(model: &ModelSpec, x1: f64, level: f64) -> Result<Stability, ModelError> {
    Ok(linearize(&frozen_analysis(model, level)?, x1).stability())
}

/// Stability of a continuum of equilibria once the input moves.
///
/// The frozen system cannot see this: with `du = 0` every state is at rest.
/// The unfrozen linearization is probed at sampled states with `du = +-1`;
/// the continuum is unstable only if every probe is unstable.
pub fn continuum_stability(model: &ModelSpec, level: f64, interval: (f64, f64)) -> Result<Stability, ModelError> {
    let rhs = model.analysis_rhs()?;
    let d1 = rhs.differentiate(Var::X1);
    let d2 = rhs.differentiate(Var::X2);
    let mut all_unstable = true;
    let mut all_stable = true;
    for i in 0..9 {
        let x = interval.0 + (interval.1 - interval.0) * i as f64 / 8.0;
        for du in [1.0, -1.0] {
            let env = Env { x1: x, u: level, du, ..Env::default() };
            let b = d1.eval(&env).unwrap_or(f64::NAN);
            let lin = match model.order {
                Order::First => Linearization::Slope(b),
                Order::Second => {
                    Linearization::Eigenvalues(companion_eigenvalues(d2.eval(&env).unwrap_or(f64::NAN), b))
                }
            };
            match lin.stability() {
                Stability::Unstable => all_stable = false,
                Stability::Stable => all_unstable = false,
                Stability::Marginal => {
                    all_stable = false;
                    all_unstable = false;
                }
            }
        }
    }
    Ok(if all_unstable {
        Stability::Unstable
    } else if all_stable {
        Stability::Stable
    } else {
        Stability::Marginal
    })
}

/// Equilibria of the model with the input frozen at `level`, searched on
/// `interval` with a `grid_n`-point sign-change scan.
pub fn find_equilibria(
    model: &ModelSpec,
    level: f64,
    interval: (f64, f64),
    grid_n: usize,
) -> Result<EquilibriumReport, EquilibriumError> {
    let (lo, hi) = interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(EquilibriumError::BadInterval(lo, hi));
    }
    if grid_n < 100 {
        return Err(EquilibriumError::GridTooSmall(grid_n));
    }
    let frozen = frozen_analysis(model, level)?;
    if is_continuum(&frozen)? {
        let stab = continuum_stability(model, level, interval)?;
        return Ok(EquilibriumReport {
            level,
            continuum: true,
            continuum_stability: Some(stab),
            equilibria: Vec::new(),
            multistable: stab != Stability::Unstable,
        });
    }
    let g = frozen.equilibrium_function();
    let equilibria: Vec<Equilibrium> = scalar_roots(&g, lo, hi, grid_n)
        .into_iter()
        .map(|x| {
            let linearization = linearize(&frozen, x);
            let mut state = vec![x];
            if model.order == Order::Second {
                state.push(0.0);
            }
            Equilibrium { state, stability: linearization.stability(), linearization }
        })
        .collect();
    let stable = equilibria.iter().filter(|e| e.stability == Stability::Stable).count();
    Ok(EquilibriumReport { level, continuum: false, continuum_stability: None, equilibria, multistable: stable >= 2 })
}

/// One row of a bifurcation diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramRow {
    pub level: f64,
    /// `None` marks a continuum at this level.
    pub x: Option<f64>,
    pub stability: Stability,
}

/// Equilibria with stability labels at `n` evenly spaced input levels.
pub fn bifurcation_diagram(
    model: &ModelSpec,
    input_range: (f64, f64),
    n: usize,
    interval: (f64, f64),
    grid_n: usize,
) -> Result<Vec<DiagramRow>, EquilibriumError> {
    if n < 50 {
        return Err(EquilibriumError::TooFewSamples { min: 50, got: n });
    }
    let mut rows = Vec::new();
    for i in 0..n {
        let level = input_range.0 + (input_range.1 - input_range.0) * i as f64 / (n - 1) as f64;
        let rep = find_equilibria(model, level, interval, grid_n)?;
        if let Some(stability) = rep.continuum_stability {
            rows.push(DiagramRow { level, x: None, stability });
        }
        rows.extend(rep.equilibria.iter().map(|e| DiagramRow { level, x: Some(e.x()), stability: e.stability }));
    }
    Ok(rows)
}

pub fn write_equilibria_csv<W: Write>(reports: &[EquilibriumReport], order: Order, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match order {
        Order::First => w.write_record(["U", "x1", "stability", "fx_or_eig_re1", "eig_re2"])?,
        Order::Second => w.write_record(["U", "x1", "x2", "stability", "fx_or_eig_re1", "eig_re2"])?,
    }
    for rep in reports {
        for e in &rep.equilibria {
            let mut row: Vec<String> = e.state.iter().map(|&v| sig17(v)).collect();
            row.insert(0, sig17(rep.level));
            row.push(e.stability.name().to_string());
            let re = e.linearization.real_parts();
            row.push(sig17(re[0]));
            row.push(re.get(1).map(|&v| sig17(v)).unwrap_or_default());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagram_csv<W: Write>(rows: &[DiagramRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["U", "x", "stability"])?;
    for r in rows {
        let stab = match r.x {
            Some(_) => r.stability.name().to_string(),
            None => format!("continuum_{}", r.stability.name()),
        };
        w.write_record([sig17(r.level), r.x.map(sig17).unwrap_or_default(), stab])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, preset, Overrides};

    fn xs(rep: &EquilibriumReport) -> Vec<f64> {
        rep.equilibria.iter().map(Equilibrium::x).collect()
    }

    fn labels(rep: &EquilibriumReport) -> Vec<Stability> {
        rep.equilibria.iter().map(|e| e.stability).collect()
    }

    #[test]
    fn cubic_at_zero_input() {
        let m = preset("cubic", &Overrides::new()).unwrap();
        let rep = find_equilibria(&m, 0.0, (-3.0, 3.0), 1000).unwrap();
        let got = xs(&rep);
        assert_eq!(got.len(), 3);
        for (g, want) in got.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((g - want).abs() < 1e-12);
        }
        use Stability::*;
        assert_eq!(labels(&rep), vec![Stable, Unstable, Stable]);
        assert!(rep.multistable);
    }

    #[test]
    fn linear_first_order_single_root() {
        let m = build_model(Order::First, "-0.1*x + u", &[1.0]).unwrap();
        let rep = find_equilibria(&m, 0.5, (-10.0, 10.0), 1000).unwrap();
        assert_eq!(xs(&rep).len(), 1);
        assert!((xs(&rep)[0] - 5.0).abs() < 1e-10, "{:?}", xs(&rep));
        assert_eq!(rep.equilibria[0].stability, Stability::Stable);
    }

    #[test]
    fn pendulum_equilibria() {
        let m = preset("pendulum_like", &Overrides::new()).unwrap();
        let rep = find_equilibria(&m, 0.0, (-1.0, 4.0), 1000).unwrap();
        let got = xs(&rep);
        assert_eq!(got.len(), 2);
        assert!(got[0].abs() < 1e-12 && (got[1] - std::f64::consts::PI).abs() < 1e-10);
        assert_eq!(labels(&rep), vec![Stability::Stable, Stability::Unstable]);
        assert!(rep.equilibria.iter().all(|e| e.state[1] == 0.0));
    }

    #[test]
    fn poles_are_not_roots() {
        let m = build_model(Order::First, "1/x", &[1.0]).unwrap();
        assert!(find_equilibria(&m, 0.0, (-1.0, 1.3), 101).unwrap().equilibria.is_empty());
    }

    #[test]
    fn exact_grid_zero_found_once() {
        let m = build_model(Order::First, "x - u", &[0.0]).unwrap();
        let rep = find_equilibria(&m, 0.0, (-1.0, 1.0), 101).unwrap();
        assert_eq!(xs(&rep), vec![0.0]);
    }

    #[test]
    fn continuum_stability_follows_alpha_sign() {
        let mut o = Overrides::new();
        o.insert("alpha".into(), "-1".into());
        let bad = preset("duhem", &o).unwrap();
        let rep = find_equilibria(&bad, 0.3, (-5.0, 5.0), 200).unwrap();
        assert!(rep.continuum && rep.equilibria.is_empty());
        assert_eq!(rep.continuum_stability, Some(Stability::Unstable));
        assert!(!rep.multistable);
        let good = preset("duhem", &Overrides::new()).unwrap();
        let rep = find_equilibria(&good, 0.3, (-5.0, 5.0), 200).unwrap();
        assert_eq!(rep.continuum_stability, Some(Stability::Stable));
        assert!(rep.multistable);
    }

    #[test]
    fn time_varying_without_limit_refused() {
        let m = preset("folode_t", &Overrides::new()).unwrap();
        assert!(matches!(
            find_equilibria(&m, 0.0, (-1.0, 1.0), 200),
            Err(EquilibriumError::Model(ModelError::TimeVarying))
        ));
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = preset("cubic", &Overrides::new()).unwrap();
        assert!(matches!(find_equilibria(&m, 0.0, (1.0, 1.0), 200), Err(EquilibriumError::BadInterval(..))));
        assert!(matches!(find_equilibria(&m, 0.0, (0.0, 1.0), 10), Err(EquilibriumError::GridTooSmall(10))));
    }

    #[test]
    fn eigenvalues_of_damped_oscillator() {
        // y'' = -y' - y: lambda = (-1 +- i sqrt 3)/2
        let l = companion_eigenvalues(-1.0, -1.0);
        assert!((l[0].re + 0.5).abs() < 1e-15);
        assert!((l[0].im.abs() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(Linearization::Eigenvalues(l).stability(), Stability::Stable);
        assert_eq!(Linearization::Slope(0.0).stability(), Stability::Marginal);
    }

    #[test]
    fn diagram_has_three_branches_inside_fold() {
        let m = preset("cubic", &Overrides::new()).unwrap();
        let rows = bifurcation_diagram(&m, (-1.0, 1.0), 51, (-3.0, 3.0), 600).unwrap();
        let at = |u: f64| rows.iter().filter(|r| (r.level - u).abs() < 1e-12).count();
        assert_eq!(at(0.0), 3);
        assert_eq!(at(1.0), 1);
        assert_eq!(at(-0.6), 1);
        let mut buf = Vec::new();
        write_diagram_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("U,x,stability\n"));
    }
}
