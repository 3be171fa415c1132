//! Checks shared by the property suites and the acceptance run.
#![allow(dead_code)]

use hysteresis::equilibrium::{find_equilibria, Linearization, Stability};
use hysteresis::expr::{Env, Expr, Var};
use hysteresis::integrator::{integrate, SimParams};
use hysteresis::loopanal::geometry::{self, Point};
use hysteresis::loopanal::{loop_distance, LoopOptions, SteadyLoop};
use hysteresis::model::{build_model, preset, ModelSpec, Order, Overrides, PRESETS};
use hysteresis::signal::Signal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central difference of `e` in `var`, fourth order.
pub fn central_difference(e: &Expr, var: Var, env: &Env, h: f64) -> Option<f64> {
    let at = |d: f64| e.eval(&env.with(var, env.get(var) + d)).ok();
    Some((8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h))
}

/// Symbolic and finite-difference derivatives agree to a mixed tolerance.
pub fn derivative_agrees(e: &Expr, var: Var, env: &Env) -> Result<(), String> {
    let d = e.differentiate(var).simplify();
    let Ok(sym) = d.eval(env) else { return Ok(()) };
    let Some(fd) = central_difference(e, var, env, 1e-4) else { return Ok(()) };
    if !sym.is_finite() || !fd.is_finite() {
        return Ok(());
    }
    let tol = 1e-5 * (1.0 + sym.abs());
    if (sym - fd).abs() <= tol {
        Ok(())
    } else {
        Err(format!("d/d{} of {}: symbolic {sym}, finite difference {fd}", var.name(), e.to_text()))
    }
}

/// A fixed set of smooth expressions over every variable.
pub fn derivative_corpus() -> Vec<&'static str> {
    vec![
        "x1 - x1^3 + u",
        "u*x1*(1 - x1/25) - x1^2/(1 + x1^2)",
        "-x2 - 10*sin(x1) + u",
        "-5*x2 - x1^2*(x1 + 1) + u",
        "-x2 - 20*x1^3*(x1 - 0.3)*(x1 + 0.5) + u",
        "exp(-t)*x1*cos(u) + du^2*x2",
        "sin(x1*x2)/(2 + cos(t*u))",
        "(x1 + u)^4 - exp(x2/3)*du",
    ]
}

pub fn derivative_corpus_check(samples: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for text in derivative_corpus() {
        let e = hysteresis::expr::parse(text).map_err(|e| e.to_string())?;
        for _ in 0..samples {
            let env = Env {
                t: rng.gen_range(0.0..5.0),
                x1: rng.gen_range(-2.0..2.0),
                x2: rng.gen_range(-2.0..2.0),
                u: rng.gen_range(-1.0..1.0),
                du: rng.gen_range(-1.0..1.0),
            };
            for var in [Var::T, Var::X1, Var::X2, Var::U, Var::Du] {
                derivative_agrees(&e, var, &env)?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Max error of RK4 on `x' = -x + sin t`, `x(0) = 0`, over one period.
pub fn rk4_benchmark_error(steps: usize) -> f64 {
    let m = build_model(Order::First, "-x1 + u", &[0.0]).unwrap();
    let tr = integrate(&m, &Signal::sine(1.0), &SimParams::new(1, steps)).unwrap();
    // x = (sin t - cos t + e^-t) / 2
    tr.times
        .iter()
        .zip(tr.x1())
        .map(|(&t, x)| (x - 0.5 * (t.sin() - t.cos() + (-t).exp())).abs())
        .fold(0.0, f64::max)
}

pub fn rk4_order_factor() -> f64 {
    rk4_benchmark_error(64) / rk4_benchmark_error(128)
}

/// Draws `count` distinct roots in [-3, 3] at least `gap` apart.
pub fn simple_roots(rng: &mut ChaCha8Rng, count: usize, gap: f64) -> Vec<f64> {
    let mut roots: Vec<f64> = Vec::new();
    while roots.len() < count {
        let r: f64 = rng.gen_range(-2.9..2.9);
        if roots.iter().all(|q| (q - r).abs() >= gap) {
            roots.push(r);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// For `x' = s * prod (x - r_i)`, consecutive equilibria alternate in
/// stability and the search recovers every root.
pub fn alternation_check(models: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..models {
        let count = rng.gen_range(2..=5);
        let roots = simple_roots(&mut rng, count, 0.15);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let factors: Vec<String> = roots.iter().map(|r| format!("(x1 - ({r:?}))")).collect();
        let text = format!("{sign:?}*{} + 0*u", factors.join("*"));
        let m = build_model(Order::First, &text, &[0.0]).map_err(|e| e.to_string())?;
        let rep = find_equilibria(&m, 0.0, (-3.0, 3.0), 2000).map_err(|e| e.to_string())?;
        let found: Vec<f64> = rep.equilibria.iter().map(|e| e.x()).collect();
        if found.len() != roots.len() || found.iter().zip(&roots).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(format!("model {k} ({text}): roots {roots:?}, found {found:?}"));
        }
        let stab: Vec<Stability> = rep.equilibria.iter().map(|e| e.stability).collect();
        if stab.contains(&Stability::Marginal) || stab.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("model {k} ({text}): stabilities {stab:?} do not alternate"));
        }
        // The largest root is stable iff the leading coefficient is negative.
        let top_stable = *stab.last().unwrap() == Stability::Stable;
        if top_stable != (sign < 0.0) {
            return Err(format!("model {k} ({text}): largest root labelled {:?}", stab.last()));
        }
    }
    Ok(())
}

/// The autonomous system used for equilibrium analysis of `m`.
pub fn analysis_model(m: &ModelSpec) -> Option<ModelSpec> {
    let rhs = m.analysis_rhs().ok()?.clone();
    let mut a = m.clone();
    a.rhs = rhs;
    a.time_varying = false;
    a.limit_rhs = None;
    Some(a)
}

/// Outcome of one perturbation experiment.
#[derive(Debug)]
pub struct Perturbed {
    pub preset: &'static str,
    pub level: f64,
    pub x: f64,
    pub label: Stability,
    pub start: f64,
    pub end: f64,
}

impl Perturbed {
    pub fn agrees(&self) -> bool {
        match self.label {
            Stability::Stable => self.end < 0.5 * self.start,
            Stability::Unstable => self.end > 2.0 * self.start,
            Stability::Marginal => true,
        }
    }
}

fn slowest_rate(lin: &Linearization) -> f64 {
    lin.real_parts().iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min)
}

/// Simulates every catalog equilibrium from a small offset and records
/// whether the offset shrinks or grows.
pub fn perturbation_experiments(levels_per_preset: usize) -> Vec<Perturbed> {
    let mut out = Vec::new();
    for info in PRESETS {
        let full = preset(info.name, &Overrides::new()).unwrap();
        let Some(m) = analysis_model(&full) else { continue };
        for i in 0..levels_per_preset {
            let (lo, hi) = m.input_range;
            let level = lo + (hi - lo) * (i as f64 + 0.5) / levels_per_preset as f64;
            let Ok(rep) = find_equilibria(&m, level, m.search_interval, 2000) else { continue };
            for eq in &rep.equilibria {
                let rate = slowest_rate(&eq.linearization);
                if !(rate > 1e-3) {
                    continue;
                }
                let delta = 1e-4 * (1.0 + eq.x().abs());
                let duration = (12.0 / rate).min(5000.0);
                for side in [-1.0, 1.0] {
                    let mut start = m.clone();
                    start.initial_state[0] = eq.x() + side * delta;
                    let params = SimParams { periods: 1, steps_per_period: 20_000, duration, ..SimParams::default() };
                    let Ok(tr) = integrate(&start, &Signal::constant(level), &params) else { continue };
                    let last = tr.state(tr.len() - 1);
                    let end = if tr.diverged() {
                        f64::INFINITY
                    } else {
                        let dx2 = last.get(1).copied().unwrap_or(0.0);
                        (last[0] - eq.x()).hypot(dx2)
                    };
                    out.push(Perturbed { preset: info.name, level, x: eq.x(), label: eq.stability, start: delta, end });
                }
            }
        }
    }
    out
}

pub fn random_polygon(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect()
}

/// Areas are unchanged by translation, and reversal flips only the sign of
/// the signed area.
pub fn area_invariances(points: &[Point], shift: Point) -> Result<(), String> {
    let signed = geometry::signed_area(points);
    let geo = geometry::geometric_area(points);
    let moved: Vec<Point> = points.iter().map(|p| (p.0 + shift.0, p.1 + shift.1)).collect();
    let rev: Vec<Point> = points.iter().rev().copied().collect();
    let scale = 1.0 + signed.abs() + geo;
    let tol = 1e-9 * scale * (1.0 + shift.0.abs() + shift.1.abs());
    let checks = [
        ("translated signed", geometry::signed_area(&moved), signed),
        ("translated geometric", geometry::geometric_area(&moved), geo),
        ("reversed signed", -geometry::signed_area(&rev), signed),
        ("reversed geometric", geometry::geometric_area(&rev), geo),
    ];
    for (name, got, want) in checks {
        if (got - want).abs() > tol {
            return Err(format!("{name}: {got} vs {want}"));
        }
    }
    if geo < signed.abs() - 1e-9 * scale {
        return Err(format!("geometric {geo} < |signed| {}", signed.abs()));
    }
    Ok(())
}

/// A smooth closed curve with random harmonics, one period of `n` samples.
pub fn random_loop(rng: &mut ChaCha8Rng, n: usize) -> SteadyLoop {
    let c: [f64; 4] = [rng.gen_range(0.2..1.0), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(0.0..6.0)];
    let pts: Vec<Point> = (0..=n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            (t.sin(), c[0] * (t + c[3]).sin() + c[1] * (2.0 * t).cos() + c[2] * (3.0 * t).sin())
        })
        .collect();
    SteadyLoop::from_points(pts, &LoopOptions::default())
}

pub fn distance_laws(a: &SteadyLoop, b: &SteadyLoop) -> Result<(), String> {
    let (ab, _) = loop_distance(a, b);
    let (ba, _) = loop_distance(b, a);
    let (aa, _) = loop_distance(a, a);
    if (ab - ba).abs() > 1e-12 * (1.0 + ab) {
        return Err(format!("asymmetric: {ab} vs {ba}"));
    }
    if aa != 0.0 {
        return Err(format!("self distance {aa}"));
    }
    if ab < 0.0 {
        return Err(format!("negative distance {ab}"));
    }
    Ok(())
}
