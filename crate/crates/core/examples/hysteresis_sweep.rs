//! Frequency sweep, verdict and jump matching for a bistable model.

use hysteresis::equilibrium::{solve_bifurcations, NewtonOptions};
use hysteresis::model::{preset, Overrides};
use hysteresis::verdict::{classify, frequency_sweep, jump_bifurcation_match, SweepOptions, Thresholds};

fn main() {
    let model = preset("cubic", &Overrides::new()).expect("known preset");
    let sweep = frequency_sweep(&model, model.signal_kind, &[2.0, 0.5, 0.1, 0.02], &SweepOptions::default()).expect("sweep");
    for p in &sweep.points {
        if let Some(lp) = p.closed_loop() {
            println!("w = {:<5} area {:.4}  jumps {}", p.omega, lp.geometric_area, lp.jumps.len());
        }
    }
    let v = classify(&sweep, &Thresholds::default());
    println!("verdict {}, rate {}: {}", v.verdict.name(), v.rate.name(), v.reason);

    let bif = solve_bifurcations(&model, model.input_range, model.search_interval, &NewtonOptions::default()).expect("bifurcations");
    for m in jump_bifurcation_match(&sweep, &bif).rows {
        println!("w = {:<5} jump at u = {:+.4}, nearest bifurcation {:+.4}", m.omega, m.u_at_jump, m.bifurcation);
    }
}
