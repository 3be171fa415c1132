//! Saddle-node input levels via Newton's method, plus the multistability check.

use hysteresis::equilibrium::{multistability_check, solve_bifurcations, NewtonOptions};
use hysteresis::model::{preset, Overrides};

fn main() {
    for name in ["cubic", "budworm", "sonode35"] {
        let model = preset(name, &Overrides::new()).expect("known preset");
        let set = solve_bifurcations(&model, model.input_range, model.search_interval, &NewtonOptions::default())
            .expect("valid ranges");
        println!("{name}: bifurcation levels {:?}", set.levels(1e-6));
        let (lo, hi) = model.input_range;
        let levels: Vec<f64> = (0..=20).map(|i| lo + (hi - lo) * i as f64 / 20.0).collect();
        let verdict = multistability_check(&model, &levels, model.search_interval, 2000).expect("levels given");
        println!("{name}: {verdict:?}");
    }
}
