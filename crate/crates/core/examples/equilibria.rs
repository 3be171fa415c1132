//! Equilibria and their stability for the budworm model at several inputs.

use hysteresis::equilibrium::find_equilibria;
use hysteresis::model::{preset, Overrides};

fn main() {
    let model = preset("budworm", &Overrides::new()).expect("known preset");
    for level in [0.1, 0.3, 0.6] {
        let rep = find_equilibria(&model, level, model.search_interval, 2000).expect("valid search");
        let found: Vec<String> = rep.equilibria.iter().map(|e| format!("{:.5} ({})", e.x(), e.stability.name())).collect();
        println!("U = {level}: {}  multistable {}", found.join(", "), rep.multistable);
    }
}
