//! Bifurcation diagram of the cubic model written as CSV.

use hysteresis::equilibrium::{bifurcation_diagram, write_diagram_csv};
use hysteresis::model::{preset, Overrides};

fn main() {
    let model = preset("cubic", &Overrides::new()).expect("known preset");
    let rows = bifurcation_diagram(&model, model.input_range, 101, model.search_interval, 2000).expect("valid diagram");
    write_diagram_csv(&rows, std::io::stdout().lock()).expect("stdout");
}
