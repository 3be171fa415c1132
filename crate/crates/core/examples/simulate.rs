//! Drive a catalog model with a sine input and print the input-output curve.

use hysteresis::integrator::{integrate, to_io_curve, SimParams};
use hysteresis::model::{preset, Overrides};
use hysteresis::signal::Signal;

fn main() {
    let mut params = Overrides::new();
    params.insert("a".into(), "-0.5".into());
    let model = preset("folode_const_a", &params).expect("known preset");
    let traj = integrate(&model, &Signal::sine(0.5), &SimParams::new(3, 512)).expect("valid run");
    let io = to_io_curve(&traj);

    println!("model {}: {} samples, diverged {}", model.name, traj.len(), traj.diverged());
    for (u, x) in io.points.iter().step_by(128) {
        println!("u = {u:>9.5}  x = {x:>9.5}");
    }
    io.write_csv(std::io::stdout().lock()).expect("stdout");
}
