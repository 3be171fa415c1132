//! Areas, diameter and self-crossings of a figure-eight and a circle.

use hysteresis::loopanal::{detect_pinch, loop_area, loop_distance, LoopOptions, SteadyLoop};
use std::f64::consts::TAU;

fn curve(f: impl Fn(f64) -> (f64, f64)) -> Vec<(f64, f64)> {
    (0..=400).map(|k| f(TAU * k as f64 / 400.0)).collect()
}

fn main() {
    let eight = curve(|t| (t.sin(), (2.0 * t).sin()));
    let circle = curve(|t| (t.cos(), t.sin()));

    let (signed, geometric) = loop_area(&eight);
    println!("figure-eight: signed {signed:.4}, geometric {geometric:.4}, pinches {:?}", detect_pinch(&eight));
    let (signed, geometric) = loop_area(&circle);
    println!("circle: signed {signed:.4}, geometric {geometric:.4}");

    let opts = LoopOptions::default();
    let (a, b) = (SteadyLoop::from_points(eight, &opts), SteadyLoop::from_points(circle, &opts));
    println!("diameters {:.4} and {:.4}", a.diameter, b.diameter);
    let (distance, diameter) = loop_distance(&a, &b);
    println!("loop distance {distance:.4}, relative {:.4}", distance / diameter);
}
