//! Minimal SVG 1.1 rendering of an input-output curve.

use std::fmt::Write;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(lo <= hi) {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders `points` as a polyline with a frame, tick labels on both axes,
/// axis names `u` and `x`, and `title` on top.
pub fn loop_svg(points: &[(f64, f64)], title: &str) -> String {
    let (u0, u1) = bounds(points.iter().map(|p| p.0));
    let (x0, x1) = bounds(points.iter().map(|p| p.1));
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |u: f64| MARGIN + (u - u0) / (u1 - u0) * pw;
    let sy = |x: f64| HEIGHT - MARGIN - (x - x0) / (x1 - x0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (u, x) = (u0 + f * (u1 - u0), x0 + f * (x1 - x0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{:.3}</text>"#,
            sx(u),
            HEIGHT - MARGIN + 14.0,
            u
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{:.3}</text>"#,
            MARGIN - 4.0,
            sy(x) + 3.0,
            x
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">u</text>"#,
        MARGIN + pw / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 12 {:.2})">x</text>"#,
        MARGIN + ph / 2.0,
        MARGIN + ph / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let mut poly = String::new();
    for &(u, x) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = write!(poly, "{:.2},{:.2} ", sx(u), sy(x));
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.2"/>"#,
        poly.trim_end()
    );
    s.push_str("</svg>\n");
    s
}
