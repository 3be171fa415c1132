//! Planar polyline geometry on closed point sequences.
//!
//! Every function treats `points` as a closed polygon: the segment from the
//! last point back to the first is part of the curve.

pub type Point = (f64, f64);

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Shoelace area; positive for counter-clockwise traversal.
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    // Shifting to the first point keeps the sum well conditioned far from
    // the origin.
    let (ox, oy) = points[0];
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = points[i];
        let (x1, y1) = points[(i + 1) % n];
        s += (x0 - ox) * (y1 - oy) - (x1 - ox) * (y0 - oy);
    }
    0.5 * s
}

/// Largest distance between two points of the curve: rotating calipers on
/// the convex hull.
pub fn diameter(points: &[Point]) -> f64 {
    let hull = convex_hull(points);
    let h = hull.len();
    let dist = |a: Point, b: Point| (a.0 - b.0).hypot(a.1 - b.1);
    match h {
        0 | 1 => return 0.0,
        2 => return dist(hull[0], hull[1]),
        _ => {}
    }
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..h {
        let ni = (i + 1) % h;
        // Advance the antipodal vertex while it moves away from edge i.
        while orient(hull[i], hull[ni], hull[(j + 1) % h]).abs() > orient(hull[i], hull[ni], hull[j]).abs() {
            j = (j + 1) % h;
        }
        best = best.max(dist(hull[i], hull[j])).max(dist(hull[ni], hull[j]));
    }
    best
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.iter().copied().filter(|q| q.0.is_finite() && q.1.is_finite()).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// A proper crossing between segments `i` and `j` (segment `k` runs from
/// point `k` to point `k + 1`, cyclically).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub i: usize,
    pub j: usize,
    /// Position along segment `i`, in (0, 1).
    pub s: f64,
    /// Position along segment `j`, in (0, 1).
    pub r: f64,
    pub at: Point,
}

/// All transverse crossings between non-adjacent segments, `i < j`.
///
/// Touching and collinear overlaps are not crossings: every orientation
/// test must be strictly nonzero.
pub fn crossings(points: &[Point]) -> Vec<Crossing> {
    let n = points.len();
    if n < 4 {
        return Vec::new();
    }
    let seg = |k: usize| (points[k], points[(k + 1) % n]);
    let mut order: Vec<(f64, f64, usize)> = (0..n)
        .map(|k| {
            let (a, b) = seg(k);
            (a.0.min(b.0), a.0.max(b.0), k)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut out = Vec::new();
    for (ia, &(_, hi_a, ka)) in order.iter().enumerate() {
        for &(lo_b, _, kb) in &order[ia + 1..] {
            if lo_b > hi_a {
                break;
            }
            let (i, j) = (ka.min(kb), ka.max(kb));
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (p, p2) = seg(i);
            let (q, q2) = seg(j);
            let d1 = orient(p, p2, q);
            let d2 = orient(p, p2, q2);
            let d3 = orient(q, q2, p);
            let d4 = orient(q, q2, p2);
            if d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0 {
                continue;
            }
            if (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) {
                let s = d3 / (d3 - d4);
                let r = d1 / (d1 - d2);
                let at = (p.0 + s * (p2.0 - p.0), p.1 + s * (p2.1 - p.1));
                out.push(Crossing { i, j, s, r, at });
            }
        }
    }
    out.sort_by(|a, b| a.i.cmp(&b.i).then(a.j.cmp(&b.j)));
    out
}

/// Area enclosed with multiplicity ignored: the integral of |winding number|
/// over the plane.
///
/// For a curve that pinches into lobes this is the sum of the lobe areas,
/// whatever their orientation; for a simple curve it is `|signed_area|`. It
/// does not depend on where the traversal starts or in which direction.
///
/// Computed exactly by vertical slabs: between consecutive vertex or
/// crossing abscissae no two segments cross, so each slab is a stack of
/// trapezoids whose winding number is the running sum of the x-directions
/// of the segments below.
pub fn geometric_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.extend(crossings(points).iter().map(|c| c.at.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    // (x_lo, x_hi, segment index), by x_lo.
    let mut segs: Vec<(f64, f64, usize)> = (0..n)
        .filter_map(|k| {
            let (a, b) = (points[k], points[(k + 1) % n]);
            (a.0 != b.0).then(|| (a.0.min(b.0), a.0.max(b.0), k))
        })
        .collect();
    segs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut next = 0;
    let mut active: Vec<(f64, f64, usize)> = Vec::new();
    let mut stack: Vec<(f64, i32)> = Vec::new();
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let mid = 0.5 * (x0 + x1);
        while next < segs.len() && segs[next].0 < x1 {
            active.push(segs[next]);
            next += 1;
        }
        active.retain(|s| s.1 > x0);
        stack.clear();
        for &(_, _, k) in &active {
            let (a, b) = (points[k], points[(k + 1) % n]);
            if a.0.min(b.0) <= x0 && a.0.max(b.0) >= x1 {
                let y = a.1 + (b.1 - a.1) * (mid - a.0) / (b.0 - a.0);
                stack.push((y, if b.0 > a.0 { 1 } else { -1 }));
            }
        }
        stack.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut winding = 0;
        for pair in stack.windows(2) {
            winding += pair[0].1;
            if winding != 0 {
                total += winding.unsigned_abs() as f64 * (pair[1].0 - pair[0].0) * (x1 - x0);
            }
        }
    }
    total
}

/// `count` points equally spaced by arc length along the closed curve,
/// starting at `points[start]`.
pub fn resample(points: &[Point], start: usize, count: usize) -> Vec<Point> {
    let n = points.len();
    let ring: Vec<Point> = (0..=n).map(|k| points[(start + k) % n]).collect();
    let mut cum = vec![0.0; ring.len()];
    for k in 1..ring.len() {
        cum[k] = cum[k - 1] + (ring[k].0 - ring[k - 1].0).hypot(ring[k].1 - ring[k - 1].1);
    }
    let total = cum[ring.len() - 1];
    if total == 0.0 {
        return vec![ring[0]; count];
    }
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for m in 0..count {
        let target = total * m as f64 / count as f64;
        while seg + 2 < ring.len() && cum[seg + 1] <= target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let f = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        let (a, b) = (ring[seg], ring[seg + 1]);
        out.push((a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1)));
    }
    out
}
