//! Bitmap to path model: binarize, extract contours with marching squares,
//! simplify, then fit piecewise cubics between corners.

use std::collections::HashMap;

use super::path::{CubicSegment, PathModel, Point, Subpath, CANVAS};
use super::{Grid, SIDE};
use crate::error::{Error, Result};

/// Polyline reduction tolerance in canvas units.
pub const SIMPLIFY_TOLERANCE: f64 = 0.5;
/// Maximum deviation of a fitted cubic from the contour.
pub const FIT_TOLERANCE: f64 = 0.5;
/// Turning angle above which a simplified vertex is kept as a corner.
const CORNER_ANGLE: f64 = 80.0 * std::f64::consts::PI / 180.0;

pub fn trace_bitmap(grid: &Grid, threshold: u8) -> Result<PathModel> {
    if threshold == 0 || threshold == 255 {
        return Err(Error::invalid(format!(
            "trace threshold must lie in (0, 255), got {threshold}"
        )));
    }
    let ink = |x: i64, y: i64| -> bool {
        if x < 0 || y < 0 || x >= SIDE as i64 || y >= SIDE as i64 {
            false
        } else {
            grid.get(x as usize, y as usize) >= threshold
        }
    };
    if !grid.pixels().iter().any(|&v| v >= threshold) {
        return Err(Error::NothingToTrace);
    }

    let contours = marching_squares(&ink);
    let mut subpaths = Vec::with_capacity(contours.len());
    for contour in contours {
        let segments = fit_contour(&contour);
        subpaths.push(Subpath::from_segments(&segments)?);
    }
    PathModel::new(subpaths)
}

/// Closed contours on the pixel-centre lattice. Points are stored doubled
/// so edge midpoints are integral. Ink is kept on a consistent side, so
/// outer boundaries and holes wind in opposite directions.
fn marching_squares(ink: &dyn Fn(i64, i64) -> bool) -> Vec<Vec<Point>> {
    let n = SIDE as i64;
    // edge midpoints in doubled lattice coordinates of cell (i, j)
    let top = |i: i64, j: i64| (2 * i + 1, 2 * j);
    let right = |i: i64, j: i64| (2 * i + 2, 2 * j + 1);
    let bottom = |i: i64, j: i64| (2 * i + 1, 2 * j + 2);
    let left = |i: i64, j: i64| (2 * i, 2 * j + 1);

    let mut next: HashMap<(i64, i64), (i64, i64)> = HashMap::new();
    let mut order: Vec<(i64, i64)> = Vec::new();
    let mut link = |a: (i64, i64), b: (i64, i64)| {
        next.insert(a, b);
        order.push(a);
    };

    for j in -1..n {
        for i in -1..n {
            let tl = ink(i, j);
            let tr = ink(i + 1, j);
            let br = ink(i + 1, j + 1);
            let bl = ink(i, j + 1);
            // clockwise walk: top, right, bottom, left edges;
            // a segment runs from a background->ink crossing to the
            // following ink->background crossing
            let edges = [
                (tl, tr, top(i, j)),
                (tr, br, right(i, j)),
                (br, bl, bottom(i, j)),
                (bl, tl, left(i, j)),
            ];
            let enters: Vec<_> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| !e.0 && e.1)
                .map(|(k, _)| k)
                .collect();
            let exits: Vec<_> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.0 && !e.1)
                .map(|(k, _)| k)
                .collect();
            match (enters.len(), exits.len()) {
                (0, 0) => {}
                (1, 1) => link(edges[enters[0]].2, edges[exits[0]].2),
                (2, 2) => {
                    // saddle: join the two ink corners diagonally
                    for &e in &enters {
                        let x = (e + 3) % 4;
                        link(edges[e].2, edges[x].2);
                    }
                }
                _ => unreachable!("inconsistent marching squares cell"),
            }
        }
    }

    let to_point = |(x, y): (i64, i64)| {
        // lattice index k sits at pixel centre k + 0.5
        Point::new(x as f64 / 2.0 + 0.5, y as f64 / 2.0 + 0.5)
    };

    let mut visited = std::collections::HashSet::new();
    let mut contours = Vec::new();
    for start in order {
        if visited.contains(&start) {
            continue;
        }
        let mut loop_pts = Vec::new();
        let mut cur = start;
        loop {
            visited.insert(cur);
            loop_pts.push(to_point(cur));
            cur = next[&cur];
            if cur == start {
                break;
            }
        }
        contours.push(loop_pts);
    }
    contours
}

fn fit_contour(dense: &[Point]) -> Vec<CubicSegment> {
    let n = dense.len();
    let keep = simplify_closed(dense, SIMPLIFY_TOLERANCE);
    if keep.len() < 3 || n <= 8 {
        return (0..n)
            .map(|k| CubicSegment::line(dense[k], dense[(k + 1) % n]))
            .collect();
    }

    let m = keep.len();
    let vtx = |k: usize| dense[keep[k % m]];
    let corners: Vec<usize> = (0..m)
        .filter(|&k| {
            let a = vtx(k + m - 1);
            let b = vtx(k);
            let c = vtx(k + 1);
            let d1 = b.sub(a).normalized();
            let d2 = c.sub(b).normalized();
            d1.dot(d2).clamp(-1.0, 1.0).acos() > CORNER_ANGLE
        })
        .collect();

    // breakpoints as indices into `keep`, with outgoing/incoming tangents
    let (breaks, smooth): (Vec<usize>, bool) = if corners.is_empty() {
        (vec![0, m / 2], true)
    } else {
        (corners, false)
    };

    let tangent_out = |k: usize| -> Point {
        if smooth {
            vtx(k + 1).sub(vtx(k + m - 1)).normalized()
        } else {
            vtx(k + 1).sub(vtx(k)).normalized()
        }
    };
    let tangent_in = |k: usize| -> Point {
        if smooth {
            vtx(k + m - 1).sub(vtx(k + 1)).normalized()
        } else {
            vtx(k + m - 1).sub(vtx(k)).normalized()
        }
    };

    let mut segments = Vec::new();
    for (bi, &kb) in breaks.iter().enumerate() {
        let ke = breaks[(bi + 1) % breaks.len()];
        let from = keep[kb];
        let to = keep[ke];
        let len = if to > from { to - from } else { to + n - from };
        let span: Vec<Point> = (0..=len).map(|s| dense[(from + s) % n]).collect();
        let t1 = tangent_out(kb);
        let t2 = tangent_in(ke);
        fit_cubic(&span, t1, t2, FIT_TOLERANCE, 0, &mut segments);
    }

    // clamp controls to the canvas; anchors come from the lattice and are inside already
    for s in &mut segments {
        for p in [&mut s.c1, &mut s.c2] {
            p.x = p.x.clamp(0.0, CANVAS);
            p.y = p.y.clamp(0.0, CANVAS);
        }
    }
    segments
}

/// Douglas–Peucker on a closed loop; returns kept indices in order.
fn simplify_closed(pts: &[Point], tol: f64) -> Vec<usize> {
    let n = pts.len();
    if n <= 4 {
        return (0..n).collect();
    }
    let far = (1..n)
        .max_by(|&a, &b| pts[a].dist(pts[0]).total_cmp(&pts[b].dist(pts[0])))
        .unwrap_or(n / 2);
    let at = |i: usize| pts[i % n];
    let mut keep = vec![0, far];
    rdp(&at, 0, far, tol, &mut keep);
    rdp(&at, far, n, tol, &mut keep);
    keep.retain(|&i| i < n);
    keep.sort_unstable();
    keep.dedup();
    keep
}

fn rdp(at: &dyn Fn(usize) -> Point, a: usize, b: usize, tol: f64, keep: &mut Vec<usize>) {
    if b <= a + 1 {
        return;
    }
    let (pa, pb) = (at(a), at(b));
    let mut best = (0.0, a);
    for i in a + 1..b {
        let d = point_line_distance(at(i), pa, pb);
        if d > best.0 {
            best = (d, i);
        }
    }
    if best.0 > tol {
        keep.push(best.1);
        rdp(at, a, best.1, tol, keep);
        rdp(at, best.1, b, tol, keep);
    }
}

fn point_line_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len = ab.norm();
    if len == 0.0 {
        return p.dist(a);
    }
    (ab.x * (p.y - a.y) - ab.y * (p.x - a.x)).abs() / len
}

/// Least-squares cubic fit with recursive splitting at the worst point.
/// `t1` points from the first point into the curve, `t2` from the last
/// point back into the curve.
fn fit_cubic(
    pts: &[Point],
    t1: Point,
    t2: Point,
    tol: f64,
    depth: u32,
    out: &mut Vec<CubicSegment>,
) {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if pts.len() == 2 || depth > 12 {
        if depth > 12 {
            for w in pts.windows(2) {
                out.push(CubicSegment::line(w[0], w[1]));
            }
        } else {
            let d = first.dist(last) / 3.0;
            out.push(CubicSegment::new(
                first,
                first.add(t1.scale(d)),
                last.add(t2.scale(d)),
                last,
            ));
        }
        return;
    }

    let mut u = chord_params(pts);
    let mut bez = generate_bezier(pts, &u, t1, t2);
    let (mut err, mut split) = max_error(pts, &bez, &u);
    let tol2 = tol * tol;
    if err <= tol2 {
        out.push(bez);
        return;
    }
    if err <= 4.0 * tol2 {
        for _ in 0..4 {
            reparameterize(pts, &bez, &mut u);
            bez = generate_bezier(pts, &u, t1, t2);
            let (e, s) = max_error(pts, &bez, &u);
            err = e;
            split = s;
            if err <= tol2 {
                out.push(bez);
                return;
            }
        }
    }

    let split = split.clamp(1, pts.len() - 2);
    let lo = split.saturating_sub(2);
    let hi = (split + 2).min(pts.len() - 1);
    let mut center = pts[lo].sub(pts[hi]).normalized();
    if center.norm() == 0.0 {
        center = pts[split - 1].sub(pts[split + 1]).normalized();
    }
    fit_cubic(&pts[..=split], t1, center, tol, depth + 1, out);
    fit_cubic(&pts[split..], center.scale(-1.0), t2, tol, depth + 1, out);
}

fn chord_params(pts: &[Point]) -> Vec<f64> {
    let mut u = Vec::with_capacity(pts.len());
    u.push(0.0);
    for w in pts.windows(2) {
        let prev = *u.last().unwrap();
        u.push(prev + w[0].dist(w[1]));
    }
    let total = *u.last().unwrap();
    if total > 0.0 {
        for v in &mut u {
            *v /= total;
        }
    }
    u
}

fn generate_bezier(pts: &[Point], u: &[f64], t1: Point, t2: Point) -> CubicSegment {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    let (mut c00, mut c01, mut c11, mut x0, mut x1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, &t) in pts.iter().zip(u) {
        let mt = 1.0 - t;
        let b0 = mt * mt * mt;
        let b1 = 3.0 * mt * mt * t;
        let b2 = 3.0 * mt * t * t;
        let b3 = t * t * t;
        let a1 = t1.scale(b1);
        let a2 = t2.scale(b2);
        c00 += a1.dot(a1);
        c01 += a1.dot(a2);
        c11 += a2.dot(a2);
        let tmp = p.sub(first.scale(b0 + b1).add(last.scale(b2 + b3)));
        x0 += a1.dot(tmp);
        x1 += a2.dot(tmp);
    }
    let det = c00 * c11 - c01 * c01;
    let seg_len = first.dist(last);
    let eps = 1e-6 * seg_len;
    let (mut alpha1, mut alpha2) = if det.abs() > 1e-12 {
        ((x0 * c11 - x1 * c01) / det, (c00 * x1 - c01 * x0) / det)
    } else {
        (0.0, 0.0)
    };
    if alpha1 < eps || alpha2 < eps || !alpha1.is_finite() || !alpha2.is_finite() {
        alpha1 = seg_len / 3.0;
        alpha2 = seg_len / 3.0;
    }
    CubicSegment::new(
        first,
        first.add(t1.scale(alpha1)),
        last.add(t2.scale(alpha2)),
        last,
    )
}

fn max_error(pts: &[Point], bez: &CubicSegment, u: &[f64]) -> (f64, usize) {
    let mut worst = (0.0, pts.len() / 2);
    for i in 1..pts.len() - 1 {
        let d = bez.eval(u[i]).sub(pts[i]);
        let e = d.dot(d);
        if e > worst.0 {
            worst = (e, i);
        }
    }
    worst
}

/// One Newton–Raphson step per parameter towards the closest curve point.
fn reparameterize(pts: &[Point], bez: &CubicSegment, u: &mut [f64]) {
    let d1 = [
        bez.c1.sub(bez.start).scale(3.0),
        bez.c2.sub(bez.c1).scale(3.0),
        bez.end.sub(bez.c2).scale(3.0),
    ];
    let d2 = [d1[1].sub(d1[0]).scale(2.0), d1[2].sub(d1[1]).scale(2.0)];
    for (p, t) in pts.iter().zip(u.iter_mut()) {
        let mt = 1.0 - *t;
        let q = bez.eval(*t);
        let q1 = d1[0]
            .scale(mt * mt)
            .add(d1[1].scale(2.0 * mt * *t))
            .add(d1[2].scale(*t * *t));
        let q2 = d2[0].scale(mt).add(d2[1].scale(*t));
        let diff = q.sub(*p);
        let num = diff.dot(q1);
        let den = q1.dot(q1) + diff.dot(q2);
        if den.abs() > 1e-12 {
            *t = (*t - num / den).clamp(0.0, 1.0);
        }
    }
}
