use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canvas side length in canvas units (one unit per output pixel).
pub const CANVAS: f64 = 28.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self.scale(1.0 / n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSegment {
    pub start: Point,
    pub c1: Point,
    pub c2: Point,
    pub end: Point,
}

impl CubicSegment {
    pub fn new(start: Point, c1: Point, c2: Point, end: Point) -> Self {
        Self { start, c1, c2, end }
    }

    /// Straight segment with controls at the thirds.
    pub fn line(a: Point, b: Point) -> Self {
        Self::new(a, a.lerp(b, 1.0 / 3.0), a.lerp(b, 2.0 / 3.0), b)
    }

    /// Degree elevation of a quadratic segment.
    pub fn from_quadratic(start: Point, ctrl: Point, end: Point) -> Self {
        Self::new(
            start,
            start.lerp(ctrl, 2.0 / 3.0),
            end.lerp(ctrl, 2.0 / 3.0),
            end,
        )
    }

    pub fn eval(&self, t: f64) -> Point {
        let mt = 1.0 - t;
        let a = mt * mt * mt;
        let b = 3.0 * mt * mt * t;
        let c = 3.0 * mt * t * t;
        let d = t * t * t;
        Point::new(
            a * self.start.x + b * self.c1.x + c * self.c2.x + d * self.end.x,
            a * self.start.y + b * self.c1.y + c * self.c2.y + d * self.end.y,
        )
    }

    /// De Casteljau split at `t`.
    pub fn split(&self, t: f64) -> (CubicSegment, CubicSegment) {
        let p01 = self.start.lerp(self.c1, t);
        let p12 = self.c1.lerp(self.c2, t);
        let p23 = self.c2.lerp(self.end, t);
        let p012 = p01.lerp(p12, t);
        let p123 = p12.lerp(p23, t);
        let mid = p012.lerp(p123, t);
        (
            CubicSegment::new(self.start, p01, p012, mid),
            CubicSegment::new(mid, p123, p23, self.end),
        )
    }

    /// Largest distance of a control point from the chord.
    fn flatness(&self) -> f64 {
        let chord = self.end.sub(self.start);
        let len = chord.norm();
        let off = |p: Point| {
            let v = p.sub(self.start);
            if len == 0.0 {
                v.norm()
            } else {
                (chord.x * v.y - chord.y * v.x).abs() / len
            }
        };
        off(self.c1).max(off(self.c2))
    }

    /// Appends the polyline approximation (excluding the start point).
    pub fn flatten_into(&self, tolerance: f64, out: &mut Vec<Point>) {
        self.flatten_rec(tolerance, 0, out);
    }

    fn flatten_rec(&self, tolerance: f64, depth: u32, out: &mut Vec<Point>) {
        if depth >= 16 || self.flatness() <= tolerance {
            out.push(self.end);
            return;
        }
        let (a, b) = self.split(0.5);
        a.flatten_rec(tolerance, depth + 1, out);
        b.flatten_rec(tolerance, depth + 1, out);
    }
}

/// A closed chain of cubic segments. Segment `k` runs from `anchors[k]`
/// through `controls[k]` to `anchors[(k + 1) % n]`, so adjacent segments
/// always share their endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subpath {
    anchors: Vec<Point>,
    controls: Vec<[Point; 2]>,
}

impl Subpath {
    /// Builds a subpath from explicit segments, checking closure.
    pub fn from_segments(segments: &[CubicSegment]) -> Result<Self> {
        const TOL: f64 = 1e-6;
        if segments.is_empty() {
            return Err(Error::invalid("subpath without segments"));
        }
        for (k, pair) in segments.windows(2).enumerate() {
            if pair[0].end.dist(pair[1].start) > TOL {
                return Err(Error::invalid(format!(
                    "segment {} does not start where segment {k} ends",
                    k + 1
                )));
            }
        }
        let first = segments[0].start;
        let last = segments[segments.len() - 1].end;
        if first.dist(last) > TOL {
            return Err(Error::invalid("subpath is not closed"));
        }
        Ok(Self {
            anchors: segments.iter().map(|s| s.start).collect(),
            controls: segments.iter().map(|s| [s.c1, s.c2]).collect(),
        })
    }

    /// Closed polygon with straight segments.
    pub fn polygon(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empty polygon"));
        }
        let n = points.len();
        let segs: Vec<_> = (0..n)
            .map(|k| CubicSegment::line(points[k], points[(k + 1) % n]))
            .collect();
        Self::from_segments(&segs)
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn segment(&self, k: usize) -> CubicSegment {
        let n = self.anchors.len();
        CubicSegment::new(
            self.anchors[k],
            self.controls[k][0],
            self.controls[k][1],
            self.anchors[(k + 1) % n],
        )
    }

    pub fn segments(&self) -> impl Iterator<Item = CubicSegment> + '_ {
        (0..self.len()).map(|k| self.segment(k))
    }

    /// Number of movable points: every anchor plus two controls per segment.
    pub fn point_count(&self) -> usize {
        3 * self.anchors.len()
    }

    /// Movable point by index: anchors first, then controls.
    pub fn point_mut(&mut self, idx: usize) -> &mut Point {
        let n = self.anchors.len();
        if idx < n {
            &mut self.anchors[idx]
        } else {
            let c = idx - n;
            &mut self.controls[c / 2][c % 2]
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let n = self.anchors.len();
        if idx < n {
            self.anchors[idx]
        } else {
            let c = idx - n;
            self.controls[c / 2][c % 2]
        }
    }
}

/// Vector model of a digit: one or more closed subpaths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathModel {
    subpaths: Vec<Subpath>,
}

impl PathModel {
    pub fn new(subpaths: Vec<Subpath>) -> Result<Self> {
        if subpaths.is_empty() {
            return Err(Error::invalid("path model without subpaths"));
        }
        Ok(Self { subpaths })
    }

    pub fn subpaths(&self) -> &[Subpath] {
        &self.subpaths
    }

    pub(crate) fn subpaths_mut(&mut self) -> &mut [Subpath] {
        &mut self.subpaths
    }

    pub fn segment_count(&self) -> usize {
        self.subpaths.iter().map(Subpath::len).sum()
    }

    pub fn point_count(&self) -> usize {
        self.subpaths.iter().map(Subpath::point_count).sum()
    }

    /// All movable points in mutation order.
    pub fn points(&self) -> Vec<Point> {
        self.subpaths
            .iter()
            .flat_map(|s| (0..s.point_count()).map(move |i| s.point(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_elevation_matches_curve() {
        let (a, q, b) = (Point::new(0.0, 0.0), Point::new(1.0, 2.0), Point::new(2.0, 0.0));
        let cubic = CubicSegment::from_quadratic(a, q, b);
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let mt = 1.0 - t;
            let expect = Point::new(
                mt * mt * a.x + 2.0 * mt * t * q.x + t * t * b.x,
                mt * mt * a.y + 2.0 * mt * t * q.y + t * t * b.y,
            );
            assert!(cubic.eval(t).dist(expect) < 1e-12);
        }
    }

    #[test]
    fn unclosed_segments_rejected() {
        let s = [CubicSegment::line(Point::new(0.0, 0.0), Point::new(1.0, 0.0))];
        assert!(Subpath::from_segments(&s).is_err());
    }

    #[test]
    fn flatten_stays_close_to_curve() {
        let seg = CubicSegment::new(
            Point::new(0.0, 0.0),
            Point::new(0.0, 10.0),
            Point::new(10.0, 10.0),
            Point::new(10.0, 0.0),
        );
        let mut pts = vec![seg.start];
        seg.flatten_into(0.1, &mut pts);
        assert!(pts.len() > 4);
        for i in 0..=50 {
            let p = seg.eval(i as f64 / 50.0);
            let near = pts
                .windows(2)
                .map(|w| seg_dist(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            assert!(near < 0.15, "{near}");
        }
    }

    fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
        let ab = b.sub(a);
        let t = (p.sub(a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
        p.dist(a.add(ab.scale(t)))
    }

    #[test]
    fn point_indexing_covers_anchors_and_controls() {
        let sp = Subpath::polygon(&[
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(0.0, 3.0),
        ])
        .unwrap();
        assert_eq!(sp.point_count(), 9);
        assert_eq!(sp.point(1), Point::new(3.0, 0.0));
        assert_eq!(sp.point(3), Point::new(1.0, 0.0));
        assert_eq!(sp.point(4), Point::new(2.0, 0.0));
    }
}
