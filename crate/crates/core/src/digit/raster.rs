use super::path::{PathModel, Point};
use super::{Grid, SIDE};

/// Flattening tolerance in canvas units.
pub const FLATNESS: f64 = 0.1;
/// Samples per pixel along each axis.
pub const SUPERSAMPLE: usize = 8;

struct Edge {
    a: Point,
    b: Point,
    winding: i32,
}

/// Renders a path model to a 28×28 grid (0 = background).
///
/// Curves are flattened adaptively, filled with the nonzero winding rule on
/// an 8×8 sample lattice per pixel, and box-filtered down to the grid.
pub fn rasterize(model: &PathModel) -> Grid {
    let edges = collect_edges(model);
    let ss = SIDE * SUPERSAMPLE;
    let mut counts = vec![0u32; SIDE * SIDE];
    let mut crossings: Vec<(f64, i32)> = Vec::new();

    for row in 0..ss {
        let y = (row as f64 + 0.5) / SUPERSAMPLE as f64;
        crossings.clear();
        for e in &edges {
            let (y0, y1) = (e.a.y, e.b.y);
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            if y < lo || y >= hi {
                continue;
            }
            let x = e.a.x + (y - y0) * (e.b.x - e.a.x) / (y1 - y0);
            crossings.push((x, e.winding));
        }
        if crossings.is_empty() {
            continue;
        }
        crossings.sort_by(|p, q| p.0.total_cmp(&q.0));

        let cell_row = row / SUPERSAMPLE;
        let mut winding = 0;
        for pair in crossings.windows(2) {
            winding += pair[0].1;
            if winding == 0 {
                continue;
            }
            let (xa, xb) = (pair[0].0, pair[1].0);
            // sample columns whose centre lies in [xa, xb)
            let first = ((xa * SUPERSAMPLE as f64) - 0.5).ceil().max(0.0) as usize;
            let last = ((xb * SUPERSAMPLE as f64) - 0.5).ceil().min(ss as f64);
            if last <= 0.0 {
                continue;
            }
            for col in first..last as usize {
                counts[cell_row * SIDE + col / SUPERSAMPLE] += 1;
            }
        }
    }

    let per_cell = (SUPERSAMPLE * SUPERSAMPLE) as u32;
    let mut grid = Grid::blank();
    for (px, &c) in grid.pixels_mut().iter_mut().zip(&counts) {
        *px = ((c * 255 + per_cell / 2) / per_cell) as u8;
    }
    grid
}

fn collect_edges(model: &PathModel) -> Vec<Edge> {
    let mut edges = Vec::new();
    let mut pts = Vec::new();
    for sub in model.subpaths() {
        pts.clear();
        let mut segs = sub.segments();
        let Some(first) = segs.next() else { continue };
        pts.push(first.start);
        first.flatten_into(FLATNESS, &mut pts);
        for s in segs {
            s.flatten_into(FLATNESS, &mut pts);
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.y == b.y {
                continue;
            }
            edges.push(Edge {
                a,
                b,
                winding: if b.y > a.y { 1 } else { -1 },
            });
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digit::path::{CubicSegment, Subpath};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> PathModel {
        PathModel::new(vec![Subpath::polygon(&[
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn zero_length_loop_is_blank() {
        let p = Point::new(10.0, 10.0);
        let sub = Subpath::from_segments(&[CubicSegment::new(p, p, p, p)]).unwrap();
        let g = rasterize(&PathModel::new(vec![sub]).unwrap());
        assert!(g.pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn full_canvas_is_saturated() {
        let g = rasterize(&rect(0.0, 0.0, 28.0, 28.0));
        assert!(g.pixels().iter().all(|&v| v == 255));
    }

    #[test]
    fn half_cell_coverage() {
        let g = rasterize(&rect(5.0, 7.0, 5.5, 8.0));
        let v = g.get(5, 7);
        assert!((v as i32 - 128).abs() <= 8, "{v}");
        assert_eq!(g.pixels().iter().filter(|&&v| v > 0).count(), 1);
    }

    #[test]
    fn hole_is_empty_under_nonzero_rule() {
        // outer clockwise, inner counter-clockwise
        let outer = Subpath::polygon(&[
            Point::new(4.0, 4.0),
            Point::new(24.0, 4.0),
            Point::new(24.0, 24.0),
            Point::new(4.0, 24.0),
        ])
        .unwrap();
        let inner = Subpath::polygon(&[
            Point::new(10.0, 10.0),
            Point::new(10.0, 18.0),
            Point::new(18.0, 18.0),
            Point::new(18.0, 10.0),
        ])
        .unwrap();
        let g = rasterize(&PathModel::new(vec![outer, inner]).unwrap());
        assert_eq!(g.get(14, 14), 0);
        assert_eq!(g.get(6, 6), 255);
    }

    #[test]
    fn orientation_does_not_matter_for_a_single_contour() {
        let cw = rasterize(&rect(3.3, 2.1, 17.8, 20.6));
        let ccw = rasterize(
            &PathModel::new(vec![Subpath::polygon(&[
                Point::new(3.3, 2.1),
                Point::new(3.3, 20.6),
                Point::new(17.8, 20.6),
                Point::new(17.8, 2.1),
            ])
            .unwrap()])
            .unwrap(),
        );
        assert_eq!(cw, ccw);
    }
}
