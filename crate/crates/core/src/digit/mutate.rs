use rand::Rng;
use serde::{Deserialize, Serialize};

use super::path::{PathModel, CANVAS};
use crate::error::{Error, Result};

/// Displacement magnitude bounds for the digit mutation operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationExtent {
    pub lo: f64,
    pub hi: f64,
}

impl MutationExtent {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) || !(lo <= hi) || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "mutation extent requires 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }
}

impl Default for MutationExtent {
    fn default() -> Self {
        Self { lo: 1.0, hi: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Left,
        Direction::Right,
        Direction::Up,
        Direction::Down,
    ];

    fn offset(self, magnitude: f64) -> (f64, f64) {
        match self {
            Direction::Left => (-magnitude, 0.0),
            Direction::Right => (magnitude, 0.0),
            Direction::Up => (0.0, -magnitude),
            Direction::Down => (0.0, magnitude),
        }
    }
}

/// What a single digit mutation did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitMove {
    pub point: usize,
    pub direction: Direction,
    pub magnitude: f64,
}

/// Moves one uniformly chosen point (anchor or control) along one of the
/// four axis directions. Coordinates are clamped to the canvas.
pub fn mutate_digit<R: Rng + ?Sized>(
    model: &PathModel,
    extent: MutationExtent,
    rng: &mut R,
) -> PathModel {
    mutate_digit_traced(model, extent, rng).0
}

pub fn mutate_digit_traced<R: Rng + ?Sized>(
    model: &PathModel,
    extent: MutationExtent,
    rng: &mut R,
) -> (PathModel, DigitMove) {
    let mut out = model.clone();
    let total = out.point_count();
    let point = rng.random_range(0..total);
    let direction = Direction::ALL[rng.random_range(0..4)];
    let magnitude = if extent.lo == extent.hi {
        extent.lo
    } else {
        rng.random_range(extent.lo..=extent.hi)
    };

    let mut idx = point;
    for sub in out.subpaths_mut() {
        if idx < sub.point_count() {
            let p = sub.point_mut(idx);
            let (dx, dy) = direction.offset(magnitude);
            p.x = (p.x + dx).clamp(0.0, CANVAS);
            p.y = (p.y + dy).clamp(0.0, CANVAS);
            break;
        }
        idx -= sub.point_count();
    }
    (
        out,
        DigitMove {
            point,
            direction,
            magnitude,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digit::path::{Point, Subpath};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tri() -> PathModel {
        PathModel::new(vec![Subpath::polygon(&[
            Point::new(10.0, 10.0),
            Point::new(20.0, 10.0),
            Point::new(27.5, 20.0),
        ])
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn unit_extent_moves_one_point_by_one() {
        let m = tri();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let out = mutate_digit(&m, MutationExtent::new(1.0, 1.0).unwrap(), &mut rng);
            let diffs: Vec<_> = m
                .points()
                .iter()
                .zip(out.points())
                .filter(|(a, b)| *a != b)
                .map(|(a, b)| ((b.x - a.x).abs(), (b.y - a.y).abs()))
                .collect();
            assert_eq!(diffs.len(), 1);
            let (dx, dy) = diffs[0];
            // clamping may shorten moves at the canvas edge
            assert!(dx == 0.0 || dy == 0.0);
            assert!(dx + dy <= 1.0 + 1e-12 && dx + dy > 0.0);
        }
    }

    #[test]
    fn moves_clamp_to_canvas() {
        let m = tri();
        // point 2 is the anchor at x = 27.5
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = false;
        for _ in 0..2000 {
            let (out, mv) =
                mutate_digit_traced(&m, MutationExtent::new(1.0, 1.0).unwrap(), &mut rng);
            if mv.point == 2 && mv.direction == Direction::Right {
                assert_eq!(out.points()[2].x, 28.0);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn directions_are_uniform() {
        let m = tri();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        let trials = 10_000;
        for _ in 0..trials {
            let (_, mv) = mutate_digit_traced(&m, MutationExtent::default(), &mut rng);
            counts[Direction::ALL.iter().position(|d| *d == mv.direction).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 0.25).abs() <= 0.02, "{f}");
        }
    }

    #[test]
    fn closure_and_segment_count_preserved() {
        let m = tri();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cur = m.clone();
        for _ in 0..200 {
            cur = mutate_digit(&cur, MutationExtent::default(), &mut rng);
            assert_eq!(cur.segment_count(), m.segment_count());
            for sub in cur.subpaths() {
                let segs: Vec<_> = sub.segments().collect();
                assert!(Subpath::from_segments(&segs).is_ok());
            }
        }
    }

    #[test]
    fn extent_validation() {
        assert!(MutationExtent::new(0.0, 1.0).is_err());
        assert!(MutationExtent::new(2.0, 1.0).is_err());
        assert!(MutationExtent::new(0.5, 0.5).is_ok());
    }
}
