//! Synthetic handwritten-style digits: a fixed centreline per class, drawn
//! with a randomised pen (affine jitter, wobble, stroke width) and thickened
//! into closed outlines.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::path::{PathModel, Point, Subpath};
use super::{rasterize, SeedRecord};
use crate::error::Result;
use crate::harness::{Dataset, Split, Target, Task};

struct Stroke {
    points: &'static [(f64, f64)],
    smooth: bool,
}

const fn stroke(points: &'static [(f64, f64)], smooth: bool) -> Stroke {
    Stroke { points, smooth }
}

/// Centrelines in a unit box, y pointing down.
fn glyph(label: u8) -> &'static [Stroke] {
    const ZERO: [Stroke; 1] = [stroke(
        &[
            (0.5, 0.04), (0.78, 0.2), (0.84, 0.5), (0.76, 0.8), (0.5, 0.96),
            (0.24, 0.8), (0.16, 0.5), (0.22, 0.2), (0.5, 0.04),
        ],
        true,
    )];
    const ONE: [Stroke; 1] = [stroke(&[(0.32, 0.22), (0.56, 0.04), (0.56, 0.96)], false)];
    const TWO: [Stroke; 1] = [stroke(
        &[
            (0.2, 0.26), (0.36, 0.07), (0.64, 0.06), (0.78, 0.28), (0.62, 0.55),
            (0.4, 0.75), (0.2, 0.94), (0.84, 0.94),
        ],
        true,
    )];
    const THREE: [Stroke; 1] = [stroke(
        &[
            (0.2, 0.14), (0.48, 0.04), (0.74, 0.2), (0.66, 0.4), (0.42, 0.48),
            (0.7, 0.58), (0.78, 0.78), (0.55, 0.96), (0.2, 0.88),
        ],
        true,
    )];
    const FOUR: [Stroke; 2] = [
        stroke(&[(0.58, 0.04), (0.16, 0.64), (0.86, 0.64)], false),
        stroke(&[(0.66, 0.3), (0.66, 0.96)], false),
    ];
    const FIVE: [Stroke; 1] = [stroke(
        &[
            (0.8, 0.06), (0.32, 0.06), (0.26, 0.44), (0.56, 0.38), (0.78, 0.56),
            (0.76, 0.82), (0.5, 0.96), (0.2, 0.88),
        ],
        true,
    )];
    const SIX: [Stroke; 1] = [stroke(
        &[
            (0.72, 0.05), (0.44, 0.24), (0.26, 0.52), (0.26, 0.8), (0.48, 0.96),
            (0.74, 0.84), (0.76, 0.62), (0.52, 0.5), (0.28, 0.62),
        ],
        true,
    )];
    const SEVEN: [Stroke; 1] = [stroke(&[(0.16, 0.07), (0.84, 0.07), (0.42, 0.96)], false)];
    const EIGHT: [Stroke; 1] = [stroke(
        &[
            (0.5, 0.48), (0.28, 0.3), (0.34, 0.1), (0.5, 0.04), (0.68, 0.1),
            (0.72, 0.3), (0.5, 0.48), (0.24, 0.68), (0.3, 0.9), (0.5, 0.96),
            (0.72, 0.9), (0.78, 0.68), (0.5, 0.48),
        ],
        true,
    )];
    const NINE: [Stroke; 1] = [stroke(
        &[
            (0.74, 0.36), (0.5, 0.5), (0.26, 0.34), (0.32, 0.1), (0.54, 0.04),
            (0.74, 0.18), (0.74, 0.5), (0.66, 0.76), (0.56, 0.96),
        ],
        true,
    )];
    match label {
        0 => &ZERO,
        1 => &ONE,
        2 => &TWO,
        3 => &THREE,
        4 => &FOUR,
        5 => &FIVE,
        6 => &SIX,
        7 => &SEVEN,
        8 => &EIGHT,
        _ => &NINE,
    }
}

/// Random pen parameters for one drawing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenStyle {
    pub rotation: f64,
    pub scale: (f64, f64),
    pub shear: f64,
    pub offset: (f64, f64),
    pub width: f64,
    pub wobble: f64,
}

impl PenStyle {
    pub fn neutral() -> Self {
        Self {
            rotation: 0.0,
            scale: (1.0, 1.0),
            shear: 0.0,
            offset: (0.0, 0.0),
            width: 2.4,
            wobble: 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            rotation: rng.random_range(-0.2..0.2),
            scale: (rng.random_range(0.8..1.1), rng.random_range(0.85..1.05)),
            shear: rng.random_range(-0.25..0.25),
            offset: (rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0)),
            width: rng.random_range(1.8..3.2),
            wobble: rng.random_range(0.0..0.06),
        }
    }

    fn place(&self, u: f64, v: f64) -> Point {
        // unit box to a 16 x 20 frame centred on the canvas
        let x = (u - 0.5) * 16.0 * self.scale.0;
        let y = (v - 0.5) * 20.0 * self.scale.1;
        let x = x + self.shear * y;
        let (s, c) = self.rotation.sin_cos();
        Point::new(14.0 + self.offset.0 + c * x - s * y, 14.0 + self.offset.1 + s * x + c * y)
    }
}

fn catmull_rom(p: &[Point], per_span: usize) -> Vec<Point> {
    let n = p.len();
    let at = |i: isize| p[i.clamp(0, n as isize - 1) as usize];
    let mut out = Vec::with_capacity((n - 1) * per_span + 1);
    for i in 0..n as isize - 1 {
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        for k in 0..per_span {
            let t = k as f64 / per_span as f64;
            let (t2, t3) = (t * t, t * t * t);
            let w = [
                -0.5 * t3 + t2 - 0.5 * t,
                1.5 * t3 - 2.5 * t2 + 1.0,
                -1.5 * t3 + 2.0 * t2 + 0.5 * t,
                0.5 * t3 - 0.5 * t2,
            ];
            out.push(Point::new(
                w[0] * p0.x + w[1] * p1.x + w[2] * p2.x + w[3] * p3.x,
                w[0] * p0.y + w[1] * p1.y + w[2] * p2.y + w[3] * p3.y,
            ));
        }
    }
    out.push(p[n - 1]);
    out
}

fn subdivide(p: &[Point], per_span: usize) -> Vec<Point> {
    let mut out = Vec::new();
    for w in p.windows(2) {
        for k in 0..per_span {
            out.push(w[0].lerp(w[1], k as f64 / per_span as f64));
        }
    }
    out.push(p[p.len() - 1]);
    out
}

/// Closed outline of a polyline drawn with a pen of the given width.
fn thicken(center: &[Point], width: f64) -> Vec<Point> {
    let n = center.len();
    let half = width / 2.0;
    let normal = |a: Point, b: Point| {
        let d = b.sub(a).normalized();
        Point::new(-d.y, d.x)
    };
    let offsets: Vec<Point> = (0..n)
        .map(|i| {
            let prev = if i > 0 { normal(center[i - 1], center[i]) } else { normal(center[0], center[1]) };
            let next = if i + 1 < n { normal(center[i], center[i + 1]) } else { prev };
            let m = prev.add(next).normalized();
            // limit the miter so sharp corners stay compact
            let cos = m.dot(next).max(0.5);
            m.scale(half / cos)
        })
        .collect();
    let mut outline: Vec<Point> = center.iter().zip(&offsets).map(|(c, o)| c.add(*o)).collect();
    outline.extend(center.iter().zip(&offsets).rev().map(|(c, o)| c.sub(*o)));
    outline
}

fn round2(p: Point) -> Point {
    Point::new((p.x * 100.0).round() / 100.0, (p.y * 100.0).round() / 100.0)
}

/// Draws one digit of class `label` with `style`. The wobble perturbs the
/// centreline keypoints and is drawn from `rng`.
pub fn draw_digit<R: Rng + ?Sized>(label: u8, style: &PenStyle, rng: &mut R) -> Result<PathModel> {
    let subpaths = glyph(label)
        .iter()
        .map(|s| {
            let keys: Vec<Point> = s
                .points
                .iter()
                .map(|&(u, v)| {
                    let (du, dv) = if style.wobble > 0.0 {
                        (rng.random_range(-style.wobble..style.wobble), rng.random_range(-style.wobble..style.wobble))
                    } else {
                        (0.0, 0.0)
                    };
                    style.place(u + du, v + dv)
                })
                .collect();
            let center = if s.smooth { catmull_rom(&keys, 3) } else { subdivide(&keys, 2) };
            let outline: Vec<Point> = thicken(&center, style.width).into_iter().map(round2).collect();
            Subpath::polygon(&outline)
        })
        .collect::<Result<Vec<_>>>()?;
    PathModel::new(subpaths)
}

/// A random digit with a randomly sampled pen.
pub fn random_digit<R: Rng + ?Sized>(label: u8, rng: &mut R) -> Result<PathModel> {
    let style = PenStyle::sample(rng);
    draw_digit(label, &style, rng)
}

/// Balanced digit classification dataset, classes interleaved then shuffled.
pub fn synth_digit_dataset(train: usize, test: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = |count: usize, rng: &mut ChaCha8Rng| -> Result<Split> {
        let mut labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
        labels.shuffle(rng);
        let mut s = Split::default();
        for label in labels {
            let grid = rasterize(&random_digit(label, rng)?);
            s.push(grid.to_features(), Target::Class(label));
        }
        Ok(s)
    };
    let train = split(train, &mut rng)?;
    let test = split(test, &mut rng)?;
    Dataset::new(Task::Classification, super::PIXELS, train, test)
}

/// `per_class` seeds of every digit, ids `seed-<label>-<k>`.
pub fn synth_seed_corpus(per_class: usize, seed: u64) -> Result<Vec<SeedRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(10 * per_class);
    for label in 0..10u8 {
        for k in 0..per_class {
            out.push(SeedRecord {
                id: format!("seed-{label}-{k}"),
                model: random_digit(label, &mut rng)?,
                label,
            });
        }
    }
    Ok(out)
}
