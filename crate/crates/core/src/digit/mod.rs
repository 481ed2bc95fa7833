//! Handwritten-digit input model: cubic Bézier paths rendered to 28×28
//! grayscale grids.

mod mutate;
mod path;
mod raster;
pub mod svg;
mod synth;
mod trace;

pub use mutate::{mutate_digit, mutate_digit_traced, Direction, DigitMove, MutationExtent};
pub use path::{CubicSegment, PathModel, Point, Subpath, CANVAS};
pub use raster::{rasterize, FLATNESS, SUPERSAMPLE};
pub use svg::{load_seed_corpus, parse_svg, write_svg};
pub use synth::{draw_digit, random_digit, synth_digit_dataset, synth_seed_corpus, PenStyle};
pub use trace::{trace_bitmap, FIT_TOLERANCE, SIMPLIFY_TOLERANCE};

use std::fmt;

/// Grid side in pixels.
pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

/// Row-major 28×28 intensities, 0 = background.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid(Box<[u8; PIXELS]>);

impl Grid {
    pub fn blank() -> Self {
        Grid(Box::new([0; PIXELS]))
    }

    pub fn from_slice(px: &[u8]) -> Option<Self> {
        let arr: [u8; PIXELS] = px.try_into().ok()?;
        Some(Grid(Box::new(arr)))
    }

    pub fn pixels(&self) -> &[u8] {
        &self.0[..]
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.0[..]
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.0[y * SIDE + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.0[y * SIDE + x] = v;
    }

    /// Intensities scaled to `[0, 1]`, the model input layout.
    pub fn to_features(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64 / 255.0).collect()
    }

    /// Binary PGM (P5) encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{SIDE} {SIDE}\n255\n").into_bytes();
        out.extend_from_slice(self.pixels());
        out
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const RAMP: &[u8] = b" .:-=+*#%@";
        writeln!(f, "Grid[")?;
        for y in 0..SIDE {
            let row: String = (0..SIDE)
                .map(|x| RAMP[self.get(x, y) as usize * (RAMP.len() - 1) / 255] as char)
                .collect();
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}

/// A rasterized digit together with its expected class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitInput {
    pub grid: Grid,
    pub label: u8,
}

/// A corpus entry used to seed the search.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRecord {
    pub id: String,
    pub model: PathModel,
    pub label: u8,
}

impl SeedRecord {
    pub fn render(&self) -> DigitInput {
        DigitInput {
            grid: rasterize(&self.model),
            label: self.label,
        }
    }
}
