use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EyeChromosome, EyeSchema, Gene};
use crate::error::Result;

pub const FEATURES: usize = 32;
/// Half-width of the uniform per-feature noise channel.
pub const NOISE_AMPLITUDE: f64 = 0.01;
const WAVE_AMPLITUDE: f64 = 0.15;
const EMBED_AMPLITUDE: f64 = 0.2;

/// Surrogate for a rendered eye image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// Ground-truth gaze (pitch, yaw).
    pub truth: (f64, f64),
    /// Head rotation (pitch, yaw), fed to the model next to the features.
    pub head: (f64, f64),
}

impl FeatureVector {
    /// Model input: the 32 features followed by the head angles.
    pub fn model_input(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.push(self.head.0);
        v.push(self.head.1);
        v
    }
}

/// Linear weight of continuous gene `i` on feature `j`.
///
/// Gaze genes weigh twice as much as head genes, the remaining appearance
/// genes half as much, so gaze stays recoverable from the features.
fn linear_weight(j: usize, i: usize) -> f64 {
    let base = (1.3 * (j + 1) as f64 + 2.1 * (i + 1) as f64 + 0.7 * ((j + 1) * (i + 1)) as f64).sin();
    let scale = match i {
        2 | 3 => 1.0,
        0 | 1 => 0.5,
        _ => 0.25,
    };
    scale * base
}

/// Frequency of continuous gene `i` inside the sinusoid of feature `j`.
fn wave_weight(j: usize, i: usize) -> f64 {
    0.8 * (0.9 * (j + 1) as f64 - 1.7 * (i + 1) as f64).cos()
}

fn wave_phase(j: usize) -> f64 {
    0.37 * (j as f64)
}

/// Embedding of category `c` of categorical gene `g` (0 = iris, 1 = skin).
fn embedding(g: usize, c: u8, j: usize) -> f64 {
    EMBED_AMPLITUDE * (3.7 * (c as f64 + 1.0) * (j as f64 + 1.0) + 1.9 * g as f64).cos()
}

fn normalized(c: &EyeChromosome, schema: &EyeSchema) -> [f64; 9] {
    Gene::CONTINUOUS.map(|g| {
        let (lo, hi) = schema.bounds(g);
        2.0 * (c.get(g) - lo) / (hi - lo) - 1.0
    })
}

/// Deterministic surrogate rendering.
///
/// `feature_j = Σ_i W[j][i]·z_i + 0.15·sin(Σ_i V[j][i]·z_i + φ_j)
///              + E_iris[j] + E_skin[j] + noise_j`
///
/// where `z_i ∈ [-1, 1]` is gene `i` rescaled by its bounds and `noise_j` is
/// uniform in ±0.01, drawn from `noise_seed` only.
pub fn render_features(
    c: &EyeChromosome,
    schema: &EyeSchema,
    noise_seed: u64,
) -> Result<FeatureVector> {
    c.validate(schema)?;
    let z = normalized(c, schema);
    let mut noise = ChaCha8Rng::seed_from_u64(noise_seed);
    let values = (0..FEATURES)
        .map(|j| {
            let lin: f64 = z.iter().enumerate().map(|(i, zi)| linear_weight(j, i) * zi).sum();
            let arg: f64 = z.iter().enumerate().map(|(i, zi)| wave_weight(j, i) * zi).sum();
            let wave = WAVE_AMPLITUDE * (arg + wave_phase(j)).sin();
            let emb = embedding(0, c.iris_texture, j) + embedding(1, c.skin_texture, j);
            let n = noise.random_range(-NOISE_AMPLITUDE..=NOISE_AMPLITUDE);
            lin + wave + emb + n
        })
        .collect();
    Ok(FeatureVector {
        values,
        truth: c.gaze(),
        head: c.head(),
    })
}

/// Upper bound on `max_j |∂feature_j / ∂gene|` for a continuous gene, in
/// feature units per gene unit.
pub fn lipschitz_bound(gene: Gene, schema: &EyeSchema) -> f64 {
    let i = Gene::CONTINUOUS
        .iter()
        .position(|g| *g == gene)
        .expect("continuous gene");
    let (lo, hi) = schema.bounds(gene);
    let dz = 2.0 / (hi - lo);
    (0..FEATURES)
        .map(|j| linear_weight(j, i).abs() + WAVE_AMPLITUDE * wave_weight(j, i).abs())
        .fold(0.0, f64::max)
        * dz
}
