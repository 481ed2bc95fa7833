//! Synthetic eye-region input model for the gaze regression subject.
//!
//! A chromosome mixes angle, float and categorical genes. The surrogate
//! renderer maps it deterministically to a 32-value feature vector plus a
//! small seeded noise channel standing in for the renderer's uncontrollable
//! parameters.

mod render;

pub use render::{lipschitz_bound, render_features, FeatureVector, FEATURES, NOISE_AMPLITUDE};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::gene_distance;
use crate::harness::{Dataset, Split, Target, Task};

pub const DEFAULT_SCHEMA: &str = include_str!("../../data/eye_schema.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gene {
    HeadPitch,
    HeadYaw,
    EyePitch,
    EyeYaw,
    PupilSize,
    IrisSize,
    AmbientIntensity,
    Exposure,
    LightRotation,
    IrisTexture,
    SkinTexture,
}

impl Gene {
    pub const ALL: [Gene; 11] = [
        Gene::HeadPitch,
        Gene::HeadYaw,
        Gene::EyePitch,
        Gene::EyeYaw,
        Gene::PupilSize,
        Gene::IrisSize,
        Gene::AmbientIntensity,
        Gene::Exposure,
        Gene::LightRotation,
        Gene::IrisTexture,
        Gene::SkinTexture,
    ];

    /// Genes with a real value (angles included).
    pub const CONTINUOUS: [Gene; 9] = [
        Gene::HeadPitch,
        Gene::HeadYaw,
        Gene::EyePitch,
        Gene::EyeYaw,
        Gene::PupilSize,
        Gene::IrisSize,
        Gene::AmbientIntensity,
        Gene::Exposure,
        Gene::LightRotation,
    ];

    pub fn is_categorical(self) -> bool {
        matches!(self, Gene::IrisTexture | Gene::SkinTexture)
    }

    pub fn name(self) -> &'static str {
        match self {
            Gene::HeadPitch => "head_pitch",
            Gene::HeadYaw => "head_yaw",
            Gene::EyePitch => "eye_pitch",
            Gene::EyeYaw => "eye_yaw",
            Gene::PupilSize => "pupil_size",
            Gene::IrisSize => "iris_size",
            Gene::AmbientIntensity => "ambient_intensity",
            Gene::Exposure => "exposure",
            Gene::LightRotation => "light_rotation",
            Gene::IrisTexture => "iris_texture",
            Gene::SkinTexture => "skin_texture",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    schema_version: u32,
    bounds: Bounds,
    categories: Categories,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Bounds {
    head_pitch: [f64; 2],
    head_yaw: [f64; 2],
    eye_pitch: [f64; 2],
    eye_yaw: [f64; 2],
    pupil_size: [f64; 2],
    iris_size: [f64; 2],
    ambient_intensity: [f64; 2],
    exposure: [f64; 2],
    light_rotation: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Categories {
    iris_texture: u8,
    skin_texture: u8,
}

/// Validity ranges for every gene.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeSchema {
    pub version: u32,
    bounds: [(f64, f64); 9],
    categories: [u8; 2],
}

impl EyeSchema {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SchemaFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("eye schema: {e}")))?;
        let b = &file.bounds;
        let bounds = [
            b.head_pitch,
            b.head_yaw,
            b.eye_pitch,
            b.eye_yaw,
            b.pupil_size,
            b.iris_size,
            b.ambient_intensity,
            b.exposure,
            b.light_rotation,
        ]
        .map(|[lo, hi]| (lo, hi));
        for (g, (lo, hi)) in Gene::CONTINUOUS.iter().zip(&bounds) {
            if !(lo < hi) {
                return Err(Error::Config(format!("eye schema: empty range for {}", g.name())));
            }
        }
        let categories = [file.categories.iris_texture, file.categories.skin_texture];
        if categories.iter().any(|&k| k < 2) {
            return Err(Error::Config("eye schema: categorical genes need >= 2 choices".into()));
        }
        Ok(Self {
            version: file.schema_version,
            bounds,
            categories,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn bounds(&self, gene: Gene) -> (f64, f64) {
        let idx = Gene::CONTINUOUS
            .iter()
            .position(|g| *g == gene)
            .expect("bounds requested for a categorical gene");
        self.bounds[idx]
    }

    pub fn choices(&self, gene: Gene) -> u8 {
        match gene {
            Gene::IrisTexture => self.categories[0],
            Gene::SkinTexture => self.categories[1],
            _ => panic!("choices requested for a continuous gene"),
        }
    }
}

impl Default for EyeSchema {
    fn default() -> Self {
        Self::parse(DEFAULT_SCHEMA).expect("shipped eye schema is valid")
    }
}

/// Genotype of an eye-region input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeChromosome {
    pub head_pitch: f64,
    pub head_yaw: f64,
    pub eye_pitch: f64,
    pub eye_yaw: f64,
    pub pupil_size: f64,
    pub iris_size: f64,
    pub ambient_intensity: f64,
    pub exposure: f64,
    pub light_rotation: f64,
    pub iris_texture: u8,
    pub skin_texture: u8,
}

impl EyeChromosome {
    /// Value of a gene; categorical genes return their index.
    pub fn get(&self, gene: Gene) -> f64 {
        match gene {
            Gene::HeadPitch => self.head_pitch,
            Gene::HeadYaw => self.head_yaw,
            Gene::EyePitch => self.eye_pitch,
            Gene::EyeYaw => self.eye_yaw,
            Gene::PupilSize => self.pupil_size,
            Gene::IrisSize => self.iris_size,
            Gene::AmbientIntensity => self.ambient_intensity,
            Gene::Exposure => self.exposure,
            Gene::LightRotation => self.light_rotation,
            Gene::IrisTexture => self.iris_texture as f64,
            Gene::SkinTexture => self.skin_texture as f64,
        }
    }

    pub fn set(&mut self, gene: Gene, value: f64) {
        match gene {
            Gene::HeadPitch => self.head_pitch = value,
            Gene::HeadYaw => self.head_yaw = value,
            Gene::EyePitch => self.eye_pitch = value,
            Gene::EyeYaw => self.eye_yaw = value,
            Gene::PupilSize => self.pupil_size = value,
            Gene::IrisSize => self.iris_size = value,
            Gene::AmbientIntensity => self.ambient_intensity = value,
            Gene::Exposure => self.exposure = value,
            Gene::LightRotation => self.light_rotation = value,
            Gene::IrisTexture => self.iris_texture = value as u8,
            Gene::SkinTexture => self.skin_texture = value as u8,
        }
    }

    pub fn validate(&self, schema: &EyeSchema) -> Result<()> {
        for gene in Gene::CONTINUOUS {
            let v = self.get(gene);
            let (lo, hi) = schema.bounds(gene);
            if !(lo..=hi).contains(&v) {
                return Err(Error::invalid(format!(
                    "{} = {v} outside [{lo}, {hi}]",
                    gene.name()
                )));
            }
        }
        for gene in [Gene::IrisTexture, Gene::SkinTexture] {
            let v = self.get(gene) as u8;
            if v >= schema.choices(gene) {
                return Err(Error::invalid(format!(
                    "{} = {v} has only {} choices",
                    gene.name(),
                    schema.choices(gene)
                )));
            }
        }
        Ok(())
    }

    /// Ground-truth gaze (pitch, yaw).
    pub fn gaze(&self) -> (f64, f64) {
        (self.eye_pitch, self.eye_yaw)
    }

    pub fn head(&self) -> (f64, f64) {
        (self.head_pitch, self.head_yaw)
    }
}

/// Every gene uniform within its bounds.
pub fn sample_chromosome<R: Rng + ?Sized>(schema: &EyeSchema, rng: &mut R) -> EyeChromosome {
    let mut vals = [0.0; 9];
    for (v, gene) in vals.iter_mut().zip(Gene::CONTINUOUS) {
        let (lo, hi) = schema.bounds(gene);
        *v = rng.random_range(lo..=hi);
    }
    EyeChromosome {
        head_pitch: vals[0],
        head_yaw: vals[1],
        eye_pitch: vals[2],
        eye_yaw: vals[3],
        pupil_size: vals[4],
        iris_size: vals[5],
        ambient_intensity: vals[6],
        exposure: vals[7],
        light_rotation: vals[8],
        iris_texture: rng.random_range(0..schema.choices(Gene::IrisTexture)),
        skin_texture: rng.random_range(0..schema.choices(Gene::SkinTexture)),
    }
}

/// Fraction of a continuous gene's range moved by one mutation.
pub const GENE_STEP: f64 = 0.10;

/// Mutates one uniformly chosen gene. Continuous genes move by 10% of their
/// range in a random direction (clamped); categorical genes switch to a
/// different category.
pub fn mutate_chromosome<R: Rng + ?Sized>(
    c: &EyeChromosome,
    schema: &EyeSchema,
    rng: &mut R,
) -> (EyeChromosome, Gene) {
    let gene = Gene::ALL[rng.random_range(0..Gene::ALL.len())];
    let mut out = c.clone();
    if gene.is_categorical() {
        let k = schema.choices(gene);
        let cur = c.get(gene) as u8;
        let mut pick = rng.random_range(0..k - 1);
        if pick >= cur {
            pick += 1;
        }
        out.set(gene, pick as f64);
    } else {
        let (lo, hi) = schema.bounds(gene);
        let step = GENE_STEP * (hi - lo);
        let signed = if rng.random_bool(0.5) { step } else { -step };
        out.set(gene, (c.get(gene) + signed).clamp(lo, hi));
    }
    (out, gene)
}

/// Gaze regression dataset of rendered random chromosomes.
pub fn synth_gaze_dataset(schema: &EyeSchema, train: usize, test: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = |count: usize| -> Result<Split> {
        let mut s = Split::default();
        for _ in 0..count {
            let c = sample_chromosome(schema, &mut rng);
            let f = render_features(&c, schema, rng.random())?;
            s.push(f.model_input(), Target::Gaze(f.truth.0, f.truth.1));
        }
        Ok(s)
    };
    let train = split(train)?;
    let test = split(test)?;
    Dataset::new(Task::Regression, FEATURES + 2, train, test)
}

/// Smallest pairwise genotypic distance within a set of chromosomes: the
/// starting point for picking an archive threshold.
pub fn min_pairwise_distance(set: &[EyeChromosome]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            let d = gene_distance(a, b);
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schema_parses_and_rejects_unknown_keys() {
        let s = EyeSchema::default();
        assert_eq!(s.version, 1);
        assert_eq!(s.choices(Gene::IrisTexture), 5);
        let bad = DEFAULT_SCHEMA.replace("[categories]", "[categories]\nextra = 3");
        assert!(EyeSchema::parse(&bad).is_err());
    }

    #[test]
    fn sampled_chromosomes_are_valid_and_distinct() {
        let s = EyeSchema::default();
        let mut prev: Option<EyeChromosome> = None;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = sample_chromosome(&s, &mut rng);
            c.validate(&s).unwrap();
            if let Some(p) = &prev {
                assert_ne!(p, &c);
            }
            prev = Some(c);
        }
    }

    #[test]
    fn sample_mean_is_midpoint() {
        let s = EyeSchema::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| sample_chromosome(&s, &mut rng).head_pitch)
            .sum::<f64>()
            / n as f64;
        let (lo, hi) = s.bounds(Gene::HeadPitch);
        assert!((mean - (lo + hi) / 2.0).abs() <= 0.02 * (hi - lo));
    }

    #[test]
    fn mutation_changes_exactly_one_gene_and_stays_valid() {
        let s = EyeSchema::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut c = sample_chromosome(&s, &mut rng);
        for _ in 0..500 {
            let (m, gene) = mutate_chromosome(&c, &s, &mut rng);
            m.validate(&s).unwrap();
            for g in Gene::ALL {
                if g != gene {
                    assert_eq!(m.get(g), c.get(g));
                }
            }
            if gene.is_categorical() {
                assert_ne!(m.get(gene), c.get(gene));
            }
            c = m;
        }
    }

    #[test]
    fn mutation_clamps_at_upper_bound() {
        let s = EyeSchema::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = sample_chromosome(&s, &mut rng);
        let (_, hi) = s.bounds(Gene::Exposure);
        c.exposure = hi;
        let mut seen = false;
        for _ in 0..500 {
            let (m, gene) = mutate_chromosome(&c, &s, &mut rng);
            if gene == Gene::Exposure && m.exposure >= c.exposure {
                assert_eq!(m.exposure, hi);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn gene_selection_is_uniform() {
        let s = EyeSchema::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = sample_chromosome(&s, &mut rng);
        let trials = 10_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..trials {
            *counts.entry(mutate_chromosome(&c, &s, &mut rng).1).or_insert(0usize) += 1;
        }
        for g in Gene::ALL {
            let f = counts[&g] as f64 / trials as f64;
            assert!((f - 1.0 / 11.0).abs() <= 0.02, "{g:?} {f}");
        }
    }

    #[test]
    fn min_pairwise_distance_matches_brute_force() {
        let s = EyeSchema::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let set: Vec<_> = (0..12).map(|_| sample_chromosome(&s, &mut rng)).collect();
        let mut brute = f64::INFINITY;
        for a in &set {
            for b in &set {
                if !std::ptr::eq(a, b) {
                    brute = brute.min(gene_distance(a, b));
                }
            }
        }
        assert_eq!(min_pairwise_distance(&set), Some(brute));
        assert_eq!(min_pairwise_distance(&set[..1]), None);
    }
}
