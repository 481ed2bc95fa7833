use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::archive::{ArchivePolicy, Individual};
use crate::digit::{mutate_digit, rasterize, write_svg, DigitInput, MutationExtent, PathModel, SeedRecord};
use crate::error::{Error, Result};
use crate::eye::{mutate_chromosome, render_features, sample_chromosome, EyeChromosome, EyeSchema, FeatureVector, Gene};
use crate::fitness::{gene_distance, pixel_distance};
use crate::harness::Target;

/// A corpus entry the search can start from.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed<G> {
    pub id: String,
    pub genotype: G,
}

/// Everything the search engine needs to know about an input domain.
pub trait Domain: Sync {
    type Genotype: Clone + Send + Sync;
    type Phenotype: Clone + Send + Sync;

    fn seeds(&self) -> &[Seed<Self::Genotype>];

    /// Renders a genotype into the evaluated input.
    fn express(&self, g: &Self::Genotype) -> Result<Self::Phenotype>;

    fn model_input(&self, p: &Self::Phenotype) -> Vec<f64>;

    fn target(&self, g: &Self::Genotype, p: &Self::Phenotype) -> Target;

    fn mutate(&self, g: &Self::Genotype, rng: &mut ChaCha8Rng) -> Self::Genotype;

    fn distance(
        &self,
        a: &Individual<Self::Genotype, Self::Phenotype>,
        b: &Individual<Self::Genotype, Self::Phenotype>,
    ) -> f64;

    fn archive_policy(&self) -> ArchivePolicy;

    /// Bytes identifying the model input, for memoising model outputs.
    fn memo_key(&self, p: &Self::Phenotype) -> Vec<u8>;

    /// Writes the files of one archived input into `dir` and returns its
    /// manifest record.
    fn export(
        &self,
        ind: &Individual<Self::Genotype, Self::Phenotype>,
        dir: &Path,
    ) -> Result<serde_json::Value>;
}

/// A digit genotype: the path plus the label it inherits from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitGenotype {
    pub model: PathModel,
    pub label: u8,
}

/// Handwritten digits: Bézier path models compared by pixel distance, with
/// one archive slot per seed.
#[derive(Debug, Clone)]
pub struct DigitDomain {
    seeds: Vec<Seed<DigitGenotype>>,
    pub extent: MutationExtent,
}

impl DigitDomain {
    pub fn new(corpus: &[SeedRecord], extent: MutationExtent) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("seed corpus is empty"));
        }
        let seeds = corpus
            .iter()
            .map(|s| Seed {
                id: s.id.clone(),
                genotype: DigitGenotype {
                    model: s.model.clone(),
                    label: s.label,
                },
            })
            .collect();
        Ok(Self { seeds, extent })
    }
}

impl Domain for DigitDomain {
    type Genotype = DigitGenotype;
    type Phenotype = DigitInput;

    fn seeds(&self) -> &[Seed<DigitGenotype>] {
        &self.seeds
    }

    fn express(&self, g: &DigitGenotype) -> Result<DigitInput> {
        Ok(DigitInput {
            grid: rasterize(&g.model),
            label: g.label,
        })
    }

    fn model_input(&self, p: &DigitInput) -> Vec<f64> {
        p.grid.to_features()
    }

    fn target(&self, g: &DigitGenotype, _p: &DigitInput) -> Target {
        Target::Class(g.label)
    }

    fn mutate(&self, g: &DigitGenotype, rng: &mut ChaCha8Rng) -> DigitGenotype {
        DigitGenotype {
            model: mutate_digit(&g.model, self.extent, rng),
            label: g.label,
        }
    }

    fn distance(&self, a: &Individual<DigitGenotype, DigitInput>, b: &Individual<DigitGenotype, DigitInput>) -> f64 {
        pixel_distance(&a.phenotype, &b.phenotype)
    }

    fn archive_policy(&self) -> ArchivePolicy {
        ArchivePolicy::PerSeed
    }

    fn memo_key(&self, p: &DigitInput) -> Vec<u8> {
        p.grid.pixels().to_vec()
    }

    fn export(&self, ind: &Individual<DigitGenotype, DigitInput>, dir: &Path) -> Result<serde_json::Value> {
        let stem = format!("input_{:06}", ind.id);
        let svg = write_svg(
            &ind.genotype.model,
            &[
                ("id", stem.clone()),
                ("label", ind.genotype.label.to_string()),
                ("seed", ind.seed_origin.clone()),
            ],
        );
        let svg_path = dir.join(format!("{stem}.svg"));
        std::fs::write(&svg_path, svg).map_err(|e| Error::io(&svg_path, e))?;
        let pgm_path = dir.join(format!("{stem}.pgm"));
        std::fs::write(&pgm_path, ind.phenotype.grid.to_pgm()).map_err(|e| Error::io(&pgm_path, e))?;
        Ok(json!({
            "id": ind.id,
            "seed_origin": ind.seed_origin,
            "label": ind.genotype.label,
            "f1": ind.f1(),
            "svg": format!("{stem}.svg"),
            "pgm": format!("{stem}.pgm"),
        }))
    }
}

/// An eye genotype: the chromosome plus the seed of the renderer's noise
/// channel, redrawn on every mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeGenotype {
    pub chromosome: EyeChromosome,
    pub noise_seed: u64,
}

/// Gaze regression over surrogate-rendered eye chromosomes, compared by
/// genotypic distance, with a distance-threshold archive.
#[derive(Debug, Clone)]
pub struct EyeDomain {
    schema: EyeSchema,
    seeds: Vec<Seed<EyeGenotype>>,
    pub t_a: f64,
}

impl EyeDomain {
    /// Samples `pool` random chromosomes as the seed pool.
    pub fn new(schema: EyeSchema, pool: usize, t_a: f64, seed: u64) -> Result<Self> {
        if pool == 0 {
            return Err(Error::invalid("seed pool must not be empty"));
        }
        if !(t_a >= 0.0) {
            return Err(Error::invalid("archive threshold must be nonnegative"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seeds = (0..pool)
            .map(|i| Seed {
                id: format!("g{i:04}"),
                genotype: EyeGenotype {
                    chromosome: sample_chromosome(&schema, &mut rng),
                    noise_seed: rng.random(),
                },
            })
            .collect();
        Ok(Self { schema, seeds, t_a })
    }

    pub fn schema(&self) -> &EyeSchema {
        &self.schema
    }
}

impl Domain for EyeDomain {
    type Genotype = EyeGenotype;
    type Phenotype = FeatureVector;

    fn seeds(&self) -> &[Seed<EyeGenotype>] {
        &self.seeds
    }

    fn express(&self, g: &EyeGenotype) -> Result<FeatureVector> {
        render_features(&g.chromosome, &self.schema, g.noise_seed)
    }

    fn model_input(&self, p: &FeatureVector) -> Vec<f64> {
        p.model_input()
    }

    fn target(&self, _g: &EyeGenotype, p: &FeatureVector) -> Target {
        Target::Gaze(p.truth.0, p.truth.1)
    }

    fn mutate(&self, g: &EyeGenotype, rng: &mut ChaCha8Rng) -> EyeGenotype {
        EyeGenotype {
            chromosome: mutate_chromosome(&g.chromosome, &self.schema, rng).0,
            noise_seed: rng.random(),
        }
    }

    fn distance(&self, a: &Individual<EyeGenotype, FeatureVector>, b: &Individual<EyeGenotype, FeatureVector>) -> f64 {
        gene_distance(&a.genotype.chromosome, &b.genotype.chromosome)
    }

    fn archive_policy(&self) -> ArchivePolicy {
        ArchivePolicy::Threshold { t_a: self.t_a }
    }

    fn memo_key(&self, p: &FeatureVector) -> Vec<u8> {
        p.model_input().iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn export(&self, ind: &Individual<EyeGenotype, FeatureVector>, _dir: &Path) -> Result<serde_json::Value> {
        let c = &ind.genotype.chromosome;
        let genes: serde_json::Map<String, serde_json::Value> = Gene::ALL
            .iter()
            .map(|g| {
                let v = c.get(*g);
                let value = if g.is_categorical() { json!(v as u8) } else { json!(v) };
                (g.name().to_string(), value)
            })
            .collect();
        Ok(json!({
            "id": ind.id,
            "seed_origin": ind.seed_origin,
            "f1": ind.f1(),
            "noise_seed": ind.genotype.noise_seed,
            "chromosome": genes,
        }))
    }
}
