use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{Dataset, Split, Target, Task};
use super::model::{train, TinyModel, TrainSpec};
use super::mutation::{apply_mutation, MutationSpec};
use crate::error::{Error, Result};
use crate::fitness::{angular_error, eval_classifier, eval_regressor, EvalOutcome, RegressionTolerance};

/// The `n` trained instances of one (possibly mutated) specification.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstanceSet {
    pub instances: Vec<TinyModel>,
    /// `None` for the original specification.
    pub origin: Option<MutationSpec>,
    pub base_seed: u64,
}

impl ModelInstanceSet {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// The first `k` instances, as used for search guidance.
    pub fn head(&self, k: usize) -> &[TinyModel] {
        &self.instances[..k.min(self.instances.len())]
    }

    pub fn fingerprints(&self) -> Vec<String> {
        self.instances.iter().map(TinyModel::weights_digest).collect()
    }

    /// Quality metric of every instance on `test`.
    pub fn metrics(&self, test: &Split, tol: RegressionTolerance) -> Result<Vec<f64>> {
        self.instances
            .par_iter()
            .map(|m| quality_metric(m, test, tol))
            .collect()
    }
}

/// Trains `n` instances; instance `k` uses seed `base_seed + k` both for the
/// mutation sampling and for training.
pub fn build_instances(
    ds: &Dataset,
    spec: &TrainSpec,
    mu: Option<&MutationSpec>,
    n: usize,
    base_seed: u64,
) -> Result<ModelInstanceSet> {
    if n == 0 {
        return Err(Error::invalid("instance count must be at least 1"));
    }
    if let Some(mu) = mu {
        mu.validate(ds.task, spec)?;
    }
    let instances = (0..n)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed.wrapping_add(k as u64);
            let mut spec_k = spec.clone();
            spec_k.rng_seed = seed;
            let trained = match mu {
                None => train(&ds.train, ds.features, &spec_k),
                Some(mu) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    apply_mutation(ds, &spec_k, mu, &mut rng)
                        .and_then(|(mds, mspec)| train(&mds.train, mds.features, &mspec))
                }
            };
            trained.map_err(|e| Error::Instance {
                index: k,
                source: Box::new(e),
            })
        })
        .collect::<Vec<Result<_>>>()
        // first failure in instance order, independent of thread scheduling
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelInstanceSet {
        instances,
        origin: mu.cloned(),
        base_seed,
    })
}

/// Eval outcome of one model output against `target`.
pub fn evaluate_output(output: &[f64], target: Target, tol: RegressionTolerance) -> EvalOutcome {
    match target {
        Target::Class(c) => eval_classifier(output, c as usize).expect("output width matches task"),
        Target::Gaze(p, y) => eval_regressor((output[0], output[1]), (p, y), tol),
    }
}

/// Whether a single model output is correct for `target`.
pub fn output_is_correct(output: &[f64], target: Target, tol: RegressionTolerance) -> bool {
    evaluate_output(output, target, tol).correct
}

/// Accuracy for classification; fraction of inputs within the angular
/// tolerance for regression.
pub fn quality_metric(model: &TinyModel, test: &Split, tol: RegressionTolerance) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("quality metric of an empty test split"));
    }
    let correct = test
        .iter()
        .filter(|(x, t)| {
            let out = model.forward(x);
            output_is_correct(&out, *t, tol)
        })
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// Mean angular error in radians, logged next to the threshold accuracy.
pub fn mean_angular_error(model: &TinyModel, test: &Split) -> Result<f64> {
    if model.task != Task::Regression {
        return Err(Error::invalid("angular error needs a regression model"));
    }
    if test.is_empty() {
        return Err(Error::invalid("angular error of an empty test split"));
    }
    let total: f64 = test
        .iter()
        .map(|(x, t)| match t {
            Target::Gaze(p, y) => {
                let o = model.forward(x);
                angular_error((o[0], o[1]), (p, y))
            }
            Target::Class(_) => f64::NAN,
        })
        .sum();
    Ok(total / test.len() as f64)
}
