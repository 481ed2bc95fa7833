use serde::{Deserialize, Serialize};

use super::dataset::{Split, Target, Task};
use super::instances::ModelInstanceSet;
use super::mutation::affected_count;
use crate::error::{Error, Result};
use crate::fitness::angular_error;

/// How the weak test set is carved out of the full test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeaknessParams {
    /// Classification: keep inputs whose predicted-class confidence is at
    /// least this value.
    pub confidence_threshold: f64,
    /// Classification: require the confidence on every original instance
    /// instead of the first only.
    pub all_instances: bool,
    /// Regression: fraction of inputs with the smallest loss spread removed.
    pub remove_fraction: f64,
}

impl Default for WeaknessParams {
    fn default() -> Self {
        Self {
            confidence_threshold: 1.0 - 1e-6,
            all_instances: false,
            remove_fraction: 0.5,
        }
    }
}

fn sample_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Spread of the squared angular error of each test input across instances.
pub fn loss_spread(test: &Split, originals: &ModelInstanceSet) -> Vec<f64> {
    test.iter()
        .map(|(x, t)| {
            let Target::Gaze(p, y) = t else {
                return 0.0;
            };
            let losses: Vec<f64> = originals
                .instances
                .iter()
                .map(|m| {
                    let o = m.forward(x);
                    angular_error((o[0], o[1]), (p, y)).powi(2)
                })
                .collect();
            sample_std(&losses)
        })
        .collect()
}

/// Rows of `test` kept in the weak test set, in their original order.
pub fn weak_rows(
    test: &Split,
    originals: &ModelInstanceSet,
    task: Task,
    params: &WeaknessParams,
) -> Result<Vec<usize>> {
    if originals.is_empty() {
        return Err(Error::invalid("weak set needs at least one original instance"));
    }
    let rows: Vec<usize> = match task {
        Task::Classification => {
            let models = if params.all_instances {
                &originals.instances[..]
            } else {
                &originals.instances[..1]
            };
            (0..test.len())
                .filter(|&i| {
                    models.iter().all(|m| {
                        let probs = m.forward(&test.inputs[i]);
                        let conf = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        conf >= params.confidence_threshold
                    })
                })
                .collect()
        }
        Task::Regression => {
            if !(0.0..1.0).contains(&params.remove_fraction) {
                return Err(Error::invalid("remove fraction must lie in [0, 1)"));
            }
            let spread = loss_spread(test, originals);
            let mut order: Vec<usize> = (0..test.len()).collect();
            order.sort_by(|&a, &b| spread[a].total_cmp(&spread[b]).then(a.cmp(&b)));
            let removed = affected_count(params.remove_fraction, test.len());
            let mut kept = order[removed..].to_vec();
            kept.sort_unstable();
            kept
        }
    };
    if rows.is_empty() {
        return Err(Error::EmptyWeakSet(match task {
            Task::Classification => format!(
                "no test input reaches confidence {}; try a lower confidence_threshold",
                params.confidence_threshold
            ),
            Task::Regression => "every input was removed; try a smaller remove_fraction".into(),
        }));
    }
    Ok(rows)
}

/// The degraded test set used as the augmentation baseline.
pub fn derive_weak_test_set(
    test: &Split,
    originals: &ModelInstanceSet,
    task: Task,
    params: &WeaknessParams,
) -> Result<Split> {
    Ok(test.select(&weak_rows(test, originals, task, params)?))
}
