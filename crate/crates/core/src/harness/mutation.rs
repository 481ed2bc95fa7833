use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Split, Target, Task, NUM_CLASSES};
use super::model::{Activation, TrainSpec, WeightInit};
use crate::error::{Error, Result};

/// Largest fraction of training data an operator may touch.
pub const MAX_FRACTION: f64 = 0.99;
/// Noise added by TAN, as a fraction of each feature's standard deviation.
pub const NOISE_STD_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Operator {
    Tcl,
    Trd,
    Tud,
    Tan,
    Tco,
    Hlr,
    Hne,
    Ach,
    Arm,
    Wci,
}

impl Operator {
    pub const ALL: [Operator; 10] = [
        Operator::Tcl,
        Operator::Trd,
        Operator::Tud,
        Operator::Tan,
        Operator::Tco,
        Operator::Hlr,
        Operator::Hne,
        Operator::Ach,
        Operator::Arm,
        Operator::Wci,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Operator::Tcl => "TCL",
            Operator::Trd => "TRD",
            Operator::Tud => "TUD",
            Operator::Tan => "TAN",
            Operator::Tco => "TCO",
            Operator::Hlr => "HLR",
            Operator::Hne => "HNE",
            Operator::Ach => "ACH",
            Operator::Arm => "ARM",
            Operator::Wci => "WCI",
        }
    }

    /// Continuous operators take a real parameter searched by bisection.
    pub fn is_continuous(self) -> bool {
        !matches!(self, Operator::Ach | Operator::Arm | Operator::Wci)
    }

    pub fn classification_only(self) -> bool {
        matches!(self, Operator::Tcl | Operator::Tud | Operator::Tco)
    }

    pub fn supports(self, task: Task) -> bool {
        task == Task::Classification || !self.classification_only()
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operator::ALL
            .into_iter()
            .find(|o| o.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown operator `{s}`")))
    }
}

/// A single, fully parameterized mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "UPPERCASE", deny_unknown_fields)]
pub enum MutationSpec {
    /// Relabel `fraction` of the rows of class `label`.
    Tcl { fraction: f64, label: u8 },
    /// Delete `fraction` of all training rows.
    Trd { fraction: f64 },
    /// Delete `fraction` of the rows of class `label`.
    Tud { fraction: f64, label: u8 },
    /// Add Gaussian noise to `fraction` of the rows.
    Tan { fraction: f64 },
    /// Blend `fraction` of the rows of class `from` toward class `to`.
    Tco { fraction: f64, from: u8, to: u8 },
    Hlr { learning_rate: f64 },
    Hne { epochs: usize },
    Ach { layer: usize, activation: Activation },
    Arm { layer: usize },
    Wci { layer: usize, init: WeightInit },
}

impl MutationSpec {
    pub fn operator(&self) -> Operator {
        match self {
            MutationSpec::Tcl { .. } => Operator::Tcl,
            MutationSpec::Trd { .. } => Operator::Trd,
            MutationSpec::Tud { .. } => Operator::Tud,
            MutationSpec::Tan { .. } => Operator::Tan,
            MutationSpec::Tco { .. } => Operator::Tco,
            MutationSpec::Hlr { .. } => Operator::Hlr,
            MutationSpec::Hne { .. } => Operator::Hne,
            MutationSpec::Ach { .. } => Operator::Ach,
            MutationSpec::Arm { .. } => Operator::Arm,
            MutationSpec::Wci { .. } => Operator::Wci,
        }
    }

    /// Short human-readable parameter description.
    pub fn param_label(&self) -> String {
        match self {
            MutationSpec::Tcl { fraction, label } => format!("{}@{label}", short_real(*fraction)),
            MutationSpec::Trd { fraction } | MutationSpec::Tan { fraction } => short_real(*fraction),
            MutationSpec::Tud { fraction, label } => format!("{}@{label}", short_real(*fraction)),
            MutationSpec::Tco { fraction, from, to } => format!("{}@{from}->{to}", short_real(*fraction)),
            MutationSpec::Hlr { learning_rate } => short_real(*learning_rate),
            MutationSpec::Hne { epochs } => epochs.to_string(),
            MutationSpec::Ach { layer, activation } => format!("l{layer}:{}", activation.name()),
            MutationSpec::Arm { layer } => format!("l{layer}"),
            MutationSpec::Wci { layer, init } => format!("l{layer}:{}", init.name()),
        }
    }

    pub fn validate(&self, task: Task, spec: &TrainSpec) -> Result<()> {
        let op = self.operator();
        if !op.supports(task) {
            return Err(Error::invalid(format!("{op} applies to classification only")));
        }
        let fraction = |f: f64| {
            if (0.0..=MAX_FRACTION).contains(&f) {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{op}: fraction {f} outside [0, {MAX_FRACTION}]; training data cannot be removed entirely"
                )))
            }
        };
        let class = |c: u8| {
            if (c as usize) < NUM_CLASSES {
                Ok(())
            } else {
                Err(Error::invalid(format!("{op}: class {c} out of range")))
            }
        };
        let hidden = spec.hidden_sizes.len();
        let layer = |l: usize, count: usize| {
            if l < count {
                Ok(())
            } else {
                Err(Error::invalid(format!("{op}: layer {l} out of range (0..{count})")))
            }
        };
        match *self {
            MutationSpec::Tcl { fraction: f, label } | MutationSpec::Tud { fraction: f, label } => {
                fraction(f)?;
                class(label)
            }
            MutationSpec::Trd { fraction: f } | MutationSpec::Tan { fraction: f } => fraction(f),
            MutationSpec::Tco { fraction: f, from, to } => {
                fraction(f)?;
                class(from)?;
                class(to)?;
                if from == to {
                    return Err(Error::invalid("TCO needs two distinct classes"));
                }
                Ok(())
            }
            MutationSpec::Hlr { learning_rate } => {
                if learning_rate > 0.0 && learning_rate.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("HLR: learning rate must be positive"))
                }
            }
            MutationSpec::Hne { epochs } => {
                if epochs > 0 {
                    Ok(())
                } else {
                    Err(Error::invalid("HNE: epochs must be positive"))
                }
            }
            MutationSpec::Ach { layer: l, .. } | MutationSpec::Arm { layer: l } => layer(l, hidden),
            MutationSpec::Wci { layer: l, .. } => layer(l, hidden + 1),
        }
    }
}

impl fmt::Display for MutationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.operator(), self.param_label())
    }
}

/// `x` with at most four decimals and no trailing zeros, for labels.
pub fn short_real(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Round-half-up of `fraction · eligible`.
pub fn affected_count(fraction: f64, eligible: usize) -> usize {
    ((fraction * eligible as f64) + 0.5).floor() as usize
}

fn sample_rows<R: Rng + ?Sized>(rows: &[usize], count: usize, rng: &mut R) -> Vec<usize> {
    let mut picked: Vec<usize> = rows.choose_multiple(rng, count).copied().collect();
    picked.sort_unstable();
    picked
}

fn rows_of_class(split: &Split, label: u8) -> Vec<usize> {
    split
        .targets
        .iter()
        .enumerate()
        .filter(|(_, t)| t.class() == Some(label))
        .map(|(i, _)| i)
        .collect()
}

fn without_rows(split: &Split, removed: &[usize]) -> Split {
    let keep: Vec<usize> = (0..split.len())
        .filter(|i| removed.binary_search(i).is_err())
        .collect();
    split.select(&keep)
}

/// Applies `mu` to a copy of the training data or specification. The test
/// split is returned unchanged.
pub fn apply_mutation<R: Rng + ?Sized>(
    ds: &Dataset,
    spec: &TrainSpec,
    mu: &MutationSpec,
    rng: &mut R,
) -> Result<(Dataset, TrainSpec)> {
    mu.validate(ds.task, spec)?;
    let mut out = ds.clone();
    let mut spec = spec.clone();
    let train = &ds.train;
    match *mu {
        MutationSpec::Tcl { fraction, label } => {
            let eligible = rows_of_class(train, label);
            let picked = sample_rows(&eligible, affected_count(fraction, eligible.len()), rng);
            for r in picked {
                let mut new = rng.random_range(0..NUM_CLASSES as u8 - 1);
                if new >= label {
                    new += 1;
                }
                out.train.targets[r] = Target::Class(new);
            }
        }
        MutationSpec::Trd { fraction } => {
            let all: Vec<usize> = (0..train.len()).collect();
            let removed = sample_rows(&all, affected_count(fraction, train.len()), rng);
            out.train = without_rows(train, &removed);
        }
        MutationSpec::Tud { fraction, label } => {
            let eligible = rows_of_class(train, label);
            let removed = sample_rows(&eligible, affected_count(fraction, eligible.len()), rng);
            out.train = without_rows(train, &removed);
        }
        MutationSpec::Tan { fraction } => {
            let n = train.len() as f64;
            let stds: Vec<f64> = (0..ds.features)
                .map(|j| {
                    let mean = train.inputs.iter().map(|x| x[j]).sum::<f64>() / n;
                    let var = train.inputs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
                    var.sqrt()
                })
                .collect();
            let all: Vec<usize> = (0..train.len()).collect();
            let picked = sample_rows(&all, affected_count(fraction, train.len()), rng);
            for r in picked {
                for (j, v) in out.train.inputs[r].iter_mut().enumerate() {
                    let sigma = NOISE_STD_FRACTION * stds[j];
                    if sigma > 0.0 {
                        *v += Normal::new(0.0, sigma).expect("positive sigma").sample(rng);
                    }
                }
            }
        }
        MutationSpec::Tco { fraction, from, to } => {
            let eligible = rows_of_class(train, from);
            let donors = rows_of_class(train, to);
            if donors.is_empty() {
                return Err(Error::invalid(format!("TCO: no training rows of class {to}")));
            }
            let picked = sample_rows(&eligible, affected_count(fraction, eligible.len()), rng);
            for r in picked {
                let d = *donors.choose(rng).expect("non-empty");
                let donor = train.inputs[d].clone();
                for (v, w) in out.train.inputs[r].iter_mut().zip(donor) {
                    *v = 0.5 * *v + 0.5 * w;
                }
            }
        }
        MutationSpec::Hlr { learning_rate } => spec.learning_rate = learning_rate,
        MutationSpec::Hne { epochs } => spec.epochs = epochs,
        MutationSpec::Ach { layer, activation } => spec.activations[layer] = activation,
        MutationSpec::Arm { layer } => spec.activations[layer] = Activation::Linear,
        MutationSpec::Wci { layer, init } => spec.weight_init[layer] = init,
    }
    if out.train.is_empty() {
        return Err(Error::invalid(format!("{mu} left no training data")));
    }
    Ok((out, spec))
}
