//! Objective functions and the per-model eval functions they are built from.
//!
//! `f1` is the misbehaviour-closeness sum over mutant instances (minimised),
//! `f2` the sparseness of an input with respect to the archive (maximised).

use serde::{Deserialize, Serialize};

use crate::digit::DigitInput;
use crate::error::{Error, Result};
use crate::eye::EyeChromosome;

/// Outcome of running one model instance on one input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub correct: bool,
    /// Distance from a misbehaviour; negative iff the model misbehaves.
    pub closeness: f64,
}

/// Maximum tolerated angular error for gaze predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionTolerance {
    /// Radians.
    pub max_error: f64,
}

impl RegressionTolerance {
    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    pub fn new(max_error: f64) -> Result<Self> {
        if !(max_error > 0.0) || !max_error.is_finite() {
            return Err(Error::invalid(format!(
                "tolerance must be positive, got {max_error}"
            )));
        }
        Ok(Self { max_error })
    }
}

impl Default for RegressionTolerance {
    fn default() -> Self {
        Self {
            max_error: 5f64.to_radians(),
        }
    }
}

/// Closeness of a softmax prediction to misclassification.
///
/// A tie between the expected class and the best other class counts as
/// correct with closeness 0.
pub fn eval_classifier(probs: &[f64], expected: usize) -> Result<EvalOutcome> {
    if probs.is_empty() {
        return Err(Error::invalid("empty probability vector"));
    }
    if expected >= probs.len() {
        return Err(Error::invalid(format!(
            "label {expected} out of range for {} classes",
            probs.len()
        )));
    }
    let own = probs[expected];
    let best_other = probs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != expected)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    // single-class output: nothing to compete with
    let best_other = if best_other.is_finite() { best_other } else { 0.0 };
    if own >= best_other {
        Ok(EvalOutcome {
            correct: true,
            closeness: own - best_other,
        })
    } else {
        Ok(EvalOutcome {
            correct: false,
            closeness: -1.0,
        })
    }
}

/// Unit gaze direction for a (pitch, yaw) pair in radians.
pub fn gaze_vector(pitch: f64, yaw: f64) -> [f64; 3] {
    [
        -pitch.cos() * yaw.sin(),
        -pitch.sin(),
        -pitch.cos() * yaw.cos(),
    ]
}

/// Angle in radians between two 3D vectors.
pub fn vector_angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Angular error between predicted and true (pitch, yaw) gaze.
pub fn angular_error(predicted: (f64, f64), truth: (f64, f64)) -> f64 {
    vector_angle(
        gaze_vector(predicted.0, predicted.1),
        gaze_vector(truth.0, truth.1),
    )
}

/// Closeness of a gaze prediction to exceeding the tolerated error.
/// An error exactly at the tolerance is still correct.
pub fn eval_regressor(
    predicted: (f64, f64),
    truth: (f64, f64),
    tol: RegressionTolerance,
) -> EvalOutcome {
    let closeness = tol.max_error - angular_error(predicted, truth);
    EvalOutcome {
        correct: closeness >= 0.0,
        closeness,
    }
}

/// Sum of closeness values over the mutant instances.
pub fn fitness_f1<'a>(mutant_outcomes: impl IntoIterator<Item = &'a EvalOutcome>) -> f64 {
    mutant_outcomes.into_iter().map(|o| o.closeness).sum()
}

/// Minimum distance from `x` to archive entries other than `x` itself.
/// Returns `f64::INFINITY` when there is no other entry.
pub fn fitness_f2<T, K: PartialEq>(
    x: (&K, &T),
    archive: impl IntoIterator<Item = (K, T)>,
    dist: impl Fn(&T, &T) -> f64,
) -> f64 {
    archive
        .into_iter()
        .filter(|(k, _)| k != x.0)
        .map(|(_, y)| dist(x.1, &y))
        .fold(f64::INFINITY, f64::min)
}

/// Euclidean distance between the two intensity vectors.
pub fn pixel_distance(a: &DigitInput, b: &DigitInput) -> f64 {
    a.grid
        .pixels()
        .iter()
        .zip(b.grid.pixels())
        .map(|(&p, &q)| {
            let d = p as f64 - q as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Normalised float-gene distance `d / (d + 1)`.
pub fn float_gene_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d / (d + 1.0)
}

/// Mean of the per-gene distances between two chromosomes, in `[0, 1]`.
///
/// Float genes use `d / (d + 1)`, head and eye rotation pairs the angle
/// between their direction vectors (capped at 1 radian), categorical genes
/// 0/1.
pub fn gene_distance(a: &EyeChromosome, b: &EyeChromosome) -> f64 {
    let floats = [
        float_gene_distance(a.pupil_size, b.pupil_size),
        float_gene_distance(a.iris_size, b.iris_size),
        float_gene_distance(a.ambient_intensity, b.ambient_intensity),
        float_gene_distance(a.exposure, b.exposure),
        float_gene_distance(a.light_rotation, b.light_rotation),
    ];
    let angles = [
        vector_angle(
            gaze_vector(a.head_pitch, a.head_yaw),
            gaze_vector(b.head_pitch, b.head_yaw),
        )
        .min(1.0),
        vector_angle(
            gaze_vector(a.eye_pitch, a.eye_yaw),
            gaze_vector(b.eye_pitch, b.eye_yaw),
        )
        .min(1.0),
    ];
    let categorical = [
        (a.iris_texture != b.iris_texture) as u8 as f64,
        (a.skin_texture != b.skin_texture) as u8 as f64,
    ];
    let terms = floats.len() + angles.len() + categorical.len();
    let total: f64 = floats.iter().chain(&angles).chain(&categorical).sum();
    total / terms as f64
}

/// Correct on at least one original and misbehaving on at least one mutant.
pub fn is_solution_candidate(originals: &[EvalOutcome], mutants: &[EvalOutcome]) -> bool {
    originals.iter().any(|o| o.correct) && mutants.iter().any(|o| !o.correct)
}
