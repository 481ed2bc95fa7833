//! Tiny feedforward models: deterministic training, inference, and the
//! pre-training mutation operators.

mod dataset;
mod instances;
mod model;
mod mutation;
mod weak;

pub use dataset::{Dataset, Split, Target, Task, NUM_CLASSES};
pub use instances::{
    build_instances, evaluate_output, mean_angular_error, output_is_correct, quality_metric,
    ModelInstanceSet,
};
pub use model::{train, Activation, Layer, TinyModel, TrainSpec, WeightInit};
pub use mutation::{
    affected_count, apply_mutation, short_real, MutationSpec, Operator, MAX_FRACTION,
    NOISE_STD_FRACTION,
};
pub use weak::{derive_weak_test_set, loss_spread, weak_rows, WeaknessParams};
