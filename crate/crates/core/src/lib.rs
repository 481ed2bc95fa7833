//! Test-set augmentation for small learned models: evolves inputs that the
//! original model instances handle correctly while mutated instances fail,
//! then measures the gain in mutation score.

pub mod analysis;
pub mod digit;
pub mod error;
pub mod eye;
pub mod fitness;
pub mod harness;
pub mod pipeline;
pub mod search;

pub use error::{Error, Result};
