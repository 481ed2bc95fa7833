//! Killing verdicts, configuration search, and mutation scores.

mod config_search;
mod score;
mod stats;

pub use config_search::{
    binary_search_config, exhaustive_search, likely_equivalent, probe_bound, OperatorSearchResult,
    Probe, SearchOutcome, Verdict, DEFAULT_EPSILON,
};
pub use score::{killing_probability, mutation_score, MutationScoreReport, RunOutcome, ScoreRow};
pub use stats::{
    cohens_d, is_killed, kill_rule, rank_sum_p, signed_rank_p, KillOutcome, StatTest,
    MIN_EFFECT_SIZE, SIGNIFICANCE,
};
