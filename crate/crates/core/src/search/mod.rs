//! Multi-objective search for inputs that kill mutant models.

mod archive;
mod domain;
mod engine;
mod nsga;

pub use archive::{Archive, ArchivePolicy, Individual};
pub use domain::{DigitDomain, DigitGenotype, Domain, EyeDomain, EyeGenotype, Seed};
pub use engine::{
    archive_split, assign_sparseness, check_archive, correct_seeds, diverse_seed_order,
    environmental_selection, init_population, repopulate, repopulate_with, run_search,
    run_search_observed, save_archive, Evaluator, GenerationLog, Guides, IdSource, SearchConfig,
    SearchRun,
};
pub use nsga::{
    binary_tournament, crowded_compare, crowding_distance, fast_nondominated_sort,
    most_dominated_order, rank_population, sel_tour_dcd, select, FitnessPair, Ranking,
};
