//! End-to-end commands: baseline training, mutant assessment, augmentation,
//! leave-one-out cross-validation and reporting.

mod commands;
mod config;
mod workspace;

pub use commands::{
    cmd_augment, cmd_baseline, cmd_crossval, cmd_mutants, cmd_report, load_baseline, load_mutants,
    load_target, AugmentSummary, BaselineManifest, CrossvalRow, InstanceRecord, MutantsSummary,
    OperatorAssessment, ReportRow, RunRecord, SubjectDomain,
};
pub use config::{
    HarnessSection, OperatorFamily, RunConfig, Scale, SearchSection, Subject, TrainingSection,
    SCHEMA_VERSION,
};
pub use workspace::{load_split, save_split, Workspace};
