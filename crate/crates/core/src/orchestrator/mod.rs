//! Running the full collaborative loop on the servers.

pub mod config;
pub mod folds;
pub mod pipeline;
pub mod report;
pub mod vote;

pub use config::{PipelineConfig, PrivacyBudget, SearchMode};
pub use folds::FoldPlan;
pub use pipeline::{
    concat, fold_metrics, fold_plan, generator_seed, noise_calibration, noise_stream, publish_path, run_pipeline,
    tuning_loop, CustodianInput, PartyOutcome, TuningOutcome,
};
pub use report::{BudgetReport, PartyReport, RunReport};
pub use vote::{secret_vote, unanimous, AveragedMetrics, ClearThresholds, Thresholds, THRESHOLD_LIMIT};
