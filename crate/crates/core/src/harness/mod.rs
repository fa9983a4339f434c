//! Experiment orchestration, metrics, paired significance tests and result
//! files.

mod config;
mod experiment;
mod metrics;
mod output;
mod stats;

pub use config::{DatasetSpec, ExperimentConfig, Problem, StepKind, SweepPoint};
pub use experiment::{
    initial_point, iteration_budget, load_dataset, prepare_split, run_experiment, train_model, ResultRecord,
    Status, TrainSpec, TrainedModel,
};
pub use metrics::{compute_acc, compute_nog_blr, compute_nog_lr};
pub use output::{
    emit_results, mean_std, read_records, summarize, GroupSummary, RecordRow, RECORDS_HEADER, SUMMARY_HEADER,
};
pub use stats::{
    average_ranks, sign_statistic, sign_test, wilcoxon_statistic, wilcoxon_test, WILCOXON_EXACT_LIMIT,
};
