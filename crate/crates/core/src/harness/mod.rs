//! Experiment orchestration: configuration, split plans, external score
//! import, the end-to-end run and the hypothesis diagnostic.

mod config;
mod experiment;
mod external;
mod hypothesis;
mod split;

pub use config::{
    all_predictors, ErrorKind, ExperimentConfig, HypothesisThresholds, Protocol, SplitConfig,
};
pub use experiment::{
    compute_predictor_table, evaluate_plan, load_index, load_inputs, make_plan, run_experiment, run_pipeline,
    tokenizer_config, Evaluation, ExperimentOutcome, Inputs, PredictorTable,
};
pub use external::{import_external_scores, parse_external_scores, ExternalColumn};
pub use hypothesis::{hypothesis_report, HypothesisReport, MetricDelta, Outcome, Regime};
pub use split::{
    parse_train_ids, split_fixed, split_fixed_fraction, split_leave_one_out, split_random_halves, SplitPair,
    SplitPlan,
};
