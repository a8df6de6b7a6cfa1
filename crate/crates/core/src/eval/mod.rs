//! Scoring, cross-validation over all models, and parameter sweeps.

pub mod agreement;
pub mod cv;
pub mod metrics;
pub mod reference;
pub mod report;
pub mod sweep;

pub use agreement::adjusted_agreement;
pub use cv::{fit_and_predict, run_cv, CvOutcome, ExperimentConfig, FittedModel, FoldOutcome, ModelKind, PredictionRow};
pub use metrics::{auc, macro_auc, rmse};
pub use reference::{reference_for, reference_scores, Reference, REFERENCES, REFERENCE_TOLERANCE};
pub use report::{write_predictions, Aggregate, EvalReport, FoldScore, ModelSummary};
pub use sweep::{fold_agreement, sweep, write_sweep, SweepAxis, SweepRow};
