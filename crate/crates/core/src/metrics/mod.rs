//! Measurement: Wasserstein-1 accuracy, wall-clock timing, ground truths and
//! repetition summaries.

pub mod ground_truth;
pub mod summary;
pub mod timing;
pub mod wasserstein;

pub use ground_truth::{ground_truth, GroundTruthCache, GROUND_TRUTH_SAMPLES};
pub use summary::{read_records, summarize, write_records, RepetitionSummary, RunRecord};
pub use timing::{time_block, TimerSpan};
pub use wasserstein::{
    wasserstein1, wasserstein1_discrete, wasserstein1_discrete_sorted, wasserstein1_sorted, SortedSamples,
    WassersteinMethod, WassersteinResult,
};
