//! Ground truth, retrieval metrics and the skeleton-noise experiment.

mod ground_truth;
mod metrics;
mod noise;

pub use ground_truth::{
    build_ground_truth, load_ground_truth, load_poses, parse_ground_truth, parse_poses, GroundTruth, PoseRecord,
};
pub use metrics::{auc, pr_curve, recall_at_100_precision, recall_at_n, PrPoint, Report};
pub use noise::{jitter_features, noise_experiment, noise_experiment_on_features, NoiseParams, NoiseReport, TABLE_DELTAS};
