//! Sampling of trajectories and estimation of block mutual information.

mod estimate;
mod level;
mod trajectory;

pub use estimate::{
    estimate_block_mi, estimate_pooled, estimate_windows, EstimatorMethod, EstimatorOptions, EstimatorReport,
    SamplingRegime,
};
pub use level::{derive_seed, sample_level, splitmix64, HugeLevel, LevelSampler, SampledLevel, TABLE_LEVELS};
pub use trajectory::{
    sample_pooled_windows, sample_pooled_windows_with_state, sample_trajectory, sample_trajectory_with_hidden,
    sidecar_path, Trajectory, TrajectoryMeta,
};
