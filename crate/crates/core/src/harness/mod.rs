//! Self-play experiments: scripted partners, episode loop, batch runner,
//! statistics and wall-inference heatmaps.

pub mod episode;
pub mod experiment;
pub mod heatmap;
pub mod proxy;
pub mod stats;

pub use episode::{run_episode, Condition, EpisodeError, EpisodeSettings, DEFAULT_TURN_CAP};
pub use experiment::{
    run_experiment, run_experiment_with, run_game, ExperimentConfig, ExperimentError, ExperimentResults, GameRecord,
    MazeSource, RESULTS_VERSION,
};
pub use heatmap::{emit_heatmap, Heatmap, WallCounts};
pub use proxy::{message_for, ProxyHuman, ProxyTurn, ProxyVariant};
pub use stats::{bootstrap_median_ci, bootstrap_median_diff_ci, median, RoundComparison, StatsRow, StatsTable};
