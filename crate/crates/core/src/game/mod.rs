//! The shared-control maze game: private wall layouts, alternating control
//! of a single token and a common reward.

mod generate;
mod layout;
mod maze;
mod oracle;
mod state;

use thiserror::Error;

pub use generate::{
    generate_layout, generate_maze_pair, generate_maze_pair_with, round_side, MazePair, DEFAULT_REMOVAL_DENSITY,
    DEFAULT_ROUNDS,
};
pub use layout::{MazeFileError, MazeLayout, RoundSpec, MAZE_FILE_MAGIC, MAZE_FILE_VERSION};
pub use maze::{ActionSet, Cell, Direction, MazeSide};
pub use oracle::{distances_to, joint_oracle, shortest_first_moves, PlanStep};
pub use state::{apply, is_final, step, BlockedAttempt, EpisodeLog, GameState, LogEntry, Outcome, Player, RewardSpec, StepResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("cell {0} is outside the grid")]
    OutOfGrid(Cell),
    #[error("move {direction} from {cell} is blocked by a wall")]
    Blocked { cell: Cell, direction: Direction },
    #[error("invalid maze layout: {0}")]
    InvalidLayout(String),
    #[error("invalid reward spec {0:?}: goal reward must be positive and penalties non-positive")]
    InvalidReward(RewardSpec),
    #[error("inconsistent episode log: {0}")]
    InvalidLog(String),
}
