//! Shared-control cooperative maze game with a flag-exchanging tree search
//! planner.
//!
//! * [`game`]: maze sides, alternating-control rules, rewards, generation and
//!   a breadth-first solvability oracle.
//! * [`planner`]: asymmetric information-set MCTS that consumes and emits
//!   intent [`Flag`]s and remembers partner-rejected moves.
//! * [`language`]: natural language to flag parsing and flag to message
//!   rendering, with an optional chat-completion backend.
//! * [`harness`]: scripted partner policies, episode loop, experiments,
//!   statistics and hidden-information heatmaps.

pub mod game;
pub mod harness;
pub mod language;
pub mod planner;

pub use game::{Cell, Direction, GameError, GameState, MazeLayout, MazeSide, Player, RewardSpec};
pub use planner::{Decision, EgoView, Flag, HiddenInfoDict, PlanError, Planner, PlannerConfig, PlannerMemory};
