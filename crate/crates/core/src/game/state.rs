use std::fmt;

use serde::{Deserialize, Serialize};

use super::maze::{Cell, Direction, MazeSide};
use super::GameError;
use crate::planner::Flag;

/// The two seats of a shared-control game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    /// The autonomous ego player.
    #[serde(rename = "E")]
    Ego,
    /// The partner, normally a human.
    #[serde(rename = "H")]
    Human,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Ego => Player::Human,
            Player::Human => Player::Ego,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Player::Ego => "E",
            Player::Human => "H",
        }
    }

    pub fn parse(s: &str) -> Option<Player> {
        match s {
            "E" | "e" => Some(Player::Ego),
            "H" | "h" => Some(Player::Human),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    pub token: Cell,
    pub in_control: Player,
    pub turn: u32,
    pub treasure: Cell,
    pub treasure_side: Player,
    pub round: u8,
}

impl GameState {
    pub fn new(start: Cell, treasure: Cell, treasure_side: Player, first_mover: Player, round: u8) -> Self {
        GameState {
            token: start,
            in_control: first_mover,
            turn: 0,
            treasure,
            treasure_side,
            round,
        }
    }

    pub fn is_final(&self) -> bool {
        is_final(self)
    }
}

pub fn is_final(state: &GameState) -> bool {
    state.token == state.treasure
}

/// Applies `action` with the mover's private transition function.
///
/// The returned state has control toggled and the turn counter incremented.
/// A blocked move is rejected and the caller keeps the old state.
pub fn apply(side: &MazeSide, state: &GameState, action: Direction) -> Result<GameState, GameError> {
    if !side.contains(state.token) {
        return Err(GameError::OutOfGrid(state.token));
    }
    let token = side.target(state.token, action).ok_or(GameError::Blocked {
        cell: state.token,
        direction: action,
    })?;
    Ok(GameState {
        token,
        in_control: state.in_control.other(),
        turn: state.turn + 1,
        ..*state
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Moved,
    Blocked,
    ReachedGoal,
}

/// Common reward shared by both players.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub goal_reward: f64,
    pub step_penalty: f64,
    pub wall_penalty: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        RewardSpec {
            goal_reward: 1.0,
            step_penalty: -0.01,
            wall_penalty: -0.05,
        }
    }
}

impl RewardSpec {
    pub fn validate(&self) -> Result<(), GameError> {
        if !(self.goal_reward > 0.0) || self.step_penalty > 0.0 || self.wall_penalty > 0.0 {
            return Err(GameError::InvalidReward(*self));
        }
        Ok(())
    }

    pub fn reward(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::ReachedGoal => self.goal_reward,
            Outcome::Blocked => self.wall_penalty + self.step_penalty,
            Outcome::Moved => self.step_penalty,
        }
    }
}

/// Result of one move attempt by the player in control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub state: GameState,
    pub outcome: Outcome,
    pub reward: f64,
}

/// Attempts a move. Blocked attempts leave the state untouched (control is
/// kept) and charge the wall penalty.
pub fn step(side: &MazeSide, state: &GameState, action: Direction, spec: &RewardSpec) -> StepResult {
    match apply(side, state, action) {
        Ok(next) => {
            let outcome = if next.is_final() {
                Outcome::ReachedGoal
            } else {
                Outcome::Moved
            };
            StepResult {
                state: next,
                outcome,
                reward: spec.reward(outcome),
            }
        }
        Err(_) => StepResult {
            state: *state,
            outcome: Outcome::Blocked,
            reward: spec.reward(Outcome::Blocked),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub turn: u32,
    pub player: Player,
    /// State before the action.
    pub state: GameState,
    pub action: Direction,
    pub flag_in: Flag,
    pub flag_out: Flag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_in: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_out: Option<String>,
    pub reward: f64,
}

/// A wall bump that did not consume a turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockedAttempt {
    pub turn: u32,
    pub player: Player,
    pub cell: Cell,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub round: u8,
    pub initial: GameState,
    pub entries: Vec<LogEntry>,
    #[serde(default)]
    pub blocked: Vec<BlockedAttempt>,
    /// Turn index T at which the episode ended.
    pub turns: u32,
    pub solved: bool,
    pub duration_ms: f64,
}

impl EpisodeLog {
    pub fn new(initial: GameState) -> Self {
        EpisodeLog {
            round: initial.round,
            initial,
            entries: Vec::new(),
            blocked: Vec::new(),
            turns: 0,
            solved: initial.is_final(),
            duration_ms: 0.0,
        }
    }

    pub fn total_reward(&self) -> f64 {
        self.entries.iter().map(|e| e.reward).sum::<f64>()
    }

    /// Replays every logged action on the correct side and returns the final
    /// state, checking that players alternate and each action was legal.
    pub fn replay(&self, ego: &MazeSide, human: &MazeSide) -> Result<GameState, GameError> {
        let mut state = self.initial;
        for entry in &self.entries {
            if entry.player != state.in_control {
                return Err(GameError::InvalidLog(format!(
                    "turn {} played by {} but {} was in control",
                    entry.turn, entry.player, state.in_control
                )));
            }
            let side = match entry.player {
                Player::Ego => ego,
                Player::Human => human,
            };
            state = apply(side, &state, entry.action)?;
        }
        if state.is_final() != self.solved {
            return Err(GameError::InvalidLog(format!(
                "log marked solved={} but replay ends at {} (treasure {})",
                self.solved, state.token, state.treasure
            )));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_at(x: u16, y: u16) -> GameState {
        GameState::new(Cell::new(x, y), Cell::new(8, 8), Player::Human, Player::Human, 1)
    }

    #[test]
    fn noop_keeps_position_and_passes_control() {
        let side = MazeSide::open(9, 9);
        let s = state_at(3, 3);
        let next = apply(&side, &s, Direction::Noop).unwrap();
        assert_eq!(next.token, s.token);
        assert_eq!(next.in_control, Player::Ego);
        assert_eq!(next.turn, 1);
    }

    #[test]
    fn right_increases_x() {
        let side = MazeSide::open(9, 9);
        let next = apply(&side, &state_at(4, 4), Direction::Right).unwrap();
        assert_eq!(next.token, Cell::new(5, 4));
    }

    #[test]
    fn boundary_move_is_rejected_with_the_wall() {
        let side = MazeSide::open(9, 9);
        let err = apply(&side, &state_at(0, 0), Direction::Left).unwrap_err();
        assert_eq!(
            err,
            GameError::Blocked {
                cell: Cell::new(0, 0),
                direction: Direction::Left
            }
        );
    }

    #[test]
    fn default_rewards() {
        let spec = RewardSpec::default();
        assert_eq!(spec.reward(Outcome::ReachedGoal), 1.0);
        assert_eq!(spec.reward(Outcome::Moved), -0.01);
        assert!((spec.reward(Outcome::Blocked) - (-0.06)).abs() < 1e-12);
        spec.validate().unwrap();
    }

    #[test]
    fn positive_penalty_is_invalid() {
        let spec = RewardSpec {
            step_penalty: 0.5,
            ..RewardSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn blocked_step_keeps_control() {
        let side = MazeSide::open(9, 9);
        let s = state_at(0, 0);
        let res = step(&side, &s, Direction::Up, &RewardSpec::default());
        assert_eq!(res.outcome, Outcome::Blocked);
        assert_eq!(res.state, s);
    }

    #[test]
    fn finality() {
        let mut s = state_at(1, 1);
        assert!(!s.is_final());
        s.token = s.treasure;
        assert!(is_final(&s));
    }

    #[test]
    fn step_reaching_treasure_reports_goal() {
        let side = MazeSide::open(3, 1);
        let s = GameState::new(Cell::new(1, 0), Cell::new(2, 0), Player::Ego, Player::Human, 1);
        let res = step(&side, &s, Direction::Right, &RewardSpec::default());
        assert_eq!(res.outcome, Outcome::ReachedGoal);
        assert_eq!(res.reward, 1.0);
    }
}
