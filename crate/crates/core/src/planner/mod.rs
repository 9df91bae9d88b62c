//! Asymmetric information-set Monte Carlo tree search with flag exchange.
//!
//! Each decision builds two fresh perspective trees rooted at the current
//! state, expands partner nodes only with moves not yet rejected by the
//! partner (Ω), and then turns the ego tree into a move plus an outgoing
//! [`Flag`]. Ω and the last outgoing flag live in [`PlannerMemory`] and
//! persist across decisions.

mod dump;
mod flag;
mod omega;
mod search;
mod select;
mod tree;

use std::f64::consts::SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Cell, Direction, GameState, MazeSide, Player, RewardSpec};

pub use dump::{dump_tree, TreeDump, DUMP_VERSION};
pub use flag::Flag;
pub use omega::HiddenInfoDict;
pub use search::{explore, find_or_create_child, run_search, BeliefModel, SearchStats, SearchTrees};
pub use select::select_best_action;
pub use tree::{ucb_score, NodeId, SearchNode, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no plan: the state is final or outside the maze")]
    NoPlan,
    #[error("it is not the ego player's turn")]
    NotEgoTurn,
    #[error("the root has no children to choose from")]
    NoChildren,
    #[error("UCB is undefined for an unvisited node or a root")]
    UnscoredNode,
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Search iterations per decision.
    pub iterations: u32,
    /// UCB exploration constant.
    pub exploration: f64,
    /// Step cap per iteration; `None` means 4·W·H.
    #[serde(default)]
    pub rollout_cap: Option<u32>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            iterations: 100,
            exploration: SQRT_2,
            rollout_cap: None,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.iterations == 0 {
            return Err(PlanError::InvalidConfig("iterations must be at least 1".into()));
        }
        if !(self.exploration >= 0.0) {
            return Err(PlanError::InvalidConfig("exploration must be non-negative".into()));
        }
        if self.rollout_cap == Some(0) {
            return Err(PlanError::InvalidConfig("rollout cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rollout_cap_for(&self, width: u16, height: u16) -> u32 {
        self.rollout_cap.unwrap_or(4 * width as u32 * height as u32)
    }
}

/// What the ego player knows about the game: its own walls, the treasure if
/// it is visible on its side, and the common reward.
#[derive(Debug, Clone, Copy)]
pub struct EgoView<'a> {
    pub side: &'a MazeSide,
    pub goal: Option<Cell>,
    pub reward: RewardSpec,
}

impl<'a> EgoView<'a> {
    pub fn for_state(side: &'a MazeSide, state: &GameState, reward: RewardSpec) -> Self {
        EgoView {
            side,
            goal: (state.treasure_side == Player::Ego).then_some(state.treasure),
            reward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerMemory {
    pub omega: HiddenInfoDict,
    pub last_flag: Flag,
    /// Cell at which the partner was asked to play `last_flag`.
    #[serde(default)]
    pub last_flag_cell: Option<Cell>,
    pub rng_seed: u64,
}

impl PlannerMemory {
    pub fn new(rng_seed: u64) -> Self {
        PlannerMemory {
            omega: HiddenInfoDict::new(),
            last_flag: Flag::None,
            last_flag_cell: None,
            rng_seed,
        }
    }

    /// Forgets the pending proposal; Ω is kept.
    pub fn start_round(&mut self) {
        self.last_flag = Flag::None;
        self.last_flag_cell = None;
    }
}

/// Output of one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Direction,
    pub flag_out: Flag,
    pub flag_in: Flag,
    /// Token cell after the chosen move.
    pub next_cell: Cell,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub decision: Decision,
    pub trees: SearchTrees,
}

#[derive(Debug, Clone)]
pub struct Planner {
    pub config: PlannerConfig,
    pub memory: PlannerMemory,
}

impl Planner {
    pub fn new(config: PlannerConfig, rng_seed: u64) -> Self {
        Planner {
            config,
            memory: PlannerMemory::new(rng_seed),
        }
    }

    /// The flag-based policy: a move valid on the ego side and an outgoing flag.
    pub fn plan(&mut self, state: &GameState, f_in: Flag, view: &EgoView<'_>) -> Result<Decision, PlanError> {
        self.plan_detailed(state, f_in, view).map(|o| o.decision)
    }

    /// Like [`Planner::plan`] but also returns both search trees.
    pub fn plan_detailed(&mut self, state: &GameState, f_in: Flag, view: &EgoView<'_>) -> Result<PlanOutcome, PlanError> {
        self.config.validate()?;
        if state.in_control != Player::Ego {
            return Err(PlanError::NotEgoTurn);
        }
        if state.is_final() || !view.side.contains(state.token) {
            return Err(PlanError::NoPlan);
        }
        let mut rng = self.decision_rng(state);
        let trees = run_search(&self.config, view, &self.memory.omega, state.token, &mut rng);
        let decision = select_best_action(&trees.ego, f_in, &mut self.memory, view, &mut rng)?;
        Ok(PlanOutcome { decision, trees })
    }

    /// Per-decision generator derived from the memory seed and the state, so
    /// identical inputs give identical decisions.
    fn decision_rng(&self, state: &GameState) -> ChaCha8Rng {
        let mut h = self.memory.rng_seed ^ 0x9e37_79b9_7f4a_7c15;
        for v in [
            state.turn as u64,
            state.round as u64,
            state.token.x as u64,
            state.token.y as u64,
        ] {
            h = splitmix(h ^ v);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ego_state(token: Cell, treasure: Cell, side: Player) -> GameState {
        GameState {
            token,
            in_control: Player::Ego,
            turn: 1,
            treasure,
            treasure_side: side,
            round: 1,
        }
    }

    #[test]
    fn singleton_sigma_forces_noop() {
        let side = MazeSide::closed(3, 3);
        let state = ego_state(Cell::new(1, 1), Cell::new(0, 0), Player::Ego);
        let view = EgoView::for_state(&side, &state, RewardSpec::default());
        let mut planner = Planner::new(PlannerConfig::default(), 3);
        let d = planner.plan(&state, Flag::None, &view).unwrap();
        assert_eq!(d.action, Direction::Noop);
    }

    #[test]
    fn final_state_has_no_plan() {
        let side = MazeSide::open(3, 3);
        let state = ego_state(Cell::new(1, 1), Cell::new(1, 1), Player::Ego);
        let view = EgoView::for_state(&side, &state, RewardSpec::default());
        let mut planner = Planner::new(PlannerConfig::default(), 3);
        assert_eq!(planner.plan(&state, Flag::None, &view), Err(PlanError::NoPlan));
    }

    #[test]
    fn partner_turn_is_rejected() {
        let side = MazeSide::open(3, 3);
        let mut state = ego_state(Cell::new(1, 1), Cell::new(0, 0), Player::Ego);
        state.in_control = Player::Human;
        let view = EgoView::for_state(&side, &state, RewardSpec::default());
        let mut planner = Planner::new(PlannerConfig::default(), 3);
        assert_eq!(planner.plan(&state, Flag::None, &view), Err(PlanError::NotEgoTurn));
    }

    #[test]
    fn bad_config_is_reported() {
        let cfg = PlannerConfig {
            iterations: 0,
            ..PlannerConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert_eq!(PlannerConfig::default().rollout_cap_for(9, 9), 324);
    }

    #[test]
    fn moves_toward_adjacent_visible_goal() {
        let side = MazeSide::open(5, 5);
        let state = ego_state(Cell::new(2, 2), Cell::new(3, 2), Player::Ego);
        let view = EgoView::for_state(&side, &state, RewardSpec::default());
        let mut planner = Planner::new(PlannerConfig::default(), 11);
        let d = planner.plan(&state, Flag::None, &view).unwrap();
        assert_eq!(d.action, Direction::Right);
        assert_eq!(planner.memory.last_flag, d.flag_out);
    }
}
