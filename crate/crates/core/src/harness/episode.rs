//! One round of play between the planner and a proxy partner.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::game::{step, EpisodeLog, GameError, GameState, LogEntry, MazeLayout, Outcome, Player, RewardSpec};
use crate::language::{rules, GameInfoSnapshot, LanguageModule, RenderContext};
use crate::planner::{EgoView, Flag, PlanError, Planner};

use super::proxy::ProxyHuman;

pub const DEFAULT_TURN_CAP: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "A-Comm")]
    Comm,
    #[serde(rename = "A-Mute")]
    Mute,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Comm => "A-Comm",
            Condition::Mute => "A-Mute",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "comm" | "a-comm" => Some(Condition::Comm),
            "mute" | "a-mute" => Some(Condition::Mute),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EpisodeError {
    #[error("layout has no round {0}")]
    MissingRound(u8),
    #[error("round {0} is not solvable")]
    Unsolvable(u8),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("illegal move: {0:?}")]
    Game(GameError),
}

#[derive(Debug, Clone, Copy)]
pub struct EpisodeSettings {
    pub condition: Condition,
    pub reward: RewardSpec,
    pub turn_cap: u32,
    pub first_mover: Player,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        EpisodeSettings {
            condition: Condition::Comm,
            reward: RewardSpec::default(),
            turn_cap: DEFAULT_TURN_CAP,
            first_mover: Player::Human,
        }
    }
}

/// Plays one round. The planner and proxy keep their memory across calls, so
/// a caller running all rounds of a maze passes the same instances each time.
pub fn run_episode(
    layout: &MazeLayout,
    round: u8,
    planner: &mut Planner,
    proxy: &mut ProxyHuman,
    language: &LanguageModule,
    settings: &EpisodeSettings,
) -> Result<EpisodeLog, EpisodeError> {
    let mut state = layout
        .initial_state(round, settings.first_mover)
        .ok_or(EpisodeError::MissingRound(round))?;
    if crate::game::joint_oracle(&layout.ego, &layout.human, state.token, state.treasure, state.in_control).is_none() {
        return Err(EpisodeError::Unsolvable(round));
    }
    let comm = settings.condition == Condition::Comm;
    planner.memory.start_round();
    proxy.start_round();

    let started = Instant::now();
    let mut log = EpisodeLog::new(state);
    // Last message each player sent to the other.
    let mut ego_said: Option<String> = None;
    let mut human_said: Option<String> = None;

    while !state.is_final() && state.turn < settings.turn_cap {
        let entry = match state.in_control {
            Player::Human => {
                let flag_in = if comm { ego_said.as_deref().map_or(Flag::None, rules::classify) } else { Flag::None };
                let t = proxy.act(&state, flag_in);
                let result = step(&layout.human, &state, t.action, &settings.reward);
                if result.outcome == Outcome::Blocked {
                    return Err(EpisodeError::Game(GameError::Blocked {
                        cell: state.token,
                        direction: t.action,
                    }));
                }
                let (flag_out, message_out) = if comm && t.flag != Flag::None {
                    (t.flag, Some(t.message))
                } else {
                    (Flag::None, None)
                };
                let entry = LogEntry {
                    turn: state.turn,
                    player: Player::Human,
                    state,
                    action: t.action,
                    flag_in,
                    flag_out,
                    message_in: if comm { ego_said.take() } else { None },
                    message_out: message_out.clone(),
                    reward: result.reward,
                };
                human_said = message_out;
                state = result.state;
                entry
            }
            Player::Ego => {
                let message_in = if comm { human_said.take() } else { None };
                let flag_in = match &message_in {
                    Some(text) => language.parse_text(text),
                    None => Flag::None,
                };
                let view = EgoView::for_state(&layout.ego, &state, settings.reward);
                let decision = planner.plan(&state, flag_in, &view)?;
                let result = step(&layout.ego, &state, decision.action, &settings.reward);
                let (flag_out, message_out) = if comm {
                    let ctx = RenderContext {
                        info: GameInfoSnapshot::for_ego(&state, decision.action),
                        proposal: flag_in.as_direction(),
                        inquiry: message_in.as_deref(),
                    };
                    (decision.flag_out, language.render_flag(decision.flag_out, &ctx))
                } else {
                    (Flag::None, None)
                };
                let entry = LogEntry {
                    turn: state.turn,
                    player: Player::Ego,
                    state,
                    action: decision.action,
                    flag_in,
                    flag_out,
                    message_in,
                    message_out: message_out.clone(),
                    reward: result.reward,
                };
                ego_said = message_out;
                state = result.state;
                entry
            }
        };
        log.entries.push(entry);
    }

    log.turns = state.turn;
    log.solved = state.is_final();
    log.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(log)
}

/// Final state reached by the log, for callers that only kept the log.
pub fn final_state(log: &EpisodeLog, layout: &MazeLayout) -> Result<GameState, GameError> {
    log.replay(&layout.ego, &layout.human)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Cell, MazeSide, RoundSpec};
    use crate::harness::proxy::ProxyVariant;
    use crate::planner::PlannerConfig;

    fn corridor(treasure_side: Player) -> MazeLayout {
        MazeLayout {
            ego: MazeSide::open(5, 1),
            human: MazeSide::open(5, 1),
            start: Cell::new(0, 0),
            rounds: vec![RoundSpec {
                round: 1,
                treasure: Cell::new(4, 0),
                side: treasure_side,
            }],
        }
    }

    fn play(layout: &MazeLayout, condition: Condition, seed: u64) -> EpisodeLog {
        let mut planner = Planner::new(PlannerConfig::default(), seed);
        let mut proxy = ProxyHuman::new(ProxyVariant::GreedyFlagging, layout.human.clone(), seed);
        let settings = EpisodeSettings {
            condition,
            ..EpisodeSettings::default()
        };
        run_episode(layout, 1, &mut planner, &mut proxy, &LanguageModule::rules_only(), &settings).unwrap()
    }

    #[test]
    fn start_on_treasure_is_zero_turns() {
        let mut layout = corridor(Player::Human);
        layout.rounds[0].treasure = layout.start;
        let log = play(&layout, Condition::Comm, 1);
        assert!(log.solved);
        assert_eq!(log.turns, 0);
        assert!(log.entries.is_empty());
    }

    #[test]
    fn mute_logs_no_flags_or_messages() {
        let log = play(&corridor(Player::Ego), Condition::Mute, 2);
        assert!(log.solved);
        for e in &log.entries {
            assert_eq!((e.flag_in, e.flag_out), (Flag::None, Flag::None));
            assert!(e.message_in.is_none() && e.message_out.is_none());
        }
    }

    #[test]
    fn logs_replay_and_alternate() {
        for side in [Player::Ego, Player::Human] {
            let layout = corridor(side);
            let log = play(&layout, Condition::Comm, 3);
            let end = final_state(&log, &layout).unwrap();
            assert_eq!(end.token, Cell::new(4, 0));
            assert_eq!(log.turns as usize, log.entries.len());
        }
    }
}
