//! Synchronous per-session state machine. The HTTP layer wraps one of these
//! in a mutex; everything here is deterministic given the planner seed.

use std::sync::Arc;
use std::time::Instant;

use gnomes_core::game::{step, BlockedAttempt, Direction, EpisodeLog, GameState, LogEntry, MazeLayout, MazeSide, Outcome, Player, RewardSpec};
use gnomes_core::language::{templates, GameInfoSnapshot, LanguageModule, MessageText, RenderContext as TextContext};
use gnomes_core::{Decision, EgoView, Flag, PlanError, Planner, PlannerConfig, PlannerMemory};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::persist::LogSink;
use crate::wire::{state_view, Phase, Record, RenderContext, SessionCondition, StateView, StoredEvent, WireEvent};

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("unknown client token")]
    UnknownClient,
    #[error("session already has two players")]
    SessionFull,
    #[error("waiting for a partner to join")]
    WaitingForPartner,
    #[error("it is not your turn")]
    OutOfTurn,
    #[error("the game is over")]
    GameOver,
    #[error("chat is disabled in this session")]
    ChatDisabled,
    #[error("{0}")]
    BadMessage(String),
}

impl ProtocolError {
    pub fn code(&self) -> &'static str {
        match self {
            ProtocolError::UnknownClient => "unknown-client",
            ProtocolError::SessionFull => "session-full",
            ProtocolError::WaitingForPartner => "waiting-for-partner",
            ProtocolError::OutOfTurn => "out-of-turn",
            ProtocolError::GameOver => "game-over",
            ProtocolError::ChatDisabled => "chat-disabled",
            ProtocolError::BadMessage(_) => "bad-message",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum MoveResult {
    Applied,
    Rejected { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResult {
    /// Flag the agent read from the message, in agent sessions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<Flag>,
    /// Immediate answer to a question.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
}

/// Everything persisted about a session besides its event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub v: u32,
    pub session_id: String,
    pub condition: SessionCondition,
    #[serde(default)]
    pub maze_seed: Option<u64>,
    /// Layout in the maze file format.
    pub maze: String,
    pub episodes: Vec<EpisodeLog>,
    #[serde(default)]
    pub memory: Option<PlannerMemory>,
}

pub struct SessionSettings {
    pub condition: SessionCondition,
    pub layout: MazeLayout,
    pub maze_seed: Option<u64>,
    pub planner: PlannerConfig,
    pub agent_seed: u64,
    pub reward: RewardSpec,
    pub turn_cap: u32,
}

/// A planning step taken out of the session so it can run without the lock.
pub struct AgentJob {
    planner: Planner,
    state: GameState,
    flag_in: Flag,
    side: MazeSide,
    reward: RewardSpec,
}

pub struct AgentResult {
    planner: Planner,
    state: GameState,
    flag_in: Flag,
    decision: Result<Decision, PlanError>,
}

impl AgentJob {
    pub fn run(mut self) -> AgentResult {
        let view = EgoView::for_state(&self.side, &self.state, self.reward);
        let decision = self.planner.plan(&self.state, self.flag_in, &view);
        AgentResult {
            planner: self.planner,
            state: self.state,
            flag_in: self.flag_in,
            decision,
        }
    }
}

pub struct SessionCore {
    id: String,
    condition: SessionCondition,
    layout: MazeLayout,
    maze_seed: Option<u64>,
    reward: RewardSpec,
    turn_cap: u32,
    state: GameState,
    score: f64,
    phase: Phase,
    /// `None` in person-vs-person games and while the agent is thinking.
    planner: Option<Planner>,
    clients: Vec<(String, Player)>,
    /// Latest intent read from the partner's chat, for the agent's next plan.
    partner_flag: Flag,
    partner_flag_text: Option<String>,
    /// Agent's latest outgoing flag and move.
    agent_flag: Flag,
    agent_action: Direction,
    /// Last chat line per player not yet attached to a logged move.
    said: [Option<String>; 2],
    events: Vec<StoredEvent>,
    episodes: Vec<EpisodeLog>,
    current: EpisodeLog,
    created: Instant,
    round_started: Instant,
    language: Arc<LanguageModule>,
    sink: Option<LogSink>,
}

fn slot(p: Player) -> usize {
    match p {
        Player::Ego => 0,
        Player::Human => 1,
    }
}

/// Opaque random token.
pub fn new_token() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl SessionCore {
    /// Creates the session and returns it with the creator's client token.
    /// The creator always takes the human seat.
    pub fn new(
        id: String,
        settings: SessionSettings,
        language: Arc<LanguageModule>,
        sink: Option<LogSink>,
    ) -> Result<(Self, String), String> {
        let first = settings.layout.rounds.iter().map(|r| r.round).min().ok_or("layout has no rounds")?;
        let state = settings
            .layout
            .initial_state(first, Player::Human)
            .ok_or("layout has no rounds")?;
        settings.planner.validate().map_err(|e| e.to_string())?;
        let token = new_token();
        let planner = settings
            .condition
            .has_agent()
            .then(|| Planner::new(settings.planner, settings.agent_seed));
        let phase = if settings.condition.has_agent() {
            Phase::Playing
        } else {
            Phase::WaitingForPartner
        };
        let now = Instant::now();
        let mut core = SessionCore {
            id,
            condition: settings.condition,
            layout: settings.layout,
            maze_seed: settings.maze_seed,
            reward: settings.reward,
            turn_cap: settings.turn_cap,
            state,
            score: 0.0,
            phase,
            planner,
            clients: vec![(token.clone(), Player::Human)],
            partner_flag: Flag::None,
            partner_flag_text: None,
            agent_flag: Flag::None,
            agent_action: Direction::Noop,
            said: [None, None],
            events: Vec::new(),
            episodes: Vec::new(),
            current: EpisodeLog::new(state),
            created: now,
            round_started: now,
            language,
            sink,
        };
        core.push_state();
        core.persist_record();
        Ok((core, token))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn condition(&self) -> SessionCondition {
        self.condition
    }

    pub fn layout(&self) -> &MazeLayout {
        &self.layout
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn episodes(&self) -> &[EpisodeLog] {
        &self.episodes
    }

    /// Log of the round in progress.
    pub fn open_episode(&self) -> &EpisodeLog {
        &self.current
    }

    pub fn memory(&self) -> Option<&PlannerMemory> {
        self.planner.as_ref().map(|p| &p.memory)
    }

    pub fn last_seq(&self) -> u64 {
        self.events.last().map_or(0, |e| e.seq)
    }

    pub fn stored_events(&self) -> &[StoredEvent] {
        &self.events
    }

    pub fn seat_of(&self, token: &str) -> Result<Player, ProtocolError> {
        self.clients
            .iter()
            .find(|(t, _)| t == token)
            .map(|(_, p)| *p)
            .ok_or(ProtocolError::UnknownClient)
    }

    /// Seats a second person on the ego side of a person-vs-person game.
    pub fn join(&mut self) -> Result<(String, Player), ProtocolError> {
        if self.condition.has_agent() || self.clients.len() >= 2 {
            return Err(ProtocolError::SessionFull);
        }
        let token = new_token();
        self.clients.push((token.clone(), Player::Ego));
        self.phase = Phase::Playing;
        self.push_state();
        Ok((token, Player::Ego))
    }

    fn render_ctx(&self) -> RenderContext<'_> {
        RenderContext {
            layout: &self.layout,
            condition: self.condition,
        }
    }

    pub fn view(&self, seat: Player) -> StateView {
        state_view(&self.state, self.score, self.phase, seat, &self.render_ctx())
    }

    /// Events after `since`, as `seat` sees them.
    pub fn events_since(&self, seat: Player, since: u64) -> Vec<WireEvent> {
        let ctx = self.render_ctx();
        let start = self.events.partition_point(|e| e.seq <= since);
        self.events[start..].iter().map(|e| e.render(seat, &ctx)).collect()
    }

    fn push(&mut self, record: Record) {
        let event = StoredEvent {
            seq: self.last_seq() + 1,
            at_ms: self.created.elapsed().as_millis() as u64,
            record,
        };
        if let Some(sink) = &mut self.sink {
            if let Err(e) = sink.append(&event) {
                warn!(session = %self.id, error = %e, "could not append event");
            }
        }
        self.events.push(event);
    }

    fn push_state(&mut self) {
        self.push(Record::State {
            state: self.state,
            score: self.score,
            phase: self.phase,
        });
    }

    fn check_turn(&self, seat: Player) -> Result<(), ProtocolError> {
        match self.phase {
            Phase::WaitingForPartner => Err(ProtocolError::WaitingForPartner),
            Phase::Finished => Err(ProtocolError::GameOver),
            Phase::Playing if self.state.in_control != seat => Err(ProtocolError::OutOfTurn),
            Phase::Playing => Ok(()),
        }
    }

    /// A person's move. Agent seats are driven through [`Self::begin_agent_turn`].
    pub fn submit_move(&mut self, seat: Player, direction: Direction) -> Result<MoveResult, ProtocolError> {
        self.check_turn(seat)?;
        if self.condition.has_agent() && seat == Player::Ego {
            return Err(ProtocolError::OutOfTurn);
        }
        let result = step(self.layout.side(seat), &self.state, direction, &self.reward);
        self.score += result.reward;
        if result.outcome == Outcome::Blocked {
            let message = templates::wall_refusal(Some(direction));
            self.current.blocked.push(BlockedAttempt {
                turn: self.state.turn,
                player: seat,
                cell: self.state.token,
                direction,
            });
            self.push(Record::Wall {
                player: seat,
                cell: self.state.token,
                direction,
                message: message.clone(),
            });
            return Ok(MoveResult::Rejected { message });
        }
        let (flag_in, flag_out) = if self.condition.has_agent() {
            (self.agent_flag, self.partner_flag)
        } else {
            (Flag::None, Flag::None)
        };
        self.current.entries.push(LogEntry {
            turn: self.state.turn,
            player: seat,
            state: self.state,
            action: direction,
            flag_in,
            flag_out,
            message_in: None,
            message_out: self.said[slot(seat)].take(),
            reward: result.reward,
        });
        self.state = result.state;
        self.after_move();
        Ok(MoveResult::Applied)
    }

    fn after_move(&mut self) {
        self.push_state();
        if self.state.is_final() || self.state.turn >= self.turn_cap {
            self.end_round();
        }
    }

    fn end_round(&mut self) {
        let mut log = std::mem::replace(&mut self.current, EpisodeLog::new(self.state));
        log.turns = self.state.turn;
        log.solved = self.state.is_final();
        log.duration_ms = self.round_started.elapsed().as_secs_f64() * 1e3;
        let round = self.state.round;
        let next = self.layout.rounds.iter().map(|r| r.round).filter(|r| *r > round).min();
        self.push(Record::RoundOver {
            round,
            solved: log.solved,
            turns: log.turns,
            score: self.score,
            next_round: next,
        });
        self.episodes.push(log);

        match next.and_then(|r| self.layout.initial_state(r, Player::Human)) {
            Some(state) => {
                self.state = state;
                self.current = EpisodeLog::new(state);
                self.round_started = Instant::now();
                if let Some(p) = &mut self.planner {
                    p.memory.start_round();
                }
            }
            None => self.phase = Phase::Finished,
        }
        self.score = 0.0;
        self.partner_flag = Flag::None;
        self.partner_flag_text = None;
        self.agent_flag = Flag::None;
        self.agent_action = Direction::Noop;
        self.said = [None, None];
        self.push_state();
        self.persist_record();
    }

    /// Delivers a chat line. In agent sessions the line is read into a flag
    /// for the agent's next decision, and questions are answered at once.
    pub fn submit_chat(&mut self, seat: Player, text: &str) -> Result<ChatResult, ProtocolError> {
        if !self.condition.allows_chat() {
            return Err(ProtocolError::ChatDisabled);
        }
        let msg = MessageText::new(text, seat, self.state.turn).map_err(|e| ProtocolError::BadMessage(e.to_string()))?;
        if msg.is_blank() {
            return Err(ProtocolError::BadMessage("empty message".into()));
        }
        self.push(Record::Chat {
            from: seat,
            text: text.to_string(),
        });
        self.said[slot(seat)] = Some(text.to_string());
        if !self.condition.has_agent() {
            return Ok(ChatResult { flag: None, reply: None });
        }

        let flag = self.language.parse_message(&msg);
        let mut reply = None;
        if flag == Flag::Inquiry {
            let ctx = TextContext {
                info: GameInfoSnapshot::for_ego(&self.state, self.agent_action),
                proposal: None,
                inquiry: Some(text),
            };
            if let Some(answer) = self.language.render_flag(Flag::Inquiry, &ctx) {
                self.push(Record::Chat {
                    from: Player::Ego,
                    text: answer.clone(),
                });
                reply = Some(answer);
            }
        } else if flag != Flag::None {
            self.partner_flag = flag;
            self.partner_flag_text = Some(text.to_string());
        }
        Ok(ChatResult {
            flag: Some(flag),
            reply,
        })
    }

    /// Whether the agent should move now.
    pub fn agent_due(&self) -> bool {
        self.condition.has_agent() && self.phase == Phase::Playing && self.state.in_control == Player::Ego
    }

    /// Takes the planner out and announces that the agent is thinking.
    /// Returns `None` when the agent is not due or is already thinking.
    pub fn begin_agent_turn(&mut self) -> Option<AgentJob> {
        if !self.agent_due() {
            return None;
        }
        let planner = self.planner.take()?;
        let flag_in = if self.condition.allows_chat() {
            std::mem::take(&mut self.partner_flag)
        } else {
            Flag::None
        };
        self.push(Record::Thinking { from: Player::Ego });
        Some(AgentJob {
            planner,
            state: self.state,
            flag_in,
            side: self.layout.ego.clone(),
            reward: self.reward,
        })
    }

    pub fn finish_agent_turn(&mut self, result: AgentResult) {
        self.planner = Some(result.planner);
        if result.state != self.state {
            warn!(session = %self.id, "agent result for a stale state dropped");
            return;
        }
        let decision = result.decision.unwrap_or_else(|e| {
            warn!(session = %self.id, error = %e, "planner failed; staying put");
            Decision {
                action: Direction::Noop,
                flag_out: Flag::None,
                flag_in: result.flag_in,
                next_cell: self.state.token,
            }
        });
        let comm = self.condition.allows_chat();
        let outcome = step(&self.layout.ego, &self.state, decision.action, &self.reward);
        let message_in = self.partner_flag_text.take();
        let message_out = if comm {
            let ctx = TextContext {
                info: GameInfoSnapshot::for_ego(&self.state, decision.action),
                proposal: result.flag_in.as_direction(),
                inquiry: None,
            };
            self.push(Record::Proposal {
                from: Player::Ego,
                flag: decision.flag_out,
            });
            self.language.render_flag(decision.flag_out, &ctx)
        } else {
            None
        };
        self.current.entries.push(LogEntry {
            turn: self.state.turn,
            player: Player::Ego,
            state: self.state,
            action: decision.action,
            flag_in: if comm { result.flag_in } else { Flag::None },
            flag_out: if comm { decision.flag_out } else { Flag::None },
            message_in,
            message_out: message_out.clone(),
            reward: outcome.reward,
        });
        self.score += outcome.reward;
        self.agent_flag = if comm { decision.flag_out } else { Flag::None };
        self.agent_action = decision.action;
        self.state = outcome.state;
        if let Some(text) = message_out {
            self.push(Record::Chat { from: Player::Ego, text });
        }
        self.after_move();
    }

    /// Runs agent turns inline until a person has to act.
    pub fn run_agent_turns(&mut self) {
        while let Some(job) = self.begin_agent_turn() {
            let result = job.run();
            self.finish_agent_turn(result);
        }
    }

    pub fn record(&self) -> SessionRecord {
        SessionRecord {
            v: RECORD_VERSION,
            session_id: self.id.clone(),
            condition: self.condition,
            maze_seed: self.maze_seed,
            maze: self.layout.to_text(),
            episodes: self.episodes.clone(),
            memory: self.memory().cloned(),
        }
    }

    fn persist_record(&mut self) {
        let record = self.record();
        if let Some(sink) = &mut self.sink {
            if let Err(e) = sink.write_record(&record) {
                warn!(session = %self.id, error = %e, "could not write session record");
            }
        }
    }
}
