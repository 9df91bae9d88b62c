//! Versioned JSON payloads exchanged with clients.
//!
//! Events are stored once per session in full and rendered per recipient.
//! Rendering is the only place hidden information is filtered.

use gnomes_core::game::{Cell, Direction, GameState, MazeLayout, Player};
use gnomes_core::Flag;
use serde::{Deserialize, Serialize};

pub const WIRE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionCondition {
    VsAgentComm,
    VsAgentMute,
    VsHuman,
}

impl SessionCondition {
    pub fn has_agent(self) -> bool {
        self != SessionCondition::VsHuman
    }

    pub fn allows_chat(self) -> bool {
        self != SessionCondition::VsAgentMute
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    WaitingForPartner,
    Playing,
    Finished,
}

/// Full, unfiltered event as kept in the session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredEvent {
    pub seq: u64,
    /// Milliseconds since the session was created.
    pub at_ms: u64,
    #[serde(flatten)]
    pub record: Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Record {
    State {
        state: GameState,
        score: f64,
        phase: Phase,
    },
    Chat {
        from: Player,
        text: String,
    },
    Thinking {
        from: Player,
    },
    Proposal {
        from: Player,
        flag: Flag,
    },
    RoundOver {
        round: u8,
        solved: bool,
        turns: u32,
        score: f64,
        next_round: Option<u8>,
    },
    Wall {
        player: Player,
        cell: Cell,
        direction: Direction,
        message: String,
    },
}

/// One event as a particular client sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEvent {
    pub v: u32,
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum EventBody {
    State(StateView),
    Chat(ChatView),
    FlagProposal(FlagView),
    RoundOver(RoundOverView),
    Error(ErrorView),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub condition: SessionCondition,
    pub you: Player,
    pub phase: Phase,
    pub round: u8,
    pub rounds: u8,
    pub turn: u32,
    pub in_control: Player,
    pub token: Cell,
    pub width: u16,
    pub height: u16,
    /// The recipient's own wall masks, row-major. Bit 0 right, 1 up, 2 left, 3 down.
    pub walls: Vec<u8>,
    /// Present only when the treasure is visible on the recipient's side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treasure: Option<Cell>,
    pub treasure_visible: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatView {
    pub from: Player,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalStatus {
    Thinking,
    Decided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagView {
    pub from: Player,
    pub status: ProposalStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<Flag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOverView {
    pub round: u8,
    pub solved: bool,
    pub turns: u32,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_round: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorView {
    pub code: String,
    pub player: Player,
    pub message: String,
    /// Only sent to the player who bumped the wall.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

pub const PARTNER_WALL_MESSAGE: &str = "Your partner bumped into a wall.";

/// Static facts a renderer needs besides the event itself.
pub struct RenderContext<'a> {
    pub layout: &'a MazeLayout,
    pub condition: SessionCondition,
}

impl StoredEvent {
    pub fn render(&self, recipient: Player, ctx: &RenderContext<'_>) -> WireEvent {
        let body = match &self.record {
            Record::State { state, score, phase } => EventBody::State(state_view(state, *score, *phase, recipient, ctx)),
            Record::Chat { from, text } => EventBody::Chat(ChatView {
                from: *from,
                text: text.clone(),
            }),
            Record::Thinking { from } => EventBody::FlagProposal(FlagView {
                from: *from,
                status: ProposalStatus::Thinking,
                flag: None,
            }),
            Record::Proposal { from, flag } => EventBody::FlagProposal(FlagView {
                from: *from,
                status: ProposalStatus::Decided,
                flag: Some(*flag),
            }),
            Record::RoundOver {
                round,
                solved,
                turns,
                score,
                next_round,
            } => EventBody::RoundOver(RoundOverView {
                round: *round,
                solved: *solved,
                turns: *turns,
                score: *score,
                next_round: *next_round,
            }),
            Record::Wall {
                player,
                cell,
                direction,
                message,
            } => {
                let own = *player == recipient;
                EventBody::Error(ErrorView {
                    code: "wall".into(),
                    player: *player,
                    message: if own { message.clone() } else { PARTNER_WALL_MESSAGE.into() },
                    cell: own.then_some(*cell),
                    direction: own.then_some(*direction),
                })
            }
        };
        WireEvent {
            v: WIRE_VERSION,
            seq: self.seq,
            body,
        }
    }
}

pub fn state_view(
    state: &GameState,
    score: f64,
    phase: Phase,
    recipient: Player,
    ctx: &RenderContext<'_>,
) -> StateView {
    let side = ctx.layout.side(recipient);
    let visible = state.treasure_side == recipient;
    StateView {
        condition: ctx.condition,
        you: recipient,
        phase,
        round: state.round,
        rounds: ctx.layout.rounds.len() as u8,
        turn: state.turn,
        in_control: state.in_control,
        token: state.token,
        width: side.width(),
        height: side.height(),
        walls: side.masks().to_vec(),
        treasure: visible.then_some(state.treasure),
        treasure_visible: visible,
        score,
    }
}

/// Direct answer to a websocket command; not part of the numbered stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub v: u32,
    pub reply: ReplyBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplyBody {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Commands a client may send over the event socket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ClientCommand {
    Move { direction: Direction },
    Chat { text: String },
    Ack { seq: u64 },
}
