//! Translation between chat messages and flags.
//!
//! Parsing always succeeds: with a model configured the reply is mapped onto a
//! flag and anything unusable falls back to the keyword rules in [`rules`].

pub mod llm;
pub mod rules;
pub mod templates;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::game::{Cell, Direction, GameState, Player};
use crate::planner::Flag;

pub use llm::{
    map_label, ChatMessage, ChatRequest, ChatTransport, HttpTransport, LlmClient, LlmClientConfig, TransportError,
    FEW_SHOT, PROMPT_VERSION,
};

pub const MAX_MESSAGE_CHARS: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("message is {0} characters, the limit is {MAX_MESSAGE_CHARS}")]
    TooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageText {
    text: String,
    pub sender: Player,
    pub turn: u32,
}

impl MessageText {
    pub fn new(text: impl Into<String>, sender: Player, turn: u32) -> Result<Self, LanguageError> {
        let text = text.into();
        let n = text.chars().count();
        if n > MAX_MESSAGE_CHARS {
            return Err(LanguageError::TooLong(n));
        }
        Ok(MessageText { text, sender, turn })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }
}

/// Game facts handed to the inquiry answerer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameInfoSnapshot {
    pub token: Cell,
    pub action: Direction,
    pub treasure: Option<Cell>,
    pub treasure_visible: bool,
}

impl GameInfoSnapshot {
    pub fn for_ego(state: &GameState, action: Direction) -> Self {
        let visible = state.treasure_side == Player::Ego;
        GameInfoSnapshot {
            token: state.token,
            action,
            treasure: visible.then_some(state.treasure),
            treasure_visible: visible,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RenderContext<'a> {
    pub info: GameInfoSnapshot,
    /// The partner's most recent proposed move, named by a refusal.
    pub proposal: Option<Direction>,
    /// The partner's question, answered for an `Inquiry` flag.
    pub inquiry: Option<&'a str>,
}

#[derive(Default)]
pub struct LanguageModule {
    llm: Option<LlmClient>,
}

impl LanguageModule {
    /// Rule-only module; no network access.
    pub fn rules_only() -> Self {
        LanguageModule { llm: None }
    }

    pub fn with_llm(client: LlmClient) -> Self {
        LanguageModule { llm: Some(client) }
    }

    pub fn has_llm(&self) -> bool {
        self.llm.is_some()
    }

    pub fn parse_message(&self, msg: &MessageText) -> Flag {
        self.parse_text(msg.text())
    }

    pub fn parse_text(&self, text: &str) -> Flag {
        if text.trim().is_empty() {
            return Flag::None;
        }
        if let Some(client) = &self.llm {
            match client.llm_classify(text) {
                Ok(reply) => match map_label(&reply) {
                    Some(flag) => return flag,
                    None => warn!(%reply, "unmappable classifier reply; using rules"),
                },
                Err(e) => warn!(error = %e, "classifier request failed; using rules"),
            }
        }
        rules::classify(text)
    }

    pub fn render_flag(&self, flag: Flag, ctx: &RenderContext<'_>) -> Option<String> {
        match flag {
            Flag::None | Flag::Accept => None,
            Flag::Reject => Some(templates::wall_refusal(ctx.proposal)),
            Flag::Inquiry => Some(self.answer(ctx)),
            action => action.as_direction().map(templates::request),
        }
    }

    fn answer(&self, ctx: &RenderContext<'_>) -> String {
        if let (Some(client), Some(question)) = (&self.llm, ctx.inquiry) {
            match client.llm_answer(question, &ctx.info) {
                Ok(text) if !text.trim().is_empty() => return truncate_chars(text.trim(), MAX_MESSAGE_CHARS),
                Ok(_) => warn!("empty inquiry answer; using fallback"),
                Err(e) => warn!(error = %e, "inquiry request failed; using fallback"),
            }
        }
        templates::inquiry_fallback(&ctx.info)
    }
}

fn truncate_chars(text: &str, max: usize) -> String {
    text.chars().take(max).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Canned(Mutex<Vec<Result<String, TransportError>>>);

    impl ChatTransport for Canned {
        fn complete(&self, _: &ChatRequest) -> Result<String, TransportError> {
            self.0.lock().unwrap().remove(0)
        }
    }

    fn module(replies: Vec<Result<String, TransportError>>) -> LanguageModule {
        LanguageModule::with_llm(LlmClient::new(Box::new(Canned(Mutex::new(replies))), "test"))
    }

    fn ctx() -> RenderContext<'static> {
        RenderContext {
            info: GameInfoSnapshot {
                token: Cell::new(1, 1),
                action: Direction::Left,
                treasure: None,
                treasure_visible: false,
            },
            proposal: Some(Direction::Up),
            inquiry: Some("where are you going?"),
        }
    }

    #[test]
    fn message_length_is_enforced() {
        assert!(MessageText::new("a".repeat(500), Player::Human, 0).is_ok());
        assert_eq!(
            MessageText::new("a".repeat(501), Player::Human, 0),
            Err(LanguageError::TooLong(501))
        );
    }

    #[test]
    fn model_reply_is_used_and_degrades() {
        let lang = module(vec![
            Ok("I think you should go Left.".into()),
            Ok("left or right".into()),
            Err(TransportError::Timeout),
        ]);
        assert_eq!(lang.parse_text("whatever"), Flag::Left);
        // Ambiguous reply falls back to rules.
        assert_eq!(lang.parse_text("go down"), Flag::Down);
        assert_eq!(lang.parse_text("Ok."), Flag::Accept);
    }

    #[test]
    fn empty_message_skips_the_model() {
        let lang = module(vec![]);
        assert_eq!(lang.parse_text("  "), Flag::None);
    }

    #[test]
    fn rendering() {
        let lang = LanguageModule::rules_only();
        let c = ctx();
        assert_eq!(lang.render_flag(Flag::Right, &c).as_deref(), Some("Can you right?"));
        assert_eq!(
            lang.render_flag(Flag::Reject, &c).as_deref(),
            Some("I cannot up because there is a wall in that direction.")
        );
        assert_eq!(lang.render_flag(Flag::None, &c), None);
        assert_eq!(lang.render_flag(Flag::Accept, &c), None);
        assert!(lang.render_flag(Flag::Inquiry, &c).unwrap().contains("[1, 1]"));
    }

    #[test]
    fn inquiry_uses_model_then_fallback() {
        let lang = module(vec![Ok("Head left, mind the wall.".into()), Err(TransportError::Status(500))]);
        let c = ctx();
        assert_eq!(lang.render_flag(Flag::Inquiry, &c).unwrap(), "Head left, mind the wall.");
        assert_eq!(
            lang.render_flag(Flag::Inquiry, &c).unwrap(),
            templates::inquiry_fallback(&c.info)
        );
    }
}
