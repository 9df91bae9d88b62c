use std::fmt;

use serde::{Deserialize, Serialize};

use crate::game::Direction;

/// Compact intent exchanged between the partners: the five moves plus four
/// conversational responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Flag {
    #[serde(rename = "noop")]
    Noop,
    #[serde(rename = "right")]
    Right,
    #[serde(rename = "up")]
    Up,
    #[serde(rename = "left")]
    Left,
    #[serde(rename = "down")]
    Down,
    Accept,
    Reject,
    Inquiry,
    #[default]
    None,
}

impl Flag {
    pub const ALL: [Flag; 9] = [
        Flag::Noop,
        Flag::Right,
        Flag::Up,
        Flag::Left,
        Flag::Down,
        Flag::Accept,
        Flag::Reject,
        Flag::Inquiry,
        Flag::None,
    ];

    /// The move this flag names, if it is one of the five action flags.
    pub fn as_direction(self) -> Option<Direction> {
        match self {
            Flag::Noop => Some(Direction::Noop),
            Flag::Right => Some(Direction::Right),
            Flag::Up => Some(Direction::Up),
            Flag::Left => Some(Direction::Left),
            Flag::Down => Some(Direction::Down),
            _ => None,
        }
    }

    pub fn is_action(self) -> bool {
        self.as_direction().is_some()
    }

    /// Label used by prompts and the wire format.
    pub fn label(self) -> &'static str {
        match self {
            Flag::Noop => "noop",
            Flag::Right => "right",
            Flag::Up => "up",
            Flag::Left => "left",
            Flag::Down => "down",
            Flag::Accept => "Accept",
            Flag::Reject => "Reject",
            Flag::Inquiry => "Inquiry",
            Flag::None => "None",
        }
    }

    /// Case-insensitive inverse of [`Flag::label`].
    pub fn from_label(label: &str) -> Option<Flag> {
        Flag::ALL.into_iter().find(|f| f.label().eq_ignore_ascii_case(label))
    }
}

impl From<Direction> for Flag {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Noop => Flag::Noop,
            Direction::Right => Flag::Right,
            Direction::Up => Flag::Up,
            Direction::Left => Flag::Left,
            Direction::Down => Flag::Down,
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_mapping_is_injective_and_total() {
        let flags: Vec<Flag> = Direction::ALL.into_iter().map(Flag::from).collect();
        for (d, f) in Direction::ALL.into_iter().zip(&flags) {
            assert_eq!(f.as_direction(), Some(d));
        }
        let mut dedup = flags.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 5);
        assert_eq!(Flag::ALL.iter().filter(|f| f.is_action()).count(), 5);
    }

    #[test]
    fn labels_round_trip() {
        for f in Flag::ALL {
            assert_eq!(Flag::from_label(f.label()), Some(f));
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{}\"", f.label()));
        }
    }
}
