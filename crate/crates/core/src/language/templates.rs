//! Fixed message templates for outgoing flags.

use crate::game::Direction;

use super::GameInfoSnapshot;

pub fn request(action: Direction) -> String {
    format!("Can you {}?", action.as_str())
}

pub fn wall_refusal(proposal: Option<Direction>) -> String {
    let word = proposal.map_or("do that", |d| d.as_str());
    format!("I cannot {word} because there is a wall in that direction.")
}

/// Deterministic answer to a question when no model is available. At most 30 words.
pub fn inquiry_fallback(info: &GameInfoSnapshot) -> String {
    let head = format!("I am at {} and will move {} now.", info.token, info.action.as_str());
    match info.treasure {
        Some(t) if info.treasure_visible => {
            let dx = t.x as i32 - info.token.x as i32;
            let dy = t.y as i32 - info.token.y as i32;
            let mut parts = Vec::new();
            if dx > 0 {
                parts.push("right");
            } else if dx < 0 {
                parts.push("left");
            }
            if dy > 0 {
                parts.push("down");
            } else if dy < 0 {
                parts.push("up");
            }
            let way = if parts.is_empty() { "here".to_string() } else { parts.join(" and ") };
            format!("{head} The treasure is at {t}, roughly {way}. Watch for walls on the way.")
        }
        _ => format!("{head} I cannot see the treasure, please guide me toward it."),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Cell;

    #[test]
    fn byte_exact_templates() {
        assert_eq!(request(Direction::Right), "Can you right?");
        assert_eq!(request(Direction::Noop), "Can you noop?");
        assert_eq!(
            wall_refusal(Some(Direction::Up)),
            "I cannot up because there is a wall in that direction."
        );
    }

    #[test]
    fn fallback_is_short() {
        for visible in [true, false] {
            let info = GameInfoSnapshot {
                token: Cell::new(8, 0),
                action: Direction::Down,
                treasure: visible.then_some(Cell::new(0, 8)),
                treasure_visible: visible,
            };
            let text = inquiry_fallback(&info);
            assert!(text.split_whitespace().count() <= 30, "{text}");
            assert_eq!(text.contains("[0, 8]"), visible);
        }
    }
}
