//! Keyword classifier used whenever no chat-completion backend is configured
//! (or it fails).
//!
//! Priority: stay-put phrases and direction words (a direction that is negated
//! or attached to a wall counts as a refusal), then questions, affirmations,
//! refusals, and finally `None`.

use crate::planner::Flag;

const NOOP_PHRASES: &[&str] = &[
    "stay put",
    "stay still",
    "stand still",
    "don't move",
    "do not move",
    "dont move",
    "no move",
    "no-op",
    "noop",
    "stay",
    "wait",
    "hold",
    "pass",
    "skip",
];

/// Phrases containing a direction word that do not name a direction.
const AFFIRMING_PHRASES: &[&str] = &["all right", "that's right", "thats right", "you're right", "youre right"];

const NEGATIONS: &[&str] = &[
    "not", "cannot", "can't", "cant", "don't", "dont", "won't", "wont", "unable", "no", "never", "couldn't",
    "wall", "walls", "blocked",
];

const INTERROGATIVES: &[&str] = &[
    "where", "what", "which", "how", "why", "who", "when", "is", "are", "do", "does", "did", "can", "could",
    "should", "will", "would", "have", "has", "any",
];

const AFFIRMATIONS: &[&str] = &[
    "ok", "okay", "k", "sure", "yes", "yep", "yeah", "yup", "alright", "fine", "agreed", "agree", "roger",
    "great", "good", "done", "correct", "cool", "perfect", "thanks",
];

const AFFIRMATION_PHRASES: &[&str] = &["got it", "will do", "sounds good", "all right", "that's right", "you're right"];

const REFUSALS: &[&str] = &[
    "no", "nope", "cannot", "can't", "cant", "unable", "impossible", "wall", "walls", "blocked", "won't", "wont",
    "not", "refuse",
];

fn direction_word(word: &str) -> Option<Flag> {
    match word {
        "right" | "east" | "rightward" | "rightwards" => Some(Flag::Right),
        "left" | "west" | "leftward" | "leftwards" => Some(Flag::Left),
        "up" | "north" | "upward" | "upwards" => Some(Flag::Up),
        "down" | "south" | "downward" | "downwards" => Some(Flag::Down),
        _ => None,
    }
}

fn normalize(text: &str) -> String {
    text.to_lowercase().replace(['\u{2019}', '\u{2018}', '`'], "'")
}

fn words(text: &str) -> Vec<&str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .map(|w| w.trim_matches(|c| c == '\'' || c == '-'))
        .filter(|w| !w.is_empty())
        .collect()
}

fn contains_phrase(words: &[&str], phrase: &str) -> bool {
    let target: Vec<&str> = phrase.split(' ').collect();
    words.windows(target.len()).any(|w| w == target.as_slice())
}

/// Classifies a message with keyword rules. Total and deterministic.
pub fn classify(text: &str) -> Flag {
    let lowered = normalize(text);
    if lowered.trim().is_empty() {
        return Flag::None;
    }
    let mut tokens = words(&lowered);

    // Blank out affirming idioms so "all right" is not read as a direction.
    let mut affirming = false;
    for phrase in AFFIRMING_PHRASES {
        let target: Vec<&str> = phrase.split(' ').collect();
        let n = target.len();
        let mut i = 0;
        while i + n <= tokens.len() {
            if tokens[i..i + n] == target[..] {
                affirming = true;
                for t in &mut tokens[i..i + n] {
                    *t = "";
                }
                i += n;
            } else {
                i += 1;
            }
        }
    }
    let tokens: Vec<&str> = tokens.into_iter().filter(|t| !t.is_empty()).collect();

    if NOOP_PHRASES.iter().any(|p| contains_phrase(&tokens, p)) {
        return Flag::Noop;
    }

    let mut negated_direction = false;
    for (i, word) in tokens.iter().enumerate() {
        let Some(flag) = direction_word(word) else { continue };
        let window = &tokens[i.saturating_sub(4)..i];
        if window.iter().any(|w| NEGATIONS.contains(w)) {
            negated_direction = true;
            continue;
        }
        return flag;
    }
    if negated_direction {
        return Flag::Reject;
    }

    let question = lowered.contains('?');
    if (question && tokens.iter().any(|w| INTERROGATIVES.contains(w)))
        || tokens.first().is_some_and(|w| ["where", "what", "which", "how", "why"].contains(w))
    {
        return Flag::Inquiry;
    }

    if affirming
        || AFFIRMATION_PHRASES.iter().any(|p| contains_phrase(&tokens, p))
        || (tokens.iter().any(|w| AFFIRMATIONS.contains(w)) && !tokens.iter().any(|w| REFUSALS.contains(w)))
    {
        return Flag::Accept;
    }

    if tokens.iter().any(|w| REFUSALS.contains(w)) {
        return Flag::Reject;
    }

    Flag::None
}
