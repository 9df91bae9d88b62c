//! Maze pair plus round schedule, and the `gnomes-maze v1` text format.
//!
//! ```text
//! gnomes-maze v1 <W> <H>
//! <H rows of W hex digits: ego side>
//! <H rows of W hex digits: human side>
//! start <x> <y>
//! treasure <round> <x> <y> <E|H>
//! ```
//!
//! Each hex digit is a cell's wall mask: bit0 right, bit1 up, bit2 left,
//! bit3 down. Blank lines and lines starting with `#` are ignored on load.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::maze::{Cell, Direction, MazeSide};
use super::state::{GameState, Player};

pub const MAZE_FILE_MAGIC: &str = "gnomes-maze";
pub const MAZE_FILE_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub round: u8,
    pub treasure: Cell,
    pub side: Player,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeLayout {
    pub ego: MazeSide,
    pub human: MazeSide,
    pub start: Cell,
    pub rounds: Vec<RoundSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct MazeFileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MazeFileError {
    MazeFileError {
        line,
        message: message.into(),
    }
}

impl MazeLayout {
    pub fn width(&self) -> u16 {
        self.ego.width()
    }

    pub fn height(&self) -> u16 {
        self.ego.height()
    }

    pub fn side(&self, player: Player) -> &MazeSide {
        match player {
            Player::Ego => &self.ego,
            Player::Human => &self.human,
        }
    }

    pub fn round(&self, round: u8) -> Option<&RoundSpec> {
        self.rounds.iter().find(|r| r.round == round)
    }

    /// Opening state of `round` with `first_mover` in control.
    pub fn initial_state(&self, round: u8, first_mover: Player) -> Option<GameState> {
        let spec = self.round(round)?;
        Some(GameState::new(self.start, spec.treasure, spec.side, first_mover, round))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAZE_FILE_MAGIC} {MAZE_FILE_VERSION} {} {}", self.width(), self.height());
        for side in [&self.ego, &self.human] {
            for y in 0..side.height() {
                for x in 0..side.width() {
                    let _ = write!(out, "{:x}", side.mask(Cell::new(x, y)));
                }
                out.push('\n');
            }
        }
        let _ = writeln!(out, "start {} {}", self.start.x, self.start.y);
        for r in &self.rounds {
            let _ = writeln!(out, "treasure {} {} {} {}", r.round, r.treasure.x, r.treasure.y, r.side);
        }
        out
    }

    /// Parses and validates a maze file. Errors carry 1-based line numbers.
    pub fn from_text(text: &str) -> Result<MazeLayout, MazeFileError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or_else(|| err(1, "empty maze file"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != MAZE_FILE_MAGIC {
            return Err(err(hline, format!("expected `{MAZE_FILE_MAGIC} v1 <W> <H>` header")));
        }
        if parts[1] != MAZE_FILE_VERSION {
            return Err(err(hline, format!("unsupported version {}", parts[1])));
        }
        let width: u16 = parts[2].parse().map_err(|_| err(hline, "bad width"))?;
        let height: u16 = parts[3].parse().map_err(|_| err(hline, "bad height"))?;
        if width < 1 || height < 1 {
            return Err(err(hline, "grid must be at least 1x1"));
        }

        let mut sides = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut masks = Vec::with_capacity(width as usize * height as usize);
            let mut row_lines = Vec::with_capacity(height as usize);
            for _ in 0..height {
                let (ln, row) = lines.next().ok_or_else(|| err(hline, "truncated wall block"))?;
                if row.chars().count() != width as usize {
                    return Err(err(ln, format!("expected {width} hex digits, found `{row}`")));
                }
                for ch in row.chars() {
                    let m = ch
                        .to_digit(16)
                        .ok_or_else(|| err(ln, format!("`{ch}` is not a hex digit")))?;
                    masks.push(m as u8);
                }
                row_lines.push(ln);
            }
            check_side(width, height, &masks, &row_lines)?;
            sides.push(MazeSide::from_masks(width, height, masks).map_err(|e| err(row_lines[0], e.to_string()))?);
        }
        let human = sides.pop().expect("two sides");
        let ego = sides.pop().expect("two sides");

        let mut start = None;
        let mut rounds: Vec<RoundSpec> = Vec::new();
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let cell = |xs: &str, ys: &str| -> Result<Cell, MazeFileError> {
                let x: u16 = xs.parse().map_err(|_| err(ln, format!("bad x `{xs}`")))?;
                let y: u16 = ys.parse().map_err(|_| err(ln, format!("bad y `{ys}`")))?;
                if x >= width || y >= height {
                    return Err(err(ln, format!("cell [{x}, {y}] is outside the grid")));
                }
                Ok(Cell::new(x, y))
            };
            match parts.as_slice() {
                ["start", x, y] => {
                    if start.is_some() {
                        return Err(err(ln, "duplicate start line"));
                    }
                    start = Some(cell(x, y)?);
                }
                ["treasure", r, x, y, side] => {
                    let round: u8 = r.parse().map_err(|_| err(ln, format!("bad round `{r}`")))?;
                    if round == 0 || rounds.iter().any(|s| s.round == round) {
                        return Err(err(ln, format!("round {round} is zero or repeated")));
                    }
                    let side = Player::parse(side).ok_or_else(|| err(ln, format!("side must be E or H, got `{side}`")))?;
                    rounds.push(RoundSpec {
                        round,
                        treasure: cell(x, y)?,
                        side,
                    });
                }
                _ => return Err(err(ln, format!("unrecognised line `{line}`"))),
            }
        }
        let start = start.ok_or_else(|| err(text.lines().count().max(1), "missing start line"))?;
        if rounds.is_empty() {
            return Err(err(text.lines().count().max(1), "no treasure lines"));
        }
        rounds.sort_by_key(|r| r.round);
        Ok(MazeLayout { ego, human, start, rounds })
    }
}

fn check_side(width: u16, height: u16, masks: &[u8], row_lines: &[usize]) -> Result<(), MazeFileError> {
    let at = |x: u16, y: u16| masks[y as usize * width as usize + x as usize];
    for y in 0..height {
        let ln = row_lines[y as usize];
        for x in 0..width {
            let cell = Cell::new(x, y);
            let m = at(x, y);
            for d in Direction::MOVES {
                let blocked = m & d.bit() != 0;
                match cell.step(d, width, height) {
                    None if !blocked => {
                        return Err(err(ln, format!("boundary closure violated: cell {cell} open to the {d}")))
                    }
                    Some(n) => {
                        let mirror = at(n.x, n.y) & d.opposite().bit() != 0;
                        if blocked != mirror {
                            return Err(err(
                                ln,
                                format!(
                                    "wall symmetry violated: cell {cell} {d} is {} but cell {n} {} is {}",
                                    if blocked { "walled" } else { "open" },
                                    d.opposite(),
                                    if mirror { "walled" } else { "open" }
                                ),
                            ));
                        }
                    }
                    None => {}
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "gnomes-maze v1 2 2\n\
                         # ego\n\
                         63\n\
                         c9\n\
                         \n\
                         # human\n\
                         77\n\
                         c9\n\
                         start 0 0\n\
                         treasure 1 1 1 H\n\
                         treasure 2 0 1 E\n";

    #[test]
    fn parses_small_file() {
        let layout = MazeLayout::from_text(SMALL).unwrap();
        assert_eq!(layout.start, Cell::new(0, 0));
        assert_eq!(layout.rounds.len(), 2);
        assert!(layout.human.blocked(Cell::new(0, 0), Direction::Right));
        assert!(!layout.ego.blocked(Cell::new(0, 0), Direction::Right));
    }

    #[test]
    fn symmetry_violation_reports_line() {
        let bad = SMALL.replace("63\nc9", "63\nd9");
        let e = MazeLayout::from_text(&bad).unwrap_err();
        assert!(e.message.contains("symmetry"), "{e}");
        assert_eq!(e.line, 4, "{e}");
    }

    #[test]
    fn closure_violation_reports_line() {
        let bad = SMALL.replace("63\nc9", "23\nc9");
        let e = MazeLayout::from_text(&bad).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("closure"), "{e}");
    }

    #[test]
    fn bad_header() {
        assert_eq!(MazeLayout::from_text("maze 2 2\n").unwrap_err().line, 1);
        assert!(MazeLayout::from_text("gnomes-maze v9 2 2\n").unwrap_err().message.contains("version"));
    }

    #[test]
    fn text_round_trip() {
        let layout = MazeLayout::from_text(SMALL).unwrap();
        let again = MazeLayout::from_text(&layout.to_text()).unwrap();
        assert_eq!(layout, again);
    }
}
