//! Seeded maze pair generation.
//!
//! Each side starts as a recursive-backtracker spanning maze; a fraction of the
//! remaining interior walls is then knocked out independently per side so the
//! two layouts differ. Pairs whose joint game is unsolvable are re-rolled.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layout::{MazeLayout, RoundSpec};
use super::maze::{Cell, Direction, MazeSide};
use super::oracle::joint_oracle;
use super::state::Player;
use super::GameError;

pub const DEFAULT_REMOVAL_DENSITY: f64 = 0.15;
pub const DEFAULT_ROUNDS: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct MazePair {
    pub ego: MazeSide,
    pub human: MazeSide,
    pub start: Cell,
    pub treasure: Cell,
}

pub fn generate_maze_pair(seed: u64, width: u16, height: u16) -> Result<MazePair, GameError> {
    generate_maze_pair_with(seed, width, height, DEFAULT_REMOVAL_DENSITY)
}

pub fn generate_maze_pair_with(
    seed: u64,
    width: u16,
    height: u16,
    removal_density: f64,
) -> Result<MazePair, GameError> {
    if width < 2 || height < 2 {
        return Err(GameError::InvalidLayout(format!(
            "maze must be at least 2x2, got {width}x{height}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let ego = backtracker_side(&mut rng, width, height, removal_density);
        let human = backtracker_side(&mut rng, width, height, removal_density);
        let start = random_cell(&mut rng, width, height);
        let treasure = loop {
            let c = random_cell(&mut rng, width, height);
            if c != start {
                break c;
            }
        };
        if joint_oracle(&ego, &human, start, treasure, Player::Human).is_some() {
            return Ok(MazePair {
                ego,
                human,
                start,
                treasure,
            });
        }
    }
}

/// A full round schedule: one pair plus `rounds` distinct treasures, with
/// visibility alternating human, ego, human, ...
pub fn generate_layout(seed: u64, width: u16, height: u16, rounds: u8) -> Result<MazeLayout, GameError> {
    let pair = generate_maze_pair(seed, width, height)?;
    let cells = width as usize * height as usize;
    if rounds as usize >= cells {
        return Err(GameError::InvalidLayout(format!(
            "{rounds} rounds do not fit in a {width}x{height} grid"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_7ea5_u64);
    let mut treasures = vec![pair.treasure];
    while treasures.len() < rounds as usize {
        let c = random_cell(&mut rng, width, height);
        if c == pair.start || treasures.contains(&c) {
            continue;
        }
        if joint_oracle(&pair.ego, &pair.human, pair.start, c, Player::Human).is_some() {
            treasures.push(c);
        }
    }
    let rounds = treasures
        .into_iter()
        .enumerate()
        .map(|(i, treasure)| RoundSpec {
            round: i as u8 + 1,
            treasure,
            side: round_side(i as u8 + 1),
        })
        .collect();
    Ok(MazeLayout {
        ego: pair.ego,
        human: pair.human,
        start: pair.start,
        rounds,
    })
}

/// Treasure visibility for a 1-based round: odd rounds human, even rounds ego.
pub fn round_side(round: u8) -> Player {
    if round % 2 == 1 {
        Player::Human
    } else {
        Player::Ego
    }
}

fn random_cell(rng: &mut impl Rng, width: u16, height: u16) -> Cell {
    Cell::new(rng.gen_range(0..width), rng.gen_range(0..height))
}

fn backtracker_side(rng: &mut impl Rng, width: u16, height: u16, removal_density: f64) -> MazeSide {
    let mut side = MazeSide::closed(width, height);
    let idx = |c: Cell| c.y as usize * width as usize + c.x as usize;
    let mut visited = vec![false; width as usize * height as usize];
    let origin = random_cell(rng, width, height);
    visited[idx(origin)] = true;
    let mut stack = vec![origin];
    while let Some(&cell) = stack.last() {
        let mut options: Vec<(Direction, Cell)> = Direction::MOVES
            .into_iter()
            .filter_map(|d| cell.step(d, width, height).map(|n| (d, n)))
            .filter(|(_, n)| !visited[idx(*n)])
            .collect();
        if options.is_empty() {
            stack.pop();
            continue;
        }
        options.shuffle(rng);
        let (dir, next) = options[0];
        side.remove_wall(cell, dir);
        visited[idx(next)] = true;
        stack.push(next);
    }
    // Knock out extra walls; only right/down edges so each wall is drawn once.
    for y in 0..height {
        for x in 0..width {
            let cell = Cell::new(x, y);
            for dir in [Direction::Right, Direction::Down] {
                if cell.step(dir, width, height).is_some()
                    && side.blocked(cell, dir)
                    && rng.gen_bool(removal_density)
                {
                    side.remove_wall(cell, dir);
                }
            }
        }
    }
    side
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_pair() {
        assert_eq!(generate_maze_pair(7, 9, 9).unwrap(), generate_maze_pair(7, 9, 9).unwrap());
        assert_ne!(generate_maze_pair(7, 9, 9).unwrap(), generate_maze_pair(8, 9, 9).unwrap());
    }

    #[test]
    fn testbed_dimensions() {
        let pair = generate_maze_pair(1, 9, 9).unwrap();
        assert_eq!((pair.ego.width(), pair.ego.height()), (9, 9));
        assert_eq!((pair.human.width(), pair.human.height()), (9, 9));
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(generate_maze_pair(1, 1, 5).is_err());
    }

    #[test]
    fn sides_differ() {
        let pair = generate_maze_pair(3, 9, 9).unwrap();
        assert_ne!(pair.ego, pair.human);
    }

    #[test]
    fn layout_schedule_alternates_visibility() {
        let layout = generate_layout(11, 9, 9, 5).unwrap();
        let sides: Vec<Player> = layout.rounds.iter().map(|r| r.side).collect();
        use Player::*;
        assert_eq!(sides, vec![Human, Ego, Human, Ego, Human]);
        for r in &layout.rounds {
            assert_ne!(r.treasure, layout.start);
            assert!(joint_oracle(&layout.ego, &layout.human, layout.start, r.treasure, Human).is_some());
        }
    }
}
