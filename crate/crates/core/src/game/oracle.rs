//! Breadth-first ground truth for path existence and shortest paths.

use std::collections::VecDeque;

use super::maze::{Cell, Direction, MazeSide};
use super::state::Player;

/// One step of a joint plan.
pub type PlanStep = (Player, Direction);

/// Minimum-turn plan from `start` to `goal` under alternating control.
///
/// Searches the product space (cell, player to move); each mover may only use
/// the actions valid on its own side. Returns `None` when the goal cannot be
/// reached, `Some(vec![])` when `start == goal`.
pub fn joint_oracle(
    ego: &MazeSide,
    human: &MazeSide,
    start: Cell,
    goal: Cell,
    first_mover: Player,
) -> Option<Vec<PlanStep>> {
    if start == goal {
        return Some(Vec::new());
    }
    let (w, h) = (ego.width(), ego.height());
    let n = w as usize * h as usize;
    let key = |c: Cell, p: Player| -> usize {
        let base = c.y as usize * w as usize + c.x as usize;
        match p {
            Player::Ego => base,
            Player::Human => n + base,
        }
    };
    let mut prev: Vec<Option<(usize, Direction)>> = vec![None; 2 * n];
    let mut seen = vec![false; 2 * n];
    let mut queue = VecDeque::new();
    seen[key(start, first_mover)] = true;
    queue.push_back((start, first_mover));

    while let Some((cell, mover)) = queue.pop_front() {
        let side = match mover {
            Player::Ego => ego,
            Player::Human => human,
        };
        for dir in side.valid_actions_unchecked(cell).iter() {
            let Some(next) = side.target(cell, dir) else { continue };
            let k = key(next, mover.other());
            if seen[k] {
                continue;
            }
            seen[k] = true;
            prev[k] = Some((key(cell, mover), dir));
            if next == goal {
                return Some(unwind(&prev, k, n));
            }
            queue.push_back((next, mover.other()));
        }
    }
    None
}

fn unwind(prev: &[Option<(usize, Direction)>], mut k: usize, n: usize) -> Vec<PlanStep> {
    let mut steps = Vec::new();
    while let Some((from, dir)) = prev[k] {
        let mover = if from < n { Player::Ego } else { Player::Human };
        steps.push((mover, dir));
        k = from;
    }
    steps.reverse();
    steps
}

/// BFS distances to `goal` on a single side, `None` for unreachable cells.
pub fn distances_to(side: &MazeSide, goal: Cell) -> Vec<Option<u32>> {
    let (w, h) = (side.width(), side.height());
    let idx = |c: Cell| c.y as usize * w as usize + c.x as usize;
    let mut dist = vec![None; w as usize * h as usize];
    let mut queue = VecDeque::new();
    dist[idx(goal)] = Some(0);
    queue.push_back(goal);
    while let Some(cell) = queue.pop_front() {
        let d = dist[idx(cell)].unwrap_or(0);
        for dir in Direction::MOVES {
            // Walls are symmetric, so walking backwards from the goal is fine.
            if let Some(next) = side.target(cell, dir) {
                if dist[idx(next)].is_none() {
                    dist[idx(next)] = Some(d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    dist
}

/// First moves of every shortest single-side path from `from` to `goal`.
pub fn shortest_first_moves(side: &MazeSide, from: Cell, goal: Cell) -> Vec<Direction> {
    let dist = distances_to(side, goal);
    let w = side.width() as usize;
    let at = |c: Cell| dist[c.y as usize * w + c.x as usize];
    let Some(here) = at(from) else { return Vec::new() };
    if here == 0 {
        return Vec::new();
    }
    Direction::MOVES
        .into_iter()
        .filter(|d| {
            side.target(from, *d)
                .and_then(at)
                .is_some_and(|n| n + 1 == here)
        })
        .collect()
}
