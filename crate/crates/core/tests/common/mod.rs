#![allow(dead_code)]

use gnomes_core::game::{Cell, Direction, GameState, MazeSide, Player};
use gnomes_core::planner::HiddenInfoDict;

/// State `s` of the minimal example: top middle of a 3×3 board.
pub const S: Cell = Cell { x: 1, y: 0 };
/// State reached from `s` by moving down.
pub const S_D: Cell = Cell { x: 1, y: 1 };

/// Ego side of the minimal example: walls left and right of `s`, so the ego
/// player can only stay or go down there.
pub fn minimal_ego_side() -> MazeSide {
    let mut side = MazeSide::open(3, 3);
    side.add_wall(S, Direction::Left);
    side.add_wall(S, Direction::Right);
    side
}

/// Ω = {s: [left], s_d: [left, down]}.
pub fn minimal_omega() -> HiddenInfoDict {
    let mut omega = HiddenInfoDict::new();
    omega.insert(S, Direction::Left);
    omega.insert(S_D, Direction::Left);
    omega.insert(S_D, Direction::Down);
    omega
}

pub fn ego_turn(token: Cell, treasure: Cell, treasure_side: Player) -> GameState {
    GameState {
        token,
        in_control: Player::Ego,
        turn: 1,
        treasure,
        treasure_side,
        round: 1,
    }
}

/// Every in-grid move blocked on `side`, as Ω.
pub fn omega_from_walls(side: &MazeSide) -> HiddenInfoDict {
    let mut omega = HiddenInfoDict::new();
    for c in side.cells() {
        for d in Direction::MOVES {
            if c.step(d, side.width(), side.height()).is_some() && side.blocked(c, d) {
                omega.insert(c, d);
            }
        }
    }
    omega
}
