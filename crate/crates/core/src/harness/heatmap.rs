//! Compares what the planner inferred about the partner's walls with the
//! partner's real maze.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::game::{Cell, Direction, MazeSide};
use crate::planner::HiddenInfoDict;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallCounts {
    /// Real wall recorded in Ω.
    pub true_pos: u32,
    /// Open edge recorded in Ω.
    pub false_pos: u32,
    /// Real interior wall missing from Ω.
    pub false_neg: u32,
}

impl WallCounts {
    fn add(&mut self, other: WallCounts) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.false_neg += other.false_neg;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmap {
    pub width: u16,
    pub height: u16,
    /// Row-major.
    pub cells: Vec<WallCounts>,
    pub totals: WallCounts,
}

/// Classifies every (cell, move) edge. Boundary edges are left out: the
/// planner never proposes leaving the grid, so they cannot be learned.
pub fn emit_heatmap(omega: &HiddenInfoDict, human: &MazeSide) -> Heatmap {
    let (w, h) = (human.width(), human.height());
    let mut cells = vec![WallCounts::default(); w as usize * h as usize];
    let mut totals = WallCounts::default();
    for cell in human.cells() {
        let rejected = omega.rejected(cell);
        let mut counts = WallCounts::default();
        for d in Direction::MOVES {
            if cell.step(d, w, h).is_none() {
                continue;
            }
            match (human.blocked(cell, d), rejected.contains(d)) {
                (true, true) => counts.true_pos += 1,
                (false, true) => counts.false_pos += 1,
                (true, false) => counts.false_neg += 1,
                (false, false) => {}
            }
        }
        cells[cell.y as usize * w as usize + cell.x as usize] = counts;
        totals.add(counts);
    }
    Heatmap {
        width: w,
        height: h,
        cells,
        totals,
    }
}

impl Heatmap {
    pub fn at(&self, cell: Cell) -> WallCounts {
        self.cells[cell.y as usize * self.width as usize + cell.x as usize]
    }

    /// Sums several heatmaps of the same size.
    pub fn accumulate(&mut self, other: &Heatmap) {
        assert_eq!((self.width, self.height), (other.width, other.height), "heatmap sizes differ");
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.add(*b);
        }
        self.totals.add(other.totals);
    }

    /// One `tp/fp/fn` triple per cell, rows top to bottom.
    pub fn render(&self) -> String {
        let mut out = format!(
            "# heatmap v1 {}x{} tp={} fp={} fn={}\n",
            self.width, self.height, self.totals.true_pos, self.totals.false_pos, self.totals.false_neg
        );
        for y in 0..self.height {
            let row: Vec<String> = (0..self.width)
                .map(|x| {
                    let c = self.at(Cell::new(x, y));
                    format!("{}/{}/{}", c.true_pos, c.false_pos, c.false_neg)
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}
