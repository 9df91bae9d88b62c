use std::fmt;

use serde::{Deserialize, Serialize};

use super::GameError;

/// One of the five moves available to either player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Noop,
    Right,
    Up,
    Left,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 5] = [
        Direction::Noop,
        Direction::Right,
        Direction::Up,
        Direction::Left,
        Direction::Down,
    ];

    /// The four directions that actually move the token.
    pub const MOVES: [Direction; 4] = [Direction::Right, Direction::Up, Direction::Left, Direction::Down];

    /// Wall bit used by the maze file format and [`ActionSet`].
    pub const fn bit(self) -> u8 {
        match self {
            Direction::Right => 1,
            Direction::Up => 2,
            Direction::Left => 4,
            Direction::Down => 8,
            Direction::Noop => 16,
        }
    }

    pub const fn opposite(self) -> Direction {
        match self {
            Direction::Noop => Direction::Noop,
            Direction::Right => Direction::Left,
            Direction::Up => Direction::Down,
            Direction::Left => Direction::Right,
            Direction::Down => Direction::Up,
        }
    }

    /// Column/row offset; rows grow downwards.
    pub const fn delta(self) -> (i32, i32) {
        match self {
            Direction::Noop => (0, 0),
            Direction::Right => (1, 0),
            Direction::Up => (0, -1),
            Direction::Left => (-1, 0),
            Direction::Down => (0, 1),
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Direction::Noop => "noop",
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Left => "left",
            Direction::Down => "down",
        }
    }

    pub fn parse(word: &str) -> Option<Direction> {
        Direction::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A small set of directions backed by a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "Vec<Direction>", from = "Vec<Direction>")]
pub struct ActionSet(u8);

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet(0);
    pub const ALL: ActionSet = ActionSet(0b1_1111);

    pub fn only(dir: Direction) -> Self {
        ActionSet(dir.bit())
    }

    pub fn contains(self, dir: Direction) -> bool {
        self.0 & dir.bit() != 0
    }

    pub fn insert(&mut self, dir: Direction) -> bool {
        let fresh = !self.contains(dir);
        self.0 |= dir.bit();
        fresh
    }

    pub fn remove(&mut self, dir: Direction) {
        self.0 &= !dir.bit();
    }

    pub fn without(self, other: ActionSet) -> ActionSet {
        ActionSet(self.0 & !other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        Direction::ALL.into_iter().filter(move |d| self.contains(*d))
    }

    /// The `index`-th member in canonical order.
    pub fn nth(self, index: usize) -> Option<Direction> {
        self.iter().nth(index)
    }
}

impl FromIterator<Direction> for ActionSet {
    fn from_iter<I: IntoIterator<Item = Direction>>(iter: I) -> Self {
        let mut set = ActionSet::EMPTY;
        for d in iter {
            set.insert(d);
        }
        set
    }
}

impl From<Vec<Direction>> for ActionSet {
    fn from(v: Vec<Direction>) -> Self {
        v.into_iter().collect()
    }
}

impl From<ActionSet> for Vec<Direction> {
    fn from(s: ActionSet) -> Self {
        s.iter().collect()
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Grid coordinate with the origin in the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u16,
    pub y: u16,
}

impl Cell {
    pub const fn new(x: u16, y: u16) -> Self {
        Cell { x, y }
    }

    /// The neighbouring cell in `dir`, if it stays inside a `width`×`height` grid.
    pub fn step(self, dir: Direction, width: u16, height: u16) -> Option<Cell> {
        let (dx, dy) = dir.delta();
        let x = self.x as i32 + dx;
        let y = self.y as i32 + dy;
        if x < 0 || y < 0 || x >= width as i32 || y >= height as i32 {
            None
        } else {
            Some(Cell::new(x as u16, y as u16))
        }
    }

    /// Directions whose target cell lies inside the grid, Noop included.
    pub fn in_grid_moves(self, width: u16, height: u16) -> ActionSet {
        Direction::ALL
            .into_iter()
            .filter(|d| self.step(*d, width, height).is_some())
            .collect()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

/// One player's private wall layout.
///
/// Each cell stores a bitmask of blocked directions. Walls are kept symmetric
/// (a wall on the right of `c` is also on the left of its right neighbour) and
/// every direction leaving the grid is blocked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSide", into = "RawSide")]
pub struct MazeSide {
    width: u16,
    height: u16,
    masks: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct RawSide {
    width: u16,
    height: u16,
    masks: Vec<u8>,
}

impl TryFrom<RawSide> for MazeSide {
    type Error = GameError;

    fn try_from(raw: RawSide) -> Result<Self, Self::Error> {
        MazeSide::from_masks(raw.width, raw.height, raw.masks)
    }
}

impl From<MazeSide> for RawSide {
    fn from(side: MazeSide) -> Self {
        RawSide {
            width: side.width,
            height: side.height,
            masks: side.masks,
        }
    }
}

impl MazeSide {
    /// A side with only the boundary walls.
    pub fn open(width: u16, height: u16) -> Self {
        let mut masks = vec![0u8; width as usize * height as usize];
        for y in 0..height {
            for x in 0..width {
                let cell = Cell::new(x, y);
                let mut m = 0;
                for d in Direction::MOVES {
                    if cell.step(d, width, height).is_none() {
                        m |= d.bit();
                    }
                }
                masks[y as usize * width as usize + x as usize] = m;
            }
        }
        MazeSide { width, height, masks }
    }

    /// A side where every cell is walled in on all four edges.
    pub fn closed(width: u16, height: u16) -> Self {
        MazeSide {
            width,
            height,
            masks: vec![0b1111; width as usize * height as usize],
        }
    }

    /// Builds a side from per-cell masks, checking symmetry and boundary closure.
    pub fn from_masks(width: u16, height: u16, masks: Vec<u8>) -> Result<Self, GameError> {
        if width == 0 || height == 0 {
            return Err(GameError::InvalidLayout("grid must be at least 1x1".into()));
        }
        if masks.len() != width as usize * height as usize {
            return Err(GameError::InvalidLayout(format!(
                "expected {} cell masks, got {}",
                width as usize * height as usize,
                masks.len()
            )));
        }
        let side = MazeSide { width, height, masks };
        side.check_invariants()?;
        Ok(side)
    }

    pub fn check_invariants(&self) -> Result<(), GameError> {
        for cell in self.cells() {
            let m = self.mask(cell);
            if m & !0b1111 != 0 {
                return Err(GameError::InvalidLayout(format!("cell {cell} has stray mask bits {m:#x}")));
            }
            for d in Direction::MOVES {
                let blocked = m & d.bit() != 0;
                match cell.step(d, self.width, self.height) {
                    None if !blocked => {
                        return Err(GameError::InvalidLayout(format!(
                            "cell {cell} is open towards {d} at the grid boundary"
                        )))
                    }
                    Some(n) if blocked != self.blocked(n, d.opposite()) => {
                        return Err(GameError::InvalidLayout(format!(
                            "wall {d} of cell {cell} is not mirrored by {} of cell {n}",
                            d.opposite()
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    fn index(&self, cell: Cell) -> usize {
        cell.y as usize * self.width as usize + cell.x as usize
    }

    /// Wall bitmask of `cell` (bit0 right, bit1 up, bit2 left, bit3 down).
    pub fn mask(&self, cell: Cell) -> u8 {
        self.masks[self.index(cell)]
    }

    pub fn masks(&self) -> &[u8] {
        &self.masks
    }

    /// Whether moving `dir` out of `cell` hits a wall. Noop is never blocked.
    pub fn blocked(&self, cell: Cell, dir: Direction) -> bool {
        dir != Direction::Noop && self.mask(cell) & dir.bit() != 0
    }

    /// Adds the wall on `dir` of `cell` and its mirror.
    pub fn add_wall(&mut self, cell: Cell, dir: Direction) {
        if dir == Direction::Noop {
            return;
        }
        let i = self.index(cell);
        self.masks[i] |= dir.bit();
        if let Some(n) = cell.step(dir, self.width, self.height) {
            let j = self.index(n);
            self.masks[j] |= dir.opposite().bit();
        }
    }

    /// Removes the wall on `dir` of `cell` and its mirror. Boundary walls stay.
    pub fn remove_wall(&mut self, cell: Cell, dir: Direction) {
        let Some(n) = cell.step(dir, self.width, self.height) else {
            return;
        };
        if dir == Direction::Noop {
            return;
        }
        let i = self.index(cell);
        self.masks[i] &= !dir.bit();
        let j = self.index(n);
        self.masks[j] &= !dir.opposite().bit();
    }

    /// σ(cell): Noop plus every direction not blocked on this side.
    pub fn valid_actions(&self, cell: Cell) -> Result<ActionSet, GameError> {
        if !self.contains(cell) {
            return Err(GameError::OutOfGrid(cell));
        }
        Ok(self.valid_actions_unchecked(cell))
    }

    pub(crate) fn valid_actions_unchecked(&self, cell: Cell) -> ActionSet {
        ActionSet(Direction::Noop.bit() | (!self.mask(cell) & 0b1111))
    }

    /// Target of a move, or `None` when it is blocked.
    pub fn target(&self, cell: Cell, dir: Direction) -> Option<Cell> {
        if self.blocked(cell, dir) {
            None
        } else {
            cell.step(dir, self.width, self.height)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walled_in_cell_only_allows_noop() {
        let side = MazeSide::closed(3, 3);
        let acts = side.valid_actions(Cell::new(1, 1)).unwrap();
        assert_eq!(acts, ActionSet::only(Direction::Noop));
    }

    #[test]
    fn open_interior_cell_allows_everything() {
        let side = MazeSide::open(3, 3);
        assert_eq!(side.valid_actions(Cell::new(1, 1)).unwrap(), ActionSet::ALL);
    }

    #[test]
    fn corner_cells_are_closed_by_the_boundary() {
        let side = MazeSide::open(3, 3);
        let acts = side.valid_actions(Cell::new(0, 0)).unwrap();
        assert!(!acts.contains(Direction::Left));
        assert!(!acts.contains(Direction::Up));
        assert!(acts.contains(Direction::Right));
        assert!(acts.contains(Direction::Down));
    }

    #[test]
    fn out_of_grid_cell_is_an_input_error() {
        let side = MazeSide::open(2, 2);
        assert!(matches!(side.valid_actions(Cell::new(2, 0)), Err(GameError::OutOfGrid(_))));
    }

    #[test]
    fn walls_are_mirrored() {
        let mut side = MazeSide::open(3, 3);
        side.add_wall(Cell::new(1, 1), Direction::Up);
        assert!(side.blocked(Cell::new(1, 0), Direction::Down));
        side.remove_wall(Cell::new(1, 0), Direction::Down);
        assert!(!side.blocked(Cell::new(1, 1), Direction::Up));
        side.check_invariants().unwrap();
    }

    #[test]
    fn asymmetric_masks_are_rejected() {
        let mut masks = MazeSide::open(2, 1).masks().to_vec();
        masks[0] |= Direction::Right.bit();
        assert!(MazeSide::from_masks(2, 1, masks).is_err());
    }

    #[test]
    fn open_boundary_is_rejected() {
        let mut masks = MazeSide::open(2, 1).masks().to_vec();
        masks[0] &= !Direction::Left.bit();
        assert!(MazeSide::from_masks(2, 1, masks).is_err());
    }

    #[test]
    fn action_set_serializes_as_list() {
        let set: ActionSet = [Direction::Left, Direction::Down].into_iter().collect();
        assert_eq!(serde_json::to_string(&set).unwrap(), r#"["left","down"]"#);
    }
}
