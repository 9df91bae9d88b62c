use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::game::{ActionSet, Cell, Direction};

/// Partner moves known (or believed) to be blocked, keyed by token cell.
///
/// Entries are only ever added. Noop is never recorded since it is always
/// valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<OmegaEntry>", from = "Vec<OmegaEntry>")]
pub struct HiddenInfoDict {
    map: BTreeMap<Cell, ActionSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OmegaEntry {
    cell: Cell,
    rejected: ActionSet,
}

impl From<HiddenInfoDict> for Vec<OmegaEntry> {
    fn from(d: HiddenInfoDict) -> Self {
        d.map
            .into_iter()
            .map(|(cell, rejected)| OmegaEntry { cell, rejected })
            .collect()
    }
}

impl From<Vec<OmegaEntry>> for HiddenInfoDict {
    fn from(v: Vec<OmegaEntry>) -> Self {
        let mut d = HiddenInfoDict::default();
        for e in v {
            for dir in e.rejected.iter() {
                d.insert(e.cell, dir);
            }
        }
        d
    }
}

impl HiddenInfoDict {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records that the partner rejected `dir` at `cell`. Returns whether the
    /// entry is new; Noop is ignored.
    pub fn insert(&mut self, cell: Cell, dir: Direction) -> bool {
        if dir == Direction::Noop {
            return false;
        }
        self.map.entry(cell).or_default().insert(dir)
    }

    /// Ω(cell).
    pub fn rejected(&self, cell: Cell) -> ActionSet {
        self.map.get(&cell).copied().unwrap_or_default()
    }

    pub fn contains(&self, cell: Cell, dir: Direction) -> bool {
        self.rejected(cell).contains(dir)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, ActionSet)> + '_ {
        self.map.iter().map(|(c, s)| (*c, *s))
    }

    /// Number of (cell, direction) entries.
    pub fn len(&self) -> usize {
        self.map.values().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noop_is_never_recorded() {
        let mut d = HiddenInfoDict::new();
        assert!(!d.insert(Cell::new(0, 0), Direction::Noop));
        assert!(d.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let mut d = HiddenInfoDict::new();
        d.insert(Cell::new(1, 2), Direction::Left);
        d.insert(Cell::new(1, 2), Direction::Down);
        d.insert(Cell::new(0, 0), Direction::Right);
        let text = serde_json::to_string(&d).unwrap();
        let back: HiddenInfoDict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.len(), 3);
    }
}
