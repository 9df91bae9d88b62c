//! Versioned JSON dump of an ego tree and Ω for offline inspection.

use serde::{Deserialize, Serialize};

use crate::game::{Cell, Direction, Player};

use super::tree::Tree;
use super::HiddenInfoDict;

pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDump {
    pub id: u32,
    pub parent: Option<u32>,
    pub action: Option<Direction>,
    pub cell: Cell,
    pub mover: Player,
    pub visits: u32,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDump {
    pub v: u32,
    pub perspective: Player,
    pub nodes: Vec<NodeDump>,
    pub omega: HiddenInfoDict,
}

pub fn dump_tree(tree: &Tree, omega: &HiddenInfoDict) -> TreeDump {
    let nodes = tree
        .ids()
        .map(|id| {
            let n = tree.node(id);
            NodeDump {
                id: id.index() as u32,
                parent: n.parent.map(|p| p.index() as u32),
                action: n.action,
                cell: n.cell,
                mover: n.mover,
                visits: n.visits,
                total: n.total,
            }
        })
        .collect();
    TreeDump {
        v: DUMP_VERSION,
        perspective: tree.perspective(),
        nodes,
        omega: omega.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::NodeId;

    #[test]
    fn dump_is_versioned_json() {
        let mut t = Tree::new(Player::Ego, Cell::new(0, 0), Player::Ego);
        let (c, _) = t.find_or_create_child(NodeId::ROOT, Direction::Right, Cell::new(1, 0), Player::Human);
        t.backpropagate(c, -0.5);
        let dump = dump_tree(&t, &HiddenInfoDict::new());
        let json = serde_json::to_value(&dump).unwrap();
        assert_eq!(json["v"], 1);
        assert_eq!(json["nodes"][1]["action"], "right");
        assert_eq!(json["nodes"][0]["visits"], 1);
        let back: TreeDump = serde_json::from_value(json).unwrap();
        assert_eq!(back, dump);
    }
}
