use serde::Serialize;

use crate::game::{ActionSet, Cell, Direction, Player};

use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NodeId(u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Action that led here; `None` at the root.
    pub action: Option<Direction>,
    pub cell: Cell,
    /// Player to move in this node's state.
    pub mover: Player,
    pub total: f64,
    pub visits: u32,
    /// Untried actions, instantiated the first time selection reaches the node.
    pub untried: Option<ActionSet>,
}

impl SearchNode {
    pub fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total / self.visits as f64
        }
    }
}

/// UCB1: `total/visits + c·sqrt(ln(parent_visits)/visits)`.
///
/// Unvisited nodes have no score; selection reaches them through the untried
/// set instead.
pub fn ucb_score(total: f64, visits: u32, parent_visits: u32, c: f64) -> Option<f64> {
    if visits == 0 || parent_visits == 0 {
        return None;
    }
    let n = visits as f64;
    Some(total / n + c * ((parent_visits as f64).ln() / n).sqrt())
}

/// Arena-backed search tree seen from one player's perspective.
#[derive(Debug, Clone)]
pub struct Tree {
    perspective: Player,
    nodes: Vec<SearchNode>,
}

impl Tree {
    pub fn new(perspective: Player, root_cell: Cell, root_mover: Player) -> Self {
        Tree {
            perspective,
            nodes: vec![SearchNode {
                parent: None,
                children: Vec::new(),
                action: None,
                cell: root_cell,
                mover: root_mover,
                total: 0.0,
                visits: 0,
                untried: None,
            }],
        }
    }

    pub fn perspective(&self) -> Player {
        self.perspective
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id.index()]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn child_with_action(&self, id: NodeId, action: Direction) -> Option<NodeId> {
        self.children(id)
            .iter()
            .copied()
            .find(|c| self.node(*c).action == Some(action))
    }

    /// Returns the child reached by `action`, creating it if needed. The flag
    /// reports whether a node was added.
    pub fn find_or_create_child(&mut self, id: NodeId, action: Direction, cell: Cell, mover: Player) -> (NodeId, bool) {
        if let Some(existing) = self.child_with_action(id, action) {
            return (existing, false);
        }
        let child = NodeId(self.nodes.len() as u32);
        self.nodes.push(SearchNode {
            parent: Some(id),
            children: Vec::new(),
            action: Some(action),
            cell,
            mover,
            total: 0.0,
            visits: 0,
            untried: None,
        });
        self.nodes[id.index()].children.push(child);
        (child, true)
    }

    /// Adds one visit and `reward` to `id` and each of its ancestors.
    pub fn backpropagate(&mut self, id: NodeId, reward: f64) {
        let mut cursor = Some(id);
        while let Some(c) = cursor {
            let node = &mut self.nodes[c.index()];
            node.visits += 1;
            node.total += reward;
            cursor = node.parent;
        }
    }

    pub fn ucb(&self, id: NodeId, c: f64) -> Result<f64, PlanError> {
        let node = self.node(id);
        let parent = node.parent.ok_or(PlanError::UnscoredNode)?;
        ucb_score(node.total, node.visits, self.node(parent).visits, c).ok_or(PlanError::UnscoredNode)
    }

    /// Child with the highest UCB value; the first one wins ties.
    pub fn best_ucb_child(&self, id: NodeId, c: f64) -> Option<NodeId> {
        let parent_visits = self.node(id).visits;
        let mut best: Option<(NodeId, f64)> = None;
        for &child in self.children(id) {
            let n = self.node(child);
            let score = ucb_score(n.total, n.visits, parent_visits, c).unwrap_or(f64::INFINITY);
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((child, score));
            }
        }
        best.map(|(id, _)| id)
    }

    /// Depth of a node (root = 0).
    pub fn depth(&self, id: NodeId) -> usize {
        let mut d = 0;
        let mut cursor = self.node(id).parent;
        while let Some(p) = cursor {
            d += 1;
            cursor = self.node(p).parent;
        }
        d
    }
}
