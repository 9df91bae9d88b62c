//! Tree construction: selection, expansion, simulation and backpropagation
//! over the ego and partner perspective trees.

use rand::Rng;

use crate::game::{ActionSet, Cell, Direction, Player};

use super::tree::{NodeId, Tree};
use super::{EgoView, HiddenInfoDict, PlannerConfig};

/// The game as the ego player believes it to be.
///
/// Ego moves follow the ego side. Partner moves are assumed legal unless they
/// leave the grid or were rejected before (Ω).
pub struct BeliefModel<'a> {
    view: &'a EgoView<'a>,
    omega: &'a HiddenInfoDict,
}

impl<'a> BeliefModel<'a> {
    pub fn new(view: &'a EgoView<'a>, omega: &'a HiddenInfoDict) -> Self {
        BeliefModel { view, omega }
    }

    /// σ^E(cell) for the ego player, A^H \ Ω(cell) for the partner.
    pub fn candidates(&self, cell: Cell, mover: Player) -> ActionSet {
        let side = self.view.side;
        match mover {
            Player::Ego => side.valid_actions_unchecked(cell),
            Player::Human => cell
                .in_grid_moves(side.width(), side.height())
                .without(self.omega.rejected(cell)),
        }
    }

    pub fn transition(&self, cell: Cell, mover: Player, action: Direction) -> Cell {
        let side = self.view.side;
        let next = match mover {
            Player::Ego => side.target(cell, action),
            Player::Human => cell.step(action, side.width(), side.height()),
        };
        next.expect("candidate actions always have a target")
    }

    pub fn is_goal(&self, cell: Cell) -> bool {
        self.view.goal == Some(cell)
    }

    pub fn reward(&self, next: Cell) -> f64 {
        if self.is_goal(next) {
            self.view.reward.goal_reward
        } else {
            self.view.reward.step_penalty
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub iterations: u32,
    /// Largest number of nodes a single iteration added, per tree (ego, partner).
    pub max_new_nodes_per_iteration: [usize; 2],
    /// Iterations whose simulation hit the step cap before reaching the goal.
    pub truncated: u32,
}

#[derive(Debug, Clone)]
pub struct SearchTrees {
    pub ego: Tree,
    pub partner: Tree,
    pub stats: SearchStats,
}

fn random_member(set: ActionSet, rng: &mut impl Rng) -> Direction {
    let i = rng.gen_range(0..set.len());
    set.nth(i).expect("index within set")
}

/// Picks the action for the player in control.
///
/// During selection the node's untried set is instantiated on first visit and
/// drained in random order; once empty, the child with the best UCB value is
/// followed. During simulation the action is uniform over the same candidate
/// set.
pub fn explore(
    tree: &mut Tree,
    node: NodeId,
    cell: Cell,
    mover: Player,
    on_rollout: bool,
    model: &BeliefModel<'_>,
    exploration: f64,
    rng: &mut impl Rng,
) -> Direction {
    if on_rollout {
        return random_member(model.candidates(cell, mover), rng);
    }
    let n = tree.node_mut(node);
    let untried = n.untried.get_or_insert_with(|| model.candidates(cell, mover));
    if !untried.is_empty() {
        let a = random_member(*untried, rng);
        untried.remove(a);
        return a;
    }
    let best = tree
        .best_ucb_child(node, exploration)
        .expect("a node with an exhausted untried set has children");
    tree.node(best).action.expect("non-root node has an action")
}

/// Descends to (or creates) the child for `action` unless the iteration is
/// already simulating, in which case nothing changes. Returns the new cursor
/// and whether a node was created.
pub fn find_or_create_child(
    tree: &mut Tree,
    node: NodeId,
    action: Direction,
    cell: Cell,
    mover: Player,
    on_rollout: bool,
) -> (NodeId, bool) {
    if on_rollout {
        return (node, false);
    }
    tree.find_or_create_child(node, action, cell, mover)
}

fn tree_index(p: Player) -> usize {
    match p {
        Player::Ego => 0,
        Player::Human => 1,
    }
}

/// Runs `config.iterations` iterations from `root` with the ego player to move.
pub fn run_search(
    config: &PlannerConfig,
    view: &EgoView<'_>,
    omega: &HiddenInfoDict,
    root: Cell,
    rng: &mut impl Rng,
) -> SearchTrees {
    let model = BeliefModel::new(view, omega);
    let cap = config.rollout_cap_for(view.side.width(), view.side.height());
    let mut trees = [
        Tree::new(Player::Ego, root, Player::Ego),
        Tree::new(Player::Human, root, Player::Ego),
    ];
    let mut stats = SearchStats::default();

    for _ in 0..config.iterations {
        let mut reward = 0.0;
        let mut cell = root;
        let mut mover = Player::Ego;
        let mut cursors = [NodeId::ROOT; 2];
        let mut on_rollout = false;
        let mut new_nodes = [0usize; 2];
        let mut steps = 0u32;

        while !model.is_goal(cell) && steps < cap {
            let t = tree_index(mover);
            let action = explore(&mut trees[t], cursors[t], cell, mover, on_rollout, &model, config.exploration, rng);
            let next = model.transition(cell, mover, action);
            reward += model.reward(next);

            // Both trees take the same edge; the iteration switches to
            // simulation once either of them grew.
            let mut grew = false;
            for (i, tree) in trees.iter_mut().enumerate() {
                let (cursor, created) = find_or_create_child(tree, cursors[i], action, next, mover.other(), on_rollout);
                cursors[i] = cursor;
                new_nodes[i] += created as usize;
                grew |= created;
            }
            on_rollout |= grew;

            cell = next;
            mover = mover.other();
            steps += 1;
        }
        if !model.is_goal(cell) {
            stats.truncated += 1;
        }
        for (i, tree) in trees.iter_mut().enumerate() {
            tree.backpropagate(cursors[i], reward);
            stats.max_new_nodes_per_iteration[i] = stats.max_new_nodes_per_iteration[i].max(new_nodes[i]);
        }
        stats.iterations += 1;
    }

    let [ego, partner] = trees;
    SearchTrees { ego, partner, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{MazeSide, RewardSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn view(side: &MazeSide, goal: Option<Cell>) -> EgoView<'_> {
        EgoView {
            side,
            goal,
            reward: RewardSpec::default(),
        }
    }

    #[test]
    fn fresh_ego_node_drains_its_valid_actions() {
        let mut side = MazeSide::open(3, 3);
        side.add_wall(Cell::new(0, 0), Direction::Down);
        let v = view(&side, None);
        let omega = HiddenInfoDict::new();
        let model = BeliefModel::new(&v, &omega);
        let mut tree = Tree::new(Player::Ego, Cell::new(0, 0), Player::Ego);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen: Vec<Direction> = (0..2)
            .map(|_| explore(&mut tree, NodeId::ROOT, Cell::new(0, 0), Player::Ego, false, &model, 1.4, &mut rng))
            .collect();
        seen.sort();
        assert_eq!(seen, vec![Direction::Noop, Direction::Right]);
        assert!(tree.root().untried.unwrap().is_empty());
    }

    #[test]
    fn partner_candidates_exclude_rejected_moves() {
        let side = MazeSide::open(3, 3);
        let v = view(&side, None);
        let mut omega = HiddenInfoDict::new();
        omega.insert(Cell::new(1, 1), Direction::Left);
        let model = BeliefModel::new(&v, &omega);
        let expected: ActionSet = [Direction::Noop, Direction::Right, Direction::Up, Direction::Down]
            .into_iter()
            .collect();
        assert_eq!(model.candidates(Cell::new(1, 1), Player::Human), expected);
    }

    #[test]
    fn exhausted_node_follows_best_ucb_child() {
        let side = MazeSide::open(2, 1);
        let v = view(&side, None);
        let omega = HiddenInfoDict::new();
        let model = BeliefModel::new(&v, &omega);
        let mut tree = Tree::new(Player::Ego, Cell::new(0, 0), Player::Ego);
        tree.node_mut(NodeId::ROOT).untried = Some(ActionSet::EMPTY);
        let (a, _) = tree.find_or_create_child(NodeId::ROOT, Direction::Noop, Cell::new(0, 0), Player::Human);
        let (b, _) = tree.find_or_create_child(NodeId::ROOT, Direction::Right, Cell::new(1, 0), Player::Human);
        tree.backpropagate(a, -1.0);
        tree.backpropagate(b, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = explore(&mut tree, NodeId::ROOT, Cell::new(0, 0), Player::Ego, false, &model, 0.5, &mut rng);
        assert_eq!(d, Direction::Right);
    }

    #[test]
    fn rollout_mode_leaves_tree_alone() {
        let mut tree = Tree::new(Player::Ego, Cell::new(0, 0), Player::Ego);
        let (n, created) = find_or_create_child(&mut tree, NodeId::ROOT, Direction::Right, Cell::new(1, 0), Player::Human, true);
        assert_eq!((n, created), (NodeId::ROOT, false));
        assert_eq!(tree.len(), 1);
        let (n, created) = find_or_create_child(&mut tree, NodeId::ROOT, Direction::Right, Cell::new(1, 0), Player::Human, false);
        assert!(created);
        assert_ne!(n, NodeId::ROOT);
        assert_eq!(tree.len(), 2);
    }

    #[test]
    fn root_visits_equal_iterations() {
        let side = MazeSide::open(4, 4);
        let v = view(&side, Some(Cell::new(3, 3)));
        let cfg = PlannerConfig {
            iterations: 250,
            ..PlannerConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trees = run_search(&cfg, &v, &HiddenInfoDict::new(), Cell::new(0, 0), &mut rng);
        assert_eq!(trees.ego.root().visits, 250);
        assert_eq!(trees.partner.root().visits, 250);
        assert!(trees.stats.max_new_nodes_per_iteration.iter().all(|&n| n <= 1));
        assert!(trees.ego.len() <= 251);
        assert_eq!(trees.ego.len(), trees.partner.len());
    }
}
