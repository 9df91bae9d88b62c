//! Flag-aware choice of the ego move and of the outgoing flag.

use rand::Rng;
use tracing::warn;

use crate::game::Direction;

use super::tree::{NodeId, Tree};
use super::{Decision, EgoView, Flag, PlanError, PlannerMemory};

/// Three stages:
///
/// 1. React to the incoming flag. `Inquiry` is echoed, `Reject` records the
///    last proposed move in Ω, an action flag that is illegal for the ego
///    player is answered with `Reject`.
/// 2. Among the most-visited root children, prefer the one matching an action
///    flag; otherwise pick uniformly at random.
/// 3. Unless stage 1 fixed the outgoing flag, propose the partner move of the
///    most-visited grandchild that Ω does not rule out, or `None`.
///
/// The outgoing flag is remembered as the last flag.
pub fn select_best_action(
    tree: &Tree,
    f_in: Flag,
    memory: &mut PlannerMemory,
    view: &EgoView<'_>,
    rng: &mut impl Rng,
) -> Result<Decision, PlanError> {
    let root = tree.root();
    let valid = view.side.valid_actions(root.cell).map_err(|_| PlanError::NoPlan)?;

    // Stage 1.
    let mut f_out: Option<Flag> = None;
    match f_in {
        Flag::Inquiry => f_out = Some(Flag::Inquiry),
        Flag::Reject => match memory.last_flag.as_direction() {
            Some(dir) if dir != Direction::Noop => {
                let cell = memory.last_flag_cell.unwrap_or(root.cell);
                memory.omega.insert(cell, dir);
            }
            _ => warn!(
                last_flag = %memory.last_flag,
                "partner rejected a flag that does not name a move; hidden information unchanged"
            ),
        },
        other => {
            if let Some(dir) = other.as_direction() {
                if !valid.contains(dir) {
                    f_out = Some(Flag::Reject);
                }
            }
        }
    }

    // Stage 2.
    let children = tree.children(NodeId::ROOT);
    let most = children
        .iter()
        .map(|c| tree.node(*c).visits)
        .max()
        .ok_or(PlanError::NoChildren)?;
    let best: Vec<NodeId> = children
        .iter()
        .copied()
        .filter(|c| tree.node(*c).visits == most)
        .collect();
    let flagged = f_in
        .as_direction()
        .and_then(|d| best.iter().copied().find(|c| tree.node(*c).action == Some(d)));
    let chosen = match flagged {
        Some(c) => c,
        None => best[rng.gen_range(0..best.len())],
    };
    let chosen_node = tree.node(chosen);
    let action = chosen_node.action.expect("root children carry actions");

    // Stage 3.
    let f_out = match f_out {
        Some(f) => f,
        None => {
            let ruled_out = memory.omega.rejected(chosen_node.cell);
            let grandchildren: Vec<NodeId> = tree
                .children(chosen)
                .iter()
                .copied()
                .filter(|g| !ruled_out.contains(tree.node(*g).action.expect("non-root")))
                .collect();
            match grandchildren.iter().map(|g| tree.node(*g).visits).max() {
                None => Flag::None,
                Some(top) => {
                    let tied: Vec<NodeId> = grandchildren
                        .into_iter()
                        .filter(|g| tree.node(*g).visits == top)
                        .collect();
                    let g = tied[rng.gen_range(0..tied.len())];
                    Flag::from(tree.node(g).action.expect("non-root"))
                }
            }
        }
    };

    memory.last_flag = f_out;
    memory.last_flag_cell = Some(chosen_node.cell);
    Ok(Decision {
        action,
        flag_out: f_out,
        flag_in: f_in,
        next_cell: chosen_node.cell,
    })
}
