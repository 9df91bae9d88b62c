//! Fixtures shared by the benchmarks.

use gnomes_core::game::{generate_layout, GameState, MazeLayout, Player};
use gnomes_core::{EgoView, RewardSpec};

/// The 9×9 testbed layout for `seed`, at the ego player's first decision of
/// `round`.
pub fn testbed(seed: u64, round: u8) -> (MazeLayout, GameState) {
    let layout = generate_layout(seed, 9, 9, 5).expect("generated layouts are valid");
    let state = layout.initial_state(round, Player::Ego).expect("five rounds");
    (layout, state)
}

pub fn view<'a>(layout: &'a MazeLayout, state: &GameState) -> EgoView<'a> {
    EgoView::for_state(&layout.ego, state, RewardSpec::default())
}
