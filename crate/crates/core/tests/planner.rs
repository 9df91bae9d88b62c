mod common;

use common::*;
use gnomes_core::game::{Cell, Direction, MazeSide, Player, RewardSpec};
use gnomes_core::planner::{dump_tree, EgoView, Flag, HiddenInfoDict, NodeId, Planner, PlannerConfig, DUMP_VERSION};

fn planner(iterations: u32, seed: u64) -> Planner {
    let mut p = Planner::new(
        PlannerConfig {
            iterations,
            ..PlannerConfig::default()
        },
        seed,
    );
    p.memory.omega = minimal_omega();
    p
}

#[test]
fn minimal_example_asks_partner_to_move_right() {
    let side = minimal_ego_side();
    let state = ego_turn(S, Cell::new(2, 1), Player::Ego);
    let view = EgoView::for_state(&side, &state, RewardSpec::default());
    let mut hits = 0;
    for seed in 0..20 {
        let mut p = planner(2000, seed);
        let d = p.plan(&state, Flag::Down, &view).unwrap();
        if (d.action, d.flag_out) == (Direction::Down, Flag::Right) {
            assert_eq!(d.next_cell, S_D);
            assert_eq!(p.memory.last_flag_cell, Some(S_D));
            hits += 1;
        }
    }
    assert_eq!(hits, 20);
}

#[test]
fn partner_refusal_is_recorded_where_it_was_asked() {
    let side = minimal_ego_side();
    let state = ego_turn(S_D, Cell::new(2, 1), Player::Human);
    let view = EgoView::for_state(&side, &state, RewardSpec::default());
    let mut p = planner(100, 1);
    p.memory.last_flag = Flag::Right;
    p.memory.last_flag_cell = Some(S_D);
    p.plan(&state, Flag::Reject, &view).unwrap();
    assert!(p.memory.omega.contains(S_D, Direction::Right));
    assert_eq!(p.memory.omega.rejected(S_D).len(), 3);
}

#[test]
fn refusal_of_a_non_move_changes_nothing() {
    let side = MazeSide::open(3, 3);
    let state = ego_turn(Cell::new(1, 1), Cell::new(0, 0), Player::Human);
    let view = EgoView::for_state(&side, &state, RewardSpec::default());
    for last in [Flag::Inquiry, Flag::None, Flag::Accept, Flag::Noop] {
        let mut p = planner(50, 2);
        p.memory.last_flag = last;
        p.plan(&state, Flag::Reject, &view).unwrap();
        assert_eq!(p.memory.omega, minimal_omega(), "{last}");
    }
}

#[test]
fn unexpanded_choice_proposes_nothing() {
    let side = MazeSide::open(3, 3);
    let state = ego_turn(Cell::new(1, 1), Cell::new(0, 0), Player::Ego);
    let view = EgoView::for_state(&side, &state, RewardSpec::default());
    let mut p = planner(1, 3);
    let d = p.plan(&state, Flag::None, &view).unwrap();
    assert_eq!(d.flag_out, Flag::None);
    assert_eq!(p.memory.last_flag, Flag::None);
}

#[test]
fn omega_persists_across_decisions_and_rounds() {
    let side = MazeSide::open(3, 3);
    let view_state = ego_turn(Cell::new(1, 1), Cell::new(0, 0), Player::Human);
    let view = EgoView::for_state(&side, &view_state, RewardSpec::default());
    let mut p = Planner::new(PlannerConfig::default(), 4);
    p.memory.last_flag = Flag::Up;
    p.memory.last_flag_cell = Some(Cell::new(1, 1));
    p.plan(&view_state, Flag::Reject, &view).unwrap();
    p.memory.start_round();
    let mut next = view_state;
    next.turn += 2;
    p.plan(&next, Flag::None, &view).unwrap();
    assert!(p.memory.omega.contains(Cell::new(1, 1), Direction::Up));
}

#[test]
fn tree_dump_round_trips() {
    let side = minimal_ego_side();
    let state = ego_turn(S, Cell::new(2, 1), Player::Ego);
    let view = EgoView::for_state(&side, &state, RewardSpec::default());
    let mut p = planner(100, 5);
    let out = p.plan_detailed(&state, Flag::None, &view).unwrap();
    let dump = dump_tree(&out.trees.ego, &p.memory.omega);
    assert_eq!(dump.v, DUMP_VERSION);
    assert_eq!(dump.nodes.len(), out.trees.ego.len());
    assert_eq!(dump.nodes[0].visits, 100);
    assert!(dump.nodes.iter().skip(1).all(|n| n.parent.is_some()));
    let json = serde_json::to_string(&dump).unwrap();
    assert_eq!(serde_json::from_str::<gnomes_core::planner::TreeDump>(&json).unwrap(), dump);
    let omega: HiddenInfoDict = serde_json::from_value(serde_json::to_value(&p.memory.omega).unwrap()).unwrap();
    assert_eq!(omega, p.memory.omega);
    assert_eq!(out.trees.ego.children(NodeId::ROOT).len(), 2);
}
