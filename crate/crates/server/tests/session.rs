mod common;

use common::*;
use gnomes_core::game::{Cell, Direction, EpisodeLog, GameState, MazeLayout, Player};
use gnomes_core::harness::{ProxyHuman, ProxyVariant};
use gnomes_core::language::rules;
use gnomes_core::Flag;
use gnomes_server::persist::{read_events, read_record, LogSink};
use gnomes_server::session::{MoveResult, SessionCore};
use gnomes_server::wire::{EventBody, Phase, Record};
use gnomes_server::{ProtocolError, SessionCondition, SessionRecord};
use proptest::prelude::*;
use serde_json::Value;

/// Plays the human seat with the scripted partner until the game ends or
/// `max_moves` moves were made. Chat goes through the session.
fn play_out(core: &mut SessionCore, seed: u64, max_moves: usize) {
    let mut proxy = ProxyHuman::new(ProxyVariant::GreedyFlagging, core.layout().human.clone(), seed);
    let mut round = 0;
    let mut moves = 0;
    while core.phase() == Phase::Playing && moves < max_moves {
        core.run_agent_turns();
        if core.phase() != Phase::Playing {
            break;
        }
        if core.state().round != round {
            round = core.state().round;
            proxy.start_round();
        }
        let ego_said = last_agent_chat(core);
        let flag_in = ego_said.as_deref().map_or(Flag::None, rules::classify);
        let turn = proxy.act(core.state(), flag_in);
        if core.condition().allows_chat() && !turn.message.is_empty() {
            core.submit_chat(Player::Human, &turn.message).unwrap();
        }
        assert_eq!(core.submit_move(Player::Human, turn.action).unwrap(), MoveResult::Applied);
        moves += 1;
    }
}

fn last_agent_chat(core: &SessionCore) -> Option<String> {
    let last_state = core
        .stored_events()
        .iter()
        .rposition(|e| matches!(e.record, Record::State { state, .. } if state.in_control == Player::Human))?;
    core.stored_events()[..=last_state].iter().rev().find_map(|e| match &e.record {
        Record::Chat { from: Player::Ego, text } => Some(text.clone()),
        Record::State { state, .. } if state.in_control == Player::Ego => None,
        _ => None,
    })
}

#[test]
fn first_state_shows_only_the_creators_walls() {
    let layout = generated(7, 9);
    assert_ne!(layout.ego, layout.human);
    let (core, _) = session(SessionCondition::VsAgentComm, layout.clone(), 1);
    let events = core.events_since(Player::Human, 0);
    assert_eq!(events.len(), 1);
    let EventBody::State(s) = &events[0].body else { panic!() };
    assert_eq!(s.walls, layout.human.masks());
    // Round one is visible on the human side.
    assert_eq!(s.treasure, Some(layout.rounds[0].treasure));
    let EventBody::State(e) = &core.events_since(Player::Ego, 0)[0].body else { panic!() };
    assert_eq!(e.walls, layout.ego.masks());
    assert_eq!(e.treasure, None);
}

#[test]
fn moves_walls_and_turn_order() {
    let mut layout = strip();
    layout.human.add_wall(Cell::new(0, 0), Direction::Right);
    layout.rounds[0].treasure = Cell::new(2, 0);
    let (mut core, _) = session(SessionCondition::VsHuman, layout, 0);
    assert_eq!(core.submit_move(Player::Human, Direction::Noop), Err(ProtocolError::WaitingForPartner));
    core.join().unwrap();
    assert_eq!(core.join(), Err(ProtocolError::SessionFull));

    let before = *core.state();
    let r = core.submit_move(Player::Human, Direction::Right).unwrap();
    assert_eq!(
        r,
        MoveResult::Rejected {
            message: "I cannot right because there is a wall in that direction.".into()
        }
    );
    assert_eq!(*core.state(), before);
    assert!((core.view(Player::Human).score - -0.06).abs() < 1e-12);
    assert_eq!(core.submit_move(Player::Ego, Direction::Right), Err(ProtocolError::OutOfTurn));

    assert_eq!(core.submit_move(Player::Human, Direction::Noop), Ok(MoveResult::Applied));
    assert_eq!(core.submit_move(Player::Ego, Direction::Right), Ok(MoveResult::Applied));
    assert_eq!(core.state().token, Cell::new(1, 0));
    assert_eq!(core.state().turn, 2);

    // The partner learns that a wall was hit but not where.
    let wall = |seat| {
        core.events_since(seat, 0)
            .into_iter()
            .find_map(|e| match e.body {
                EventBody::Error(v) => Some(v),
                _ => None,
            })
            .unwrap()
    };
    assert_eq!(wall(Player::Human).direction, Some(Direction::Right));
    assert_eq!(wall(Player::Ego).direction, None);
    assert_eq!(wall(Player::Ego).cell, None);
}

#[test]
fn reaching_the_treasure_starts_the_next_round() {
    let (mut core, _) = session(SessionCondition::VsHuman, strip(), 0);
    core.join().unwrap();
    core.submit_move(Player::Human, Direction::Right).unwrap();
    let kinds: Vec<_> = core.stored_events().iter().map(|e| e.record.clone()).collect();
    let n = kinds.len();
    assert!(matches!(
        kinds[n - 2],
        Record::RoundOver {
            round: 1,
            solved: true,
            turns: 1,
            next_round: Some(2),
            ..
        }
    ));
    let Record::State { state, phase, score } = kinds[n - 1] else { panic!() };
    assert_eq!((state.round, state.turn, state.token, phase, score), (2, 0, Cell::new(0, 0), Phase::Playing, 0.0));
    assert_eq!(core.episodes().len(), 1);

    core.submit_move(Player::Human, Direction::Right).unwrap();
    core.submit_move(Player::Ego, Direction::Right).unwrap();
    assert_eq!(core.phase(), Phase::Finished);
    assert_eq!(core.submit_move(Player::Human, Direction::Noop), Err(ProtocolError::GameOver));
}

#[test]
fn chat_is_refused_in_mute_sessions() {
    let (mut core, _) = session(SessionCondition::VsAgentMute, generated(3, 6), 1);
    let before = core.last_seq();
    assert_eq!(core.submit_chat(Player::Human, "go up"), Err(ProtocolError::ChatDisabled));
    assert_eq!(core.last_seq(), before);
}

#[test]
fn chat_flag_reaches_the_agents_next_decision() {
    let (mut core, _) = session(SessionCondition::VsAgentComm, generated(11, 6), 1);
    let r = core.submit_chat(Player::Human, "can you go up").unwrap();
    assert_eq!(r.flag, Some(Flag::Up));
    core.submit_move(Player::Human, Direction::Noop).unwrap();
    core.run_agent_turns();
    let agent = core.stored_events().iter().any(|e| matches!(e.record, Record::Thinking { .. }));
    assert!(agent);
    let e = core.open_episode().entries.iter().find(|e| e.player == Player::Ego).unwrap();
    assert_eq!(e.flag_in, Flag::Up);
    assert_eq!(e.message_in.as_deref(), Some("can you go up"));
}

#[test]
fn questions_are_answered_without_a_move() {
    let (mut core, _) = session(SessionCondition::VsAgentComm, generated(5, 6), 1);
    let state = *core.state();
    let r = core.submit_chat(Player::Human, "where is the treasure?").unwrap();
    assert_eq!(r.flag, Some(Flag::Inquiry));
    let reply = r.reply.unwrap();
    assert!(reply.split_whitespace().count() <= 30);
    assert_eq!(*core.state(), state);
    let last = core.stored_events().last().unwrap();
    assert_eq!(
        last.record,
        Record::Chat {
            from: Player::Ego,
            text: reply
        }
    );
}

fn final_states(core: &SessionCore) -> Vec<GameState> {
    let events = core.stored_events();
    events
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.record, Record::RoundOver { .. }))
        .map(|(i, _)| match events[i - 1].record {
            Record::State { state, .. } => state,
            _ => panic!("round-over not preceded by a state"),
        })
        .collect()
}

#[test]
fn persisted_logs_replay_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (i, condition) in [SessionCondition::VsAgentComm, SessionCondition::VsAgentMute].into_iter().enumerate() {
        let id = format!("s{i}");
        let (mut core, _) = SessionCore::new(
            id.clone(),
            settings(condition, generated(21 + i as u64, 6), 4),
            std::sync::Arc::new(gnomes_core::language::LanguageModule::rules_only()),
            Some(LogSink::create(dir.path(), &id).unwrap()),
        )
        .unwrap();
        play_out(&mut core, 9, 10_000);
        assert_eq!(core.phase(), Phase::Finished);

        let record: SessionRecord = read_record(&dir.path().join(format!("{id}.json"))).unwrap();
        assert_eq!(record, core.record());
        let layout = MazeLayout::from_text(&record.maze).unwrap();
        let ends: Vec<GameState> = record
            .episodes
            .iter()
            .map(|e: &EpisodeLog| e.replay(&layout.ego, &layout.human).unwrap())
            .collect();
        assert_eq!(ends, final_states(&core));
        assert_eq!(ends.len(), 5);
        assert!(record.episodes.iter().all(|e| e.solved));

        let events = read_events(&dir.path().join(format!("{id}.events.jsonl"))).unwrap();
        assert_eq!(events, core.stored_events());
    }
}

fn check_hiding(core: &SessionCore) {
    let layout = core.layout();
    let wire = validator("wire_event");
    let mut seq = 0;
    for seat in [Player::Human, Player::Ego] {
        let own = layout.side(seat).masks();
        let other = layout.side(seat.other()).masks();
        let mut treasure_side = None;
        for (i, event) in core.events_since(seat, 0).into_iter().enumerate() {
            assert_eq!(event.seq, i as u64 + 1, "gap in stream");
            seq = seq.max(event.seq);
            let value = serde_json::to_value(&event).unwrap();
            assert_valid(&wire, &value);
            if let Record::State { state, .. } = core.stored_events()[i].record {
                treasure_side = Some(state.treasure_side);
            }
            let mut keys = Vec::new();
            walk(&value, &mut keys);
            for (k, v) in keys {
                if k == "walls" {
                    assert_eq!(v, &serde_json::to_value(own).unwrap());
                }
                if let Value::Array(items) = v {
                    if own != other && !items.is_empty() {
                        assert_ne!(v, &serde_json::to_value(other).unwrap(), "partner walls leaked in {k}");
                    }
                }
                if k == "treasure" {
                    assert_eq!(treasure_side, Some(seat), "treasure sent to the wrong side: {value}");
                }
            }
            if let EventBody::Error(e) = &event.body {
                assert_eq!(e.player == seat, e.direction.is_some());
            }
        }
    }
    assert_eq!(seq, core.last_seq());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn no_event_reveals_hidden_information(
        maze_seed in 0u64..1000,
        agent_seed in 0u64..1000,
        comm in any::<bool>(),
        moves in 1usize..40,
        bumps in proptest::collection::vec((0usize..40, 0usize..5), 0..6),
    ) {
        let condition = if comm { SessionCondition::VsAgentComm } else { SessionCondition::VsAgentMute };
        let (mut core, _) = session(condition, generated(maze_seed, 5), agent_seed);
        play_out(&mut core, maze_seed, moves);
        // Deliberate wall bumps and questions on top of the scripted play.
        for (_, d) in bumps {
            core.run_agent_turns();
            if core.phase() != Phase::Playing {
                break;
            }
            let _ = core.submit_move(Player::Human, Direction::ALL[d]);
            if comm {
                let _ = core.submit_chat(Player::Human, "where is the treasure?");
            }
        }
        check_hiding(&core);
    }

    #[test]
    fn two_person_streams_hide_each_side(maze_seed in 0u64..1000, script in proptest::collection::vec(0usize..5, 1..60)) {
        let (mut core, _) = session(SessionCondition::VsHuman, generated(maze_seed, 5), 0);
        core.join().unwrap();
        for d in script {
            if core.phase() != Phase::Playing {
                break;
            }
            let seat = core.state().in_control;
            core.submit_move(seat, Direction::ALL[d]).unwrap();
            core.submit_chat(seat, "hello").unwrap();
        }
        check_hiding(&core);
    }
}

#[test]
fn agent_messages_are_templates() {
    let (mut core, _) = session(SessionCondition::VsAgentComm, generated(2, 6), 3);
    play_out(&mut core, 2, 60);
    let agent_lines: Vec<_> = core
        .stored_events()
        .iter()
        .filter_map(|e| match &e.record {
            Record::Chat { from: Player::Ego, text } => Some(text.clone()),
            _ => None,
        })
        .collect();
    assert!(!agent_lines.is_empty());
    for line in agent_lines {
        assert!(
            line.starts_with("Can you ") || line.starts_with("I cannot "),
            "unexpected agent line {line:?}"
        );
    }
}
