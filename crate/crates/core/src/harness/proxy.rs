//! Scripted stand-ins for the human partner.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{distances_to, Cell, Direction, GameState, MazeSide, Player};
use crate::planner::Flag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyVariant {
    /// Walks its own shortest path when it sees the treasure and always says
    /// which move it wants next; otherwise follows feasible requests.
    GreedyFlagging,
    /// Follows feasible requests, otherwise moves at random. Never proposes.
    RandomCompliant,
    /// Moves like `GreedyFlagging` but never speaks.
    SilentGreedy,
}

impl ProxyVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "greedy-flagging" | "greedy" => Some(ProxyVariant::GreedyFlagging),
            "random-compliant" | "random" => Some(ProxyVariant::RandomCompliant),
            "silent-greedy" | "silent" => Some(ProxyVariant::SilentGreedy),
            _ => None,
        }
    }
}

/// What the proxy does on its turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxyTurn {
    pub action: Direction,
    pub flag: Flag,
    /// Chat text carrying `flag`; empty when there is nothing to say.
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ProxyHuman {
    pub variant: ProxyVariant,
    side: MazeSide,
    rng: ChaCha8Rng,
    /// Probability of refusing a feasible request.
    error_rate: f64,
    visits: HashMap<Cell, u32>,
    /// Moves the ego player refused at a cell.
    ego_refused: HashSet<(Cell, Direction)>,
    last_proposal: Option<(Cell, Direction)>,
    goal_distances: Option<(Cell, Vec<Option<u32>>)>,
}

impl ProxyHuman {
    pub fn new(variant: ProxyVariant, side: MazeSide, seed: u64) -> Self {
        ProxyHuman {
            variant,
            side,
            rng: ChaCha8Rng::seed_from_u64(seed),
            error_rate: 0.0,
            visits: HashMap::new(),
            ego_refused: HashSet::new(),
            last_proposal: None,
            goal_distances: None,
        }
    }

    pub fn with_error_rate(mut self, rate: f64) -> Self {
        self.error_rate = rate.clamp(0.0, 1.0);
        self
    }

    pub fn side(&self) -> &MazeSide {
        &self.side
    }

    /// Clears per-round memory; the maze is unchanged so refusals are kept.
    pub fn start_round(&mut self) {
        self.visits.clear();
        self.last_proposal = None;
        self.goal_distances = None;
    }

    /// Chooses a move given the flag read from the ego player's last message.
    pub fn act(&mut self, state: &GameState, ego_flag: Flag) -> ProxyTurn {
        let here = state.token;
        *self.visits.entry(here).or_insert(0) += 1;
        if ego_flag == Flag::Reject {
            if let Some(p) = self.last_proposal.take() {
                self.ego_refused.insert(p);
            }
        }
        let valid = self.side.valid_actions_unchecked(here);
        let request = ego_flag.as_direction();
        let goal = (state.treasure_side == Player::Human).then_some(state.treasure);
        if let Some(g) = goal {
            if self.goal_distances.as_ref().map(|(c, _)| *c) != Some(g) {
                self.goal_distances = Some((g, distances_to(&self.side, g)));
            }
        }

        // A request the proxy cannot play is always refused; a feasible one is
        // refused only through injected error.
        let refuse = match request {
            Some(d) if !valid.contains(d) => true,
            Some(d) if d != Direction::Noop => self.error_rate > 0.0 && self.rng.gen_bool(self.error_rate),
            _ => false,
        };

        let action = match (self.variant, goal, request) {
            (ProxyVariant::RandomCompliant, _, Some(d)) if !refuse => d,
            (ProxyVariant::RandomCompliant, _, _) => *valid.iter().collect::<Vec<_>>().choose(&mut self.rng).unwrap(),
            (_, Some(_), _) => self.shortest_step(here).unwrap_or_else(|| self.frontier_step(here)),
            (_, None, Some(d)) if !refuse => d,
            (_, None, _) => self.frontier_step(here),
        };
        let next = self.side.target(here, action).unwrap_or(here);

        let flag = if self.variant == ProxyVariant::SilentGreedy {
            Flag::None
        } else if refuse {
            Flag::Reject
        } else if self.variant == ProxyVariant::GreedyFlagging && goal.is_some() {
            match self.proposal(next) {
                Some(d) => {
                    self.last_proposal = Some((next, d));
                    Flag::from(d)
                }
                None => Flag::None,
            }
        } else if request.is_some() {
            Flag::Accept
        } else {
            Flag::None
        };
        if !flag.is_action() {
            self.last_proposal = None;
        }
        ProxyTurn {
            action,
            flag,
            message: message_for(flag),
        }
    }

    fn distance(&self, cell: Cell) -> Option<u32> {
        let (_, d) = self.goal_distances.as_ref()?;
        d[cell.y as usize * self.side.width() as usize + cell.x as usize]
    }

    /// Own-side moves from `cell` that shorten the distance to the treasure.
    pub fn shortest_moves(&self, cell: Cell) -> Vec<Direction> {
        let Some(here) = self.distance(cell) else { return Vec::new() };
        Direction::MOVES
            .into_iter()
            .filter(|d| {
                !self.side.blocked(cell, *d)
                    && self
                        .side
                        .target(cell, *d)
                        .and_then(|t| self.distance(t))
                        .is_some_and(|t| t + 1 == here)
            })
            .collect()
    }

    fn shortest_step(&mut self, cell: Cell) -> Option<Direction> {
        if self.distance(cell) == Some(0) {
            return Some(Direction::Noop);
        }
        self.shortest_moves(cell).choose(&mut self.rng).copied()
    }

    /// The move the proxy asks the ego player to make from `cell`.
    fn proposal(&mut self, cell: Cell) -> Option<Direction> {
        let moves: Vec<Direction> = self
            .shortest_moves(cell)
            .into_iter()
            .filter(|d| !self.ego_refused.contains(&(cell, *d)))
            .collect();
        moves.choose(&mut self.rng).copied()
    }

    /// Open neighbour visited least often this round, ties at random.
    fn frontier_step(&mut self, cell: Cell) -> Direction {
        let options: Vec<(Direction, u32)> = Direction::MOVES
            .into_iter()
            .filter_map(|d| {
                let t = self.side.target(cell, d)?;
                Some((d, self.visits.get(&t).copied().unwrap_or(0)))
            })
            .collect();
        let Some(least) = options.iter().map(|(_, v)| *v).min() else { return Direction::Noop };
        let best: Vec<Direction> = options.into_iter().filter(|(_, v)| *v == least).map(|(d, _)| d).collect();
        *best.choose(&mut self.rng).unwrap()
    }
}

/// Chat text the proxy sends for a flag.
pub fn message_for(flag: Flag) -> String {
    match flag {
        Flag::None => String::new(),
        Flag::Accept => "Ok.".into(),
        Flag::Reject => "I cannot, there is a wall in that direction.".into(),
        Flag::Inquiry => "Where exactly is the hidden treasure located?".into(),
        Flag::Noop => "Can you stay put?".into(),
        action => format!("Can you move {}?", action.as_direction().map_or("", |d| d.as_str())),
    }
}
