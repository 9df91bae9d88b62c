//! Batches of self-play games over seeded mazes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::{generate_layout, EpisodeLog, GameError, MazeLayout, Player, RewardSpec, DEFAULT_ROUNDS};
use crate::language::LanguageModule;
use crate::planner::{Planner, PlannerConfig, PlannerMemory};

use super::episode::{run_episode, Condition, EpisodeError, EpisodeSettings, DEFAULT_TURN_CAP};
use super::proxy::{ProxyHuman, ProxyVariant};

pub const RESULTS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MazeSource {
    /// One generated layout per maze seed.
    Generated { width: u16, height: u16 },
    /// The same layout for every seed; seeds only vary the players' RNGs.
    Fixed { maze: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub conditions: Vec<Condition>,
    pub proxy: ProxyVariant,
    /// Probability that the proxy refuses a feasible request.
    #[serde(default)]
    pub proxy_error_rate: f64,
    pub seeds: Vec<u64>,
    pub rounds: u8,
    pub mazes: MazeSource,
    pub planner: PlannerConfig,
    pub reward: RewardSpec,
    pub turn_cap: u32,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(seeds: Vec<u64>, master_seed: u64) -> Self {
        ExperimentConfig {
            conditions: vec![Condition::Comm, Condition::Mute],
            proxy: ProxyVariant::GreedyFlagging,
            proxy_error_rate: 0.0,
            seeds,
            rounds: DEFAULT_ROUNDS,
            mazes: MazeSource::Generated { width: 9, height: 9 },
            planner: PlannerConfig::default(),
            reward: RewardSpec::default(),
            turn_cap: DEFAULT_TURN_CAP,
            master_seed,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.seeds.is_empty() {
            return Err(ExperimentError::Config("at least one maze seed is required".into()));
        }
        if self.conditions.is_empty() {
            return Err(ExperimentError::Config("at least one condition is required".into()));
        }
        if self.rounds == 0 {
            return Err(ExperimentError::Config("at least one round is required".into()));
        }
        if !(0.0..=1.0).contains(&self.proxy_error_rate) {
            return Err(ExperimentError::Config("proxy error rate must lie in [0, 1]".into()));
        }
        self.planner
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.reward
            .validate()
            .map_err(|e| ExperimentError::Config(format!("{e:?}")))?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("maze: {0}")]
    Maze(String),
    #[error("maze seed {seed}, {condition}: {source}")]
    Episode {
        seed: u64,
        condition: &'static str,
        source: EpisodeError,
    },
}

impl From<GameError> for ExperimentError {
    fn from(e: GameError) -> Self {
        ExperimentError::Maze(format!("{e:?}"))
    }
}

/// All rounds of one maze under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub v: u32,
    pub maze_seed: u64,
    pub condition: Condition,
    /// Maze in the text file format.
    pub maze: String,
    pub episodes: Vec<EpisodeLog>,
    /// Planner memory after the last round.
    pub memory: PlannerMemory,
}

impl GameRecord {
    pub fn layout(&self) -> Result<MazeLayout, ExperimentError> {
        MazeLayout::from_text(&self.maze).map_err(|e| ExperimentError::Maze(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub v: u32,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub games: Vec<GameRecord>,
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn layout_for(config: &ExperimentConfig, seed: u64) -> Result<MazeLayout, ExperimentError> {
    match &config.mazes {
        MazeSource::Generated { width, height } => Ok(generate_layout(seed, *width, *height, config.rounds)?),
        MazeSource::Fixed { maze } => MazeLayout::from_text(maze).map_err(|e| ExperimentError::Maze(e.to_string())),
    }
}

/// Plays every round of one maze with fresh planner and proxy memory.
pub fn run_game(
    config: &ExperimentConfig,
    layout: &MazeLayout,
    maze_seed: u64,
    condition: Condition,
    language: &LanguageModule,
) -> Result<GameRecord, EpisodeError> {
    // Both conditions share player seeds so they differ only in the channel.
    let game_seed = mix(config.master_seed, maze_seed);
    let mut planner = Planner::new(config.planner, mix(game_seed, 1));
    let mut proxy =
        ProxyHuman::new(config.proxy, layout.human.clone(), mix(game_seed, 2)).with_error_rate(config.proxy_error_rate);
    let settings = EpisodeSettings {
        condition,
        reward: config.reward,
        turn_cap: config.turn_cap,
        first_mover: Player::Human,
    };
    let mut episodes = Vec::new();
    for spec in &layout.rounds {
        if spec.round > config.rounds {
            continue;
        }
        episodes.push(run_episode(layout, spec.round, &mut planner, &mut proxy, language, &settings)?);
    }
    Ok(GameRecord {
        v: RESULTS_VERSION,
        maze_seed,
        condition,
        maze: layout.to_text(),
        episodes,
        memory: planner.memory,
    })
}

/// Runs every (seed, condition) game in parallel. Output order and content
/// depend only on the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults, ExperimentError> {
    run_experiment_with(config, &LanguageModule::rules_only())
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    language: &LanguageModule,
) -> Result<ExperimentResults, ExperimentError> {
    config.validate()?;
    let layouts: Vec<(u64, MazeLayout)> = config
        .seeds
        .par_iter()
        .map(|s| layout_for(config, *s).map(|l| (*s, l)))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(u64, &MazeLayout, Condition)> = layouts
        .iter()
        .flat_map(|(s, l)| config.conditions.iter().map(move |c| (*s, l, *c)))
        .collect();
    let games = jobs
        .into_par_iter()
        .map(|(seed, layout, condition)| {
            run_game(config, layout, seed, condition, language).map_err(|source| ExperimentError::Episode {
                seed,
                condition: condition.label(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResults {
        v: RESULTS_VERSION,
        master_seed: config.master_seed,
        config: config.clone(),
        games,
    })
}
