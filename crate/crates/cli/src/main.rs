use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gnomes_core::game::{generate_layout, MazeLayout, DEFAULT_ROUNDS};
use gnomes_core::harness::{
    emit_heatmap, run_experiment_with, Condition, ExperimentConfig, ExperimentResults, Heatmap, MazeSource,
    ProxyVariant, StatsTable,
};
use gnomes_core::language::{LanguageModule, LlmClient};
use gnomes_core::PlannerMemory;
use gnomes_server::ServerConfig;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "gnomes", version, about = "Shared-control maze game: self-play, statistics and live play")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Comm,
    Mute,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProxyArg {
    GreedyFlagging,
    RandomCompliant,
    SilentGreedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Plays the planner against a scripted partner over seeded mazes.
    Simulate {
        /// Number of maze seeds.
        #[arg(long)]
        seeds: u64,
        /// First maze seed.
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, value_enum, default_value_t = ConditionArg::Both)]
        condition: ConditionArg,
        /// Play every seed on this maze instead of generating one per seed.
        #[arg(long)]
        maze_file: Option<PathBuf>,
        #[arg(long, default_value_t = 9)]
        width: u16,
        #[arg(long, default_value_t = 9)]
        height: u16,
        #[arg(long, default_value_t = DEFAULT_ROUNDS)]
        rounds: u8,
        #[arg(long, value_enum, default_value_t = ProxyArg::GreedyFlagging)]
        proxy: ProxyArg,
        /// Chance that the partner refuses a feasible request.
        #[arg(long, default_value_t = 0.0)]
        error_rate: f64,
        /// Search iterations per decision.
        #[arg(long, default_value_t = 100)]
        iterations: u32,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-round medians, bootstrap intervals and message counts.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        resamples: Option<usize>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inferred partner walls against the real ones, per cell.
    Heatmap {
        /// Results file, a single game record or a session record.
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a generated maze in the text format.
    GenMaze {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        width: u16,
        #[arg(long, default_value_t = 9)]
        height: u16,
        #[arg(long, default_value_t = DEFAULT_ROUNDS)]
        rounds: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the session server.
    Serve {
        /// TOML config; `GNOMES_*` variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Simulate {
            seeds,
            first_seed,
            condition,
            maze_file,
            width,
            height,
            rounds,
            proxy,
            error_rate,
            iterations,
            master_seed,
            out,
        } => {
            let mut config = ExperimentConfig::new((first_seed..first_seed + seeds).collect(), master_seed);
            config.conditions = match condition {
                ConditionArg::Comm => vec![Condition::Comm],
                ConditionArg::Mute => vec![Condition::Mute],
                ConditionArg::Both => vec![Condition::Comm, Condition::Mute],
            };
            config.mazes = match maze_file {
                Some(path) => {
                    let maze = read(&path)?;
                    let layout = MazeLayout::from_text(&maze).with_context(|| format!("{}", path.display()))?;
                    config.rounds = layout.rounds.len() as u8;
                    MazeSource::Fixed { maze }
                }
                None => {
                    config.rounds = rounds;
                    MazeSource::Generated { width, height }
                }
            };
            config.proxy = match proxy {
                ProxyArg::GreedyFlagging => ProxyVariant::GreedyFlagging,
                ProxyArg::RandomCompliant => ProxyVariant::RandomCompliant,
                ProxyArg::SilentGreedy => ProxyVariant::SilentGreedy,
            };
            config.proxy_error_rate = error_rate;
            config.planner.iterations = iterations;
            let results = run_experiment_with(&config, &LanguageModule::rules_only())?;
            write(Some(&out), &serde_json::to_string(&results)?)?;
            let table = StatsTable::from_episodes(
                results.master_seed,
                results.games.iter().flat_map(|g| g.episodes.iter().map(move |e| (g.condition, e))),
                0,
            );
            for row in &table.rows {
                eprintln!(
                    "round {} {}: solved {}/{}, median turns {}",
                    row.round,
                    row.condition.label(),
                    row.solved,
                    row.episodes,
                    row.median_turns.map_or("-".into(), |m| m.to_string())
                );
            }
        }
        Command::Stats {
            input,
            format,
            resamples,
            out,
        } => {
            let results: ExperimentResults = serde_json::from_str(&read(&input)?)
                .with_context(|| format!("{} is not a results file", input.display()))?;
            let table = match resamples {
                Some(n) => StatsTable::from_episodes(
                    results.master_seed,
                    results.games.iter().flat_map(|g| g.episodes.iter().map(move |e| (g.condition, e))),
                    n,
                ),
                None => StatsTable::from_results(&results),
            };
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Md => table.to_markdown(),
                Format::Json => serde_json::to_string_pretty(&table)? + "\n",
            };
            write(out.as_deref(), &text)?;
        }
        Command::Heatmap { log, out } => {
            let (map, master_seed) = heatmap_from(&read(&log)?).with_context(|| format!("{}", log.display()))?;
            let mut text = String::new();
            if let Some(seed) = master_seed {
                text.push_str(&format!("# master_seed={seed}\n"));
            }
            text.push_str(&map.render());
            write(out.as_deref(), &text)?;
        }
        Command::GenMaze {
            seed,
            width,
            height,
            rounds,
            out,
        } => {
            let layout = generate_layout(seed, width, height, rounds)?;
            let text = format!("# gen-maze seed={seed}\n{}", layout.to_text());
            write(out.as_deref(), &text)?;
        }
        Command::Serve { config, bind } => {
            let mut config = ServerConfig::load(config.as_deref())?;
            if let Some(bind) = bind {
                config.bind = bind;
            }
            let language = match &config.llm {
                Some(llm) => LanguageModule::with_llm(LlmClient::from_config(llm)?),
                None => LanguageModule::rules_only(),
            };
            tokio::runtime::Runtime::new()?.block_on(gnomes_server::serve(config, language))?;
        }
    }
    Ok(())
}

/// Anything carrying a maze and the planner memory after play.
#[derive(Deserialize)]
struct MemoryRecord {
    maze: String,
    memory: Option<PlannerMemory>,
}

fn heatmap_from(text: &str) -> Result<(Heatmap, Option<u64>)> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let (records, master_seed) = if value.get("games").is_some() {
        let results: ExperimentResults = serde_json::from_value(value)?;
        let records = results
            .games
            .into_iter()
            .filter(|g| g.condition == Condition::Comm)
            .map(|g| MemoryRecord {
                maze: g.maze,
                memory: Some(g.memory),
            })
            .collect();
        (records, Some(results.master_seed))
    } else {
        (vec![serde_json::from_value::<MemoryRecord>(value)?], None)
    };
    let mut total: Option<Heatmap> = None;
    for r in records {
        let Some(memory) = r.memory else { continue };
        let layout = MazeLayout::from_text(&r.maze)?;
        let map = emit_heatmap(&memory.omega, &layout.human);
        match &mut total {
            Some(t) if (t.width, t.height) == (map.width, map.height) => t.accumulate(&map),
            Some(_) => bail!("records have different maze sizes"),
            None => total = Some(map),
        }
    }
    match total {
        Some(t) => Ok((t, master_seed)),
        None => bail!("no planner memory with chat enabled in the log"),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
