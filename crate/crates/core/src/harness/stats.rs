//! Per-round summaries and bootstrap intervals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{EpisodeLog, Player};

use super::episode::Condition;
use super::experiment::ExperimentResults;

pub const STATS_VERSION: u32 = 1;
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub round: u8,
    pub condition: Condition,
    pub episodes: usize,
    pub solved: usize,
    /// Over solved episodes only.
    pub median_turns: Option<f64>,
    pub median_duration_ms: Option<f64>,
    pub turns_ci: Option<(f64, f64)>,
    /// Messages per episode, by sender.
    pub ego_messages: f64,
    pub human_messages: f64,
    /// Mean characters per message, all senders.
    pub mean_message_len: f64,
}

/// Comm minus mute median turns for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundComparison {
    pub round: u8,
    pub median_diff: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

impl RoundComparison {
    /// Whether the whole interval lies at or below zero, i.e. it excludes
    /// every difference in the mute agent's favour.
    pub fn favors_comm(&self) -> bool {
        self.ci.is_some_and(|(_, hi)| hi <= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub v: u32,
    pub master_seed: u64,
    pub resamples: usize,
    pub rows: Vec<StatsRow>,
    pub comparisons: Vec<RoundComparison>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn resample(values: &[f64], rng: &mut impl Rng, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend((0..values.len()).map(|_| values[rng.gen_range(0..values.len())]));
    median(buf).expect("non-empty")
}

/// Percentile 95% interval for the median.
pub fn bootstrap_median_ci(values: &[f64], resamples: usize, seed: u64) -> Option<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(values.len());
    let mut stats: Vec<f64> = (0..resamples).map(|_| resample(values, &mut rng, &mut buf)).collect();
    stats.sort_by(f64::total_cmp);
    Some((quantile(&stats, 0.025), quantile(&stats, 0.975)))
}

/// Percentile 95% interval for median(a) − median(b), resampling each group.
pub fn bootstrap_median_diff_ci(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Option<(f64, f64)> {
    if a.is_empty() || b.is_empty() || resamples == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(a.len().max(b.len()));
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| resample(a, &mut rng, &mut buf) - resample(b, &mut rng, &mut buf))
        .collect();
    stats.sort_by(f64::total_cmp);
    Some((quantile(&stats, 0.025), quantile(&stats, 0.975)))
}

fn messages(log: &EpisodeLog, player: Player) -> impl Iterator<Item = &str> {
    log.entries
        .iter()
        .filter(move |e| e.player == player)
        .filter_map(|e| e.message_out.as_deref())
}

fn solved_turns(logs: &[&EpisodeLog]) -> Vec<f64> {
    logs.iter().filter(|l| l.solved).map(|l| l.turns as f64).collect()
}

impl StatsTable {
    pub fn from_results(results: &ExperimentResults) -> Self {
        Self::from_episodes(
            results.master_seed,
            results
                .games
                .iter()
                .flat_map(|g| g.episodes.iter().map(move |e| (g.condition, e))),
            BOOTSTRAP_RESAMPLES,
        )
    }

    pub fn from_episodes<'a>(
        master_seed: u64,
        episodes: impl IntoIterator<Item = (Condition, &'a EpisodeLog)>,
        resamples: usize,
    ) -> Self {
        let mut groups: BTreeMap<(u8, Condition), Vec<&EpisodeLog>> = BTreeMap::new();
        for (c, log) in episodes {
            groups.entry((log.round, c)).or_default().push(log);
        }

        let mut rows = Vec::new();
        for (&(round, condition), logs) in &groups {
            let turns = solved_turns(logs);
            let durations: Vec<f64> = logs.iter().filter(|l| l.solved).map(|l| l.duration_ms).collect();
            let n = logs.len() as f64;
            let ego: Vec<&str> = logs.iter().flat_map(|l| messages(l, Player::Ego)).collect();
            let human: Vec<&str> = logs.iter().flat_map(|l| messages(l, Player::Human)).collect();
            let total = ego.len() + human.len();
            let chars: usize = ego.iter().chain(human.iter()).map(|m| m.chars().count()).sum();
            rows.push(StatsRow {
                round,
                condition,
                episodes: logs.len(),
                solved: turns.len(),
                median_turns: median(&turns),
                median_duration_ms: median(&durations),
                turns_ci: bootstrap_median_ci(&turns, resamples, master_seed ^ ((round as u64) << 8) ^ condition as u64),
                ego_messages: ego.len() as f64 / n,
                human_messages: human.len() as f64 / n,
                mean_message_len: if total == 0 { 0.0 } else { chars as f64 / total as f64 },
            });
        }

        let rounds: Vec<u8> = {
            let mut r: Vec<u8> = groups.keys().map(|(r, _)| *r).collect();
            r.dedup();
            r
        };
        let comparisons = rounds
            .into_iter()
            .filter_map(|round| {
                let comm = solved_turns(groups.get(&(round, Condition::Comm))?);
                let mute = solved_turns(groups.get(&(round, Condition::Mute))?);
                let median_diff = median(&comm).zip(median(&mute)).map(|(a, b)| a - b);
                Some(RoundComparison {
                    round,
                    median_diff,
                    ci: bootstrap_median_diff_ci(&comm, &mute, resamples, master_seed ^ 0xd1ff ^ round as u64),
                })
            })
            .collect();

        StatsTable {
            v: STATS_VERSION,
            master_seed,
            resamples,
            rows,
            comparisons,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# stats v{} master_seed={}\n", self.v, self.master_seed);
        out.push_str(
            "round,condition,episodes,solved,median_turns,turns_ci_low,turns_ci_high,median_duration_ms,ego_messages,human_messages,mean_message_len\n",
        );
        for r in &self.rows {
            let (lo, hi) = split(r.turns_ci);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.3},{:.3},{:.2}",
                r.round,
                r.condition.label(),
                r.episodes,
                r.solved,
                opt(r.median_turns),
                lo,
                hi,
                opt(r.median_duration_ms.map(|d| (d * 1e3).round() / 1e3)),
                r.ego_messages,
                r.human_messages,
                r.mean_message_len
            );
        }
        out.push_str("\nround,median_diff_comm_minus_mute,ci_low,ci_high,favors_comm\n");
        for c in &self.comparisons {
            let (lo, hi) = split(c.ci);
            let _ = writeln!(out, "{},{},{},{},{}", c.round, opt(c.median_diff), lo, hi, c.favors_comm());
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "Master seed {}, {} bootstrap resamples.\n\n| round | condition | solved | median turns | 95% CI | median ms | msgs E | msgs H | mean len |\n|---|---|---|---|---|---|---|---|---|\n",
            self.master_seed, self.resamples
        );
        for r in &self.rows {
            let (lo, hi) = split(r.turns_ci);
            let _ = writeln!(
                out,
                "| {} | {} | {}/{} | {} | [{}, {}] | {} | {:.1} | {:.1} | {:.1} |",
                r.round,
                r.condition.label(),
                r.solved,
                r.episodes,
                opt(r.median_turns),
                lo,
                hi,
                opt(r.median_duration_ms.map(|d| (d * 10.0).round() / 10.0)),
                r.ego_messages,
                r.human_messages,
                r.mean_message_len
            );
        }
        if !self.comparisons.is_empty() {
            out.push_str("\n| round | median diff (comm - mute) | 95% CI | favors comm |\n|---|---|---|---|\n");
            for c in &self.comparisons {
                let (lo, hi) = split(c.ci);
                let _ = writeln!(out, "| {} | {} | [{}, {}] | {} |", c.round, opt(c.median_diff), lo, hi, c.favors_comm());
            }
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn split(ci: Option<(f64, f64)>) -> (String, String) {
    match ci {
        Some((a, b)) => (a.to_string(), b.to_string()),
        None => (String::new(), String::new()),
    }
}
