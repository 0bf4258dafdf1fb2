//! Population and genotype accounting.

use std::collections::HashMap;

use thiserror::Error;

use crate::engine::{FounderLedger, SimConfig, World};
use crate::genome::{GENOME_CHARS, Instruction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("metabolism must be positive to predict a carry capacity")]
    ZeroMetabolism,
    #[error("population series is empty")]
    EmptySeries,
    #[error("window fraction must be in (0, 1], got {0}")]
    Window(String),
}

/// One row of the per-step time series.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub population: u64,
    pub births: u64,
    pub deaths: u64,
    pub mean_surplus: f64,
    pub mean_len: f64,
    pub max_len: u64,
    pub unique_genotypes: u64,
    /// Agents whose program has no reproduce instruction.
    pub no_x_count: u64,
    /// Serialized genome of the most common genotype, empty when extinct.
    pub modal_program: String,
    pub modal_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenotypeRecord {
    pub step: u64,
    pub program: String,
    pub count: u64,
}

/// Census of the current world. Genotypes are keyed by serialized genome;
/// the list is sorted by descending count, then lexicographically, and the
/// modal genotype is its first entry.
pub fn census(world: &World) -> (StepRecord, Vec<GenotypeRecord>) {
    let step = world.step();
    let mut counts: HashMap<[u8; GENOME_CHARS], u64> = HashMap::new();
    let (mut surplus, mut total_len, mut max_len, mut no_x) = (0.0, 0u64, 0u64, 0u64);
    let mut population = 0u64;
    for agent in world.agents() {
        population += 1;
        surplus += agent.surplus;
        let len = agent.program().len() as u64;
        total_len += len;
        max_len = max_len.max(len);
        if !agent.program().contains(Instruction::Reproduce) {
            no_x += 1;
        }
        *counts.entry(agent.genome.to_bytes()).or_default() += 1;
    }
    let mut genotypes: Vec<GenotypeRecord> = counts
        .into_iter()
        .map(|(bytes, count)| GenotypeRecord {
            step,
            program: String::from_utf8(bytes.to_vec()).expect("genome bytes are ASCII"),
            count,
        })
        .collect();
    genotypes.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.program.cmp(&b.program)));

    let stats = world.last_cycle();
    let per_agent = |total: f64| if population == 0 { 0.0 } else { total / population as f64 };
    let (modal_program, modal_count) =
        genotypes.first().map_or((String::new(), 0), |g| (g.program.clone(), g.count));
    let record = StepRecord {
        step,
        population,
        births: if step == 0 { 0 } else { stats.births },
        deaths: if step == 0 { 0 } else { stats.deaths },
        mean_surplus: per_agent(surplus),
        mean_len: per_agent(total_len as f64),
        max_len,
        unique_genotypes: genotypes.len() as u64,
        no_x_count: no_x,
        modal_program,
        modal_count,
    };
    (record, genotypes)
}

/// Agents sustainable on one step of landscape inflow:
/// `floor(width * height * regrowth / metabolism)`.
pub fn predicted_k(config: &SimConfig) -> Result<u64, MetricsError> {
    if config.metabolism <= 0.0 {
        return Err(MetricsError::ZeroMetabolism);
    }
    let inflow = f64::from(config.width) * f64::from(config.height) * config.regrowth;
    Ok((inflow / config.metabolism + 1e-9).floor() as u64)
}

/// The last `ceil(len * window)` entries (at least one).
pub fn steady_tail(series: &[f64], window: f64) -> Result<&[f64], MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(MetricsError::Window(window.to_string()));
    }
    let n = ((series.len() as f64 * window).ceil() as usize).clamp(1, series.len());
    Ok(&series[series.len() - n..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Population coefficient of variation; zero for a zero mean.
pub fn coefficient_of_variation(xs: &[f64]) -> f64 {
    let m = mean(xs);
    if m == 0.0 {
        return 0.0;
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    var.sqrt() / m
}

/// Mean of the final `window` fraction of the series relative to `predicted`.
pub fn realized_k(series: &[f64], window: f64, predicted: f64) -> Result<f64, MetricsError> {
    let tail = steady_tail(series, window)?;
    Ok(if predicted > 0.0 { mean(tail) / predicted } else { 0.0 })
}

/// Which founders count as viable at the initial population minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViabilityRule {
    /// Alive at the minimum and at least one offspring by then.
    #[default]
    ReproducedByMinimum,
    /// Alive at the minimum and at least one offspring at any time.
    ReproducedEventually,
}

/// Step of the population minimum within the first `horizon` fraction of the
/// series; the earliest step wins ties.
pub fn initial_minimum(populations: &[f64], horizon: f64) -> Option<usize> {
    if populations.is_empty() {
        return None;
    }
    let n = ((populations.len() as f64 * horizon).ceil() as usize).clamp(1, populations.len());
    let mut best = 0;
    for (i, &p) in populations[..n].iter().enumerate() {
        if p < populations[best] {
            best = i;
        }
    }
    Some(best)
}

/// Fraction of founders that survive the initial population minimum having
/// reproduced. `populations[s]` is the census at step `s`.
pub fn viability_fraction(populations: &[f64], founders: &FounderLedger, horizon: f64, rule: ViabilityRule) -> f64 {
    let Some(at) = initial_minimum(populations, horizon) else {
        return 0.0;
    };
    if founders.is_empty() || populations[at] == 0.0 {
        return 0.0;
    }
    let at = at as u64;
    let viable = (0..founders.len())
        .filter(|&f| {
            founders.alive_at(f, at)
                && match rule {
                    ViabilityRule::ReproducedByMinimum => founders.reproduced_by(f, at),
                    ViabilityRule::ReproducedEventually => founders.ever_reproduced(f),
                }
        })
        .count();
    viable as f64 / founders.len() as f64
}

/// A genotype's count series, aligned with a shared list of sample steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenotypeSeries {
    pub program: String,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub winner: String,
    pub loser: String,
    pub step: u64,
}

/// Competitive exclusions: `loser` hits zero at sample `t` after both it and
/// `winner` were present for the `threshold` samples before `t`, while the
/// winner stays present and the loser stays absent for `threshold` samples
/// from `t` on.
pub fn detect_exclusions(steps: &[u64], series: &[GenotypeSeries], threshold: usize) -> Vec<Exclusion> {
    let threshold = threshold.max(1);
    let present = |s: &GenotypeSeries, range: std::ops::Range<usize>| s.counts[range].iter().all(|&c| c > 0);
    let absent = |s: &GenotypeSeries, range: std::ops::Range<usize>| s.counts[range].iter().all(|&c| c == 0);
    let mut events = Vec::new();
    for loser in series {
        for t in threshold..loser.counts.len() {
            if loser.counts[t] != 0 || loser.counts[t - 1] == 0 {
                continue;
            }
            let after = t..t + threshold;
            if after.end > loser.counts.len() || !present(loser, t - threshold..t) || !absent(loser, after.clone()) {
                continue;
            }
            for winner in series {
                if winner.program == loser.program {
                    continue;
                }
                if present(winner, t - threshold..t) && present(winner, after.clone()) {
                    events.push(Exclusion {
                        winner: winner.program.clone(),
                        loser: loser.program.clone(),
                        step: steps[t],
                    });
                }
            }
        }
    }
    events
}

/// Analysis settings applied to a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryOptions {
    /// Fraction of the run treated as steady state.
    pub steady_window: f64,
    /// Fraction of the run searched for the initial minimum.
    pub viability_horizon: f64,
    pub viability_rule: ViabilityRule,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { steady_window: 0.2, viability_horizon: 0.1, viability_rule: ViabilityRule::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config: SimConfig,
    pub predicted_k: u64,
    pub steady_mean_population: f64,
    pub realized_k: f64,
    pub viability_fraction: f64,
    pub steady_cv: f64,
}

impl RunSummary {
    /// `populations[s]` is the census population at step `s`, starting at 0.
    /// A run that went extinct stops early; the missing steps up to
    /// `max_steps` count as empty.
    pub fn new(
        config: &SimConfig,
        populations: &[f64],
        founders: &FounderLedger,
        options: &SummaryOptions,
    ) -> Result<Self, MetricsError> {
        let predicted = predicted_k(config)?;
        let full = config.max_steps.saturating_add(1).min(usize::MAX as u64) as usize;
        let padded;
        let populations = if populations.len() < full && populations.last() == Some(&0.0) {
            padded = [populations, &vec![0.0; full - populations.len()]].concat();
            &padded[..]
        } else {
            populations
        };
        let tail = steady_tail(populations, options.steady_window)?;
        let steady_mean_population = mean(tail);
        Ok(RunSummary {
            config: config.clone(),
            predicted_k: predicted,
            steady_mean_population,
            realized_k: if predicted > 0 { steady_mean_population / predicted as f64 } else { 0.0 },
            viability_fraction: viability_fraction(
                populations,
                founders,
                options.viability_horizon,
                options.viability_rule,
            ),
            steady_cv: coefficient_of_variation(tail),
        })
    }
}
