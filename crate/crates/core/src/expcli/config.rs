//! Flat `key=value` experiment files.
//!
//! One assignment per line, `#` starts a comment. A comma-separated value
//! sweeps that key; the run set is the cross product of all swept keys (in
//! file order, first key slowest) times `replicates`. Every SimConfig field
//! is a key, plus the harness keys `replicates`, `genotype_every`,
//! `steady_window`, `viability_horizon` and `viability_rule`.

use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::{ConfigError, MutationMode, SimConfig};
use crate::genome::Genome;
use crate::metrics::{SummaryOptions, ViabilityRule};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {0:?} is set twice")]
    Duplicate(String),
    #[error("{key}: cannot use {value:?}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0} takes a single value")]
    NotSweepable(String),
    #[error("a single run cannot sweep {0}")]
    Swept(String),
    #[error("run {run}: {source}")]
    Invalid {
        run: usize,
        #[source]
        source: ConfigError,
    },
}

/// A list of values for one swept key, kept as text and applied per run.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Values of every unswept key. `base.rng_seed` is the sweep's root seed.
    pub base: SimConfig,
    pub swept: Vec<Axis>,
    /// Runs per swept combination.
    pub replicates: u32,
    /// Genotype census is written every this many steps.
    pub genotype_every: u64,
    pub analysis: SummaryOptions,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            base: SimConfig::default(),
            swept: Vec::new(),
            replicates: 1,
            genotype_every: 10,
            analysis: SummaryOptions::default(),
        }
    }
}

/// One fully determined run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub index: usize,
    /// Seed actually used; also stored in `config.rng_seed`.
    pub seed: u64,
    pub config: SimConfig,
}

const HARNESS_KEYS: [&str; 5] = ["replicates", "genotype_every", "steady_window", "viability_horizon", "viability_rule"];

pub fn parse_config(text: &str) -> Result<ExperimentSpec, SpecError> {
    let mut spec = ExperimentSpec::default();
    let mut seen: Vec<String> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SpecError::Syntax { line: n + 1, text: raw.to_string() });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(SpecError::Syntax { line: n + 1, text: raw.to_string() });
        }
        if seen.iter().any(|k| k == key) {
            return Err(SpecError::Duplicate(key.to_string()));
        }
        seen.push(key.to_string());
        spec.assign(key, value)?;
    }
    spec.validate()?;
    Ok(spec)
}

impl ExperimentSpec {
    /// Override one key, replacing any earlier value or sweep of it.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SpecError> {
        self.swept.retain(|a| a.key != key);
        self.assign(key, value)?;
        self.validate()
    }

    fn assign(&mut self, key: &str, value: &str) -> Result<(), SpecError> {
        if HARNESS_KEYS.contains(&key) {
            if value.contains(',') {
                return Err(SpecError::NotSweepable(key.to_string()));
            }
            return self.assign_harness(key, value);
        }
        if key != "initial_genomes" && value.contains(',') {
            let values: Vec<String> = value.split(',').map(|v| v.trim().to_string()).collect();
            // type-check every entry now so bad values surface at parse time
            let mut scratch = self.base.clone();
            for v in &values {
                assign_sim(&mut scratch, key, v)?;
            }
            self.swept.push(Axis { key: key.to_string(), values });
            return Ok(());
        }
        assign_sim(&mut self.base, key, value)
    }

    fn assign_harness(&mut self, key: &str, value: &str) -> Result<(), SpecError> {
        match key {
            "replicates" => self.replicates = parse(key, value)?,
            "genotype_every" => self.genotype_every = parse(key, value)?,
            "steady_window" => self.analysis.steady_window = parse(key, value)?,
            "viability_horizon" => self.analysis.viability_horizon = parse(key, value)?,
            "viability_rule" => {
                self.analysis.viability_rule = match value {
                    "by_minimum" => ViabilityRule::ReproducedByMinimum,
                    "eventually" => ViabilityRule::ReproducedEventually,
                    _ => return Err(bad(key, value, "expected by_minimum or eventually")),
                }
            }
            _ => unreachable!("harness key list and match disagree"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), SpecError> {
        if self.replicates == 0 {
            return Err(bad("replicates", "0", "must be at least 1"));
        }
        if self.genotype_every == 0 {
            return Err(bad("genotype_every", "0", "must be at least 1"));
        }
        for (key, w) in [("steady_window", self.analysis.steady_window), ("viability_horizon", self.analysis.viability_horizon)] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(bad(key, &w.to_string(), "must be in (0, 1]"));
            }
        }
        for plan in self.runs() {
            plan.config.validate().map_err(|source| SpecError::Invalid { run: plan.index, source })?;
            if plan.config.metabolism <= 0.0 {
                return Err(bad("metabolism", &plan.config.metabolism.to_string(), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn run_count(&self) -> usize {
        self.swept.iter().map(|a| a.values.len()).product::<usize>() * self.replicates as usize
    }

    /// Run `index`, with seed `derive_seed(rng_seed, index)`.
    pub fn plan(&self, index: usize) -> RunPlan {
        let mut config = self.base.clone();
        let mut rest = index / self.replicates as usize;
        for axis in self.swept.iter().rev() {
            let value = &axis.values[rest % axis.values.len()];
            rest /= axis.values.len();
            assign_sim(&mut config, &axis.key, value).expect("swept values are checked when parsed");
        }
        let seed = derive_seed(config.rng_seed, index as u64);
        config.rng_seed = seed;
        RunPlan { index, seed, config }
    }

    pub fn runs(&self) -> Vec<RunPlan> {
        (0..self.run_count()).map(|i| self.plan(i)).collect()
    }

    /// The configuration of a single unswept run, using `seed` verbatim
    /// (falling back to `rng_seed`).
    pub fn single(&self, seed: Option<u64>) -> Result<SimConfig, SpecError> {
        if let Some(axis) = self.swept.first() {
            return Err(SpecError::Swept(axis.key.clone()));
        }
        let mut config = self.base.clone();
        if let Some(s) = seed {
            config.rng_seed = s;
        }
        Ok(config)
    }
}

fn bad(key: &str, value: &str, reason: impl Display) -> SpecError {
    SpecError::Value { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, SpecError>
where
    T::Err: Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, SpecError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn assign_sim(c: &mut SimConfig, key: &str, value: &str) -> Result<(), SpecError> {
    match key {
        "compute_capacity" => c.compute_capacity = parse(key, value)?,
        "infertility" => c.infertility = parse(key, value)?,
        "birth_cost" => c.birth_cost = parse(key, value)?,
        "puberty" => c.puberty = parse(key, value)?,
        "metabolism" => c.metabolism = parse(key, value)?,
        "mu" => c.mu = parse(key, value)?,
        "mutation_mode" => c.mutation_mode = parse::<MutationMode>(key, value)?,
        "initial_population" => c.initial_population = parse(key, value)?,
        "initial_endowment" => c.initial_endowment = parse(key, value)?,
        "max_steps" => c.max_steps = parse(key, value)?,
        "width" => c.width = parse(key, value)?,
        "height" => c.height = parse(key, value)?,
        "capacity" => c.capacity = parse(key, value)?,
        "regrowth" => c.regrowth = parse(key, value)?,
        "vision" => c.vision = parse(key, value)?,
        "rng_seed" => c.rng_seed = parse(key, value)?,
        "idle_forage" => c.idle_forage = parse_bool(key, value)?,
        "reset_on_move" => c.reset_on_move = parse_bool(key, value)?,
        "initial_genomes" => {
            c.initial_genomes = value
                .split(',')
                .map(str::trim)
                .filter(|g| !g.is_empty())
                .map(|g| Genome::parse(g).map_err(|e| bad(key, g, e)))
                .collect::<Result<_, _>>()?;
        }
        _ => return Err(SpecError::UnknownKey(key.to_string())),
    }
    Ok(())
}
