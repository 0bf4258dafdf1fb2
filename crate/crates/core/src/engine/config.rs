use thiserror::Error;

use super::mutation::MutationMode;
use crate::genome::Genome;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{key} must be {requirement}, got {value}")]
    OutOfRange { key: &'static str, requirement: &'static str, value: String },
    #[error("initial population {population} does not fit on {cells} cells")]
    Overcrowded { population: usize, cells: usize },
    #[error("seeded genome {genome} has its instruction pointer outside the program")]
    SeedPointer { genome: String },
}

/// Every free parameter of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Instructions an agent may execute per action cycle.
    pub compute_capacity: u32,
    /// Reproduction succeeds with probability `1 / infertility`.
    pub infertility: u32,
    /// Surplus destroyed by a successful reproduction.
    pub birth_cost: f64,
    /// Minimum age (in cycles) before reproducing; newborns act in their
    /// birth cycle only when this is zero.
    pub puberty: u32,
    /// Resource cost of each move, or of an idle cycle.
    pub metabolism: f64,
    pub mu: f64,
    pub mutation_mode: MutationMode,
    pub initial_population: usize,
    /// Surplus given to founders and newborns.
    pub initial_endowment: f64,
    pub max_steps: u64,
    pub width: u32,
    pub height: u32,
    pub capacity: f64,
    pub regrowth: f64,
    pub vision: u8,
    pub rng_seed: u64,
    /// Agents that never moved in a cycle forage their own cell before paying
    /// metabolism. When off they only pay.
    pub idle_forage: bool,
    /// Clear the sighting registers after a successful move.
    pub reset_on_move: bool,
    /// Founder genomes, assigned round-robin. Empty means random programs.
    pub initial_genomes: Vec<Genome>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            compute_capacity: 1,
            infertility: 1,
            birth_cost: 0.0,
            puberty: 0,
            metabolism: 1.0,
            mu: 30.0,
            mutation_mode: MutationMode::PerProgram,
            initial_population: 400,
            initial_endowment: 0.0,
            max_steps: 10_000,
            width: 30,
            height: 30,
            capacity: 4.0,
            regrowth: 1.0,
            vision: 9,
            rng_seed: 1,
            idle_forage: true,
            reset_on_move: true,
            initial_genomes: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn cell_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, requirement: &'static str, value: impl ToString) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { key, requirement, value: value.to_string() })
            }
        }
        check(self.compute_capacity >= 1, "compute_capacity", ">= 1", self.compute_capacity)?;
        check(self.infertility >= 1, "infertility", ">= 1", self.infertility)?;
        check(self.mu >= 1.0 && self.mu.is_finite(), "mu", ">= 1", self.mu)?;
        check(self.birth_cost >= 0.0 && self.birth_cost.is_finite(), "birth_cost", ">= 0", self.birth_cost)?;
        check(self.metabolism >= 0.0 && self.metabolism.is_finite(), "metabolism", ">= 0", self.metabolism)?;
        check(
            self.initial_endowment >= 0.0 && self.initial_endowment.is_finite(),
            "initial_endowment",
            ">= 0",
            self.initial_endowment,
        )?;
        check(self.width >= 1, "width", ">= 1", self.width)?;
        check(self.height >= 1, "height", ">= 1", self.height)?;
        check(self.capacity >= 0.0 && self.capacity.is_finite(), "capacity", ">= 0", self.capacity)?;
        check(self.regrowth >= 0.0 && self.regrowth.is_finite(), "regrowth", ">= 0", self.regrowth)?;
        check((1..=9).contains(&self.vision), "vision", "in 1..=9", self.vision)?;
        if self.initial_population > self.cell_count() {
            return Err(ConfigError::Overcrowded { population: self.initial_population, cells: self.cell_count() });
        }
        for g in &self.initial_genomes {
            if !g.initial_registers.points_into(&g.program) {
                return Err(ConfigError::SeedPointer { genome: g.serialize() });
            }
        }
        Ok(())
    }
}
