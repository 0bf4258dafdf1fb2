//! Agent lifecycle and the action cycle.
//!
//! Each cycle every living agent, in a fresh random order, executes up to
//! `compute_capacity` instructions from its program. Foraging and metabolism
//! happen on successful moves; an agent that never moved forages its own cell
//! and pays once at the end of its burst. Agents whose surplus drops below
//! zero are removed on the spot. Newborns join the current cycle's queue
//! when puberty is zero; their own offspring wait for the next cycle.

mod config;
mod mutation;

use std::io;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use thiserror::Error;

pub use config::{ConfigError, SimConfig};
pub use mutation::{mutate, Mutation, MutationMode};

use crate::genome::{Direction, Genome, Instruction, Program, RegisterFile};
use crate::landscape::{AgentId, Landscape, Position};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub position: Position,
    pub surplus: f64,
    /// Completed action cycles.
    pub age: u32,
    pub genome: Genome,
    pub registers: RegisterFile,
    pub offspring: u32,
    /// Whether a move already charged metabolism this cycle.
    pub moved_this_cycle: bool,
    /// Step at which the agent first appears in the census.
    pub birth_step: u64,
}

impl Agent {
    pub fn program(&self) -> &Program {
        &self.genome.program
    }
}

/// What one instruction did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effect {
    Sighted { direction: Direction, distance: u8, resource: u8 },
    NothingBetter,
    Moved { to: Position, harvested: f64 },
    Blocked,
    Born { child: AgentId, at: Position },
    Barren,
}

/// Counters for the most recent action cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CycleStats {
    pub births: u64,
    pub deaths: u64,
    /// Age of every agent that died, in death order.
    pub death_ages: Vec<u32>,
    pub instructions: u64,
    /// Most instructions any single agent executed.
    pub max_burst: u32,
    pub harvested: f64,
    pub regrown: f64,
}

/// Birth and death record of the founding cohort, indexed by founder id.
///
/// Times are the step number at which the event first shows in the census,
/// so an event during the cycle that produces step `s` is stamped `s`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FounderLedger {
    pub first_birth: Vec<Option<u64>>,
    pub death: Vec<Option<u64>>,
}

impl FounderLedger {
    fn new(n: usize) -> Self {
        FounderLedger { first_birth: vec![None; n], death: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.death.len()
    }

    pub fn is_empty(&self) -> bool {
        self.death.is_empty()
    }

    pub fn alive_at(&self, founder: usize, step: u64) -> bool {
        self.death[founder].is_none_or(|d| d > step)
    }

    pub fn reproduced_by(&self, founder: usize, step: u64) -> bool {
        self.first_birth[founder].is_some_and(|b| b <= step)
    }

    pub fn ever_reproduced(&self, founder: usize) -> bool {
        self.first_birth[founder].is_some()
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("observer failed: {0}")]
    Observer(#[from] io::Error),
}

/// Receives a read-only view of the world after initialisation and after
/// every action cycle.
pub trait Observer {
    fn observe(&mut self, world: &World) -> io::Result<()>;
}

impl<F: FnMut(&World) -> io::Result<()>> Observer for F {
    fn observe(&mut self, world: &World) -> io::Result<()> {
        self(world)
    }
}

#[derive(Debug, Clone)]
pub struct World {
    config: SimConfig,
    landscape: Landscape,
    slots: Vec<Option<Agent>>,
    free_slots: Vec<usize>,
    population: usize,
    next_id: u64,
    step: u64,
    rng: SimRng,
    founders: FounderLedger,
    stats: CycleStats,
    nursery: Vec<Agent>,
}

impl World {
    /// Fresh world: landscape at capacity and the founding population on
    /// distinct random cells.
    pub fn new(config: SimConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut rng = rng::seeded(config.rng_seed);
        let mut landscape = Landscape::new(config.width, config.height, config.capacity, config.regrowth);
        let n = config.initial_population;
        let cells = index::sample(&mut rng, landscape.cell_count(), n);
        let mut slots = Vec::with_capacity(n);
        for (i, cell) in cells.into_iter().enumerate() {
            let position = Position::new(cell as u32 % config.width, cell as u32 / config.width);
            let genome = if config.initial_genomes.is_empty() {
                Genome::new(Program::random(&mut rng))
            } else {
                config.initial_genomes[i % config.initial_genomes.len()].clone()
            };
            let id = AgentId(i as u64);
            landscape.place(id, position).expect("sampled cells are distinct");
            slots.push(Some(Agent {
                id,
                position,
                surplus: config.initial_endowment,
                age: 0,
                registers: genome.initial_registers,
                genome,
                offspring: 0,
                moved_this_cycle: false,
                birth_step: 0,
            }));
        }
        Ok(World {
            landscape,
            slots,
            free_slots: Vec::new(),
            population: n,
            next_id: n as u64,
            step: 0,
            rng,
            founders: FounderLedger::new(n),
            stats: CycleStats::default(),
            nursery: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn landscape(&self) -> &Landscape {
        &self.landscape
    }

    pub fn landscape_mut(&mut self) -> &mut Landscape {
        &mut self.landscape
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.slots.iter().flatten()
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agents().find(|a| a.id == id)
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Option<&mut Agent> {
        self.slots.iter_mut().flatten().find(|a| a.id == id)
    }

    pub fn founders(&self) -> &FounderLedger {
        &self.founders
    }

    pub fn last_cycle(&self) -> &CycleStats {
        &self.stats
    }

    /// Add an agent outside the normal birth path (tests, hand-built scenarios).
    pub fn spawn(&mut self, genome: Genome, position: Position, surplus: f64) -> Result<AgentId, crate::landscape::LandscapeError> {
        let id = AgentId(self.next_id);
        self.landscape.place(id, position)?;
        self.next_id += 1;
        let agent = Agent {
            id,
            position,
            surplus,
            age: 0,
            registers: genome.initial_registers,
            genome,
            offspring: 0,
            moved_this_cycle: false,
            birth_step: self.step,
        };
        self.insert(agent);
        Ok(id)
    }

    fn insert(&mut self, agent: Agent) -> usize {
        self.population += 1;
        match self.free_slots.pop() {
            Some(slot) => {
                self.slots[slot] = Some(agent);
                slot
            }
            None => {
                self.slots.push(Some(agent));
                self.slots.len() - 1
            }
        }
    }

    /// One full action cycle.
    pub fn action_cycle(&mut self) {
        self.stats = CycleStats { death_ages: std::mem::take(&mut self.stats.death_ages), ..Default::default() };
        self.stats.death_ages.clear();

        let mut queue: Vec<usize> = (0..self.slots.len()).filter(|&s| self.slots[s].is_some()).collect();
        queue.shuffle(&mut self.rng);
        let mut next = 0;
        while next < queue.len() {
            let slot = queue[next];
            next += 1;
            self.activate(slot, &mut queue);
        }

        self.stats.regrown = self.landscape.regrow();
        self.step += 1;
        for agent in self.slots.iter_mut().flatten() {
            agent.age += 1;
        }
    }

    fn activate(&mut self, slot: usize, queue: &mut Vec<usize>) {
        let mut agent = self.slots[slot].take().expect("queued agents are alive");
        agent.moved_this_cycle = false;
        // only first-generation newborns join the running cycle, otherwise a
        // free, certain birth could chain forever
        let queue_offspring = self.config.puberty == 0 && agent.birth_step <= self.step;
        let capacity = self.config.compute_capacity;
        let mut executed = 0;
        while executed < capacity && agent.surplus >= 0.0 {
            let op = agent
                .registers
                .fetch_advance(&agent.genome.program)
                .expect("instruction pointer stays inside the program");
            executed += 1;
            self.execute(&mut agent, op);
        }
        self.stats.instructions += u64::from(executed);
        self.stats.max_burst = self.stats.max_burst.max(executed);

        if !agent.moved_this_cycle {
            let foraged = if self.config.idle_forage { self.forage(agent.position) } else { 0.0 };
            agent.surplus += foraged - self.config.metabolism;
        }

        if agent.surplus < 0.0 {
            self.bury(agent);
            self.free_slots.push(slot);
        } else {
            self.slots[slot] = Some(agent);
        }

        let newborns = std::mem::take(&mut self.nursery);
        for child in newborns {
            let s = self.insert(child);
            if queue_offspring {
                queue.push(s);
            }
        }
    }

    fn bury(&mut self, agent: Agent) {
        self.landscape.vacate(agent.id, agent.position).expect("occupancy tracks agents");
        self.population -= 1;
        self.stats.deaths += 1;
        self.stats.death_ages.push(agent.age);
        if let Some(slot) = self.founders.death.get_mut(agent.id.0 as usize) {
            *slot = Some(self.step + 1);
        }
    }

    fn forage(&mut self, at: Position) -> f64 {
        let amount = self.landscape.harvest(at);
        self.stats.harvested += amount;
        amount
    }

    fn execute(&mut self, agent: &mut Agent, op: Instruction) -> Effect {
        match op {
            Instruction::Look(direction) => {
                let r = &mut agent.registers;
                match self.landscape.scan(agent.position, direction, self.config.vision, f64::from(r.best_res)) {
                    Some((distance, amount)) => {
                        let resource = amount.min(9.0) as u8;
                        r.best_dir = Some(direction);
                        r.best_dist = distance;
                        r.best_res = resource;
                        Effect::Sighted { direction, distance, resource }
                    }
                    None => Effect::NothingBetter,
                }
            }
            Instruction::Move => {
                let (direction, distance) = match agent.registers.best_dir {
                    Some(d) => (d, u32::from(agent.registers.best_dist)),
                    None => (
                        Direction::ALL[self.rng.gen_range(0..4)],
                        self.rng.gen_range(1..=u32::from(self.config.vision)),
                    ),
                };
                let moved = self
                    .landscape
                    .move_agent(agent.id, agent.position, direction, distance)
                    .expect("occupancy tracks agents");
                match moved {
                    Some(to) => {
                        agent.position = to;
                        let harvested = self.forage(to);
                        agent.surplus += harvested - self.config.metabolism;
                        agent.moved_this_cycle = true;
                        if self.config.reset_on_move {
                            agent.registers.clear_sighting();
                        }
                        Effect::Moved { to, harvested }
                    }
                    None => Effect::Blocked,
                }
            }
            Instruction::Reproduce => self.reproduce(agent),
        }
    }

    fn reproduce(&mut self, parent: &mut Agent) -> Effect {
        let cfg = &self.config;
        if parent.age < cfg.puberty || parent.surplus < cfg.birth_cost {
            return Effect::Barren;
        }
        if cfg.infertility > 1 && self.rng.gen_range(0..cfg.infertility) != 0 {
            return Effect::Barren;
        }
        let Some(at) = self.landscape.empty_neighbor(parent.position, &mut self.rng) else {
            return Effect::Barren;
        };
        let program = mutate(&parent.genome.program, cfg.mutation_mode, cfg.mu, &mut self.rng);
        let child = AgentId(self.next_id);
        self.next_id += 1;
        self.landscape.place(child, at).expect("empty neighbour is free");
        parent.surplus -= cfg.birth_cost;
        parent.offspring += 1;
        self.stats.births += 1;
        if let Some(first) = self.founders.first_birth.get_mut(parent.id.0 as usize) {
            first.get_or_insert(self.step + 1);
        }
        self.nursery.push(Agent {
            id: child,
            position: at,
            surplus: cfg.initial_endowment,
            age: 0,
            genome: Genome::new(program),
            registers: RegisterFile::default(),
            offspring: 0,
            moved_this_cycle: false,
            birth_step: self.step + 1,
        });
        Effect::Born { child, at }
    }

    /// Execute a single instruction for agent `id` outside the action cycle.
    /// Offspring are added to the world but do not act. Returns `None` if
    /// the agent does not exist.
    pub fn exec_instruction(&mut self, id: AgentId, op: Instruction) -> Option<Effect> {
        let slot = self.slots.iter().position(|s| s.as_ref().is_some_and(|a| a.id == id))?;
        let mut agent = self.slots[slot].take().expect("slot found above");
        let effect = self.execute(&mut agent, op);
        self.slots[slot] = Some(agent);
        for child in std::mem::take(&mut self.nursery) {
            self.insert(child);
        }
        Some(effect)
    }
}

/// Run to `max_steps` or extinction, notifying observers after
/// initialisation and after every cycle.
pub fn run(config: SimConfig, observers: &mut [&mut dyn Observer]) -> Result<World, RunError> {
    let mut world = World::new(config)?;
    for o in observers.iter_mut() {
        o.observe(&world)?;
    }
    while world.step < world.config.max_steps && world.population > 0 {
        world.action_cycle();
        for o in observers.iter_mut() {
            o.observe(&world)?;
        }
    }
    Ok(world)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn genome(program: &str) -> Genome {
        Genome::new(program.parse().unwrap())
    }

    /// Empty world of the given size with no founders.
    fn bare(width: u32, height: u32, tweak: impl FnOnce(&mut SimConfig)) -> World {
        let mut c = SimConfig { width, height, initial_population: 0, ..Default::default() };
        tweak(&mut c);
        World::new(c).unwrap()
    }

    fn drain(world: &mut World) {
        let cells: Vec<Position> = world.landscape().cells().map(|(p, _)| p).collect();
        for p in cells {
            world.landscape_mut().set_resource(p, 0.0);
        }
    }

    #[test]
    fn starving_mover_dies() {
        let mut w = bare(5, 5, |c| c.regrowth = 0.0);
        drain(&mut w);
        w.spawn(genome("M"), Position::new(2, 2), 0.0).unwrap();
        w.action_cycle();
        assert_eq!(w.population(), 0);
        assert_eq!(w.last_cycle().deaths, 1);
        assert_eq!(w.landscape().occupied_count(), 0);
    }

    #[test]
    fn idle_agent_forages_own_cell() {
        let mut w = bare(5, 5, |_| {});
        let id = w.spawn(genome("U"), Position::new(2, 2), 0.0).unwrap();
        w.action_cycle();
        assert_eq!(w.agent(id).unwrap().surplus, 3.0);
    }

    #[test]
    fn idle_without_forage_only_pays() {
        let mut w = bare(5, 5, |c| c.idle_forage = false);
        let id = w.spawn(genome("U"), Position::new(2, 2), 2.0).unwrap();
        w.action_cycle();
        assert_eq!(w.agent(id).unwrap().surplus, 1.0);
        assert_eq!(w.landscape().resource(Position::new(2, 2)), 4.0);
    }

    #[test]
    fn empty_world_still_ticks() {
        let mut w = bare(4, 4, |_| {});
        w.landscape_mut().set_resource(Position::new(0, 0), 0.0);
        w.action_cycle();
        assert_eq!(w.step(), 1);
        assert_eq!(w.population(), 0);
        assert_eq!(w.landscape().resource(Position::new(0, 0)), 1.0);
    }

    #[test]
    fn reproduce_free_and_certain() {
        for seed in 0..20 {
            let mut w = bare(5, 5, |c| c.rng_seed = seed);
            let parent = w.spawn(genome("XM"), Position::new(2, 2), 0.0).unwrap();
            for (x, y) in [(2, 1), (2, 3), (1, 2)] {
                w.spawn(genome("M"), Position::new(x, y), 0.0).unwrap();
            }
            let effect = w.exec_instruction(parent, Instruction::Reproduce).unwrap();
            assert_eq!(effect, Effect::Born { child: AgentId(4), at: Position::new(3, 2) });
            assert_eq!(w.agent(parent).unwrap().surplus, 0.0);
            assert_eq!(w.population(), 5);
        }
    }

    #[test]
    fn reproduce_respects_cost_and_room() {
        let mut w = bare(5, 5, |c| c.birth_cost = 2.0);
        let parent = w.spawn(genome("X"), Position::new(2, 2), 1.5).unwrap();
        assert_eq!(w.exec_instruction(parent, Instruction::Reproduce), Some(Effect::Barren));
        w.agent_mut(parent).unwrap().surplus = 2.5;
        assert!(matches!(w.exec_instruction(parent, Instruction::Reproduce), Some(Effect::Born { .. })));
        assert_eq!(w.agent(parent).unwrap().surplus, 0.5);
        assert_eq!(w.agent(parent).unwrap().offspring, 1);

        let mut w = bare(3, 3, |_| {});
        let p = w.spawn(genome("X"), Position::new(1, 1), 0.0).unwrap();
        for (x, y) in [(1, 0), (1, 2), (0, 1), (2, 1)] {
            w.spawn(genome("M"), Position::new(x, y), 0.0).unwrap();
        }
        assert_eq!(w.exec_instruction(p, Instruction::Reproduce), Some(Effect::Barren));
    }

    #[test]
    fn puberty_blocks_young_parents() {
        let mut w = bare(5, 5, |c| c.puberty = 2);
        let p = w.spawn(genome("X"), Position::new(2, 2), 0.0).unwrap();
        assert_eq!(w.exec_instruction(p, Instruction::Reproduce), Some(Effect::Barren));
        w.agent_mut(p).unwrap().age = 2;
        assert!(matches!(w.exec_instruction(p, Instruction::Reproduce), Some(Effect::Born { .. })));
    }

    #[test]
    fn move_to_sighted_cell() {
        let mut w = bare(10, 10, |_| {});
        drain(&mut w);
        w.landscape_mut().set_resource(Position::new(5, 3), 3.0);
        let id = w.spawn(genome("M"), Position::new(3, 3), 0.0).unwrap();
        w.agent_mut(id).unwrap().registers =
            RegisterFile { next: 5, best_dir: Some(Direction::Right), best_dist: 2, best_res: 3 };
        let effect = w.exec_instruction(id, Instruction::Move).unwrap();
        assert_eq!(effect, Effect::Moved { to: Position::new(5, 3), harvested: 3.0 });
        let a = w.agent(id).unwrap();
        assert_eq!(a.surplus, 2.0);
        assert_eq!((a.registers.best_dir, a.registers.best_dist, a.registers.best_res), (None, 0, 0));
        assert!(a.moved_this_cycle);
    }

    #[test]
    fn blocked_move_changes_nothing() {
        let mut w = bare(10, 10, |_| {});
        let id = w.spawn(genome("M"), Position::new(3, 3), 1.0).unwrap();
        w.spawn(genome("M"), Position::new(5, 3), 0.0).unwrap();
        let regs = RegisterFile { next: 5, best_dir: Some(Direction::Right), best_dist: 2, best_res: 3 };
        w.agent_mut(id).unwrap().registers = regs;
        assert_eq!(w.exec_instruction(id, Instruction::Move), Some(Effect::Blocked));
        let a = w.agent(id).unwrap();
        assert_eq!((a.position, a.surplus, a.registers), (Position::new(3, 3), 1.0, regs));
    }

    #[test]
    fn look_only_improves() {
        let mut w = bare(10, 10, |_| {});
        drain(&mut w);
        w.landscape_mut().set_resource(Position::new(3, 1), 2.0);
        let id = w.spawn(genome("U"), Position::new(3, 3), 0.0).unwrap();
        assert_eq!(
            w.exec_instruction(id, Instruction::Look(Direction::Up)),
            Some(Effect::Sighted { direction: Direction::Up, distance: 2, resource: 2 })
        );
        // nothing richer than 2 in any direction now
        for d in Direction::ALL {
            assert_eq!(w.exec_instruction(id, Instruction::Look(d)), Some(Effect::NothingBetter));
        }
        let r = w.agent(id).unwrap().registers;
        assert_eq!((r.best_dir, r.best_dist, r.best_res), (Some(Direction::Up), 2, 2));
    }

    #[test]
    fn newborns_act_in_birth_cycle_when_puberty_zero() {
        // parent X then M into a drained landscape; child does the same and dies
        let mut w = bare(7, 1, |c| {
            c.regrowth = 0.0;
            c.compute_capacity = 1;
        });
        drain(&mut w);
        w.spawn(genome("X"), Position::new(0, 0), 0.0).unwrap();
        w.action_cycle();
        // parent and child each reproduce and starve; the grandchild waits
        assert_eq!(w.last_cycle().births, 2);
        assert_eq!(w.last_cycle().deaths, 2);
        assert_eq!(w.last_cycle().death_ages, [0, 0]);
        assert_eq!(w.population(), 1);
    }

    #[test]
    fn newborns_wait_when_puberty_positive() {
        let mut w = bare(7, 7, |c| c.puberty = 1);
        let p = w.spawn(genome("X"), Position::new(3, 3), 0.0).unwrap();
        w.agent_mut(p).unwrap().age = 1;
        w.action_cycle();
        assert_eq!(w.last_cycle().births, 1);
        assert_eq!(w.population(), 2);
        assert_eq!(w.last_cycle().instructions, 1);
        let child = w.agents().find(|a| a.id != p).unwrap();
        assert_eq!((child.age, child.surplus), (1, 0.0));
    }

    #[test]
    fn init_places_distinct_founders() {
        let w = World::new(SimConfig::default()).unwrap();
        assert_eq!(w.population(), 400);
        assert_eq!(w.landscape().occupied_count(), 400);
        let a = World::new(SimConfig::default()).unwrap();
        let snapshot = |w: &World| w.agents().map(|a| (a.position, a.genome.serialize())).collect::<Vec<_>>();
        assert_eq!(snapshot(&w), snapshot(&a));
        let other = World::new(SimConfig { rng_seed: 2, ..Default::default() }).unwrap();
        let mut g1: Vec<String> = w.agents().map(|a| a.genome.serialize()).collect();
        let mut g2: Vec<String> = other.agents().map(|a| a.genome.serialize()).collect();
        g1.sort();
        g2.sort();
        assert_ne!(g1, g2);
        assert!(w.agents().all(|a| a.landscape_ok(w.landscape())));
    }

    #[test]
    fn init_rejects_overcrowding() {
        let c = SimConfig { width: 10, height: 10, initial_population: 400, ..Default::default() };
        assert!(matches!(World::new(c), Err(ConfigError::Overcrowded { .. })));
    }

    #[test]
    fn seeded_founders_round_robin() {
        let c = SimConfig {
            initial_population: 5,
            initial_genomes: vec![genome("XM"), genome("XMM")],
            ..Default::default()
        };
        let w = World::new(c).unwrap();
        let progs: Vec<String> = w.agents().map(|a| a.program().to_string()).collect();
        assert_eq!(progs, ["XM", "XMM", "XM", "XMM", "XM"]);
    }

    #[test]
    fn run_zero_steps_is_initial_world() {
        let c = SimConfig { max_steps: 0, ..Default::default() };
        let mut calls = 0;
        let mut obs = |_: &World| -> io::Result<()> {
            calls += 1;
            Ok(())
        };
        let w = run(c.clone(), &mut [&mut obs]).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(w.step(), 0);
        let fresh = World::new(c).unwrap();
        assert!(w.agents().eq(fresh.agents()));
    }

    #[test]
    fn observer_errors_propagate() {
        let mut failing = |_: &World| -> io::Result<()> { Err(io::Error::other("disk full")) };
        let err = run(SimConfig::default(), &mut [&mut failing]).unwrap_err();
        assert!(matches!(err, RunError::Observer(_)));
    }

    impl Agent {
        fn landscape_ok(&self, l: &Landscape) -> bool {
            l.occupant(self.position) == Some(self.id)
        }
    }
}
