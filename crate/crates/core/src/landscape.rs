//! Flat toroidal landscape of renewing resources.

use rand::Rng;
use thiserror::Error;

use crate::genome::Direction;

/// Identifier of a living agent, unique for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub x: u32,
    pub y: u32,
}

impl Position {
    pub fn new(x: u32, y: u32) -> Self {
        Position { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LandscapeError {
    #[error("agent {id:?} is not at {at:?}")]
    NotAt { id: AgentId, at: Position },
    #[error("cell {0:?} is already occupied")]
    Occupied(Position),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub resource: f64,
    pub occupant: Option<AgentId>,
}

/// Uniform grid: every cell shares one capacity and one regrowth rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    width: u32,
    height: u32,
    capacity: f64,
    regrowth: f64,
    cells: Vec<Cell>,
}

impl Landscape {
    /// A landscape with every cell at full capacity.
    pub fn new(width: u32, height: u32, capacity: f64, regrowth: f64) -> Self {
        assert!(width > 0 && height > 0, "landscape must have at least one cell");
        let cell = Cell { resource: capacity, occupant: None };
        Landscape { width, height, capacity, regrowth, cells: vec![cell; (width * height) as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn regrowth(&self) -> f64 {
        self.regrowth
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn index(&self, p: Position) -> usize {
        (p.y * self.width + p.x) as usize
    }

    pub fn cell(&self, p: Position) -> &Cell {
        &self.cells[self.index(p)]
    }

    pub fn cells(&self) -> impl Iterator<Item = (Position, &Cell)> {
        let w = self.width;
        self.cells.iter().enumerate().map(move |(i, c)| (Position::new(i as u32 % w, i as u32 / w), c))
    }

    pub fn resource(&self, p: Position) -> f64 {
        self.cell(p).resource
    }

    pub fn set_resource(&mut self, p: Position, amount: f64) {
        let i = self.index(p);
        self.cells[i].resource = amount.clamp(0.0, self.capacity);
    }

    pub fn occupant(&self, p: Position) -> Option<AgentId> {
        self.cell(p).occupant
    }

    pub fn is_free(&self, p: Position) -> bool {
        self.cell(p).occupant.is_none()
    }

    pub fn total_resource(&self) -> f64 {
        self.cells.iter().map(|c| c.resource).sum()
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.occupant.is_some()).count()
    }

    /// Cell reached by walking `distance` steps along `dir`, wrapping at the edges.
    pub fn offset(&self, from: Position, dir: Direction, distance: u32) -> Position {
        let (dx, dy) = dir.delta();
        let d = i64::from(distance);
        let x = (i64::from(from.x) + dx * d).rem_euclid(i64::from(self.width));
        let y = (i64::from(from.y) + dy * d).rem_euclid(i64::from(self.height));
        Position::new(x as u32, y as u32)
    }

    /// Add one step of regrowth to every cell, saturating at capacity.
    /// Returns the amount actually added.
    pub fn regrow(&mut self) -> f64 {
        let (cap, rate) = (self.capacity, self.regrowth);
        let mut added = 0.0;
        for c in &mut self.cells {
            let next = (c.resource + rate).min(cap);
            added += next - c.resource;
            c.resource = next;
        }
        added
    }

    /// Richest cell within `vision` steps along `dir`, nearest first on ties.
    /// Absent unless its resource is strictly above `threshold`.
    pub fn scan(&self, origin: Position, dir: Direction, vision: u8, threshold: f64) -> Option<(u8, f64)> {
        let mut best: Option<(u8, f64)> = None;
        for d in 1..=vision {
            let r = self.resource(self.offset(origin, dir, u32::from(d)));
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((d, r));
            }
        }
        best.filter(|&(_, r)| r > threshold)
    }

    pub fn place(&mut self, id: AgentId, at: Position) -> Result<(), LandscapeError> {
        let i = self.index(at);
        if self.cells[i].occupant.is_some() {
            return Err(LandscapeError::Occupied(at));
        }
        self.cells[i].occupant = Some(id);
        Ok(())
    }

    pub fn vacate(&mut self, id: AgentId, at: Position) -> Result<(), LandscapeError> {
        let i = self.index(at);
        if self.cells[i].occupant != Some(id) {
            return Err(LandscapeError::NotAt { id, at });
        }
        self.cells[i].occupant = None;
        Ok(())
    }

    /// Move `id` from `from` by `distance` along `dir` if the target is free.
    /// A zero-length move (or one that wraps back onto `from`) always succeeds.
    pub fn move_agent(
        &mut self,
        id: AgentId,
        from: Position,
        dir: Direction,
        distance: u32,
    ) -> Result<Option<Position>, LandscapeError> {
        if self.occupant(from) != Some(id) {
            return Err(LandscapeError::NotAt { id, at: from });
        }
        let target = self.offset(from, dir, distance);
        if target == from {
            return Ok(Some(from));
        }
        if !self.is_free(target) {
            return Ok(None);
        }
        let (fi, ti) = (self.index(from), self.index(target));
        self.cells[fi].occupant = None;
        self.cells[ti].occupant = Some(id);
        Ok(Some(target))
    }

    /// Take the whole resource stock of a cell.
    pub fn harvest(&mut self, at: Position) -> f64 {
        let i = self.index(at);
        std::mem::take(&mut self.cells[i].resource)
    }

    /// A uniformly chosen free von Neumann neighbour, if any.
    pub fn empty_neighbor<R: Rng + ?Sized>(&self, at: Position, rng: &mut R) -> Option<Position> {
        let mut free = [at; 4];
        let mut n = 0;
        for dir in Direction::ALL {
            let p = self.offset(at, dir, 1);
            if p != at && self.is_free(p) && !free[..n].contains(&p) {
                free[n] = p;
                n += 1;
            }
        }
        match n {
            0 => None,
            1 => Some(free[0]),
            _ => Some(free[rng.gen_range(0..n)]),
        }
    }
}
