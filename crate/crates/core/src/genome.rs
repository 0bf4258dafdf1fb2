//! Agent programs: opcodes, the register file, the 32-character genome codec
//! and instruction fetch.
//!
//! A serialized genome is laid out as
//!
//! ```text
//! 0         1         2         3
//! 01234567890123456789012345678901
//! 05Z00XMM........................
//! ^^ nextI (two decimal digits, 05..=31)
//!   ^ bDir (U, D, L, R or Z for "no data")
//!    ^ bDis (0..=9)
//!     ^ bRes (0..=9)
//!      ^^^^ program, up to 27 opcodes, tail padded with '.'
//! ```
//!
//! The instruction pointer `nextI` is an absolute string position, so the
//! first instruction lives at address 5.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayVec;
use rand::Rng;
use thiserror::Error;

/// Total length of a serialized genome.
pub const GENOME_CHARS: usize = 32;
/// Characters reserved for the register file at the start of the string.
pub const REGISTER_CHARS: usize = 5;
/// Program memory available to an agent.
pub const MAX_PROGRAM_LEN: usize = GENOME_CHARS - REGISTER_CHARS;
/// Address of the first instruction.
pub const FIRST_ADDRESS: u8 = REGISTER_CHARS as u8;
/// Filler for unused program memory.
pub const PAD: char = '.';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenomeError {
    #[error("genome must be exactly {GENOME_CHARS} characters, got {0}")]
    Length(usize),
    #[error("invalid register value {value:?} for {register}")]
    Register { register: &'static str, value: String },
    #[error("program region is empty")]
    EmptyProgram,
    #[error("invalid program character {ch:?} at position {position}")]
    Opcode { ch: char, position: usize },
    #[error("program is longer than {MAX_PROGRAM_LEN} instructions")]
    TooLong,
    #[error("instruction pointer {next} outside program of length {len}")]
    PointerOutOfRange { next: u8, len: usize },
}

/// One of the four compass directions used by look and move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn to_char(self) -> char {
        match self {
            Direction::Up => 'U',
            Direction::Down => 'D',
            Direction::Left => 'L',
            Direction::Right => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'U' => Some(Direction::Up),
            'D' => Some(Direction::Down),
            'L' => Some(Direction::Left),
            'R' => Some(Direction::Right),
            _ => None,
        }
    }

    /// Unit step as (dx, dy); `Up` decreases the row index.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }
}

/// The six agent opcodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instruction {
    /// Look in a direction for a richer cell.
    Look(Direction),
    /// Move along the remembered (or a random) heading.
    Move,
    /// Attempt to reproduce into a neighbouring cell.
    Reproduce,
}

impl Instruction {
    pub const ALL: [Instruction; 6] = [
        Instruction::Look(Direction::Up),
        Instruction::Look(Direction::Down),
        Instruction::Look(Direction::Left),
        Instruction::Look(Direction::Right),
        Instruction::Move,
        Instruction::Reproduce,
    ];

    pub fn to_char(self) -> char {
        match self {
            Instruction::Look(d) => d.to_char(),
            Instruction::Move => 'M',
            Instruction::Reproduce => 'X',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'M' => Some(Instruction::Move),
            'X' => Some(Instruction::Reproduce),
            _ => Direction::from_char(c).map(Instruction::Look),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..Self::ALL.len())]
    }

    /// A uniformly chosen opcode other than `self`.
    pub fn random_other<R: Rng + ?Sized>(self, rng: &mut R) -> Self {
        let others: ArrayVec<Instruction, 6> = Self::ALL.into_iter().filter(|&i| i != self).collect();
        others[rng.gen_range(0..others.len())]
    }
}

/// A linear program of 1..=27 instructions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program(ArrayVec<Instruction, MAX_PROGRAM_LEN>);

impl Program {
    pub fn new(instructions: &[Instruction]) -> Result<Self, GenomeError> {
        if instructions.is_empty() {
            return Err(GenomeError::EmptyProgram);
        }
        let ops = ArrayVec::try_from(instructions).map_err(|_| GenomeError::TooLong)?;
        Ok(Program(ops))
    }

    /// Random program: length uniform on 1..=27, opcodes uniform and independent.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let len = rng.gen_range(1..=MAX_PROGRAM_LEN);
        Program((0..len).map(|_| Instruction::random(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<Instruction> {
        self.0.get(index).copied()
    }

    pub fn contains(&self, op: Instruction) -> bool {
        self.0.contains(&op)
    }

    pub fn can_reproduce(&self) -> bool {
        self.contains(Instruction::Reproduce)
    }

    /// Replace the opcode at `index`. Panics if out of bounds.
    pub(crate) fn set(&mut self, index: usize, op: Instruction) {
        self.0[index] = op;
    }

    /// Insert before `index`; no-op when memory is full.
    pub(crate) fn insert(&mut self, index: usize, op: Instruction) -> bool {
        self.0.try_insert(index, op).is_ok()
    }

    /// Delete at `index`; refuses to empty the program.
    pub(crate) fn remove(&mut self, index: usize) -> bool {
        if self.0.len() <= 1 {
            return false;
        }
        self.0.remove(index);
        true
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.0 {
            write!(f, "{}", op.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = GenomeError;

    /// Parses a bare opcode string such as `"XMM"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ops = s
            .chars()
            .enumerate()
            .map(|(i, ch)| Instruction::from_char(ch).ok_or(GenomeError::Opcode { ch, position: i }))
            .collect::<Result<Vec<_>, _>>()?;
        Program::new(&ops)
    }
}

/// Per-agent registers: instruction pointer plus the best cell seen so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterFile {
    /// Absolute address of the next instruction, `5..=31`.
    pub next: u8,
    /// `None` is the 'Z' (no data) state.
    pub best_dir: Option<Direction>,
    pub best_dist: u8,
    pub best_res: u8,
}

impl Default for RegisterFile {
    fn default() -> Self {
        RegisterFile { next: FIRST_ADDRESS, best_dir: None, best_dist: 0, best_res: 0 }
    }
}

impl RegisterFile {
    /// Forget the best-seen cell, keeping the instruction pointer.
    pub fn clear_sighting(&mut self) {
        self.best_dir = None;
        self.best_dist = 0;
        self.best_res = 0;
    }

    /// Fetch the instruction at `next` and advance, wrapping to the first
    /// instruction after the last one. The pointer persists between calls,
    /// so long programs run across several action cycles.
    pub fn fetch_advance(&mut self, program: &Program) -> Result<Instruction, GenomeError> {
        let index = usize::from(self.next)
            .checked_sub(REGISTER_CHARS)
            .filter(|&i| i < program.len())
            .ok_or(GenomeError::PointerOutOfRange { next: self.next, len: program.len() })?;
        let op = program.0[index];
        self.next = if index + 1 == program.len() { FIRST_ADDRESS } else { self.next + 1 };
        Ok(op)
    }

    pub fn points_into(&self, program: &Program) -> bool {
        (FIRST_ADDRESS..FIRST_ADDRESS + program.len() as u8).contains(&self.next)
    }
}

/// Heritable program together with the register values it is serialized with.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    pub program: Program,
    pub initial_registers: RegisterFile,
}

impl Genome {
    pub fn new(program: Program) -> Self {
        Genome { program, initial_registers: RegisterFile::default() }
    }

    pub fn parse(s: &str) -> Result<Self, GenomeError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != GENOME_CHARS {
            return Err(GenomeError::Length(chars.len()));
        }
        let reg_err = |register: &'static str, value: String| GenomeError::Register { register, value };

        let next_str: String = chars[0..2].iter().collect();
        let next = match (chars[0].to_digit(10), chars[1].to_digit(10)) {
            (Some(hi), Some(lo)) => (hi * 10 + lo) as u8,
            _ => return Err(reg_err("nextI", next_str)),
        };
        if !(FIRST_ADDRESS..GENOME_CHARS as u8).contains(&next) {
            return Err(reg_err("nextI", next_str));
        }
        let best_dir = match chars[2] {
            'Z' => None,
            c => Some(Direction::from_char(c).ok_or_else(|| reg_err("bDir", c.to_string()))?),
        };
        let digit = |register, c: char| c.to_digit(10).map(|d| d as u8).ok_or_else(|| reg_err(register, c.to_string()));
        let best_dist = digit("bDis", chars[3])?;
        let best_res = digit("bRes", chars[4])?;

        let region = &chars[REGISTER_CHARS..];
        let len = region.iter().position(|&c| c == PAD).unwrap_or(region.len());
        let mut ops = ArrayVec::<Instruction, MAX_PROGRAM_LEN>::new();
        for (i, &ch) in region[..len].iter().enumerate() {
            let op = Instruction::from_char(ch).ok_or(GenomeError::Opcode { ch, position: REGISTER_CHARS + i })?;
            ops.push(op);
        }
        if let Some(i) = region[len..].iter().position(|&c| c != PAD) {
            // an opcode (or junk) after padding means a gap in program memory
            return Err(GenomeError::Opcode { ch: region[len + i], position: REGISTER_CHARS + len + i });
        }
        if ops.is_empty() {
            return Err(GenomeError::EmptyProgram);
        }
        Ok(Genome {
            program: Program(ops),
            initial_registers: RegisterFile { next, best_dir, best_dist, best_res },
        })
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }

    /// Fixed-width byte form, handy as a cheap map key.
    pub fn to_bytes(&self) -> [u8; GENOME_CHARS] {
        let mut out = [PAD as u8; GENOME_CHARS];
        let r = &self.initial_registers;
        out[0] = b'0' + r.next / 10;
        out[1] = b'0' + r.next % 10;
        out[2] = r.best_dir.map_or('Z', Direction::to_char) as u8;
        out[3] = b'0' + r.best_dist.min(9);
        out[4] = b'0' + r.best_res.min(9);
        for (slot, op) in out[REGISTER_CHARS..].iter_mut().zip(self.program.instructions()) {
            *slot = op.to_char() as u8;
        }
        out
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bytes = self.to_bytes();
        // always ASCII
        f.write_str(std::str::from_utf8(&bytes).expect("genome bytes are ASCII"))
    }
}

impl FromStr for Genome {
    type Err = GenomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Genome::parse(s)
    }
}
