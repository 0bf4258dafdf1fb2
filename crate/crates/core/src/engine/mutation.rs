//! Point mutations applied to offspring programs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::genome::{Instruction, Program};

/// How the mutation probability 1/μ is applied at reproduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MutationMode {
    /// At most one mutation per offspring, with probability 1/μ.
    #[default]
    PerProgram,
    /// Every instruction independently mutates with probability 1/μ.
    PerInstruction,
}

impl MutationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MutationMode::PerProgram => "per_program",
            MutationMode::PerInstruction => "per_instruction",
        }
    }
}

impl fmt::Display for MutationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_program" | "per-program" => Ok(MutationMode::PerProgram),
            "per_instruction" | "per-instruction" => Ok(MutationMode::PerInstruction),
            other => Err(format!("unknown mutation mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Replace the opcode at `at` with a different one.
    Flip { at: usize, to: Instruction },
    /// Insert before position `at` (`at == len` appends).
    Insert { at: usize, op: Instruction },
    Delete { at: usize },
}

impl Mutation {
    /// Apply in place. Inserts into full memory and deletes from a
    /// one-instruction program are skipped and return `false`.
    pub fn apply(self, program: &mut Program) -> bool {
        match self {
            Mutation::Flip { at, to } => {
                program.set(at, to);
                true
            }
            Mutation::Insert { at, op } => program.insert(at, op),
            Mutation::Delete { at } => program.remove(at),
        }
    }

    /// A mutation of uniformly random type. With `site` set the edit targets
    /// that position (insert goes before it); otherwise the location is
    /// uniform over positions, or over the `len + 1` gaps for an insert.
    pub fn random<R: Rng + ?Sized>(program: &Program, site: Option<usize>, rng: &mut R) -> Self {
        let len = program.len();
        match rng.gen_range(0..3) {
            0 => {
                let at = site.unwrap_or_else(|| rng.gen_range(0..len));
                let current = program.get(at).expect("mutation site inside program");
                Mutation::Flip { at, to: current.random_other(rng) }
            }
            1 => {
                let at = site.unwrap_or_else(|| rng.gen_range(0..=len));
                Mutation::Insert { at, op: Instruction::random(rng) }
            }
            _ => Mutation::Delete { at: site.unwrap_or_else(|| rng.gen_range(0..len)) },
        }
    }
}

/// Offspring program derived from `parent`.
pub fn mutate<R: Rng + ?Sized>(parent: &Program, mode: MutationMode, mu: f64, rng: &mut R) -> Program {
    let p = 1.0 / mu;
    let mut child = parent.clone();
    match mode {
        MutationMode::PerProgram => {
            if rng.gen_bool(p) {
                Mutation::random(&child, None, rng).apply(&mut child);
            }
        }
        MutationMode::PerInstruction => {
            let sites: Vec<usize> = (0..parent.len()).filter(|_| rng.gen_bool(p)).collect();
            // back to front so earlier sites keep their index
            for &at in sites.iter().rev() {
                Mutation::random(&child, Some(at), rng).apply(&mut child);
            }
        }
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{Direction, MAX_PROGRAM_LEN};
    use crate::rng::seeded;

    fn prog(s: &str) -> Program {
        s.parse().unwrap()
    }

    #[test]
    fn forced_edits() {
        let mut p = prog("XM");
        assert!(Mutation::Flip { at: 0, to: Instruction::Look(Direction::Up) }.apply(&mut p));
        assert_eq!(p, prog("UM"));

        let mut p = prog("M");
        assert!(!Mutation::Delete { at: 0 }.apply(&mut p));
        assert_eq!(p, prog("M"));

        let full = Program::new(&[Instruction::Move; MAX_PROGRAM_LEN]).unwrap();
        let mut p = full.clone();
        assert!(!Mutation::Insert { at: 3, op: Instruction::Reproduce }.apply(&mut p));
        assert_eq!(p, full);

        let mut p = prog("XM");
        assert!(Mutation::Insert { at: 2, op: Instruction::Reproduce }.apply(&mut p));
        assert_eq!(p, prog("XMX"));
        assert!(Mutation::Delete { at: 0 }.apply(&mut p));
        assert_eq!(p, prog("MX"));
    }

    #[test]
    fn per_program_trigger_rate() {
        let mut rng = seeded(30);
        let parent = prog("XM");
        let trials = 100_000;
        let changed = (0..trials)
            .filter(|_| mutate(&parent, MutationMode::PerProgram, 30.0, &mut rng) != parent)
            .count();
        let rate = changed as f64 / trials as f64;
        assert!((rate - 1.0 / 30.0).abs() < 0.002, "rate {rate}");
    }

    #[test]
    fn insert_and_delete_equally_likely() {
        let mut rng = seeded(4);
        let p = prog("XMMUD");
        let (mut ins, mut del, mut flip) = (0, 0, 0);
        for _ in 0..30_000 {
            match Mutation::random(&p, None, &mut rng) {
                Mutation::Insert { .. } => ins += 1,
                Mutation::Delete { .. } => del += 1,
                Mutation::Flip { .. } => flip += 1,
            }
        }
        for n in [ins, del, flip] {
            assert!((n as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015);
        }
    }

    #[test]
    fn per_instruction_rate_scales_with_length() {
        let mut rng = seeded(8);
        let short = prog("XM");
        let long: Program = format!("XM{}", "U".repeat(18)).parse().unwrap();
        let trials = 20_000;
        let count = |p: &Program, rng: &mut crate::rng::SimRng| {
            (0..trials).filter(|_| mutate(p, MutationMode::PerInstruction, 30.0, rng) != *p).count()
        };
        let short_rate = count(&short, &mut rng) as f64 / trials as f64;
        let long_rate = count(&long, &mut rng) as f64 / trials as f64;
        // P(any of n sites fires) = 1 - (29/30)^n; flips of U into U never happen
        assert!((short_rate - (1.0 - (29.0f64 / 30.0).powi(2))).abs() < 0.01, "{short_rate}");
        assert!(long_rate > 0.4, "{long_rate}");
    }

    #[test]
    fn mode_round_trip() {
        for m in [MutationMode::PerProgram, MutationMode::PerInstruction] {
            assert_eq!(m.as_str().parse::<MutationMode>(), Ok(m));
        }
        assert!("sometimes".parse::<MutationMode>().is_err());
    }
}
