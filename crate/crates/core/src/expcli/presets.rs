//! Experiment configurations shipped with the binary.

use super::config::{parse_config, ExperimentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal) => {
        Preset { name: $name, text: include_str!(concat!("../../presets/", $name, ".conf")) }
    };
}

pub const PRESETS: [Preset; 5] = [
    preset!("fig1_viability"),
    preset!("fig2_capacity_sweep"),
    preset!("fig3_memory_limit"),
    preset!("fig4a_bloat_per_program"),
    preset!("fig4b_bloat_per_instruction"),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    /// First comment line of the file.
    pub fn description(&self) -> &'static str {
        self.text.lines().next().and_then(|l| l.strip_prefix('#')).map_or("", str::trim)
    }

    pub fn spec(&self) -> ExperimentSpec {
        parse_config(self.text).unwrap_or_else(|e| panic!("preset {} is invalid: {e}", self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for p in &PRESETS {
            let spec = p.spec();
            assert!(spec.run_count() >= 3, "{}", p.name);
            assert!(!p.description().is_empty(), "{}", p.name);
        }
    }

    #[test]
    fn bloat_pair_differs_only_in_mode() {
        let a = find("fig4a_bloat_per_program").unwrap().spec();
        let mut b = find("fig4b_bloat_per_instruction").unwrap().spec();
        assert_ne!(a, b);
        b.set("mutation_mode", "per_program").unwrap();
        assert_eq!(a, b);
    }
}
