//! CSV rows with a fixed column order and `%g`-style floats, so that equal
//! runs produce equal bytes.

use std::io::{self, Write};

use crate::metrics::{GenotypeRecord, RunSummary, StepRecord};

pub const TIMESERIES_HEADER: &str =
    "step,population,births,deaths,mean_surplus,mean_len,max_len,unique_genotypes,no_x_count,modal_program,modal_count";
pub const GENOTYPES_HEADER: &str = "step,program,count";
pub const SUMMARY_HEADER: &str = "run_id,seed,compute_capacity,infertility,birth_cost,mu,mutation_mode,predicted_K,steady_mean_pop,realized_K,viability_fraction,steady_cv";

/// C's `%g`: six significant digits, trailing zeros dropped, exponent form
/// below 1e-4 or from 1e6 on. Negative zero prints as `0`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan" } else if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // rounding to six digits first decides the exponent (999999.5 -> 1e+06)
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_step(w: &mut impl Write, r: &StepRecord) -> io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.step,
        r.population,
        r.births,
        r.deaths,
        fmt_g(r.mean_surplus),
        fmt_g(r.mean_len),
        r.max_len,
        r.unique_genotypes,
        r.no_x_count,
        r.modal_program,
        r.modal_count
    )
}

pub fn write_genotype(w: &mut impl Write, g: &GenotypeRecord) -> io::Result<()> {
    writeln!(w, "{},{},{}", g.step, g.program, g.count)
}

pub fn write_summary(w: &mut impl Write, run_id: usize, seed: u64, s: &RunSummary) -> io::Result<()> {
    let c = &s.config;
    writeln!(
        w,
        "{run_id},{seed},{},{},{},{},{},{},{},{},{},{}",
        c.compute_capacity,
        c.infertility,
        fmt_g(c.birth_cost),
        fmt_g(c.mu),
        c.mutation_mode,
        s.predicted_k,
        fmt_g(s.steady_mean_population),
        fmt_g(s.realized_k),
        fmt_g(s.viability_fraction),
        fmt_g(s.steady_cv)
    )
}
