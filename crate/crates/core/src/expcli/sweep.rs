//! Executing runs and writing their CSV files.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ExperimentSpec, SpecError};
use super::csv;
use crate::engine::{run, ConfigError, Observer, RunError, SimConfig, World};
use crate::metrics::{census, GenotypeRecord, MetricsError, RunSummary, StepRecord, SummaryOptions};

#[derive(Debug, Error)]
pub enum ExpError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("observer failed: {0}")]
    Observer(io::Error),
    #[error("cannot start worker threads: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl ExpError {
    /// Process exit status: 1 for bad configuration, 2 for I/O trouble.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExpError::Spec(_) | ExpError::Config(_) | ExpError::Metrics(_) => 1,
            ExpError::Io { .. } | ExpError::Observer(_) | ExpError::Threads(_) => 2,
        }
    }
}

impl From<RunError> for ExpError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => ExpError::Config(c),
            RunError::Observer(io) => ExpError::Observer(io),
        }
    }
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> ExpError + '_ {
    move |source| ExpError::Io { path: path.to_path_buf(), source }
}

/// Everything recorded from one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    /// One record per step, from step 0 until the run ended.
    pub steps: Vec<StepRecord>,
    /// Genotype census at every `genotype_every`-th step.
    pub genotypes: Vec<GenotypeRecord>,
}

struct Recorder {
    genotype_every: u64,
    steps: Vec<StepRecord>,
    genotypes: Vec<GenotypeRecord>,
}

impl Observer for Recorder {
    fn observe(&mut self, world: &World) -> io::Result<()> {
        let (record, genotypes) = census(world);
        self.steps.push(record);
        if world.step().is_multiple_of(self.genotype_every) {
            self.genotypes.extend(genotypes);
        }
        Ok(())
    }
}

/// Run `config` to completion. `extra` sees the world alongside the
/// built-in recorder.
pub fn simulate(
    config: &SimConfig,
    genotype_every: u64,
    options: &SummaryOptions,
    extra: Option<&mut dyn Observer>,
) -> Result<RunOutput, ExpError> {
    let mut rec = Recorder { genotype_every: genotype_every.max(1), steps: Vec::new(), genotypes: Vec::new() };
    let world = match extra {
        Some(o) => run(config.clone(), &mut [&mut rec, o])?,
        None => run(config.clone(), &mut [&mut rec])?,
    };
    let populations: Vec<f64> = rec.steps.iter().map(|r| r.population as f64).collect();
    let summary = RunSummary::new(config, &populations, world.founders(), options)?;
    Ok(RunOutput { summary, steps: rec.steps, genotypes: rec.genotypes })
}

fn write_csv<T>(path: &Path, header: &str, rows: &[T], row: impl Fn(&mut BufWriter<File>, &T) -> io::Result<()>) -> Result<(), ExpError> {
    let write = || -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{header}")?;
        for r in rows {
            row(&mut w, r)?;
        }
        w.flush()
    };
    write().map_err(io_at(path))
}

/// Write `timeseries.csv` and `genotypes.csv` into `dir`, creating it.
pub fn write_run(dir: &Path, output: &RunOutput) -> Result<(), ExpError> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    write_csv(&dir.join("timeseries.csv"), csv::TIMESERIES_HEADER, &output.steps, csv::write_step)?;
    write_csv(&dir.join("genotypes.csv"), csv::GENOTYPES_HEADER, &output.genotypes, csv::write_genotype)
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub run_id: usize,
    pub seed: u64,
    pub summary: RunSummary,
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), ExpError> {
    write_csv(path, csv::SUMMARY_HEADER, rows, |w, r| csv::write_summary(w, r.run_id, r.seed, &r.summary))
}

pub fn run_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("run_{index:04}"))
}

/// Execute every run of `spec` on `jobs` threads (all cores when `None`),
/// writing `run_NNNN/` directories and finally `summary.csv` under `out`.
pub fn run_sweep(spec: &ExperimentSpec, out: &Path, jobs: Option<usize>) -> Result<Vec<SummaryRow>, ExpError> {
    fs::create_dir_all(out).map_err(io_at(out))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let rows: Vec<Result<SummaryRow, ExpError>> = pool.install(|| {
        spec.runs()
            .into_par_iter()
            .map(|plan| {
                let output = simulate(&plan.config, spec.genotype_every, &spec.analysis, None)?;
                write_run(&run_dir(out, plan.index), &output)?;
                Ok(SummaryRow { run_id: plan.index, seed: plan.seed, summary: output.summary })
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_summary(&out.join("summary.csv"), &rows)?;
    Ok(rows)
}

/// A single unswept run. With `out` set, its CSV files and a one-row
/// `summary.csv` are written there.
pub fn run_single(spec: &ExperimentSpec, seed: Option<u64>, out: Option<&Path>) -> Result<SummaryRow, ExpError> {
    let config = spec.single(seed)?;
    let output = simulate(&config, spec.genotype_every, &spec.analysis, None)?;
    let row = SummaryRow { run_id: 0, seed: config.rng_seed, summary: output.summary.clone() };
    if let Some(dir) = out {
        write_run(dir, &output)?;
        write_summary(&dir.join("summary.csv"), std::slice::from_ref(&row))?;
    }
    Ok(row)
}

/// `summary.csv` text for `rows`, as written to disk.
pub fn summary_text(rows: &[SummaryRow]) -> String {
    let mut buf = Vec::new();
    writeln!(buf, "{}", csv::SUMMARY_HEADER).expect("writing to memory");
    for r in rows {
        csv::write_summary(&mut buf, r.run_id, r.seed, &r.summary).expect("writing to memory");
    }
    String::from_utf8(buf).expect("CSV is ASCII")
}
