//! Subcommands. Each writes only inside the configured output directory,
//! starting with `config.toml`, the fully resolved configuration.

use std::path::{Path, PathBuf};

use memchain_core::{
    build_model, distance, export_partition, BehaviorSource, DistanceReport, MemoryMarkovModel,
    Method, SampleSet,
};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::formats;
use crate::parallel;
use crate::refine::{run_refinement, RefinementRun, Termination};

/// Creates the output directory and writes the config echo into it.
pub fn prepare_output(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    formats::write_file(&dir.join("config.toml"), config.resolved().to_toml())?;
    Ok(dir)
}

fn simulate_samples(config: &RunConfig, keep_states: bool) -> Result<SampleSet> {
    let mut request = config.simulation_request()?;
    request.keep_states |= keep_states;
    parallel::simulate(&config.system.build()?, &request, config.threads())
}

/// Writes `samples.txt`, plus `states.csv` when states are kept.
pub fn simulate(config: &RunConfig) -> Result<(PathBuf, SampleSet)> {
    config.validate()?;
    let samples = simulate_samples(config, false)?;
    let dir = prepare_output(config)?;
    formats::write_file(
        &dir.join("samples.txt"),
        formats::samples_to_string(&samples),
    )?;
    if let Some(states) = formats::states_csv(&samples) {
        formats::write_file(&dir.join("states.csv"), states)?;
    }
    Ok((dir, samples))
}

/// Estimates the memory-`memory` model from fresh samples or from a samples
/// file, and writes `model_<memory>.txt`.
pub fn build(
    config: &RunConfig,
    memory: usize,
    samples_path: Option<&Path>,
) -> Result<(PathBuf, MemoryMarkovModel)> {
    let samples = match samples_path {
        Some(path) => {
            let alphabet = config.system.build()?.alphabet().clone();
            formats::parse_samples(&formats::read_file(path)?, &alphabet, path)?
        }
        None => {
            config.validate()?;
            simulate_samples(config, false)?
        }
    };
    if memory == 0 || memory >= samples.word_len() {
        return Err(Error::Config(format!(
            "memory ({memory}) must be in 1..{} for words of length {}",
            samples.word_len(),
            samples.word_len()
        )));
    }
    let model = build_model(&samples, memory)?;
    let dir = prepare_output(config)?;
    formats::save_model(&model, &dir.join(format!("model_{memory}.txt")))?;
    Ok((dir, model))
}

/// Distance between two model files.
pub fn distance_between(
    path1: &Path,
    path2: &Path,
    horizon: usize,
    method: &Method,
) -> Result<DistanceReport> {
    let m1 = formats::load_model(path1)?;
    let m2 = formats::load_model(path2)?;
    if m1.alphabet() != m2.alphabet() {
        return Err(Error::Config(format!(
            "alphabets differ: {} has {:?}, {} has {:?}",
            path1.display(),
            m1.alphabet().labels(),
            path2.display(),
            m2.alphabet().labels()
        )));
    }
    Ok(distance(
        BehaviorSource::Model(&m1),
        BehaviorSource::Model(&m2),
        horizon,
        method,
    )?)
}

/// Runs the refinement loop and writes `report.csv`, `report.json`,
/// `model_<ℓ*>.txt`, `partition_<ℓ*>.csv` and optionally `samples.txt`.
///
/// Artifacts are written even when the loop ends on a capacity error; the
/// error is returned afterwards.
pub fn refine(config: &RunConfig) -> Result<(PathBuf, RefinementRun)> {
    let refinement = config.refinement()?;
    let run = run_refinement(&refinement)?;
    let dir = prepare_output(config)?;
    let alphabet = refinement.system.alphabet();
    formats::write_file(&dir.join("report.csv"), formats::report_csv(&run.report))?;
    let json =
        serde_json::to_string_pretty(&formats::report_json(&run.report)).expect("json serializes");
    formats::write_file(&dir.join("report.json"), json + "\n")?;
    if let (Some(memory), Some(model)) = (run.report.final_memory, &run.final_model) {
        formats::save_model(model, &dir.join(format!("model_{memory}.txt")))?;
    }
    if let (Some(memory), Some(partition)) = (run.report.final_memory, &run.partition) {
        formats::write_file(
            &dir.join(format!("partition_{memory}.csv")),
            formats::partition_csv(partition, alphabet),
        )?;
    }
    if config.resolved().refine.write_samples == Some(true) {
        formats::write_file(
            &dir.join("samples.txt"),
            formats::samples_to_string(&run.samples),
        )?;
    }
    if let Termination::Capacity { memory, message } = &run.report.termination {
        return Err(Error::Capacity(format!(
            "refinement stopped at memory {memory}, partial report in {}: {message}",
            dir.display()
        )));
    }
    Ok((dir, run))
}

/// Simulates with states kept and writes `partition_<memory>.csv`.
pub fn partition(config: &RunConfig, memory: usize) -> Result<PathBuf> {
    let request = config.simulation_request()?;
    if memory == 0 || memory > request.length {
        return Err(Error::Config(format!(
            "memory ({memory}) must be in 1..={} (sampling.length)",
            request.length
        )));
    }
    let samples = simulate_samples(config, true)?;
    let export = export_partition(&samples, memory)?;
    let dir = prepare_output(config)?;
    formats::write_file(
        &dir.join(format!("partition_{memory}.csv")),
        formats::partition_csv(&export, samples.alphabet()),
    )?;
    Ok(dir)
}
