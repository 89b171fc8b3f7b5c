//! Memory refinement: build models of increasing memory until two
//! consecutive ones agree at the horizon.

use std::time::Instant;

use memchain_core::{
    build_model, distance, export_partition, BehaviorSource, DistanceReport, Error as CoreError,
    ExactBehavior, MemoryMarkovModel, Method, MethodTag, PartitionExport, SampleSet,
    SimulationRequest, SystemSpec,
};

use crate::error::Result;
use crate::parallel;

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementConfig {
    pub system: SystemSpec,
    pub trajectories: usize,
    pub length: usize,
    /// Comparison horizon in letters.
    pub horizon: usize,
    pub threshold: f64,
    pub max_memory: usize,
    pub seed: u64,
    pub method: Method,
    /// Keep visited states and export the partition of the final memory.
    pub export_partition: bool,
    /// Draw a fresh sample set for every memory instead of sharing one.
    pub resample_per_memory: bool,
    pub threads: usize,
    pub max_letters: usize,
}

impl RefinementConfig {
    pub fn new(
        system: SystemSpec,
        trajectories: usize,
        length: usize,
        horizon: usize,
        threshold: f64,
        max_memory: usize,
    ) -> Self {
        Self {
            system,
            trajectories,
            length,
            horizon,
            threshold,
            max_memory,
            seed: 1,
            method: Method::exact(),
            export_partition: false,
            resample_per_memory: false,
            threads: 0,
            max_letters: SimulationRequest::DEFAULT_MAX_LETTERS,
        }
    }

    fn request(&self, seed: u64) -> SimulationRequest {
        SimulationRequest {
            trajectories: self.trajectories,
            length: self.length,
            seed,
            keep_states: self.export_partition,
            max_letters: self.max_letters,
        }
    }
}

/// Outcome of one memory.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryRecord {
    pub memory: usize,
    pub states: usize,
    pub transitions: usize,
    /// Support of the model's behavior at the horizon (exact method only).
    pub support: Option<usize>,
    /// Mass absorbed by dead ends before the horizon (exact method only).
    pub absorbed: Option<f64>,
    /// Distance to the model of the next memory, when one was built.
    pub to_next: Option<DistanceReport>,
    /// Distance to the empirical distribution of the samples' prefixes.
    pub to_samples: DistanceReport,
    /// Distances from every smaller memory to this one, smallest first.
    pub from_earlier: Vec<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    /// Two consecutive models were within the threshold.
    Threshold,
    /// The largest allowed memory was reached first.
    MaxMemory,
    /// Enumeration outgrew its capacity while processing `memory`.
    Capacity { memory: usize, message: String },
}

impl Termination {
    pub fn tag(&self) -> &'static str {
        match self {
            Termination::Threshold => "threshold",
            Termination::MaxMemory => "max-memory",
            Termination::Capacity { .. } => "capacity",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport {
    pub system: String,
    pub horizon: usize,
    pub threshold: f64,
    pub method: MethodTag,
    pub records: Vec<MemoryRecord>,
    /// The first memory within the threshold of its predecessor, or the last
    /// memory processed.
    pub final_memory: Option<usize>,
    pub termination: Termination,
}

impl RefinementReport {
    pub fn record(&self, memory: usize) -> Option<&MemoryRecord> {
        self.records.iter().find(|r| r.memory == memory)
    }
}

pub struct RefinementRun {
    pub report: RefinementReport,
    pub final_model: Option<MemoryMarkovModel>,
    pub partition: Option<PartitionExport>,
    /// The sample set of the final memory.
    pub samples: SampleSet,
}

/// Behaviors at the horizon, enumerated once per model when exact.
struct Ladder<'a> {
    method: Method,
    horizon: usize,
    reference: &'a SampleSet,
    reference_exact: Option<ExactBehavior>,
    models: Vec<MemoryMarkovModel>,
    exact: Vec<ExactBehavior>,
}

impl<'a> Ladder<'a> {
    fn new(method: Method, horizon: usize, reference: &'a SampleSet) -> Result<Self> {
        let reference_exact = match method {
            Method::Exact { cap } => Some(ExactBehavior::of(
                BehaviorSource::Samples(reference),
                horizon,
                cap,
            )?),
            Method::MonteCarlo { .. } => None,
        };
        Ok(Self {
            method,
            horizon,
            reference,
            reference_exact,
            models: Vec::new(),
            exact: Vec::new(),
        })
    }

    fn push(&mut self, model: MemoryMarkovModel) -> Result<(), CoreError> {
        if let Method::Exact { cap } = self.method {
            self.exact.push(ExactBehavior::of(
                BehaviorSource::Model(&model),
                self.horizon,
                cap,
            )?);
        }
        self.models.push(model);
        Ok(())
    }

    fn between(&self, a: usize, b: usize) -> Result<DistanceReport, CoreError> {
        match self.method {
            Method::Exact { .. } => self.exact[a].distance_to(&self.exact[b]),
            Method::MonteCarlo { .. } => distance(
                BehaviorSource::Model(&self.models[a]),
                BehaviorSource::Model(&self.models[b]),
                self.horizon,
                &self.method,
            ),
        }
    }

    fn to_samples(&self, a: usize) -> Result<DistanceReport, CoreError> {
        match &self.reference_exact {
            Some(reference) => self.exact[a].distance_to(reference),
            None => distance(
                BehaviorSource::Model(&self.models[a]),
                BehaviorSource::Samples(self.reference),
                self.horizon,
                &self.method,
            ),
        }
    }
}

fn resample_seed(seed: u64, memory: usize) -> u64 {
    seed.wrapping_add((memory as u64 - 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs the refinement loop for memories `1..=max_memory`.
///
/// Capacity errors end the loop and are reported in the termination reason;
/// every other error is returned.
pub fn run_refinement(config: &RefinementConfig) -> Result<RefinementRun> {
    let base = parallel::simulate(&config.system, &config.request(config.seed), config.threads)?;
    let mut ladder = Ladder::new(config.method, config.horizon, &base)?;
    let mut records: Vec<MemoryRecord> = Vec::new();
    let mut final_samples = None;
    let mut termination = Termination::MaxMemory;
    let mut final_memory = None;

    for memory in 1..=config.max_memory {
        let started = Instant::now();
        let fresh = if config.resample_per_memory && memory > 1 {
            Some(parallel::simulate(
                &config.system,
                &config.request(resample_seed(config.seed, memory)),
                config.threads,
            )?)
        } else {
            None
        };
        let samples = fresh.as_ref().unwrap_or(&base);
        let model = build_model(samples, memory)?;
        let (states, transitions) = (model.state_count(), model.transition_count());
        let step = (|| -> Result<_, CoreError> {
            ladder.push(model)?;
            let i = ladder.models.len() - 1;
            let to_samples = ladder.to_samples(i)?;
            let from_earlier = (0..i)
                .map(|j| ladder.between(j, i))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((to_samples, from_earlier))
        })();
        let (to_samples, from_earlier) = match step {
            Ok(v) => v,
            Err(e @ CoreError::Capacity { .. }) => {
                let message = e.to_string();
                log::warn!("memory {memory}: {message}");
                termination = Termination::Capacity { memory, message };
                final_memory = records.last().map(|r| r.memory);
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let exact = ladder.exact.last();
        let record = MemoryRecord {
            memory,
            states,
            transitions,
            support: exact.map(|b| b.distribution.support_size()),
            absorbed: exact.map(|b| b.absorbed),
            to_next: None,
            to_samples,
            from_earlier: from_earlier.iter().map(|r| r.distance).collect(),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        log::info!(
            "memory {memory}: {states} states, distance to samples {}",
            record.to_samples.distance
        );
        final_samples = fresh.or(final_samples);
        records.push(record);
        if let Some(adjacent) = from_earlier.last() {
            if adjacent.both_sides_nonzero() {
                log::warn!(
                    "memories {} and {memory} each produce words the other cannot (left {}, right {})",
                    memory - 1,
                    adjacent.left,
                    adjacent.right
                );
            }
            let previous = records.len() - 2;
            records[previous].to_next = Some(adjacent.clone());
            if adjacent.distance <= config.threshold {
                termination = Termination::Threshold;
                final_memory = Some(memory);
                break;
            }
        }
        final_memory = Some(memory);
    }

    let final_model = final_memory.map(|m| ladder.models[m - 1].clone());
    let samples = final_samples.unwrap_or_else(|| base.clone());
    let partition = match (config.export_partition, final_memory) {
        (true, Some(m)) => Some(export_partition(&samples, m)?),
        _ => None,
    };
    Ok(RefinementRun {
        report: RefinementReport {
            system: config.system.description(),
            horizon: config.horizon,
            threshold: config.threshold,
            method: config.method.tag(),
            records,
            final_memory,
            termination,
        },
        final_model,
        partition,
        samples,
    })
}
