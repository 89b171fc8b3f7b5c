//! TOML run configuration.
//!
//! ```toml
//! [system]
//! variant = "sturmian"        # sturmian | switched-linear | piecewise-demo | table-driven
//! theta = 2.6026              # optional
//!
//! [sampling]
//! trajectories = 10000
//! length = 60
//! seed = 1
//!
//! [refine]
//! horizon = 15
//! threshold = 0.01
//! max_memory = 12
//! method = "exact"            # or "monte-carlo"
//!
//! [output]
//! dir = "runs/sturmian"
//! ```
//!
//! Every key is optional except `system.variant` (and the table of a
//! table-driven system); defaults depend on the variant. Scalar keys can be
//! overridden from the command line as `section.key=value`.

use std::path::{Path, PathBuf};

use memchain_core::{
    Alphabet, Method, PiecewiseDemo, PlanarInitial, ScalarInitial, SimulationRequest, Sturmian,
    SwitchedLinear, SystemSpec, TableDriven, DEFAULT_SUPPORT_CAP,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::refine::RefinementConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub refine: RefineConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    Sturmian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<InitialConfig>,
    },
    SwitchedLinear {
        /// Row-major 2x2 matrix.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a1: Option<[f64; 4]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a2: Option<[f64; 4]>,
        /// Probability of applying `a1` at each step.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        switch_probability: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<InitialConfig>,
    },
    PiecewiseDemo {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<InitialConfig>,
    },
    TableDriven {
        labels: Vec<String>,
        /// Label of each state.
        state_labels: Vec<String>,
        /// Row-stochastic matrix, one row per state.
        transitions: Vec<Vec<f64>>,
        initial: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    Uniform { low: Vec<f64>, high: Vec<f64> },
    Point { at: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_letters: Option<usize>,
    /// Also write the visited states next to `samples.txt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep_states: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodConfig {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    /// Comparison horizon in letters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_memory: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_per_memory: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_partition: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_samples: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Worker threads for simulation, 0 = one per core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

struct Defaults {
    trajectories: usize,
    length: usize,
    horizon: usize,
    threshold: f64,
    max_memory: usize,
}

impl SystemConfig {
    fn defaults(&self) -> Defaults {
        match self {
            SystemConfig::Sturmian { .. } => Defaults {
                trajectories: 10_000,
                length: 60,
                horizon: 15,
                threshold: 0.01,
                max_memory: 12,
            },
            SystemConfig::SwitchedLinear { .. } => Defaults {
                trajectories: 5_000,
                length: 30,
                horizon: 8,
                threshold: 0.05,
                max_memory: 5,
            },
            SystemConfig::PiecewiseDemo { .. } => Defaults {
                trajectories: 10_000,
                length: 20,
                horizon: 6,
                threshold: 1e-6,
                max_memory: 4,
            },
            SystemConfig::TableDriven { .. } => Defaults {
                trajectories: 1_000,
                length: 50,
                horizon: 8,
                threshold: 1e-6,
                max_memory: 4,
            },
        }
    }

    /// Fills every optional parameter with its default.
    fn resolved(&self) -> SystemConfig {
        match self.clone() {
            SystemConfig::Sturmian { theta, initial } => SystemConfig::Sturmian {
                theta: Some(theta.unwrap_or(Sturmian::DEFAULT_THETA)),
                initial: Some(initial.unwrap_or(InitialConfig::Uniform {
                    low: vec![0.0],
                    high: vec![std::f64::consts::TAU],
                })),
            },
            SystemConfig::SwitchedLinear {
                a1,
                a2,
                switch_probability,
                initial,
            } => SystemConfig::SwitchedLinear {
                a1: Some(a1.unwrap_or(flatten(SwitchedLinear::DEFAULT_A1))),
                a2: Some(a2.unwrap_or(flatten(SwitchedLinear::DEFAULT_A2))),
                switch_probability: Some(switch_probability.unwrap_or(0.5)),
                initial: Some(initial.unwrap_or(InitialConfig::Uniform {
                    low: vec![-2.0, -2.0],
                    high: vec![2.0, 2.0],
                })),
            },
            SystemConfig::PiecewiseDemo { initial } => SystemConfig::PiecewiseDemo {
                initial: Some(initial.unwrap_or(InitialConfig::Uniform {
                    low: vec![0.0],
                    high: vec![2.0],
                })),
            },
            table @ SystemConfig::TableDriven { .. } => table,
        }
    }

    pub fn build(&self) -> Result<SystemSpec> {
        let spec = match self.resolved() {
            SystemConfig::Sturmian { theta, initial } => SystemSpec::Sturmian(Sturmian::new(
                theta.expect("resolved"),
                scalar_initial(initial.as_ref())?,
            )?),
            SystemConfig::SwitchedLinear {
                a1,
                a2,
                switch_probability,
                initial,
            } => {
                let initial = match initial.expect("resolved") {
                    InitialConfig::Uniform { low, high } => PlanarInitial::Box {
                        low: planar(&low, "low")?,
                        high: planar(&high, "high")?,
                    },
                    InitialConfig::Point { at } => PlanarInitial::Point(planar(&at, "at")?),
                };
                SystemSpec::SwitchedLinear(SwitchedLinear::new(
                    square(a1.expect("resolved")),
                    square(a2.expect("resolved")),
                    switch_probability.expect("resolved"),
                    initial,
                )?)
            }
            SystemConfig::PiecewiseDemo { initial } => {
                SystemSpec::PiecewiseDemo(PiecewiseDemo::new(scalar_initial(initial.as_ref())?)?)
            }
            SystemConfig::TableDriven {
                labels,
                state_labels,
                transitions,
                initial,
            } => {
                let alphabet = Alphabet::new(labels)?;
                let state_labels = state_labels
                    .iter()
                    .map(|l| {
                        alphabet.letter(l).ok_or_else(|| {
                            Error::Config(format!("system.state_labels: unknown label {l:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                SystemSpec::TableDriven(TableDriven::new(
                    alphabet,
                    state_labels,
                    transitions,
                    initial,
                )?)
            }
        };
        Ok(spec)
    }
}

fn flatten(m: [[f64; 2]; 2]) -> [f64; 4] {
    [m[0][0], m[0][1], m[1][0], m[1][1]]
}

fn square(m: [f64; 4]) -> [[f64; 2]; 2] {
    [[m[0], m[1]], [m[2], m[3]]]
}

fn planar(v: &[f64], key: &str) -> Result<[f64; 2]> {
    <[f64; 2]>::try_from(v).map_err(|_| {
        Error::Config(format!(
            "system.initial.{key} needs 2 coordinates, got {}",
            v.len()
        ))
    })
}

fn scalar_initial(initial: Option<&InitialConfig>) -> Result<ScalarInitial> {
    let one = |v: &[f64], key: &str| match v {
        [x] => Ok(*x),
        _ => Err(Error::Config(format!(
            "system.initial.{key} needs 1 coordinate, got {}",
            v.len()
        ))),
    };
    Ok(match initial.expect("resolved") {
        InitialConfig::Uniform { low, high } => ScalarInitial::Uniform {
            low: one(low, "low")?,
            high: one(high, "high")?,
        },
        InitialConfig::Point { at } => ScalarInitial::Point(one(at, "at")?),
    })
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and applies `key=value` overrides.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let in_file = |e: Error| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        };
        if overrides.is_empty() {
            return Self::from_toml(&text).map_err(in_file);
        }
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| in_file(Error::Config(e.to_string())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_toml(&toml::to_string(&table).expect("tables serialize"))
    }

    /// The config with every default filled in.
    pub fn resolved(&self) -> RunConfig {
        let d = self.system.defaults();
        let s = &self.sampling;
        let r = &self.refine;
        RunConfig {
            system: self.system.resolved(),
            sampling: SamplingConfig {
                trajectories: Some(s.trajectories.unwrap_or(d.trajectories)),
                length: Some(s.length.unwrap_or(d.length)),
                seed: Some(s.seed.unwrap_or(1)),
                max_letters: Some(
                    s.max_letters
                        .unwrap_or(SimulationRequest::DEFAULT_MAX_LETTERS),
                ),
                keep_states: Some(s.keep_states.unwrap_or(false)),
            },
            refine: RefineConfig {
                horizon: Some(r.horizon.unwrap_or(d.horizon)),
                threshold: Some(r.threshold.unwrap_or(d.threshold)),
                max_memory: Some(r.max_memory.unwrap_or(d.max_memory)),
                method: Some(r.method.unwrap_or(MethodConfig::Exact)),
                mc_samples: Some(r.mc_samples.unwrap_or(100_000)),
                support_cap: Some(r.support_cap.unwrap_or(DEFAULT_SUPPORT_CAP)),
                resample_per_memory: Some(r.resample_per_memory.unwrap_or(false)),
                export_partition: Some(r.export_partition.unwrap_or(true)),
                write_samples: Some(r.write_samples.unwrap_or(false)),
            },
            output: OutputConfig {
                dir: Some(
                    self.output
                        .dir
                        .clone()
                        .unwrap_or_else(|| PathBuf::from("memchain-run")),
                ),
                threads: Some(self.output.threads.unwrap_or(0)),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks the cross-key constraints of the resolved config.
    pub fn validate(&self) -> Result<()> {
        self.refinement().map(drop)
    }

    pub fn simulation_request(&self) -> Result<SimulationRequest> {
        let r = self.resolved();
        let s = &r.sampling;
        let req = SimulationRequest {
            trajectories: s.trajectories.expect("resolved"),
            length: s.length.expect("resolved"),
            seed: s.seed.expect("resolved"),
            keep_states: s.keep_states.expect("resolved"),
            max_letters: s.max_letters.expect("resolved"),
        };
        if req.trajectories == 0 {
            return Err(Error::Config(
                "sampling.trajectories must be at least 1".into(),
            ));
        }
        if req.length < 2 {
            return Err(Error::Config(format!(
                "sampling.length ({}) must be at least 2",
                req.length
            )));
        }
        Ok(req)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolved().output.dir.expect("resolved")
    }

    pub fn threads(&self) -> usize {
        self.resolved().output.threads.expect("resolved")
    }

    pub fn refinement(&self) -> Result<RefinementConfig> {
        let resolved = self.resolved();
        let r = &resolved.refine;
        let req = self.simulation_request()?;
        let (horizon, max_memory, threshold) = (
            r.horizon.expect("resolved"),
            r.max_memory.expect("resolved"),
            r.threshold.expect("resolved"),
        );
        let length = req.length;
        if max_memory == 0 {
            return Err(Error::Config("refine.max_memory must be at least 1".into()));
        }
        if max_memory >= length {
            return Err(Error::Config(format!(
                "refine.max_memory ({max_memory}) must be smaller than sampling.length ({length})"
            )));
        }
        if max_memory >= horizon {
            return Err(Error::Config(format!(
                "refine.max_memory ({max_memory}) must be smaller than refine.horizon ({horizon})"
            )));
        }
        if horizon > length {
            return Err(Error::Config(format!(
                "refine.horizon ({horizon}) must not exceed sampling.length ({length})"
            )));
        }
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(Error::Config(format!(
                "refine.threshold ({threshold}) must be positive"
            )));
        }
        let method = match r.method.expect("resolved") {
            MethodConfig::Exact => Method::Exact {
                cap: r.support_cap.expect("resolved"),
            },
            MethodConfig::MonteCarlo => Method::MonteCarlo {
                samples: r.mc_samples.expect("resolved"),
                seed: req.seed,
            },
        };
        Ok(RefinementConfig {
            system: self.system.build()?,
            trajectories: req.trajectories,
            length,
            horizon,
            threshold,
            max_memory,
            seed: req.seed,
            method,
            export_partition: r.export_partition.expect("resolved"),
            resample_per_memory: r.resample_per_memory.expect("resolved"),
            threads: self.threads(),
            max_letters: req.max_letters,
        })
    }
}

/// Sets a dotted key such as `sampling.seed=7`. Values are parsed as TOML
/// and fall back to plain strings.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| Error::Config(format!("empty key in {assignment:?}")))?;
    let mut at = table;
    for part in parts {
        at = at
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key}: {part} is not a section")))?;
    }
    at.insert(last.to_string(), value);
    Ok(())
}
