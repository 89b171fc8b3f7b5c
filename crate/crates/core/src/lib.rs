//! Data-driven memory-ℓ Markov chain abstractions of discrete-time dynamical
//! systems.
//!
//! A system with a finite output map is simulated from random initial states,
//! its output words are pooled into a Markov chain whose states are the last
//! `ℓ` observed letters, and models of increasing memory are compared through
//! a support-based behavioral distance over a finite horizon.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line driver live in the `memchain` crate.
//!
//! Word lengths are always counted in letters: a horizon `h` means words
//! `y_0 … y_{h-1}`.
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod alphabet;
pub mod distribution;
mod error;
pub mod metrics;
pub mod model;
pub mod partition;
pub mod rng;
pub mod sampler;
pub mod systems;
pub mod trie;

pub use alphabet::{Alphabet, Letter, Word};
pub use distribution::{
    count_subwords, one_sided_gaps, total_variation_like_gap, CategoricalDistribution,
};
pub use error::{Error, Result};
pub use metrics::{
    distance, proposition1_check, spurious_mass, BehaviorSource, DistanceReport, ExactBehavior,
    Method, MethodTag,
};
pub use model::{build_model, lift, sample_model, unroll, MemoryMarkovModel, UnrolledBehavior};
pub use partition::{export_partition, PartitionExport};
pub use rng::{RandomStream, StreamDomain};
pub use sampler::{simulate, simulate_trajectory, SampleSet, SimulationRequest, StateTable};
pub use systems::{
    DynamicalSystem, PiecewiseDemo, PlanarInitial, ScalarInitial, Sturmian, SwitchedLinear,
    SystemSpec, SystemVisitor, TableDriven,
};

/// Probabilities strictly below this are dropped from every support.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Tolerance on the total mass of a distribution or a transition row.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of words an exact behavior may hold.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;
