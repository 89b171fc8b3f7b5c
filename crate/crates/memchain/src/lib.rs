//! Configuration, file formats, parallel simulation, the refinement driver
//! and subcommand implementations on top of [`memchain_core`].

#![deny(unsafe_code)]

pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod refine;
pub mod run;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use refine::{
    run_refinement, MemoryRecord, RefinementConfig, RefinementReport, RefinementRun, Termination,
};
