//! Configuration, seeded instance generation and the run loop behind the
//! `orthobracket` binary.

pub mod config;
pub mod runner;
pub mod sample;

pub use config::{Command, Compare, ConfigError, Family, FlowConfig, FlowKindArg, RunConfig};
pub use runner::{run, RunOutput};
pub use sample::Sampler;
