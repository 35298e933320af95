//! Experiment harness for the lifted quadrotor model: configuration,
//! subcommands, checks, and plotting. The binary (`liftquad`) is a thin
//! argument parser over [`commands`]; the pieces are exposed as a library
//! so the acceptance tests can drive them directly.

pub mod checks;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod plot;

pub use config::ExperimentConfig;
