//! Experiment runner, file formats and command-line front end for
//! [`algonet_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod formats;

pub use config::{Cell, ExperimentConfig};
pub use experiment::{run_experiment, summarize, ExperimentOutput, RunRecord};
