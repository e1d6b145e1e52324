//! Kernels for networks of randomly generated Turing machines playing the
//! busy-beaver imitation game under SIS contagion on Barabási-Albert graphs.
//!
//! Everything here is `no_std` + `alloc` and driven by caller-supplied RNG
//! streams, so identical seeds give identical results on every platform.
//! File formats, the experiment runner and the CLI live in the `algonet`
//! crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod machines;
pub mod seed;

pub use analysis::{EmergenceReport, StationarityResult};
pub use dynamics::{EpidemicParams, ImitationSource, NodeState, SimState, Status, Trajectory};
pub use error::Error;
pub use graph::{DegreeFit, Graph, NetworkParams};
pub use machines::{Machine, MachineOutcome, OmegaEstimate, OmegaMethod, ProgramEncoding};
