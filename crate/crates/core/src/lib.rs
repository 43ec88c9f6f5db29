//! Simulation and analysis toolkit for quantum annealing with per-qubit
//! anneal offsets.
//!
//! The crate covers the full desk workflow: generate benchmark Ising
//! instances on Chimera graphs or chains, compute per-qubit offsets from
//! averaged effective fields, simulate the anneal (exact state-vector
//! evolution for small systems, spin-vector Monte Carlo at hardware scale),
//! analyze alternating-sectors chains through their free-fermion spectra,
//! and reduce run outcomes to success-probability and time-to-solution
//! statistics.

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod fermion;
pub mod generators;
pub mod graph;
pub mod heuristic;
pub mod ising;
pub mod oracle;
pub mod schedule;

pub use error::{CoreError, Result};
pub use graph::{build_chimera, ChimeraGraph};
pub use ising::{InstanceMetadata, IsingInstance, ProblemClass, SpinConfig};
pub use oracle::{enumerate_ground_states, GroundStateSet, DEFAULT_ENUMERATION_CAP};
pub use schedule::{AnnealSchedule, CoefficientSet, OffsetVector};
