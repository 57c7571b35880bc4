//! Facility location on unit disk graphs.
//!
//! The crate contains the building blocks of a quasi-polynomial approximation
//! scheme for uncapacitated facility location on unit disk graphs, an exact
//! subset-enumeration oracle, a primal-dual baseline and the bounded-region
//! scheme used when client/facility distances are small:
//!
//! * [`udg`]: unit disk graphs and their weighted and hop metrics.
//! * [`fl`]: instances, solutions, evaluation and the exact oracle.
//! * [`reduction`]: baseline, client filtering and aspect-ratio partition.
//! * [`chop`]: hop-band chopping and layering into independent sub-instances.
//! * [`separator`]: balanced partly separators made of two hop-shortest paths.
//! * [`net`] and [`decomp`]: the 1/8-net and the portal decomposition tree.
//! * [`dp`]: the portal dynamic program.
//! * [`boxptas`]: the bounded-region scheme with shifted grids.
//! * [`pipeline`]: end-to-end orchestration with per-stage diagnostics.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boxptas;
pub mod chop;
pub mod decomp;
pub mod dp;
pub mod error;
pub mod fl;
pub mod net;
pub mod pipeline;
pub mod reduction;
pub mod separator;
pub mod udg;

pub use error::{Error, Result};
pub use fl::{evaluate, exact_solve, FLInstance, FLSolution, Site};
pub use udg::{build_udg, Point, UnitDiskGraph};

/// Seeded generator used throughout for reproducible runs.
pub type SeededRng = rand_chacha::ChaCha8Rng;
