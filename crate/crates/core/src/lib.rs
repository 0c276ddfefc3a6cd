//! Learning the topology of an order-2 simplicial complex (edges and filled
//! triangles) from smooth node signals and partially observed edge flows.
//!
//! The main entry point is [`greedy::run_greedy_scl`], a block-coordinate
//! scheme alternating exact greedy triangle selection, exact greedy edge
//! selection, and closed-form edge-flow interpolation. [`synth`] generates
//! synthetic instances with known ground truth, [`baselines`] holds the
//! comparison methods, and [`sweep`] drives the noise and observation sweeps.

pub mod baselines;
pub mod config;
pub mod error;
pub mod eval;
pub mod greedy;
pub mod io;
pub mod linalg;
pub mod plot;
pub mod sweep;
pub mod synth;
pub mod topology;

pub use error::{Result, SclError};
pub use topology::{ClosureReport, ComplexSkeleton, HodgeBasis, HodgeParts, Selection};
