//! Routing and wavelength-channel allocation for a single broadband
//! degenerate EPR-pair source feeding a fiber network.
//!
//! The pipeline is: [`spectrum`] gives the per-channel generation rates,
//! [`netgraph`] turns a [`topology::PhysicalTopology`] and a source
//! placement into a port-level loss graph, [`routing`] finds the
//! minimum-loss edge-disjoint route pair for every node pair, and
//! [`allocation`] partitions the channels among the pairs under max-min
//! fairness. [`metrics`] and [`harness`] evaluate and sweep the result.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod netgraph;
pub mod numeric;
pub mod routing;
pub mod spectrum;
pub mod topology;

pub use error::{Error, Result};
