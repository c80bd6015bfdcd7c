//! Ising-like opinion formation on directed networks.
//!
//! Nodes carry a spin in `{-1, 0, +1}` (blue, white, red). Two groups of
//! nodes are pinned red and blue; every other node starts white and is
//! repeatedly set to the sign of the spins pointing at it, in random
//! asynchronous order, until the configuration settles. Averaging many such
//! realizations gives each node a polarization `mu` in `[-1, 1]`.
//!
//! Modules:
//! - [`graph`]: CSR storage, edge-list ingestion and a binary cache
//! - [`pagerank`]: PageRank vector and rank index K
//! - [`engine`]: spin dynamics and seeded realizations
//! - [`stats`]: aggregation, histograms, fluctuations, correlators, fits
//! - [`distance`]: hop distances from the fixed groups
//!
//! Numeric code is generic over [`Real`] (and [`Weight`] for influence
//! scores); the aliases below pin it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod pagerank;
pub mod scalar;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, LoadReport, NodeId};
pub use scalar::{Real, Weight};

pub type PageRank = pagerank::PageRankResult<f64>;
pub type PageRankOptions64 = pagerank::PageRankOptions<f64>;
pub type NodeStats64 = stats::NodeStats<f64>;
pub type SlotSummary64 = stats::SlotSummary<f64>;
pub type FluctuationReport64 = stats::FluctuationReport<f64>;
pub type Histogram64 = stats::Histogram<f64>;
pub type SlotOutcome64 = experiment::SlotOutcome<f64>;
/// Stochastic-mode scores in exact rational arithmetic.
pub type ExactWeight = num_rational::Ratio<i64>;
