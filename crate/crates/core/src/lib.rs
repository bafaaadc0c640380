//! Aligned-correlation lead-lag estimation.
//!
//! The crate computes an endpoint-relaxed, correlation-cost alignment between two
//! time series and the distance derived from it, together with two baseline
//! lead-lag estimators (DTW and the thermal optimal path), synthetic benchmark
//! generators with known lag schedules, the significance and forecast protocols
//! used to compare estimators, and a minimum-spanning-tree network pipeline over
//! pairwise distance matrices.
//!
//! Data-parallel loops (per-window alignments, pairwise matrices, seed sweeps)
//! run on rayon when the `parallel` feature is enabled (the default) and fall
//! back to plain iteration otherwise. See [`par::Execution`].

// NaN-rejecting `!(v > 0.0)` guards and index loops over square matrices are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod alignment;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod network;
pub mod par;
pub mod series;
pub mod synthetic;

pub use alignment::{aligned_correlation, AcConfig, AcResult, AlignmentPath, Candidate, LagAxis, LeadLagProfile, Psi};
pub use error::{Error, Result};
pub use series::{normalize, pearson, returns, uncentered_corr, ReturnSeries, TimeSeries};
