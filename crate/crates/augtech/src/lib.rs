//! Measurement of factor-augmenting technologies from production-side panel data.
//!
//! The crate implements a complete pipeline for studying directed (factor-augmenting)
//! technological change in country-sector panels with capital, labor, energy, and
//! optionally material inputs:
//!
//! * [`panel`] — ingestion of component-level panel data, rental prices of capital,
//!   and composition-adjusted input prices/quantities.
//! * [`ces`] — CES production-function kernels: evaluation, inversion of first-order
//!   conditions into factor-augmenting technology levels, and derived statistics
//!   such as energy-requirement ratios.
//! * [`estimator`] — system GMM estimation of substitution elasticities with
//!   shift-share instruments, cluster-robust inference, and the usual diagnostics
//!   (Hansen J, Wald, first-stage F).
//! * [`accounting`] — exact Shapley decomposition of output growth into input and
//!   technology contributions.
//! * [`frontier`] — a static technology-choice model in which firms pick a
//!   technology mix on a frontier; closed forms plus a numerical oracle.
//! * [`analysis`] — convergence regressions, correlations with p-values, ten-year
//!   changes, and LOWESS smoothing for descriptive work.
//! * [`synth`] — a seeded synthetic-panel generator with known ground truth,
//!   endogenous input choices, and instrument-relevant donor-sector shocks.
//! * [`pipeline`] — configuration-driven orchestration of the full artifact set.

pub mod accounting;
pub mod analysis;
pub mod ces;
mod error;
pub mod estimator;
pub mod frontier;
pub mod panel;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
