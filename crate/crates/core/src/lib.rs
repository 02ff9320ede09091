//! Spectral analysis of equal-time cross-correlation matrices of stock returns.
//!
//! The pipeline runs prices → log returns → standardised returns →
//! correlation matrix → eigen-spectrum, compares the spectrum with the
//! Marchenko–Pastur law for uncorrelated series, splits the matrix into
//! market, group and random modes, and builds threshold networks from the
//! group part. [`factor_model`] simulates a two-factor market with known
//! structure to check those readings against ground truth.

// `!(a < b)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod decompose;
pub mod error;
pub mod factor_model;
pub mod ingest;
pub mod network;
pub mod returns;
pub mod rng;
pub mod spectrum;

pub use correlation::{correlation_matrix, element_histogram, offdiag_mean, CorrMatrix, Histogram};
pub use decompose::{auto_ng, component_histograms, decompose, ModeDecomposition};
pub use error::{Error, ErrorKind, Result};
pub use factor_model::{FactorParams, SweepConfig, SweepSurface, TrendSummary};
pub use ingest::{PriceRecord, PriceTable, SectorMap};
pub use network::{AdjacencyMatrix, ClusterReport, ClusterScan};
pub use returns::{log_returns, normalize, NormalizedReturns, ReturnMatrix};
pub use spectrum::{eigendecompose, mp_bounds, mp_density, MpLaw, Spectrum};
