//! Group fairness metrics for capacitated allocation of heterogeneous
//! services.
//!
//! An allocation assigns each of `N` individuals to one of `K` services with
//! capacities. For each individual, `u_min` and `u_max` are their worst and
//! best service utilities. Four metrics compare realized utility `a.u`
//! between two groups:
//!
//! | metric      | per individual      | better |
//! |-------------|---------------------|--------|
//! | improvement | `a.u - u_min`       | higher |
//! | regret      | `u_max - a.u`       | lower  |
//! | gain        | `a.u / u_min`       | higher |
//! | shortfall   | `a.u / u_max`       | higher |
//!
//! Deltas are always group 1 minus group 0, and
//! `ΔI + ΔR = mean ΔU(group 1) - mean ΔU(group 0)` for every allocation.
//!
//! ```
//! use std::collections::BTreeMap;
//! use fairalloc::{delta_metrics, Allocation, PopulationF64};
//!
//! let pop = PopulationF64::from_rows(
//!     &[vec![0.2, 0.5], vec![0.1, 0.9]],
//!     BTreeMap::from([("g".to_string(), vec![false, true])]),
//! )
//! .unwrap();
//! let report = delta_metrics(&pop, &Allocation::new(vec![1, 0]), "g").unwrap();
//! assert!((report.delta_i + 0.3).abs() < 1e-12);
//! assert!((report.delta_i + report.delta_r - report.delta_u_gap).abs() < 1e-12);
//! ```
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases name the common instantiations.

pub mod audit;
pub mod error;
pub mod metrics;
pub mod model;
pub mod output;
pub mod policies;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod stats;
pub mod transport;

pub use error::{Error, Result, RowError, RowErrorKind};
pub use metrics::{delta_metrics, Favored, FairnessReport, GroupMeans, Metric, TradeOff};
pub use model::{envelope, Allocation, CapacityVector, Population, UtilityEnvelope};
pub use policies::{allocate, PolicySpec};
pub use scalar::Scalar;
pub use simulate::{run_experiment, ExperimentConfig, ExperimentResult};
pub use stats::Estimate;

pub type PopulationF64 = Population<f64>;
pub type PopulationF32 = Population<f32>;
pub type UtilityEnvelopeF64 = UtilityEnvelope<f64>;
pub type UtilityEnvelopeF32 = UtilityEnvelope<f32>;
pub type FairnessReportF64 = FairnessReport<f64>;
pub type FairnessReportF32 = FairnessReport<f32>;
pub type GroupMeansF64 = GroupMeans<f64>;
pub type GroupMeansF32 = GroupMeans<f32>;
