use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{PopulationModel, GROUP_ATTRIBUTE};
use crate::error::{Error, Result};
use crate::metrics::{delta_metrics, FairnessReport};
use crate::model::{Allocation, CapacityVector, Population};
use crate::policies::{allocate, PolicySpec};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::stats::Estimate;

/// Stream used to derive a replication's policy seed from its population
/// seed.
pub const POLICY_STREAM: u64 = 1;

/// Signature of the function turning an allocation into group deltas.
/// Swappable so the verification suite can be run against a faulty
/// implementation.
pub type DeltaFn<T> = fn(&Population<T>, &Allocation, &str) -> Result<FairnessReport<T>>;

/// Contents of an experiment parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub population: PopulationModel,
    pub policy: PolicySpec,
    pub replications: usize,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.population.validate()?;
        config.policy.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn run<T: Scalar>(&self) -> Result<ExperimentResult> {
        run_experiment::<T>(&self.population, &self.policy, self.replications, self.base_seed)
    }
}

/// Seeds used by replication `r`.
pub fn replication_seeds(base_seed: u64, r: usize) -> (u64, u64) {
    let population_seed = base_seed.wrapping_add(r as u64);
    (population_seed, derive_seed(population_seed, POLICY_STREAM))
}

/// Per-replication values, widened to `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub population_seed: u64,
    pub policy_seed: u64,
    pub delta_i: f64,
    pub delta_r: f64,
    pub delta_g: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_u_gap: f64,
    pub identity_residual: f64,
    /// Share of each group assigned a service achieving its `u_max`.
    pub best_service_fraction: [f64; 2],
}

/// Aggregated deltas with 95% normal confidence intervals.
///
/// `delta_g` and `delta_s` are aggregated over the replications where they
/// are defined (all utilities positive); their `replications` field says how
/// many. They are `None` when fewer than two replications qualify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub policy: String,
    pub policy_spec: PolicySpec,
    pub replications: usize,
    pub base_seed: u64,
    pub delta_i: Estimate,
    pub delta_r: Estimate,
    pub delta_g: Option<Estimate>,
    pub delta_s: Option<Estimate>,
    pub delta_u_gap: Estimate,
    pub best_service_fraction: [Estimate; 2],
    pub max_identity_residual: f64,
    pub records: Vec<ReplicationRecord>,
}

impl ExperimentResult {
    /// `-delta_r`, the regret delta oriented so that positive favors group 1.
    pub fn neg_delta_r(&self) -> Estimate {
        Estimate { mean: -self.delta_r.mean, ..self.delta_r }
    }
}

/// Samples `replications` populations and allocates each, calling `inspect`
/// on the result. Replications run in parallel; output is in replication
/// order and independent of the thread count.
///
/// Every replication's report is checked against the identity
/// `delta_i + delta_r = delta_u_gap`.
pub fn replicate<T, R, A, F>(
    model: &PopulationModel,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<T>,
    allocator: A,
    inspect: F,
) -> Result<Vec<R>>
where
    T: Scalar,
    R: Send,
    A: Fn(&Population<T>, &CapacityVector, u64) -> Result<Allocation> + Sync,
    F: Fn(usize, &Population<T>, &Allocation, &FairnessReport<T>) -> Result<R> + Sync,
{
    model.validate()?;
    (0..replications)
        .into_par_iter()
        .map(|r| {
            let (pop_seed, policy_seed) = replication_seeds(base_seed, r);
            let pop = model.sample::<T>(pop_seed)?;
            let alloc = allocator(&pop, model.capacities(), policy_seed)?;
            let report = deltas(&pop, &alloc, GROUP_ATTRIBUTE)?;
            let scale = pop.utilities().iter().fold(T::one(), |m, u| m.max(u.abs()));
            let residual = report.identity_residual();
            if !(residual <= T::identity_tolerance() * scale) {
                return Err(Error::IdentityViolation { residual: residual.as_f64() });
            }
            inspect(r, &pop, &alloc, &report)
        })
        .collect()
}

fn best_fraction<T: Scalar>(pop: &Population<T>, alloc: &Allocation, group: bool) -> Result<f64> {
    let labels = pop.attribute(GROUP_ATTRIBUTE)?;
    let (mut hits, mut size) = (0usize, 0usize);
    for (i, row) in pop.rows().enumerate() {
        if labels[i] != group {
            continue;
        }
        size += 1;
        let best = row.iter().copied().fold(T::neg_infinity(), T::max);
        if row[alloc.service(i)] == best {
            hits += 1;
        }
    }
    Ok(hits as f64 / size as f64)
}

fn estimate(values: &[f64]) -> Result<Estimate> {
    Estimate::from_samples(values).ok_or(Error::EmptySample)
}

/// Runs `policy` on `replications` sampled populations and aggregates the
/// four deltas.
pub fn run_experiment<T: Scalar>(
    model: &PopulationModel,
    policy: &PolicySpec,
    replications: usize,
    base_seed: u64,
) -> Result<ExperimentResult> {
    if replications < 2 {
        return Err(Error::InvalidParameters(format!("replications ≥ 2 required, got {replications}")));
    }
    policy.validate()?;
    let records = replicate::<T, _, _, _>(
        model,
        replications,
        base_seed,
        delta_metrics::<T>,
        |pop, caps, seed| allocate(pop, caps, policy, seed),
        |r, pop, alloc, report| {
            let (population_seed, policy_seed) = replication_seeds(base_seed, r);
            Ok(ReplicationRecord {
                replication: r,
                population_seed,
                policy_seed,
                delta_i: report.delta_i.as_f64(),
                delta_r: report.delta_r.as_f64(),
                delta_g: report.delta_g.map(Scalar::as_f64),
                delta_s: report.delta_s.map(Scalar::as_f64),
                delta_u_gap: report.delta_u_gap.as_f64(),
                identity_residual: report.identity_residual().as_f64(),
                best_service_fraction: [best_fraction(pop, alloc, false)?, best_fraction(pop, alloc, true)?],
            })
        },
    )?;

    let column = |f: fn(&ReplicationRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let defined = |f: fn(&ReplicationRecord) -> Option<f64>| {
        Estimate::from_samples(&records.iter().filter_map(f).collect::<Vec<_>>())
    };
    Ok(ExperimentResult {
        policy: policy.describe(),
        policy_spec: policy.clone(),
        replications,
        base_seed,
        delta_i: estimate(&column(|r| r.delta_i))?,
        delta_r: estimate(&column(|r| r.delta_r))?,
        delta_g: defined(|r| r.delta_g),
        delta_s: defined(|r| r.delta_s),
        delta_u_gap: estimate(&column(|r| r.delta_u_gap))?,
        best_service_fraction: [
            estimate(&column(|r| r.best_service_fraction[0]))?,
            estimate(&column(|r| r.best_service_fraction[1]))?,
        ],
        max_identity_residual: records.iter().map(|r| r.identity_residual).fold(0.0, f64::max),
        records,
    })
}
