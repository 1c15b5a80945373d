use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::AuditConfig;
use super::dataset::AuditDataset;
use crate::error::{Error, Result};
use crate::metrics::{delta_metrics, FairnessReport, TradeOff};
use crate::model::{argmax, envelope, Allocation, Population};
use crate::stats::{kde, welch_t, GridSpec, KdeCurve, TTestResult, DEFAULT_GRID_POINTS};

/// Bandwidth of the ΔU density estimates unless overridden.
pub const DEFAULT_BANDWIDTH: f64 = 0.2;

/// Share of households whose best service is each service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub group: String,
    pub size: usize,
    pub shares: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareTable {
    pub services: Vec<String>,
    /// Group 0 then group 1.
    pub rows: Vec<ShareRow>,
}

fn share_row<'a>(group: &str, k: usize, rows: impl Iterator<Item = &'a [f64]>) -> ShareRow {
    let mut counts = vec![0usize; k];
    let mut size = 0;
    for row in rows {
        counts[argmax(row)] += 1;
        size += 1;
    }
    ShareRow { group: group.to_string(), size, shares: counts.iter().map(|&c| c as f64 / size as f64).collect() }
}

/// Best-service shares over the whole population. Ties go to the lowest
/// service index.
pub fn overall_shares(pop: &Population<f64>) -> ShareRow {
    share_row("all", pop.k(), pop.rows())
}

/// Best-service shares for the two groups of `attribute`.
pub fn best_service_shares(pop: &Population<f64>, services: &[String], attribute: &str) -> Result<ShareTable> {
    let labels = pop.attribute(attribute)?;
    let mut rows = Vec::with_capacity(2);
    for value in [false, true] {
        if !labels.contains(&value) {
            return Err(Error::EmptyGroup { attribute: attribute.to_string(), value: value as u8 });
        }
        let members = pop.rows().zip(labels).filter(|(_, &g)| g == value).map(|(r, _)| r);
        rows.push(share_row(&(value as u8).to_string(), pop.k(), members));
    }
    Ok(ShareTable { services: services.to_vec(), rows })
}

/// ΔU distribution comparison between the groups of one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaUAnalysis {
    pub sizes: [usize; 2],
    pub means: [f64; 2],
    /// Group 1 versus group 0: positive `t` means group 1 has the larger
    /// mean.
    pub welch: TTestResult<f64>,
    /// Densities of group 0 and group 1 on a shared grid.
    pub kde: [KdeCurve<f64>; 2],
}

pub fn delta_u_analysis(pop: &Population<f64>, attribute: &str, bandwidth: f64) -> Result<DeltaUAnalysis> {
    let labels = pop.attribute(attribute)?;
    let env = envelope(pop);
    let mut samples: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (&du, &g) in env.delta_u.iter().zip(labels) {
        samples[g as usize].push(du);
    }
    for (value, s) in samples.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::EmptyGroup { attribute: attribute.to_string(), value: value as u8 });
        }
    }
    let welch = welch_t(&samples[1], &samples[0])?;
    let (lo, hi) = env
        .delta_u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let grid = GridSpec::Range { lo: lo - 3.0 * bandwidth, hi: hi + 3.0 * bandwidth, points: DEFAULT_GRID_POINTS };
    Ok(DeltaUAnalysis {
        sizes: [samples[0].len(), samples[1].len()],
        means: [welch.mean_b, welch.mean_a],
        kde: [kde(&samples[0], bandwidth, &grid)?, kde(&samples[1], bandwidth, &grid)?],
        welch,
    })
}

/// Fairness deltas of the observed assignment and the metric disagreements
/// they show.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedAudit {
    pub report: FairnessReport<f64>,
    pub trade_offs: Vec<TradeOff>,
    pub trade_off_labels: Vec<String>,
}

/// Audits `alloc` as recorded; capacities are not checked.
pub fn audit_observed(
    pop: &Population<f64>,
    alloc: &Allocation,
    attribute: &str,
    tolerance: Option<f64>,
) -> Result<ObservedAudit> {
    let report = delta_metrics(pop, alloc, attribute)?;
    let trade_offs = report.trade_offs(tolerance);
    Ok(ObservedAudit {
        trade_off_labels: trade_offs.iter().map(|t| t.label().to_string()).collect(),
        trade_offs,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub group1: String,
    pub group0: String,
    pub delta_u: DeltaUAnalysis,
    pub shares: ShareTable,
    pub observed: ObservedAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub households: usize,
    pub services: Vec<String>,
    pub bandwidth: f64,
    pub fairness_tolerance: Option<f64>,
    pub overall_shares: ShareRow,
    pub comparisons: Vec<ComparisonReport>,
}

/// Runs every configured comparison on `dataset`.
pub fn run_audit(dataset: &AuditDataset, config: &AuditConfig, bandwidth: f64) -> Result<AuditReport> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameters(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let services = dataset.services().to_vec();
    let comparisons = config
        .comparisons
        .par_iter()
        .map(|c| {
            let (pop, alloc) = dataset.comparison(c)?;
            Ok(ComparisonReport {
                name: c.name.clone(),
                group1: c.group1.clone(),
                group0: c.group0.clone(),
                delta_u: delta_u_analysis(&pop, &c.name, bandwidth)?,
                shares: best_service_shares(&pop, &services, &c.name)?,
                observed: audit_observed(&pop, &alloc, &c.name, config.fairness_tolerance)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        households: dataset.len(),
        overall_shares: overall_shares(&dataset.population()?),
        services,
        bandwidth,
        fairness_tolerance: config.fairness_tolerance,
        comparisons,
    })
}
