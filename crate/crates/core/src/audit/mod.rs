//! Audit of an observed allocation from household records: ΔU
//! distributions, best-service shares and fairness deltas per group pair.

mod analysis;
mod config;
mod dataset;
pub mod expr;

use std::path::Path;

pub use analysis::{
    audit_observed, best_service_shares, delta_u_analysis, overall_shares, run_audit, AuditReport,
    ComparisonReport, DeltaUAnalysis, ObservedAudit, ShareRow, ShareTable, DEFAULT_BANDWIDTH,
};
pub use config::{AuditConfig, Comparison, ServiceColumn, AUDIT_PRESET_JSON};
pub use dataset::{ingest_csv, ingest_reader, AuditDataset};
pub use expr::GroupExpr;

use crate::error::Result;
use crate::output::{csv_bytes, write_atomic, write_json};

/// File-name-safe version of a comparison name.
fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

impl AuditReport {
    /// Writes `report.json`, `shares.csv` and one `kde_<comparison>_<group>.csv`
    /// per group into `dir`. Returns the file names written.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
        let mut written = vec!["report.json".to_string()];
        write_json(&dir.join("report.json"), self)?;

        let mut header = vec!["comparison", "group", "size"];
        header.extend(self.services.iter().map(String::as_str));
        let share_line = |comparison: &str, row: &ShareRow| {
            let mut line = vec![comparison.to_string(), row.group.clone(), row.size.to_string()];
            line.extend(row.shares.iter().map(f64::to_string));
            line
        };
        let mut rows = vec![share_line("overall", &self.overall_shares)];
        for c in &self.comparisons {
            rows.extend(c.shares.rows.iter().map(|r| share_line(&c.name, r)));
        }
        write_atomic(&dir.join("shares.csv"), &csv_bytes(&header, rows)?)?;
        written.push("shares.csv".into());

        for c in &self.comparisons {
            for (g, curve) in c.delta_u.kde.iter().enumerate() {
                let name = format!("kde_{}_{g}.csv", slug(&c.name));
                let rows = curve.grid.iter().zip(&curve.density).map(|(x, d)| vec![x.to_string(), d.to_string()]);
                write_atomic(&dir.join(&name), &csv_bytes(&["delta_u", "density"], rows)?)?;
                written.push(name);
            }
        }
        Ok(written)
    }
}
