use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::expr::GroupExpr;
use crate::error::{Error, Result};

pub const AUDIT_PRESET_JSON: &str = include_str!("../../presets/audit.json");

/// One service and the column holding its re-entry probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceColumn {
    pub name: String,
    /// Defaults to `p_<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl ServiceColumn {
    pub fn column_name(&self) -> String {
        self.column.clone().unwrap_or_else(|| format!("p_{}", self.name))
    }
}

/// A pair of groups to compare. Households matching neither expression are
/// left out of the comparison; matching both is an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub group1: String,
    pub group0: String,
}

impl Comparison {
    pub fn parsed(&self) -> Result<(GroupExpr, GroupExpr)> {
        Ok((self.group1.parse()?, self.group0.parse()?))
    }
}

fn default_id() -> String {
    "id".into()
}

fn default_observed() -> String {
    "observed".into()
}

fn default_delimiter() -> char {
    ','
}

/// Schema of the input file and the comparisons to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub services: Vec<ServiceColumn>,
    #[serde(default = "default_id")]
    pub id_column: String,
    #[serde(default = "default_observed")]
    pub observed_column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Group columns to read. When absent, every column not otherwise used
    /// is a group column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_columns: Option<Vec<String>>,
    pub comparisons: Vec<Comparison>,
    /// When set, deltas within this distance of zero count as fair and the
    /// fair/unfair trade-off flags are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness_tolerance: Option<f64>,
}

impl AuditConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Comparisons for the homeless-services dataset layout
    /// (`p_TH`, `p_RRH`, `p_ES`).
    pub fn preset() -> Self {
        Self::from_json(AUDIT_PRESET_JSON).expect("bundled preset parses")
    }

    pub fn service_names(&self) -> Vec<String> {
        self.services.iter().map(|s| s.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidParameters(m));
        if self.services.is_empty() {
            return invalid("at least one service is required".into());
        }
        let names: BTreeSet<_> = self.services.iter().map(|s| &s.name).collect();
        if names.len() != self.services.len() {
            return invalid("service names must be distinct".into());
        }
        if !self.delimiter.is_ascii() {
            return invalid(format!("delimiter `{}` is not ASCII", self.delimiter));
        }
        if let Some(t) = self.fairness_tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return invalid(format!("fairness_tolerance must be non-negative, got {t}"));
            }
        }
        let mut seen = BTreeSet::new();
        for c in &self.comparisons {
            if !seen.insert(&c.name) {
                return invalid(format!("duplicate comparison name `{}`", c.name));
            }
            c.parsed()?;
        }
        Ok(())
    }
}
