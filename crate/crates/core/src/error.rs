use std::path::PathBuf;

use thiserror::Error;

/// A single rejected row from CSV ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the source file (the header is line 1).
    pub line: usize,
    pub kind: RowErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowErrorKind {
    /// A probability outside `[0, 1]` or a non-binary group value.
    RangeViolation,
    /// An observed service that names no configured service.
    LabelViolation,
    /// A field that could not be parsed at all.
    Malformed,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.kind {
            RowErrorKind::RangeViolation => "range-violation",
            RowErrorKind::LabelViolation => "label-violation",
            RowErrorKind::Malformed => "malformed",
        };
        write!(f, "{tag}(line {}): {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("unknown group attribute `{0}`")]
    UnknownAttribute(String),

    #[error("empty-group: attribute `{attribute}` has no individual with value {value}")]
    EmptyGroup { attribute: String, value: u8 },

    #[error("ratio-undefined: multiplicative metrics need strictly positive utilities")]
    RatioUndefined,

    #[error("infeasible: capacities sum to {capacity} but {demand} individuals need a service")]
    Infeasible { capacity: usize, demand: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("no-heterogeneity: mean delta-u gap {gap:.6} (95% half-width {half_width:.6}) is not positive")]
    NoHeterogeneity { gap: f64, half_width: f64 },

    #[error("empty-sample")]
    EmptySample,

    #[error("degenerate-variance: {0}")]
    DegenerateVariance(String),

    #[error("identity violated: |dI + dR - dU gap| = {residual:e}")]
    IdentityViolation { residual: f64 },

    #[error("schema-mismatch: {0}")]
    SchemaMismatch(String),

    #[error("{} row error(s) in input:\n{}", .0.len(), format_rows(.0))]
    Rows(Vec<RowError>),

    #[error("invalid group expression `{expr}`: {message}")]
    Expression { expr: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_rows(rows: &[RowError]) -> String {
    rows.iter().map(|r| format!("  {r}")).collect::<Vec<_>>().join("\n")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
