//! Statistics used by the audit: Gaussian KDE, Welch's t-test and
//! descriptive summaries.

mod kde;
pub mod special;
mod ttest;

pub use kde::{kde, GridSpec, KdeCurve, DEFAULT_GRID_POINTS};
pub use ttest::{welch_t, TTestResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Scalar};

/// Count, mean, sample variance and range of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary<T> {
    pub n: usize,
    pub mean: T,
    /// Unbiased sample variance; zero for a single observation.
    pub variance: T,
    pub sd: T,
    pub min: T,
    pub max: T,
}

pub fn summarize<T: Scalar>(samples: &[T]) -> Result<Summary<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len();
    let mean = ordered_sum(samples.iter().copied()) / T::from_count(n);
    let variance = if n > 1 {
        ordered_sum(samples.iter().map(|&x| (x - mean) * (x - mean))) / T::from_count(n - 1)
    } else {
        T::zero()
    };
    let (min, max) = samples
        .iter()
        .fold((samples[0], samples[0]), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(Summary { n, mean, variance, sd: variance.sqrt(), min, max })
}

/// Mean with a normal-approximation 95% confidence half-width
/// `1.96 * sd / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci_half_width: f64,
    pub replications: usize,
}

pub const Z_95: f64 = 1.96;

impl Estimate {
    /// Needs at least two values.
    pub fn from_samples(values: &[f64]) -> Option<Self> {
        if values.len() < 2 {
            return None;
        }
        let s = summarize(values).ok()?;
        Some(Self { mean: s.mean, ci_half_width: Z_95 * s.sd / (s.n as f64).sqrt(), replications: s.n })
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_half_width
    }

    /// Whether the confidence interval lies strictly on one side of zero.
    pub fn excludes_zero(&self) -> bool {
        self.lower() > 0.0 || self.upper() < 0.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower() <= value && value <= self.upper()
    }

    /// +1 or -1 when the interval excludes zero, else 0.
    pub fn significant_sign(&self) -> i8 {
        if self.lower() > 0.0 {
            1
        } else if self.upper() < 0.0 {
            -1
        } else {
            0
        }
    }
}
