use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Scalar};

pub const DEFAULT_GRID_POINTS: usize = 512;

/// Where to evaluate a density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec<T> {
    /// `points` evenly spaced values over `[min - 3h, max + 3h]`.
    Auto { points: usize },
    /// `points` evenly spaced values over `[lo, hi]`.
    Range { lo: T, hi: T, points: usize },
}

impl<T> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec::Auto { points: DEFAULT_GRID_POINTS }
    }
}

/// Density evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve<T> {
    pub grid: Vec<T>,
    pub density: Vec<T>,
    pub bandwidth: T,
}

impl<T: Scalar> KdeCurve<T> {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> T {
        let half = T::lit(0.5);
        ordered_sum(
            self.grid
                .windows(2)
                .zip(self.density.windows(2))
                .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * half),
        )
    }
}

fn linspace<T: Scalar>(lo: T, hi: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_count(points - 1);
            (0..points).map(|i| lo + step * T::from_count(i)).collect()
        }
    }
}

/// Evaluates `(1 / (n h)) * sum_i phi((x - x_i) / h)` at one point.
pub fn density_at<T: Scalar>(samples: &[T], bandwidth: T, x: T) -> T {
    let norm = T::one() / (T::from_count(samples.len()) * bandwidth * (T::lit(2.0) * T::PI()).sqrt());
    let half = T::lit(0.5);
    norm * ordered_sum(samples.iter().map(|&xi| {
        let z = (x - xi) / bandwidth;
        (-half * z * z).exp()
    }))
}

/// Gaussian kernel density estimate with a fixed bandwidth.
pub fn kde<T: Scalar>(samples: &[T], bandwidth: T, grid: &GridSpec<T>) -> Result<KdeCurve<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(bandwidth > T::zero() && bandwidth.is_finite()) {
        return Err(Error::InvalidParameters(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let grid = match *grid {
        GridSpec::Auto { points } => {
            let (lo, hi) = samples
                .iter()
                .fold((samples[0], samples[0]), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let pad = T::lit(3.0) * bandwidth;
            linspace(lo - pad, hi + pad, points)
        }
        GridSpec::Range { lo, hi, points } => {
            if !(lo <= hi) {
                return Err(Error::InvalidParameters("grid range must satisfy lo <= hi".into()));
            }
            linspace(lo, hi, points)
        }
    };
    let density = grid.iter().map(|&x| density_at(samples, bandwidth, x)).collect();
    Ok(KdeCurve { grid, density, bandwidth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_peak() {
        let curve = kde(&[0.0f64], 1.0, &GridSpec::Range { lo: 0.0, hi: 0.0, points: 1 }).unwrap();
        assert!((curve.density[0] - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((curve.density[0] - 0.3989).abs() < 1e-4);
    }

    #[test]
    fn symmetric_samples_give_symmetric_density() {
        let samples = [-0.7f64, 0.7];
        for &x in &[0.1, 0.5, 1.3, 2.0] {
            let l = density_at(&samples, 0.4, -x);
            let r = density_at(&samples, 0.4, x);
            assert!((l - r).abs() < 1e-15);
        }
    }

    #[test]
    fn wide_grid_integrates_to_one() {
        let samples = [0.01f64, 0.05, 0.07, 0.2, 0.31];
        let h = 0.2;
        let curve = kde(&samples, h, &GridSpec::Range { lo: -3.0, hi: 3.5, points: 4001 }).unwrap();
        assert!((curve.integral() - 1.0).abs() < 1e-3);
        let auto = kde(&samples, h, &GridSpec::default()).unwrap();
        assert_eq!(auto.grid.len(), DEFAULT_GRID_POINTS);
        assert!((auto.grid[0] - (0.01 - 0.6)).abs() < 1e-15);
        assert!(auto.integral() <= 1.0);
        assert!(auto.integral() > 0.99);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(kde::<f64>(&[], 0.2, &GridSpec::default()), Err(Error::EmptySample)));
        assert!(kde(&[1.0f64], 0.0, &GridSpec::default()).is_err());
        assert!(kde(&[1.0f64], 0.1, &GridSpec::Range { lo: 1.0, hi: 0.0, points: 3 }).is_err());
    }
}
