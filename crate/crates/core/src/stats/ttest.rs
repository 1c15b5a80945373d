use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::summarize;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Welch's unequal-variance two-sample t-test (two-sided).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult<T> {
    pub t_statistic: T,
    /// Welch-Satterthwaite degrees of freedom.
    pub degrees_of_freedom: T,
    pub p_value: T,
    pub mean_a: T,
    pub mean_b: T,
    pub n_a: usize,
    pub n_b: usize,
}

pub fn welch_t<T: Scalar>(samples_a: &[T], samples_b: &[T]) -> Result<TTestResult<T>> {
    if samples_a.len() < 2 || samples_b.len() < 2 {
        return Err(Error::DegenerateVariance(format!(
            "need at least two samples per group, got {} and {}",
            samples_a.len(),
            samples_b.len()
        )));
    }
    let a = summarize(samples_a)?;
    let b = summarize(samples_b)?;
    let va = a.variance / T::from_count(a.n);
    let vb = b.variance / T::from_count(b.n);
    let se2 = va + vb;
    if !(se2 > T::zero()) {
        return Err(Error::DegenerateVariance("both groups have zero variance".into()));
    }
    let t = (a.mean - b.mean) / se2.sqrt();
    let df = se2 * se2 / (va * va / T::from_count(a.n - 1) + vb * vb / T::from_count(b.n - 1));
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: student_t_two_sided(t, df),
        mean_a: a.mean,
        mean_b: b.mean,
        n_a: a.n,
        n_b: b.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups() {
        let x = [0.1, 0.4, 0.2, 0.9];
        let r = welch_t(&x, &x).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn separated_groups() {
        let a = [0.0, 1e-6, -1e-6, 2e-6];
        let b = [1.0, 1.0 + 1e-6, 1.0 - 1e-6, 1.0 + 2e-6];
        let r = welch_t(&a, &b).unwrap();
        assert!(r.t_statistic < -1e5);
        assert!(r.p_value < 1e-12);
    }

    #[test]
    fn textbook_statistic_and_df() {
        let r = welch_t(&[1.0f64, 2.0, 3.0, 4.0, 5.0], &[3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert!((r.t_statistic + 2.0).abs() < 1e-14);
        assert!((r.degrees_of_freedom - 8.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(welch_t(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::DegenerateVariance(_))));
        assert!(matches!(welch_t(&[1.0], &[2.0, 3.0]), Err(Error::DegenerateVariance(_))));
    }
}
