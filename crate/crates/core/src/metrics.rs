//! The four group-fairness metrics and their pairwise deltas.
//!
//! For an allocation with realized utility `a.u` and per-individual envelope
//! `(u_min, u_max)`:
//!
//! | metric      | per-individual term | baseline | normalisation  |
//! |-------------|---------------------|----------|----------------|
//! | improvement | `a.u - u_min`       | worst    | additive       |
//! | regret      | `u_max - a.u`       | best     | additive       |
//! | gain        | `a.u / u_min`       | worst    | multiplicative |
//! | shortfall   | `a.u / u_max`       | best     | multiplicative |
//!
//! Group means are sample means over the realized population. Deltas are
//! always group 1 minus group 0. A positive improvement, gain or shortfall
//! delta favors group 1; a positive regret delta favors group 0.
//!
//! Because every individual receives exactly one service, improvement plus
//! regret equals `u_max - u_min` per individual, so
//! `delta_i + delta_r` equals the difference in mean `delta_u` between the
//! groups for every allocation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{envelope, Allocation, Population, UtilityEnvelope};
use crate::scalar::{ordered_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Improvement,
    Regret,
    Gain,
    Shortfall,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Improvement, Metric::Regret, Metric::Gain, Metric::Shortfall];

    /// Whether a larger group mean is better for that group.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Regret)
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Metric::Gain | Metric::Shortfall)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Improvement => "improvement",
            Metric::Regret => "regret",
            Metric::Gain => "gain",
            Metric::Shortfall => "shortfall",
        }
    }
}

/// Which group an allocation favors under one metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Favored {
    Group0,
    Group1,
    Neither,
}

impl Favored {
    /// Reads the favored group off a group-1-minus-group-0 delta.
    pub fn from_delta<T: Scalar>(metric: Metric, delta: T) -> Self {
        let sign = if delta > T::zero() {
            1
        } else if delta < T::zero() {
            -1
        } else {
            0
        };
        let sign = if metric.higher_is_better() { sign } else { -sign };
        match sign {
            1 => Favored::Group1,
            -1 => Favored::Group0,
            _ => Favored::Neither,
        }
    }
}

/// Per-individual metric term for an individual with realized utility
/// `realized` and envelope bounds `lo`, `hi`.
fn term<T: Scalar>(metric: Metric, realized: T, lo: T, hi: T) -> T {
    match metric {
        Metric::Improvement => realized - lo,
        Metric::Regret => hi - realized,
        Metric::Gain => realized / lo,
        Metric::Shortfall => realized / hi,
    }
}

/// Per-group means of each metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans<T> {
    pub size: usize,
    pub improvement: T,
    pub regret: T,
    pub gain: Option<T>,
    pub shortfall: Option<T>,
    /// Mean of `u_max - u_min` over the group.
    pub delta_u: T,
}

impl<T: Scalar> GroupMeans<T> {
    pub fn get(&self, metric: Metric) -> Option<T> {
        match metric {
            Metric::Improvement => Some(self.improvement),
            Metric::Regret => Some(self.regret),
            Metric::Gain => self.gain,
            Metric::Shortfall => self.shortfall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub improvement: Favored,
    pub regret: Favored,
    pub gain: Option<Favored>,
    pub shortfall: Option<Favored>,
}

/// A disagreement between two metrics about the same allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TradeOff {
    /// Improvement and regret favor different groups.
    ImprovementRegret,
    /// Gain and shortfall favor different groups.
    GainShortfall,
    /// Improvement within tolerance while regret is not.
    ImprovementFairRegretUnfair,
    /// Regret within tolerance while improvement is not.
    RegretFairImprovementUnfair,
}

impl TradeOff {
    pub fn label(self) -> &'static str {
        match self {
            TradeOff::ImprovementRegret => "improvement/regret trade-off",
            TradeOff::GainShortfall => "gain/shortfall trade-off",
            TradeOff::ImprovementFairRegretUnfair => "improvement-fair but regret-unfair",
            TradeOff::RegretFairImprovementUnfair => "regret-fair but improvement-unfair",
        }
    }
}

/// Group means and group-1-minus-group-0 deltas for one binary attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport<T> {
    pub attribute: String,
    pub group0: GroupMeans<T>,
    pub group1: GroupMeans<T>,
    pub delta_i: T,
    pub delta_r: T,
    /// Present only when every utility is strictly positive.
    pub delta_g: Option<T>,
    pub delta_s: Option<T>,
    /// Mean `delta_u` of group 1 minus that of group 0.
    pub delta_u_gap: T,
    pub verdicts: Verdicts,
}

impl<T: Scalar> FairnessReport<T> {
    pub fn delta(&self, metric: Metric) -> Option<T> {
        match metric {
            Metric::Improvement => Some(self.delta_i),
            Metric::Regret => Some(self.delta_r),
            Metric::Gain => self.delta_g,
            Metric::Shortfall => self.delta_s,
        }
    }

    /// `|delta_i + delta_r - delta_u_gap|`, zero in exact arithmetic.
    pub fn identity_residual(&self) -> T {
        (self.delta_i + self.delta_r - self.delta_u_gap).abs()
    }

    /// Whether the allocation satisfies `metric` fairness up to `tolerance`.
    /// `None` when the metric is undefined for this population.
    pub fn satisfies(&self, metric: Metric, tolerance: T) -> Option<bool> {
        self.delta(metric).map(|d| d.abs() <= tolerance)
    }

    /// Metric disagreements. Sign disagreements are always reported; the
    /// fair/unfair flags need a tolerance.
    pub fn trade_offs(&self, tolerance: Option<T>) -> Vec<TradeOff> {
        let mut flags = Vec::new();
        if disagree(self.verdicts.improvement, self.verdicts.regret) {
            flags.push(TradeOff::ImprovementRegret);
        }
        if let (Some(g), Some(s)) = (self.verdicts.gain, self.verdicts.shortfall) {
            if disagree(g, s) {
                flags.push(TradeOff::GainShortfall);
            }
        }
        if let Some(tol) = tolerance {
            let i_fair = self.delta_i.abs() <= tol;
            let r_fair = self.delta_r.abs() <= tol;
            if i_fair && !r_fair {
                flags.push(TradeOff::ImprovementFairRegretUnfair);
            }
            if r_fair && !i_fair {
                flags.push(TradeOff::RegretFairImprovementUnfair);
            }
        }
        flags
    }
}

fn disagree(a: Favored, b: Favored) -> bool {
    matches!((a, b), (Favored::Group0, Favored::Group1) | (Favored::Group1, Favored::Group0))
}

fn group_mask<'a, T: Scalar>(
    pop: &'a Population<T>,
    attribute: &str,
    value: bool,
) -> Result<&'a [bool]> {
    let mask = pop.attribute(attribute)?;
    if !mask.contains(&value) {
        return Err(Error::EmptyGroup { attribute: attribute.to_string(), value: value as u8 });
    }
    Ok(mask)
}

fn group_mean_of<T: Scalar>(
    metric: Metric,
    env: &UtilityEnvelope<T>,
    realized: &[T],
    mask: &[bool],
    value: bool,
) -> T {
    let mut count = 0usize;
    let sum = ordered_sum(mask.iter().enumerate().filter(|(_, &g)| g == value).map(|(i, _)| {
        count += 1;
        term(metric, realized[i], env.u_min[i], env.u_max[i])
    }));
    sum / T::from_count(count)
}

fn metric_mean<T: Scalar>(
    metric: Metric,
    pop: &Population<T>,
    alloc: &Allocation,
    attribute: &str,
    value: bool,
) -> Result<T> {
    alloc.validate_shape(pop)?;
    if metric.is_multiplicative() && !pop.all_positive() {
        return Err(Error::RatioUndefined);
    }
    let mask = group_mask(pop, attribute, value)?;
    let env = envelope(pop);
    Ok(group_mean_of(metric, &env, &alloc.realized(pop), mask, value))
}

/// Mean of `a.u - u_min` over the individuals whose `attribute` equals
/// `group_value`.
pub fn improvement_mean<T: Scalar>(
    pop: &Population<T>,
    alloc: &Allocation,
    attribute: &str,
    group_value: bool,
) -> Result<T> {
    metric_mean(Metric::Improvement, pop, alloc, attribute, group_value)
}

/// Mean of `u_max - a.u` over the group.
pub fn regret_mean<T: Scalar>(
    pop: &Population<T>,
    alloc: &Allocation,
    attribute: &str,
    group_value: bool,
) -> Result<T> {
    metric_mean(Metric::Regret, pop, alloc, attribute, group_value)
}

/// Mean of `a.u / u_min` over the group. Needs strictly positive utilities.
pub fn gain_mean<T: Scalar>(
    pop: &Population<T>,
    alloc: &Allocation,
    attribute: &str,
    group_value: bool,
) -> Result<T> {
    metric_mean(Metric::Gain, pop, alloc, attribute, group_value)
}

/// Mean of `a.u / u_max` over the group. Needs strictly positive utilities.
pub fn shortfall_mean<T: Scalar>(
    pop: &Population<T>,
    alloc: &Allocation,
    attribute: &str,
    group_value: bool,
) -> Result<T> {
    metric_mean(Metric::Shortfall, pop, alloc, attribute, group_value)
}

fn group_means<T: Scalar>(
    env: &UtilityEnvelope<T>,
    realized: &[T],
    mask: &[bool],
    value: bool,
    multiplicative: bool,
) -> GroupMeans<T> {
    let mean = |metric| group_mean_of(metric, env, realized, mask, value);
    let members: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] == value).collect();
    let delta_u = ordered_sum(members.iter().map(|&i| env.delta_u[i])) / T::from_count(members.len());
    GroupMeans {
        size: members.len(),
        improvement: mean(Metric::Improvement),
        regret: mean(Metric::Regret),
        gain: multiplicative.then(|| mean(Metric::Gain)),
        shortfall: multiplicative.then(|| mean(Metric::Shortfall)),
        delta_u,
    }
}

/// Computes all four group means and deltas for `attribute`.
///
/// Gain and shortfall are `None` when some utility is not strictly positive.
/// Capacities are not checked; observed allocations are audited as-is.
pub fn delta_metrics<T: Scalar>(
    pop: &Population<T>,
    alloc: &Allocation,
    attribute: &str,
) -> Result<FairnessReport<T>> {
    alloc.validate_shape(pop)?;
    let env = envelope(pop);
    delta_metrics_with(pop, &env, alloc, attribute)
}

/// [`delta_metrics`] with a precomputed envelope of `pop`.
pub fn delta_metrics_with<T: Scalar>(
    pop: &Population<T>,
    env: &UtilityEnvelope<T>,
    alloc: &Allocation,
    attribute: &str,
) -> Result<FairnessReport<T>> {
    let mask = group_mask(pop, attribute, false)?;
    group_mask(pop, attribute, true)?;
    let realized = alloc.realized(pop);
    let multiplicative = env.ratio_r.is_some();
    let group0 = group_means(env, &realized, mask, false, multiplicative);
    let group1 = group_means(env, &realized, mask, true, multiplicative);

    let delta_i = group1.improvement - group0.improvement;
    let delta_r = group1.regret - group0.regret;
    let delta_g = group1.gain.zip(group0.gain).map(|(a, b)| a - b);
    let delta_s = group1.shortfall.zip(group0.shortfall).map(|(a, b)| a - b);
    let verdicts = Verdicts {
        improvement: Favored::from_delta(Metric::Improvement, delta_i),
        regret: Favored::from_delta(Metric::Regret, delta_r),
        gain: delta_g.map(|d| Favored::from_delta(Metric::Gain, d)),
        shortfall: delta_s.map(|d| Favored::from_delta(Metric::Shortfall, d)),
    };
    Ok(FairnessReport {
        attribute: attribute.to_string(),
        delta_u_gap: group1.delta_u - group0.delta_u,
        group0,
        group1,
        delta_i,
        delta_r,
        delta_g,
        delta_s,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn pop(rows: &[Vec<f64>], groups: &[bool]) -> Population<f64> {
        Population::from_rows(rows, BTreeMap::from([("s".to_string(), groups.to_vec())])).unwrap()
    }

    fn alloc1(services: &[usize]) -> Allocation {
        Allocation::from_one_based(services).unwrap()
    }

    #[test]
    fn worst_service_gives_zero_improvement() {
        let p = pop(&[vec![0.1, 0.3], vec![0.4, 0.2]], &[false, true]);
        let a = alloc1(&[1, 2]);
        assert_eq!(improvement_mean(&p, &a, "s", false).unwrap(), 0.0);
        assert_eq!(improvement_mean(&p, &a, "s", true).unwrap(), 0.0);
        assert_eq!(gain_mean(&p, &a, "s", true).unwrap(), 1.0);
    }

    #[test]
    fn single_member_values() {
        let p = pop(&[vec![0.2, 0.6]], &[true]);
        assert!((improvement_mean(&p, &alloc1(&[2]), "s", true).unwrap() - 0.4).abs() < 1e-15);
        assert!((regret_mean(&p, &alloc1(&[1]), "s", true).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(regret_mean(&p, &alloc1(&[2]), "s", true).unwrap(), 0.0);

        let q = pop(&[vec![0.2, 0.4]], &[true]);
        assert_eq!(gain_mean(&q, &alloc1(&[2]), "s", true).unwrap(), 2.0);
        assert_eq!(shortfall_mean(&q, &alloc1(&[1]), "s", true).unwrap(), 0.5);
        assert_eq!(shortfall_mean(&q, &alloc1(&[2]), "s", true).unwrap(), 1.0);
    }

    #[test]
    fn empty_group_is_an_error() {
        let p = pop(&[vec![0.2, 0.6]], &[true]);
        let err = improvement_mean(&p, &alloc1(&[1]), "s", false).unwrap_err();
        assert!(matches!(err, Error::EmptyGroup { value: 0, .. }));
        assert!(delta_metrics(&p, &alloc1(&[1]), "s").is_err());
    }

    #[test]
    fn multiplicative_needs_positive_utilities() {
        let p = pop(&[vec![-0.2, 0.6], vec![0.1, 0.2]], &[true, false]);
        let a = alloc1(&[1, 1]);
        assert!(matches!(gain_mean(&p, &a, "s", true), Err(Error::RatioUndefined)));
        assert!(matches!(shortfall_mean(&p, &a, "s", false), Err(Error::RatioUndefined)));
        let report = delta_metrics(&p, &a, "s").unwrap();
        assert!(report.delta_g.is_none() && report.delta_s.is_none());
        assert!(report.group0.gain.is_none());
    }

    #[test]
    fn hand_enumerated_deltas() {
        // group 0: u=(0.1,0.3) on service 2; group 1: u=(0.1,0.5) on service 1
        let p = pop(&[vec![0.1, 0.3], vec![0.1, 0.5]], &[false, true]);
        let r = delta_metrics(&p, &alloc1(&[2, 1]), "s").unwrap();
        assert!((r.delta_i - -0.2).abs() < 1e-15);
        assert!((r.delta_r - 0.4).abs() < 1e-15);
        assert!((r.delta_u_gap - 0.2).abs() < 1e-15);
        assert!(r.identity_residual() < 1e-15);
        assert_eq!(r.verdicts.improvement, Favored::Group0);
        assert_eq!(r.verdicts.regret, Favored::Group0);
        // gain: 1.0 - 3.0, shortfall: 0.2 - 1.0
        assert!((r.delta_g.unwrap() - -2.0).abs() < 1e-12);
        assert!((r.delta_s.unwrap() - -0.8).abs() < 1e-12);
    }

    #[test]
    fn three_individual_fixture_matches_brute_force() {
        let rows = vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.4], vec![0.3, 0.3, 0.9]];
        let p = pop(&rows, &[true, false, true]);
        let a = alloc1(&[3, 3, 1]);
        // group 1 = {0, 2}: realized 0.3, 0.3; minima 0.2, 0.3; maxima 0.5, 0.9
        let imp1 = ((0.3 - 0.2) + (0.3 - 0.3)) / 2.0;
        let reg1 = ((0.5 - 0.3) + (0.9 - 0.3)) / 2.0;
        let gain1 = (0.3 / 0.2 + 0.3 / 0.3) / 2.0;
        let short1 = (0.3 / 0.5 + 0.3 / 0.9) / 2.0;
        assert!((improvement_mean(&p, &a, "s", true).unwrap() - imp1).abs() < 1e-15);
        assert!((regret_mean(&p, &a, "s", true).unwrap() - reg1).abs() < 1e-15);
        assert!((gain_mean(&p, &a, "s", true).unwrap() - gain1).abs() < 1e-15);
        assert!((shortfall_mean(&p, &a, "s", true).unwrap() - short1).abs() < 1e-15);
        // group 0 = {1}: realized 0.4, min 0.1, max 0.6
        assert!((improvement_mean(&p, &a, "s", false).unwrap() - 0.3).abs() < 1e-15);
        assert!((gain_mean(&p, &a, "s", false).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn identical_groups_have_zero_deltas() {
        let rows = vec![vec![0.2, 0.5], vec![0.4, 0.3], vec![0.2, 0.5], vec![0.4, 0.3]];
        let p = pop(&rows, &[false, false, true, true]);
        let r = delta_metrics(&p, &alloc1(&[1, 1, 1, 1]), "s").unwrap();
        assert_eq!((r.delta_i, r.delta_r, r.delta_g, r.delta_s), (0.0, 0.0, Some(0.0), Some(0.0)));
        assert_eq!(r.verdicts.improvement, Favored::Neither);
        assert!(r.trade_offs(None).is_empty());
    }

    #[test]
    fn regret_sign_convention() {
        assert_eq!(Favored::from_delta(Metric::Regret, 0.1), Favored::Group0);
        assert_eq!(Favored::from_delta(Metric::Regret, -0.1), Favored::Group1);
        assert_eq!(Favored::from_delta(Metric::Improvement, 0.1), Favored::Group1);
        assert_eq!(Favored::from_delta(Metric::Shortfall, -0.1), Favored::Group0);
    }

    #[test]
    fn improvement_and_regret_can_disagree() {
        // group 0 has the larger spread and sits one step below its best;
        // group 1 gets its best service.
        let rows = vec![vec![0.0, 0.5, 0.6], vec![0.0, 0.1, 0.2]];
        let p = pop(&rows, &[false, true]);
        let r = delta_metrics(&p, &alloc1(&[2, 3]), "s").unwrap();
        assert!((r.delta_i - -0.3).abs() < 1e-15);
        assert!((r.delta_r - -0.1).abs() < 1e-15);
        assert_eq!(r.verdicts.improvement, Favored::Group0);
        assert_eq!(r.verdicts.regret, Favored::Group1);
        assert_eq!(r.trade_offs(None), vec![TradeOff::ImprovementRegret]);
    }

    #[test]
    fn tolerance_flags() {
        let rows = vec![vec![0.1, 0.3], vec![0.1, 0.5]];
        let p = pop(&rows, &[false, true]);
        // both on service 2: improvement 0.2 vs 0.4; regret 0 vs 0
        let r = delta_metrics(&p, &alloc1(&[2, 2]), "s").unwrap();
        assert_eq!(r.trade_offs(Some(1e-9)), vec![TradeOff::RegretFairImprovementUnfair]);
        assert_eq!(r.satisfies(Metric::Regret, 1e-9), Some(true));
        assert_eq!(r.satisfies(Metric::Improvement, 1e-9), Some(false));
    }

    #[test]
    fn works_in_single_precision() {
        let groups = BTreeMap::from([("s".to_string(), vec![false, true])]);
        let p = Population::<f32>::from_rows(&[vec![0.1, 0.3], vec![0.1, 0.5]], groups).unwrap();
        let r = delta_metrics(&p, &alloc1(&[2, 1]), "s").unwrap();
        assert!((r.delta_i + 0.2).abs() < 1e-6);
        assert!(r.identity_residual() <= f32::identity_tolerance());
    }
}
