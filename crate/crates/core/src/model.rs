//! Domain types: populations, capacities, allocations and utility envelopes.
//!
//! Service indices are 0-based inside the library. File formats and the CLI
//! use 1-based service numbers and convert at the boundary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Individuals' utility vectors over `K` services plus binary group attributes.
///
/// Utilities are stored row-major: individual `i`'s utility for service `k`
/// is `utilities[i * k_services + k]`. Higher is better.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    utilities: Vec<T>,
    n: usize,
    k: usize,
    groups: BTreeMap<String, Vec<bool>>,
}

impl<T: Scalar> Population<T> {
    /// Builds a population, checking shape, finiteness and attribute lengths.
    ///
    /// A group attribute is a per-individual flag: `true` is group 1.
    pub fn new(
        n: usize,
        k: usize,
        utilities: Vec<T>,
        groups: BTreeMap<String, Vec<bool>>,
    ) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidPopulation(format!(
                "need at least one individual and one service, got N={n}, K={k}"
            )));
        }
        if utilities.len() != n * k {
            return Err(Error::InvalidPopulation(format!(
                "utility matrix has {} entries, expected {n}x{k}",
                utilities.len()
            )));
        }
        if let Some(pos) = utilities.iter().position(|u| !u.is_finite()) {
            return Err(Error::InvalidPopulation(format!(
                "non-finite utility for individual {} service {}",
                pos / k,
                pos % k
            )));
        }
        for (name, values) in &groups {
            if values.len() != n {
                return Err(Error::InvalidPopulation(format!(
                    "attribute `{name}` has {} values for {n} individuals",
                    values.len()
                )));
            }
        }
        Ok(Self { utilities, n, k, groups })
    }

    /// Builds a population from one utility row per individual.
    pub fn from_rows(rows: &[Vec<T>], groups: BTreeMap<String, Vec<bool>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::InvalidPopulation(format!(
                "row {bad} has {} utilities, expected {k}",
                rows[bad].len()
            )));
        }
        let flat = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), k, flat, groups)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn utilities(&self) -> &[T] {
        &self.utilities
    }

    /// Utility row of individual `i`.
    pub fn row(&self, i: usize) -> &[T] {
        &self.utilities[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.utilities.chunks_exact(self.k)
    }

    pub fn utility(&self, i: usize, service: usize) -> T {
        self.utilities[i * self.k + service]
    }

    pub fn groups(&self) -> &BTreeMap<String, Vec<bool>> {
        &self.groups
    }

    pub fn attribute(&self, name: &str) -> Result<&[bool]> {
        self.groups
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    /// `N_s`: number of individuals whose `attribute` equals `value`.
    pub fn group_size(&self, attribute: &str, value: bool) -> Result<usize> {
        Ok(self.attribute(attribute)?.iter().filter(|&&g| g == value).count())
    }

    /// True when every utility is strictly positive, which is what the
    /// multiplicative metrics need.
    pub fn all_positive(&self) -> bool {
        self.utilities.iter().all(|&u| u > T::zero())
    }

    /// Sub-population made of the given individuals, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut utilities = Vec::with_capacity(indices.len() * self.k);
        for &i in indices {
            utilities.extend_from_slice(self.row(i));
        }
        let groups = self
            .groups
            .iter()
            .map(|(name, values)| (name.clone(), indices.iter().map(|&i| values[i]).collect()))
            .collect();
        Self::new(indices.len(), self.k, utilities, groups)
    }

    /// Applies `f` to every utility, keeping attributes.
    pub fn map_utilities(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let utilities = self.utilities.iter().map(|&u| f(u)).collect();
        Self::new(self.n, self.k, utilities, self.groups.clone())
    }

    /// Copy with group labels of `attribute` swapped (0 <-> 1).
    pub fn relabeled(&self, attribute: &str) -> Result<Self> {
        let mut groups = self.groups.clone();
        let values = groups
            .get_mut(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        values.iter_mut().for_each(|g| *g = !*g);
        Self::new(self.n, self.k, self.utilities.clone(), groups)
    }
}

/// Per-service capacities `c_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapacityVector(Vec<usize>);

impl CapacityVector {
    pub fn new(capacities: Vec<usize>) -> Self {
        Self(capacities)
    }

    /// Same capacity `c` for each of `k` services.
    pub fn uniform(k: usize, c: usize) -> Self {
        Self(vec![c; k])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Checks that `n` individuals over `k` services fit.
    pub fn check_feasible(&self, n: usize, k: usize) -> Result<()> {
        if self.0.len() != k {
            return Err(Error::InvalidParameters(format!(
                "{} capacities given for {k} services",
                self.0.len()
            )));
        }
        if self.total() < n {
            return Err(Error::Infeasible { capacity: self.total(), demand: n });
        }
        Ok(())
    }
}

impl From<Vec<usize>> for CapacityVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// One service per individual (0-based service indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<usize>);

impl Allocation {
    pub fn new(assignment: Vec<usize>) -> Self {
        Self(assignment)
    }

    /// Builds an allocation from 1-based service numbers.
    pub fn from_one_based(services: &[usize]) -> Result<Self> {
        services
            .iter()
            .map(|&s| {
                s.checked_sub(1)
                    .ok_or_else(|| Error::InvalidAllocation("service numbers start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|s| s + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn service(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Number of individuals assigned to each of `k` services.
    pub fn counts(&self, k: usize) -> Vec<usize> {
        let mut counts = vec![0; k];
        for &s in &self.0 {
            if s < k {
                counts[s] += 1;
            }
        }
        counts
    }

    /// Checks one valid service per individual, ignoring capacities.
    pub fn validate_shape<T: Scalar>(&self, pop: &Population<T>) -> Result<()> {
        if self.0.len() != pop.n() {
            return Err(Error::InvalidAllocation(format!(
                "{} assignments for {} individuals",
                self.0.len(),
                pop.n()
            )));
        }
        if let Some(i) = self.0.iter().position(|&s| s >= pop.k()) {
            return Err(Error::InvalidAllocation(format!(
                "individual {i} assigned to service {} but K={}",
                self.0[i] + 1,
                pop.k()
            )));
        }
        Ok(())
    }

    /// Checks shape and that no service exceeds its capacity.
    pub fn validate<T: Scalar>(&self, pop: &Population<T>, caps: &CapacityVector) -> Result<()> {
        self.validate_shape(pop)?;
        if caps.len() != pop.k() {
            return Err(Error::InvalidParameters(format!(
                "{} capacities given for {} services",
                caps.len(),
                pop.k()
            )));
        }
        for (k, (&used, &cap)) in self.counts(pop.k()).iter().zip(caps.as_slice()).enumerate() {
            if used > cap {
                return Err(Error::InvalidAllocation(format!(
                    "service {} holds {used} individuals, capacity {cap}",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// Realized utility `a.u` of each individual.
    pub fn realized<T: Scalar>(&self, pop: &Population<T>) -> Vec<T> {
        self.0.iter().enumerate().map(|(i, &s)| pop.utility(i, s)).collect()
    }

    /// Total realized utility, summed in individual order.
    pub fn total_utility<T: Scalar>(&self, pop: &Population<T>) -> T {
        crate::scalar::ordered_sum(self.realized(pop))
    }
}

/// Per-individual best and worst utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityEnvelope<T> {
    pub u_min: Vec<T>,
    pub u_max: Vec<T>,
    /// `u_max - u_min`.
    pub delta_u: Vec<T>,
    /// `u_min / u_max`; `None` unless every utility in the population is
    /// strictly positive.
    pub ratio_r: Option<Vec<T>>,
}

impl<T: Scalar> UtilityEnvelope<T> {
    pub fn n(&self) -> usize {
        self.u_min.len()
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (k, &u) in row.iter().enumerate().skip(1) {
        if u > row[best] {
            best = k;
        }
    }
    best
}

/// Index of the smallest entry; ties go to the lowest index.
pub fn argmin<T: Scalar>(row: &[T]) -> usize {
    let mut worst = 0;
    for (k, &u) in row.iter().enumerate().skip(1) {
        if u < row[worst] {
            worst = k;
        }
    }
    worst
}

/// Computes the utility envelope of a population.
pub fn envelope<T: Scalar>(pop: &Population<T>) -> UtilityEnvelope<T> {
    let mut u_min = Vec::with_capacity(pop.n());
    let mut u_max = Vec::with_capacity(pop.n());
    for row in pop.rows() {
        u_min.push(row[argmin(row)]);
        u_max.push(row[argmax(row)]);
    }
    let delta_u = u_max.iter().zip(&u_min).map(|(&hi, &lo)| hi - lo).collect();
    let ratio_r = pop
        .all_positive()
        .then(|| u_min.iter().zip(&u_max).map(|(&lo, &hi)| lo / hi).collect());
    UtilityEnvelope { u_min, u_max, delta_u, ratio_r }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(row: Vec<f64>) -> Population<f64> {
        Population::from_rows(&[row], BTreeMap::new()).unwrap()
    }

    #[test]
    fn envelope_of_simple_vector() {
        let env = envelope(&single(vec![0.2, 0.5, 0.3]));
        assert_eq!(env.u_min, vec![0.2]);
        assert_eq!(env.u_max, vec![0.5]);
        assert!((env.delta_u[0] - 0.3).abs() < 1e-15);
        assert!((env.ratio_r.unwrap()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn envelope_of_constant_vector() {
        let env = envelope(&single(vec![0.7, 0.7]));
        assert_eq!(env.delta_u, vec![0.0]);
        assert_eq!(env.ratio_r, Some(vec![1.0]));
    }

    #[test]
    fn nonpositive_entry_disables_ratio() {
        let env = envelope(&single(vec![-0.1, 0.2]));
        assert!((env.delta_u[0] - 0.3).abs() < 1e-15);
        assert!(env.ratio_r.is_none());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Population::<f64>::new(0, 2, vec![], BTreeMap::new()).is_err());
        assert!(Population::new(2, 2, vec![0.1, 0.2, 0.3], BTreeMap::new()).is_err());
        assert!(Population::new(1, 2, vec![0.1, f64::NAN], BTreeMap::new()).is_err());
        let groups = BTreeMap::from([("g".to_string(), vec![true])]);
        assert!(Population::new(2, 1, vec![0.1, 0.2], groups).is_err());
    }

    #[test]
    fn group_sizes_add_up() {
        let groups = BTreeMap::from([("g".to_string(), vec![true, false, true])]);
        let pop = Population::new(3, 1, vec![0.1, 0.2, 0.3], groups).unwrap();
        let n0 = pop.group_size("g", false).unwrap();
        let n1 = pop.group_size("g", true).unwrap();
        assert_eq!((n0, n1), (1, 2));
        assert_eq!(n0 + n1, pop.n());
        assert!(matches!(pop.attribute("h"), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn allocation_validation() {
        let pop = Population::new(3, 2, vec![0.0; 6], BTreeMap::new()).unwrap();
        let caps = CapacityVector::new(vec![2, 1]);
        assert!(Allocation::new(vec![0, 0, 1]).validate(&pop, &caps).is_ok());
        assert!(Allocation::new(vec![0, 0, 0]).validate(&pop, &caps).is_err());
        assert!(Allocation::new(vec![0, 2, 1]).validate(&pop, &caps).is_err());
        assert!(Allocation::new(vec![0, 1]).validate(&pop, &caps).is_err());
        assert!(matches!(
            CapacityVector::new(vec![1, 1]).check_feasible(3, 2),
            Err(Error::Infeasible { capacity: 2, demand: 3 })
        ));
    }

    #[test]
    fn one_based_conversion() {
        let a = Allocation::from_one_based(&[2, 1]).unwrap();
        assert_eq!(a.as_slice(), &[1, 0]);
        assert_eq!(a.to_one_based(), vec![2, 1]);
        assert!(Allocation::from_one_based(&[0]).is_err());
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.3, 0.5, 0.5]), 1);
        assert_eq!(argmin(&[0.3, 0.1, 0.1]), 1);
    }
}
