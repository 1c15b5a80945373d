//! Seeded population generators.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CapacityVector, Population};
use crate::rng::{seeded, Rng};
use crate::scalar::Scalar;

/// Attribute name used for the two simulated groups.
pub const GROUP_ATTRIBUTE: &str = "group";
/// Attribute flagging low-ratio (type B) individuals in SF1 populations.
pub const SF1_TYPE_ATTRIBUTE: &str = "type_b";
/// Attribute flagging low-`u_min` (type C) individuals in SF2 populations.
pub const SF2_TYPE_ATTRIBUTE: &str = "type_c";

/// Independent normal utilities per group and service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianGroupParams {
    /// `means[s][k]`: mean utility of service `k` for group `s`.
    pub means: [Vec<f64>; 2],
    /// `variances[s][k]`.
    pub variances: [Vec<f64>; 2],
    pub sizes: [usize; 2],
    pub capacities: CapacityVector,
}

/// Stylized framework where groups differ only in the share of low-ratio
/// individuals.
///
/// Type A has `u_min / u_max = r_high`, type B has `r_low`. `pi[s]` is the
/// share of type B in group `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sf1Params {
    pub r_high: f64,
    pub r_low: f64,
    pub pi: [f64; 2],
    /// `u_max` is uniform on this interval.
    pub u_max_range: [f64; 2],
    pub services: usize,
    pub sizes: [usize; 2],
    pub capacities: CapacityVector,
}

/// Stylized framework where groups differ only in the share of individuals
/// with a low worst-case utility.
///
/// Type C has `u_min = u_low`, type D has `u_min = u_high`. `p[s]` is the
/// share of type C in group `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sf2Params {
    pub u_low: f64,
    pub u_high: f64,
    pub p: [f64; 2],
    /// `u_max` is uniform on this interval; it must lie above `u_high`.
    pub u_max_range: [f64; 2],
    pub services: usize,
    pub sizes: [usize; 2],
    pub capacities: CapacityVector,
}

/// Any of the simulated population families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum PopulationModel {
    Gaussian(GaussianGroupParams),
    Sf1(Sf1Params),
    Sf2(Sf2Params),
}

impl PopulationModel {
    pub fn capacities(&self) -> &CapacityVector {
        match self {
            PopulationModel::Gaussian(p) => &p.capacities,
            PopulationModel::Sf1(p) => &p.capacities,
            PopulationModel::Sf2(p) => &p.capacities,
        }
    }

    pub fn sizes(&self) -> [usize; 2] {
        match self {
            PopulationModel::Gaussian(p) => p.sizes,
            PopulationModel::Sf1(p) => p.sizes,
            PopulationModel::Sf2(p) => p.sizes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PopulationModel::Gaussian(p) => p.validate(),
            PopulationModel::Sf1(p) => p.validate(),
            PopulationModel::Sf2(p) => p.validate(),
        }
    }

    pub fn sample<T: Scalar>(&self, seed: u64) -> Result<Population<T>> {
        match self {
            PopulationModel::Gaussian(p) => sample_gaussian(p, seed),
            PopulationModel::Sf1(p) => sample_sf1(p, seed),
            PopulationModel::Sf2(p) => sample_sf2(p, seed),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}

fn check_common(sizes: [usize; 2], services: usize, caps: &CapacityVector) -> Result<()> {
    if sizes.contains(&0) {
        return Err(invalid("group sizes must be at least 1"));
    }
    if services == 0 {
        return Err(invalid("need at least one service"));
    }
    caps.check_feasible(sizes[0] + sizes[1], services)
}

fn check_share(name: &str, share: [f64; 2]) -> Result<()> {
    if share.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid(format!("{name} proportions must lie in [0, 1], got {share:?}")));
    }
    Ok(())
}

fn check_range(range: [f64; 2]) -> Result<()> {
    if !(range[0] > 0.0 && range[0] <= range[1] && range[1].is_finite()) {
        return Err(invalid(format!("u_max range must be positive and ordered, got {range:?}")));
    }
    Ok(())
}

impl GaussianGroupParams {
    pub fn services(&self) -> usize {
        self.means[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.services();
        for s in 0..2 {
            if self.means[s].len() != k || self.variances[s].len() != k {
                return Err(invalid("means and variances must be 2 x K matrices"));
            }
            if self.means[s].iter().any(|m| !m.is_finite()) {
                return Err(invalid("means must be finite"));
            }
            if self.variances[s].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(invalid("variances must be positive"));
            }
        }
        check_common(self.sizes, k, &self.capacities)
    }
}

impl Sf1Params {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.r_low && self.r_low < self.r_high && self.r_high <= 1.0) {
            return Err(invalid("SF1 needs 0 < r_low < r_high <= 1"));
        }
        check_share("pi", self.pi)?;
        check_range(self.u_max_range)?;
        if self.services < 2 {
            return Err(invalid("SF1 needs at least two services"));
        }
        check_common(self.sizes, self.services, &self.capacities)
    }
}

impl Sf2Params {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.u_low && self.u_low < self.u_high) {
            return Err(invalid("SF2 needs 0 < u_low < u_high"));
        }
        check_share("p", self.p)?;
        check_range(self.u_max_range)?;
        if self.u_max_range[0] < self.u_high {
            return Err(invalid("SF2 u_max range must lie above u_high"));
        }
        if self.services < 2 {
            return Err(invalid("SF2 needs at least two services"));
        }
        check_common(self.sizes, self.services, &self.capacities)
    }
}

fn group_labels(sizes: [usize; 2]) -> Vec<bool> {
    std::iter::repeat_n(false, sizes[0]).chain(std::iter::repeat_n(true, sizes[1])).collect()
}

fn cast<T: Scalar>(values: Vec<f64>) -> Vec<T> {
    values.into_iter().map(T::lit).collect()
}

/// Draws group 0 (first `sizes[0]` individuals) then group 1, each utility
/// independently normal. No clamping: negative draws are kept.
pub fn sample_gaussian<T: Scalar>(params: &GaussianGroupParams, seed: u64) -> Result<Population<T>> {
    params.validate()?;
    let k = params.services();
    let n = params.sizes[0] + params.sizes[1];
    let sds: [Vec<f64>; 2] = [0, 1].map(|s| params.variances[s].iter().map(|v| v.sqrt()).collect());
    let mut rng = seeded(seed);
    let mut utilities = Vec::with_capacity(n * k);
    for (s, &size) in params.sizes.iter().enumerate() {
        for _ in 0..size {
            for j in 0..k {
                let z: f64 = rng.sample(StandardNormal);
                utilities.push(params.means[s][j] + sds[s][j] * z);
            }
        }
    }
    let groups = BTreeMap::from([(GROUP_ATTRIBUTE.to_string(), group_labels(params.sizes))]);
    Population::new(n, k, cast(utilities), groups)
}

/// Utility vector with the given worst and best values.
///
/// Interior services get stratified draws between the two, then the values
/// are placed on services by a random permutation. The same procedure is
/// used for every type and group, so conditional on `(u_min, u_max)` the
/// utility distribution is identical across services, types and groups.
fn conditional_row(u_min: f64, u_max: f64, k: usize, rng: &mut Rng) -> Vec<f64> {
    let mut row = Vec::with_capacity(k);
    row.push(u_min);
    let interior = k.saturating_sub(2);
    for j in 0..interior {
        let frac = (j as f64 + rng.random::<f64>()) / interior as f64;
        row.push(u_min + (u_max - u_min) * frac);
    }
    if k > 1 {
        row.push(u_max);
    }
    row.shuffle(rng);
    row
}

fn sample_typed<T: Scalar>(
    sizes: [usize; 2],
    k: usize,
    share: [f64; 2],
    attribute: &str,
    seed: u64,
    mut draw: impl FnMut(bool, &mut Rng) -> (f64, f64),
) -> Result<Population<T>> {
    let n = sizes[0] + sizes[1];
    let mut rng = seeded(seed);
    let mut utilities = Vec::with_capacity(n * k);
    let mut types = Vec::with_capacity(n);
    for (s, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let flagged = rng.random::<f64>() < share[s];
            let (lo, hi) = draw(flagged, &mut rng);
            utilities.extend(conditional_row(lo, hi, k, &mut rng));
            types.push(flagged);
        }
    }
    let groups = BTreeMap::from([
        (GROUP_ATTRIBUTE.to_string(), group_labels(sizes)),
        (attribute.to_string(), types),
    ]);
    Population::new(n, k, cast(utilities), groups)
}

/// SF1 population. Each individual is type B with probability `pi[s]`;
/// `u_max ~ U(u_max_range)` and `u_min = r * u_max`.
pub fn sample_sf1<T: Scalar>(params: &Sf1Params, seed: u64) -> Result<Population<T>> {
    params.validate()?;
    let [lo, hi] = params.u_max_range;
    sample_typed(params.sizes, params.services, params.pi, SF1_TYPE_ATTRIBUTE, seed, |type_b, rng| {
        let u_max = lo + (hi - lo) * rng.random::<f64>();
        let r = if type_b { params.r_low } else { params.r_high };
        (r * u_max, u_max)
    })
}

/// SF2 population. Each individual is type C with probability `p[s]`;
/// `u_min` is `u_low` (type C) or `u_high` (type D) and
/// `u_max ~ U(u_max_range)`.
pub fn sample_sf2<T: Scalar>(params: &Sf2Params, seed: u64) -> Result<Population<T>> {
    params.validate()?;
    let [lo, hi] = params.u_max_range;
    sample_typed(params.sizes, params.services, params.p, SF2_TYPE_ATTRIBUTE, seed, |type_c, rng| {
        let u_max = lo + (hi - lo) * rng.random::<f64>();
        let u_min = if type_c { params.u_low } else { params.u_high };
        (u_min, u_max)
    })
}
