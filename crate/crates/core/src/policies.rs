//! Feasible allocation policies.
//!
//! All policies are deterministic functions of the population, the
//! capacities and a `u64` seed. Policies that ignore capacities
//! (`assign-best-ignoring-capacity`, `assign-worst-ignoring-capacity`) are
//! reference baselines only.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{argmax, argmin, Allocation, CapacityVector, Population};
use crate::rng::{derive_seed, seeded};
use crate::scalar::Scalar;
use crate::transport::{integerize, solve_min_cost};

/// Default factor used to turn real utilities into integer arc costs.
///
/// Utilities that differ only beyond the seventh decimal may be treated as
/// ties by the utilitarian solver.
pub const DEFAULT_TIE_BREAK_SCALE: f64 = 1e7;

fn default_scale() -> f64 {
    DEFAULT_TIE_BREAK_SCALE
}

/// Which policy to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Maximises total realized utility under the capacities.
    Utilitarian {
        #[serde(default = "default_scale")]
        tie_break_scale: f64,
    },
    /// Uniform random feasible allocation.
    Random,
    /// Random split of individuals and capacities; the `lambda` share is
    /// allocated by `a`, the rest by `b`.
    Mixture {
        lambda: f64,
        a: Box<PolicySpec>,
        b: Box<PolicySpec>,
    },
    /// Everyone gets their best service, capacities ignored.
    AssignBestIgnoringCapacity,
    /// Everyone gets their worst service, capacities ignored.
    AssignWorstIgnoringCapacity,
    /// Members of the favored group choose first, in index order, each
    /// taking their best service that still has room; then everyone else.
    Priority { attribute: String, favored: u8 },
    /// Minimises total gain `a.u / u_min` under the capacities, i.e. keeps
    /// individuals as close to their worst service as capacities allow.
    MinGain {
        #[serde(default = "default_scale")]
        tie_break_scale: f64,
    },
}

impl PolicySpec {
    pub fn utilitarian() -> Self {
        PolicySpec::Utilitarian { tie_break_scale: DEFAULT_TIE_BREAK_SCALE }
    }

    pub fn mixture(lambda: f64, a: PolicySpec, b: PolicySpec) -> Self {
        PolicySpec::Mixture { lambda, a: Box::new(a), b: Box::new(b) }
    }

    pub fn priority(attribute: &str, favored: u8) -> Self {
        PolicySpec::Priority { attribute: attribute.to_string(), favored }
    }

    /// Checks `lambda` ranges, scales and group values recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            PolicySpec::Utilitarian { tie_break_scale } | PolicySpec::MinGain { tie_break_scale } => {
                if !(tie_break_scale.is_finite() && *tie_break_scale > 0.0) {
                    return Err(Error::InvalidParameters(format!(
                        "tie_break_scale must be positive, got {tie_break_scale}"
                    )));
                }
                Ok(())
            }
            PolicySpec::Mixture { lambda, a, b } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::InvalidParameters(format!("lambda {lambda} outside [0, 1]")));
                }
                a.validate()?;
                b.validate()
            }
            PolicySpec::Priority { favored, .. } if *favored > 1 => Err(Error::InvalidParameters(
                format!("favored group must be 0 or 1, got {favored}"),
            )),
            _ => Ok(()),
        }
    }

    /// Short human-readable descriptor.
    pub fn describe(&self) -> String {
        match self {
            PolicySpec::Utilitarian { .. } => "utilitarian".into(),
            PolicySpec::Random => "random".into(),
            PolicySpec::Mixture { lambda, a, b } => {
                format!("mixture({lambda}: {}, {})", a.describe(), b.describe())
            }
            PolicySpec::AssignBestIgnoringCapacity => "assign-best-ignoring-capacity".into(),
            PolicySpec::AssignWorstIgnoringCapacity => "assign-worst-ignoring-capacity".into(),
            PolicySpec::Priority { attribute, favored } => format!("priority({attribute}={favored})"),
            PolicySpec::MinGain { .. } => "min-gain".into(),
        }
    }
}

/// Runs `spec` on `pop`.
pub fn allocate<T: Scalar>(
    pop: &Population<T>,
    caps: &CapacityVector,
    spec: &PolicySpec,
    seed: u64,
) -> Result<Allocation> {
    spec.validate()?;
    match spec {
        PolicySpec::Utilitarian { tie_break_scale } => allocate_utilitarian(pop, caps, *tie_break_scale),
        PolicySpec::Random => allocate_random(pop, caps, seed),
        PolicySpec::Mixture { lambda, a, b } => allocate_mixture(pop, caps, *lambda, a, b, seed),
        PolicySpec::AssignBestIgnoringCapacity => Ok(allocate_best(pop)),
        PolicySpec::AssignWorstIgnoringCapacity => Ok(allocate_worst(pop)),
        PolicySpec::Priority { attribute, favored } => allocate_priority(pop, caps, attribute, *favored == 1),
        PolicySpec::MinGain { tie_break_scale } => allocate_min_gain(pop, caps, *tie_break_scale),
    }
}

/// Feasible allocation maximising total utility.
///
/// Utilities are turned into integer costs `-round(u * tie_break_scale)`.
/// Among optimal allocations the lexicographically smallest service vector
/// is returned.
pub fn allocate_utilitarian<T: Scalar>(
    pop: &Population<T>,
    caps: &CapacityVector,
    tie_break_scale: f64,
) -> Result<Allocation> {
    caps.check_feasible(pop.n(), pop.k())?;
    let costs = pop
        .utilities()
        .iter()
        .map(|u| integerize(u.as_f64(), tie_break_scale, pop.n()).map(|c| -c))
        .collect::<Result<Vec<_>>>()?;
    solve_min_cost(&costs, pop.n(), caps.as_slice()).map(Allocation::new)
}

/// Feasible allocation minimising total gain `u / u_min`.
pub fn allocate_min_gain<T: Scalar>(
    pop: &Population<T>,
    caps: &CapacityVector,
    tie_break_scale: f64,
) -> Result<Allocation> {
    caps.check_feasible(pop.n(), pop.k())?;
    if !pop.all_positive() {
        return Err(Error::RatioUndefined);
    }
    let mut costs = Vec::with_capacity(pop.n() * pop.k());
    for row in pop.rows() {
        let lo = row[argmin(row)];
        for &u in row {
            costs.push(integerize((u / lo).as_f64(), tie_break_scale, pop.n())?);
        }
    }
    solve_min_cost(&costs, pop.n(), caps.as_slice()).map(Allocation::new)
}

/// Uniformly random feasible allocation.
///
/// Builds the multiset holding `c_k` copies of each service `k`, shuffles it
/// with the seeded generator and hands slot `i` to individual `i`.
pub fn allocate_random<T: Scalar>(
    pop: &Population<T>,
    caps: &CapacityVector,
    seed: u64,
) -> Result<Allocation> {
    caps.check_feasible(pop.n(), pop.k())?;
    let mut slots: Vec<usize> = caps
        .as_slice()
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
        .collect();
    slots.shuffle(&mut seeded(seed));
    slots.truncate(pop.n());
    Ok(Allocation::new(slots))
}

/// Splits capacities between the two halves of a mixture.
///
/// The `lambda` part gets `floor(lambda * c_k)` of each service; if that is
/// too little for its `n_a` individuals it borrows one unit per service in
/// index order until it fits.
pub fn split_capacities(
    caps: &CapacityVector,
    lambda: f64,
    n_a: usize,
    n_b: usize,
) -> Result<(CapacityVector, CapacityVector)> {
    let mut part_a: Vec<usize> = caps.as_slice().iter().map(|&c| (lambda * c as f64).floor() as usize).collect();
    let mut part_b: Vec<usize> = caps.as_slice().iter().zip(&part_a).map(|(&c, &a)| c - a).collect();
    let mut held: usize = part_a.iter().sum();
    while held < n_a {
        let before = held;
        for k in 0..part_a.len() {
            if held >= n_a {
                break;
            }
            if part_b[k] > 0 {
                part_b[k] -= 1;
                part_a[k] += 1;
                held += 1;
            }
        }
        if held == before {
            return Err(Error::Infeasible { capacity: held, demand: n_a });
        }
    }
    let rest: usize = part_b.iter().sum();
    if rest < n_b {
        return Err(Error::Infeasible { capacity: rest, demand: n_b });
    }
    Ok((part_a.into(), part_b.into()))
}

/// Lambda-mixture of two policies.
///
/// Individuals are split by a seeded shuffle into `round(lambda * N)` and
/// the rest; each part keeps original index order and is allocated by its
/// child policy on its share of the capacities.
pub fn allocate_mixture<T: Scalar>(
    pop: &Population<T>,
    caps: &CapacityVector,
    lambda: f64,
    spec_a: &PolicySpec,
    spec_b: &PolicySpec,
    seed: u64,
) -> Result<Allocation> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameters(format!("lambda {lambda} outside [0, 1]")));
    }
    caps.check_feasible(pop.n(), pop.k())?;
    let n = pop.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(derive_seed(seed, 0)));
    let n_a = ((lambda * n as f64).round() as usize).min(n);
    let (head, tail) = order.split_at(n_a);
    let mut part_a = head.to_vec();
    let mut part_b = tail.to_vec();
    part_a.sort_unstable();
    part_b.sort_unstable();
    let (caps_a, caps_b) = split_capacities(caps, lambda, part_a.len(), part_b.len())?;

    let mut assignment = vec![0usize; n];
    for (members, child_caps, spec, stream) in
        [(&part_a, &caps_a, spec_a, 1), (&part_b, &caps_b, spec_b, 2)]
    {
        if members.is_empty() {
            continue;
        }
        let sub = pop.subset(members)?;
        let sub_alloc = allocate(&sub, child_caps, spec, derive_seed(seed, stream))?;
        for (&i, &s) in members.iter().zip(sub_alloc.as_slice()) {
            assignment[i] = s;
        }
    }
    Ok(Allocation::new(assignment))
}

/// Each individual's best service (ties to the lowest index), ignoring
/// capacities.
pub fn allocate_best<T: Scalar>(pop: &Population<T>) -> Allocation {
    Allocation::new(pop.rows().map(argmax).collect())
}

/// Each individual's worst service (ties to the lowest index), ignoring
/// capacities.
pub fn allocate_worst<T: Scalar>(pop: &Population<T>) -> Allocation {
    Allocation::new(pop.rows().map(argmin).collect())
}

/// Serial dictatorship with one group moved to the front of the queue.
pub fn allocate_priority<T: Scalar>(
    pop: &Population<T>,
    caps: &CapacityVector,
    attribute: &str,
    favored: bool,
) -> Result<Allocation> {
    caps.check_feasible(pop.n(), pop.k())?;
    let mask = pop.attribute(attribute)?;
    let mut remaining = caps.as_slice().to_vec();
    let mut assignment = vec![0usize; pop.n()];
    let queue = (0..pop.n())
        .filter(|&i| mask[i] == favored)
        .chain((0..pop.n()).filter(|&i| mask[i] != favored));
    for i in queue {
        let row = pop.row(i);
        let choice = (0..pop.k())
            .filter(|&s| remaining[s] > 0)
            .fold(None, |best: Option<usize>, s| match best {
                Some(b) if row[b] >= row[s] => Some(b),
                _ => Some(s),
            })
            .expect("feasible capacities leave a free service");
        remaining[choice] -= 1;
        assignment[i] = choice;
    }
    Ok(Allocation::new(assignment))
}
