//! Empirical checks of the fairness identities and trade-offs.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::experiment::{replicate, run_experiment, DeltaFn};
use super::models::{
    GaussianGroupParams, PopulationModel, Sf1Params, Sf2Params, GROUP_ATTRIBUTE, SF1_TYPE_ATTRIBUTE,
    SF2_TYPE_ATTRIBUTE,
};
use super::presets;
use crate::error::{Error, Result};
use crate::metrics::delta_metrics;
use crate::model::{argmax, argmin, Allocation, CapacityVector, Population};
use crate::policies::{allocate, allocate_random, PolicySpec};
use crate::rng::seeded;
use crate::stats::Estimate;

/// Result of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }

    fn failed(name: &str, err: Error) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

fn fmt_estimate(e: &Estimate) -> String {
    format!("{:.6} ± {:.6}", e.mean, e.ci_half_width)
}

/// Whether `e` is compatible with zero at twice its 95% half-width.
fn near_zero(e: &Estimate) -> bool {
    e.mean.abs() <= 2.0 * e.ci_half_width + 1e-12
}

// ---------------------------------------------------------------------------
// Identity on arbitrary instances

/// A random population (both groups nonempty), feasible capacities and a
/// random feasible allocation. Utilities are uniform on `[-1, 2)`.
pub fn random_instance(
    seed: u64,
    max_n: usize,
    max_k: usize,
) -> Result<(Population<f64>, CapacityVector, Allocation)> {
    let mut rng = seeded(seed);
    let n = rng.random_range(2..=max_n.max(2));
    let k = rng.random_range(1..=max_k.max(1));
    let utilities: Vec<f64> = (0..n * k).map(|_| rng.random_range(-1.0..2.0)).collect();
    let mut labels: Vec<bool> = (0..n).map(|i| if i < 2 { i == 1 } else { rng.random() }).collect();
    labels.shuffle(&mut rng);
    let mut caps = vec![0usize; k];
    for _ in 0..n + rng.random_range(0..=n) {
        caps[rng.random_range(0..k)] += 1;
    }
    let caps = CapacityVector::new(caps);
    let groups = [(GROUP_ATTRIBUTE.to_string(), labels)].into_iter().collect();
    let pop = Population::new(n, k, utilities, groups)?;
    let alloc = allocate_random(&pop, &caps, rng.random())?;
    Ok((pop, caps, alloc))
}

/// Largest `|ΔI + ΔR - gap|` over `instances` random instances, where the
/// gap is recomputed here from the raw utilities.
pub fn identity_max_residual(instances: usize, seed: u64, deltas: DeltaFn<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in 0..instances {
        let (pop, _, alloc) = random_instance(seed.wrapping_add(t as u64), 200, 5)?;
        let report = deltas(&pop, &alloc, GROUP_ATTRIBUTE)?;
        let labels = pop.attribute(GROUP_ATTRIBUTE)?;
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        for (i, row) in pop.rows().enumerate() {
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            sums[labels[i] as usize] += hi - lo;
            counts[labels[i] as usize] += 1;
        }
        let gap = sums[1] / counts[1] as f64 - sums[0] / counts[0] as f64;
        worst = worst.max((report.delta_i + report.delta_r - gap).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Mixture interpolation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub lambda: f64,
    pub delta_a: Estimate,
    pub delta_b: Estimate,
    pub mixture: Estimate,
    /// `lambda * delta_a + (1 - lambda) * delta_b`.
    pub interpolated: f64,
}

impl InterpolationReport {
    pub fn passed(&self) -> bool {
        self.mixture.contains(self.interpolated)
    }
}

/// Estimates ΔI of `a`, `b` and their `lambda`-mixture over `seeds`
/// populations (the same populations for all three).
pub fn interpolation(
    model: &PopulationModel,
    a: &PolicySpec,
    b: &PolicySpec,
    lambda: f64,
    seeds: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
) -> Result<InterpolationReport> {
    let mix = PolicySpec::mixture(lambda, a.clone(), b.clone());
    let run = |spec: &PolicySpec| -> Result<Estimate> {
        let values = replicate::<f64, _, _, _>(
            model,
            seeds,
            base_seed,
            deltas,
            |pop, caps, seed| allocate(pop, caps, spec, seed),
            |_, _, _, report| Ok(report.delta_i),
        )?;
        Estimate::from_samples(&values).ok_or(Error::EmptySample)
    };
    let delta_a = run(a)?;
    let delta_b = run(b)?;
    let mixture = run(&mix)?;
    Ok(InterpolationReport {
        lambda,
        interpolated: lambda * delta_a.mean + (1.0 - lambda) * delta_b.mean,
        delta_a,
        delta_b,
        mixture,
    })
}

/// Experiment-1 means and variances on a 240-person population. Capacities
/// are even so a half split keeps their proportions exactly.
pub fn interpolation_model() -> PopulationModel {
    let mut params = match presets::experiment1().population {
        PopulationModel::Gaussian(p) => p,
        _ => unreachable!("experiment 1 is Gaussian"),
    };
    params.sizes = [120, 120];
    params.capacities = CapacityVector::uniform(3, 80);
    PopulationModel::Gaussian(params)
}

// ---------------------------------------------------------------------------
// Sign-flip search

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub delta_i: Estimate,
    pub delta_r: Estimate,
    /// ΔI > 0 and ΔR > 0, both intervals excluding zero.
    pub sign_flip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignFlipReport {
    pub delta_u_gap: Estimate,
    pub points: Vec<LambdaPoint>,
    /// Smallest grid value showing the flip.
    pub found: Option<f64>,
}

impl SignFlipReport {
    pub fn describe(&self) -> String {
        match self.found {
            Some(l) => format!("sign flip at lambda = {l}"),
            None => "not found in grid".to_string(),
        }
    }
}

/// `{0, 0.1, ..., 1}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Runs `mixture(lambda, a, b)` for every `lambda` in `grid`, looking for
/// a policy that favors group 1 by improvement and group 0 by regret.
/// Does not check the heterogeneity precondition; see [`verify_sign_flip`].
pub fn scan_sign_flip(
    model: &PopulationModel,
    a: &PolicySpec,
    b: &PolicySpec,
    grid: &[f64],
    replications: usize,
    base_seed: u64,
) -> Result<SignFlipReport> {
    let mut points = Vec::with_capacity(grid.len());
    let mut gap = None;
    for &lambda in grid {
        let mix = PolicySpec::mixture(lambda, a.clone(), b.clone());
        let result = run_experiment::<f64>(model, &mix, replications, base_seed)?;
        gap.get_or_insert(result.delta_u_gap);
        points.push(LambdaPoint {
            lambda,
            sign_flip: result.delta_i.significant_sign() == 1 && result.delta_r.significant_sign() == 1,
            delta_i: result.delta_i,
            delta_r: result.delta_r,
        });
    }
    let delta_u_gap = gap.ok_or_else(|| Error::InvalidParameters("empty lambda grid".into()))?;
    let found = points.iter().find(|p| p.sign_flip).map(|p| p.lambda);
    Ok(SignFlipReport { delta_u_gap, points, found })
}

/// [`scan_sign_flip`] after checking that group 1 has the larger mean ΔU
/// (confidence interval above zero).
pub fn verify_sign_flip(
    model: &PopulationModel,
    a: &PolicySpec,
    b: &PolicySpec,
    grid: &[f64],
    replications: usize,
    base_seed: u64,
) -> Result<SignFlipReport> {
    let gaps = replicate::<f64, _, _, _>(
        model,
        replications,
        base_seed,
        delta_metrics::<f64>,
        allocate_random,
        |_, _, _, report| Ok(report.delta_u_gap),
    )?;
    let gap = Estimate::from_samples(&gaps)
        .ok_or_else(|| Error::InvalidParameters("replications ≥ 2 required".into()))?;
    if gap.lower() <= 0.0 {
        return Err(Error::NoHeterogeneity { gap: gap.mean, half_width: gap.ci_half_width });
    }
    scan_sign_flip(model, a, b, grid, replications, base_seed)
}

/// Both groups drawn from group 0 of experiment 1.
pub fn homogeneous_model() -> PopulationModel {
    let params = match presets::experiment1().population {
        PopulationModel::Gaussian(p) => p,
        _ => unreachable!("experiment 1 is Gaussian"),
    };
    PopulationModel::Gaussian(GaussianGroupParams {
        means: [params.means[0].clone(), params.means[0].clone()],
        variances: [params.variances[0].clone(), params.variances[0].clone()],
        ..params
    })
}

// ---------------------------------------------------------------------------
// Stylized frameworks

/// Gain-fair policy for SF1 populations, calibrated through the type
/// attribute.
///
/// High-ratio individuals get their best service; low-ratio individuals get
/// their best service with probability `q = (1/r_high - 1) / (1/r_low - 1)`
/// and their worst otherwise, so both types have the same expected gain
/// `1 / r_high`. If the chosen service is full the individual takes the
/// nearest service in the same direction that still has room.
pub fn calibrated_gain_fair(
    pop: &Population<f64>,
    caps: &CapacityVector,
    params: &Sf1Params,
    seed: u64,
) -> Result<Allocation> {
    caps.check_feasible(pop.n(), pop.k())?;
    let q = (1.0 / params.r_high - 1.0) / (1.0 / params.r_low - 1.0);
    let types = pop.attribute(SF1_TYPE_ATTRIBUTE)?;
    let mut rng = seeded(seed);
    let mut room = caps.as_slice().to_vec();
    let mut out = Vec::with_capacity(pop.n());
    for (i, row) in pop.rows().enumerate() {
        let best = !types[i] || rng.random::<f64>() < q;
        let target = if best { argmax(row) } else { argmin(row) };
        let service = if room[target] > 0 {
            target
        } else {
            let mut open: Vec<usize> = (0..pop.k()).filter(|&s| room[s] > 0).collect();
            open.sort_by(|&x, &y| row[x].total_cmp(&row[y]));
            if best { *open.last().expect("feasible") } else { open[0] }
        };
        room[service] -= 1;
        out.push(service);
    }
    Ok(Allocation::new(out))
}

/// Type shares per group and pooled type-conditional means of `value`.
struct TypedMeans {
    share: [f64; 2],
    flagged: f64,
    other: f64,
}

fn typed_means(
    pop: &Population<f64>,
    alloc: &Allocation,
    type_attribute: &str,
    value: impl Fn(&[f64], f64) -> f64,
) -> Result<TypedMeans> {
    let groups = pop.attribute(GROUP_ATTRIBUTE)?;
    let types = pop.attribute(type_attribute)?;
    let mut flagged_in_group = [0usize; 2];
    let mut group_size = [0usize; 2];
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (i, row) in pop.rows().enumerate() {
        let s = groups[i] as usize;
        group_size[s] += 1;
        flagged_in_group[s] += types[i] as usize;
        let t = types[i] as usize;
        sums[t] += value(row, row[alloc.service(i)]);
        counts[t] += 1;
    }
    if counts.contains(&0) {
        return Err(Error::EmptyGroup { attribute: type_attribute.to_string(), value: (counts[1] == 0) as u8 });
    }
    Ok(TypedMeans {
        share: [0, 1].map(|s| flagged_in_group[s] as f64 / group_size[s] as f64),
        flagged: sums[1] / counts[1] as f64,
        other: sums[0] / counts[0] as f64,
    })
}

fn row_min(row: &[f64]) -> f64 {
    row[argmin(row)]
}

fn row_max(row: &[f64]) -> f64 {
    row[argmax(row)]
}

/// Per-replication differences between measured and predicted deltas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityDiscrepancy {
    pub metric: String,
    pub difference: Estimate,
}

impl IdentityDiscrepancy {
    pub fn passed(&self) -> bool {
        near_zero(&self.difference)
    }
}

fn discrepancy(metric: &str, diffs: &[f64]) -> Result<IdentityDiscrepancy> {
    Ok(IdentityDiscrepancy {
        metric: metric.to_string(),
        difference: Estimate::from_samples(diffs).ok_or(Error::EmptySample)?,
    })
}

/// SF1: compares ΔG with `(π0 - π1)(ᾱ - α̲)` and ΔS with
/// `(π0 - π1)(σ̄ - σ̲)`, where ᾱ, α̲ (σ̄, σ̲) are mean gains (shortfalls) of
/// the high- and low-ratio types pooled across groups and π are the
/// realized type-B shares.
pub fn sf1_identity(
    params: &Sf1Params,
    policy: &PolicySpec,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
) -> Result<[IdentityDiscrepancy; 2]> {
    let model = PopulationModel::Sf1(params.clone());
    let pairs = replicate::<f64, _, _, _>(
        &model,
        replications,
        base_seed,
        deltas,
        |pop, caps, seed| allocate(pop, caps, policy, seed),
        |_, pop, alloc, report| {
            let gain = typed_means(pop, alloc, SF1_TYPE_ATTRIBUTE, |row, u| u / row_min(row))?;
            let short = typed_means(pop, alloc, SF1_TYPE_ATTRIBUTE, |row, u| u / row_max(row))?;
            let pi_gap = gain.share[0] - gain.share[1];
            let dg = report.delta_g.ok_or(Error::RatioUndefined)?;
            let ds = report.delta_s.ok_or(Error::RatioUndefined)?;
            Ok((dg - pi_gap * (gain.other - gain.flagged), ds - pi_gap * (short.other - short.flagged)))
        },
    )?;
    let (g, s): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok([discrepancy("gain", &g)?, discrepancy("shortfall", &s)?])
}

/// SF2: compares ΔI with `(p1 - p0)[(β̲ - u̲) - (β̄ - ū)]` and ΔG with
/// `(p1 - p0)(β̲/u̲ - β̄/ū)`, where β̲, β̄ are mean realized utilities of
/// the low- and high-floor types pooled across groups.
pub fn sf2_identity(
    params: &Sf2Params,
    policy: &PolicySpec,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
) -> Result<[IdentityDiscrepancy; 2]> {
    let model = PopulationModel::Sf2(params.clone());
    let (lo, hi) = (params.u_low, params.u_high);
    let pairs = replicate::<f64, _, _, _>(
        &model,
        replications,
        base_seed,
        deltas,
        |pop, caps, seed| allocate(pop, caps, policy, seed),
        |_, pop, alloc, report| {
            let beta = typed_means(pop, alloc, SF2_TYPE_ATTRIBUTE, |_, u| u)?;
            let p_gap = beta.share[1] - beta.share[0];
            let predicted_i = p_gap * ((beta.flagged - lo) - (beta.other - hi));
            let predicted_g = p_gap * (beta.flagged / lo - beta.other / hi);
            let dg = report.delta_g.ok_or(Error::RatioUndefined)?;
            Ok((report.delta_i - predicted_i, dg - predicted_g))
        },
    )?;
    let (i, g): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok([discrepancy("improvement", &i)?, discrepancy("gain", &g)?])
}

/// Estimates of ΔG and ΔS for a policy given as a closure.
fn multiplicative_deltas<A>(
    model: &PopulationModel,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
    allocator: A,
) -> Result<(Estimate, Estimate)>
where
    A: Fn(&Population<f64>, &CapacityVector, u64) -> Result<Allocation> + Sync,
{
    let pairs = replicate::<f64, _, _, _>(model, replications, base_seed, deltas, allocator, |_, _, _, r| {
        Ok((r.delta_g.ok_or(Error::RatioUndefined)?, r.delta_s.ok_or(Error::RatioUndefined)?))
    })?;
    let (g, s): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((
        Estimate::from_samples(&g).ok_or(Error::EmptySample)?,
        Estimate::from_samples(&s).ok_or(Error::EmptySample)?,
    ))
}

/// SF1 with equal type shares under `policy`: ΔG and ΔS estimates.
pub fn sf1_equal_shares(
    params: &Sf1Params,
    policy: &PolicySpec,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
) -> Result<(Estimate, Estimate)> {
    let model = PopulationModel::Sf1(params.clone());
    multiplicative_deltas(&model, replications, base_seed, deltas, |pop, caps, seed| {
        allocate(pop, caps, policy, seed)
    })
}

/// SF1 under [`calibrated_gain_fair`]: ΔG and ΔS estimates.
pub fn sf1_gain_fair(
    params: &Sf1Params,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
) -> Result<(Estimate, Estimate)> {
    let model = PopulationModel::Sf1(params.clone());
    multiplicative_deltas(&model, replications, base_seed, deltas, |pop, caps, seed| {
        calibrated_gain_fair(pop, caps, params, seed)
    })
}

/// SF2 with everyone at their worst service: the largest `|ΔI|` and `|ΔG|`
/// seen over the replications.
pub fn sf2_worst_assignment(
    params: &Sf2Params,
    replications: usize,
    base_seed: u64,
    deltas: DeltaFn<f64>,
) -> Result<(f64, f64)> {
    let model = PopulationModel::Sf2(params.clone());
    let worst = PolicySpec::AssignWorstIgnoringCapacity;
    let pairs = replicate::<f64, _, _, _>(
        &model,
        replications,
        base_seed,
        deltas,
        |pop, caps, seed| allocate(pop, caps, &worst, seed),
        |_, _, _, r| Ok((r.delta_i.abs(), r.delta_g.ok_or(Error::RatioUndefined)?.abs())),
    )?;
    Ok(pairs.iter().fold((0.0, 0.0), |(a, b), &(i, g)| (f64::max(a, i), f64::max(b, g))))
}

// ---------------------------------------------------------------------------
// Suite

/// Capacities summing to the 1,000 stylized-framework households, so the
/// utilitarian policy cannot give everyone their best service.
fn binding_capacities() -> CapacityVector {
    CapacityVector::new(vec![334, 333, 333])
}

/// Settings for [`CheckSuite::run`].
#[derive(Debug, Clone)]
pub struct CheckSuite {
    pub seed: u64,
    pub deltas: DeltaFn<f64>,
    pub identity_instances: usize,
    pub interpolation_seeds: usize,
    pub replications: usize,
}

impl Default for CheckSuite {
    fn default() -> Self {
        Self {
            seed: 2024,
            deltas: delta_metrics::<f64>,
            identity_instances: 1000,
            interpolation_seeds: 1000,
            replications: 100,
        }
    }
}

impl CheckSuite {
    pub fn run(&self) -> Vec<CheckOutcome> {
        vec![
            self.identity(),
            self.interpolation(),
            self.sign_flip(),
            self.no_flip_without_heterogeneity(),
            self.sf1_identities(),
            self.sf1_equal_shares(),
            self.sf1_gain_fair(),
            self.sf2_identities(),
            self.sf2_worst(),
        ]
    }

    fn guarded(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
        match f() {
            Ok((passed, detail)) => CheckOutcome::new(name, passed, detail),
            Err(e) => CheckOutcome::failed(name, e),
        }
    }

    pub fn identity(&self) -> CheckOutcome {
        Self::guarded("improvement + regret identity", || {
            let worst = identity_max_residual(self.identity_instances, self.seed, self.deltas)?;
            Ok((worst <= 1e-12, format!("max residual {worst:.3e} over {} instances", self.identity_instances)))
        })
    }

    pub fn interpolation(&self) -> CheckOutcome {
        Self::guarded("mixture interpolation", || {
            let r = interpolation(
                &interpolation_model(),
                &PolicySpec::Random,
                &PolicySpec::utilitarian(),
                0.5,
                self.interpolation_seeds,
                self.seed,
                self.deltas,
            )?;
            let detail = format!(
                "ΔI a {}, b {}, mixture {}, interpolated {:.6}",
                fmt_estimate(&r.delta_a),
                fmt_estimate(&r.delta_b),
                fmt_estimate(&r.mixture),
                r.interpolated
            );
            Ok((r.passed(), detail))
        })
    }

    fn flip_policies() -> (PolicySpec, PolicySpec) {
        (PolicySpec::priority(GROUP_ATTRIBUTE, 0), PolicySpec::priority(GROUP_ATTRIBUTE, 1))
    }

    pub fn sign_flip(&self) -> CheckOutcome {
        Self::guarded("improvement/regret sign flip", || {
            let (a, b) = Self::flip_policies();
            let model = presets::experiment1().population;
            let r = verify_sign_flip(&model, &a, &b, &default_lambda_grid(), self.replications, self.seed)?;
            Ok((r.found.is_some(), r.describe()))
        })
    }

    pub fn no_flip_without_heterogeneity(&self) -> CheckOutcome {
        Self::guarded("no sign flip for identical groups", || {
            let (a, b) = Self::flip_policies();
            let r = scan_sign_flip(&homogeneous_model(), &a, &b, &default_lambda_grid(), self.replications, self.seed)?;
            Ok((r.found.is_none(), r.describe()))
        })
    }

    pub fn sf1_identities(&self) -> CheckOutcome {
        Self::guarded("SF1 gain and shortfall identities", || {
            let params = Sf1Params { capacities: binding_capacities(), ..presets::sf1([0.6, 0.3]) };
            let mut passed = true;
            let mut detail = Vec::new();
            for policy in [PolicySpec::Random, PolicySpec::utilitarian()] {
                for d in sf1_identity(&params, &policy, self.replications, self.seed, self.deltas)? {
                    passed &= d.passed();
                    detail.push(format!("{} {}: {}", policy.describe(), d.metric, fmt_estimate(&d.difference)));
                }
            }
            Ok((passed, detail.join("; ")))
        })
    }

    pub fn sf1_equal_shares(&self) -> CheckOutcome {
        Self::guarded("SF1 equal shares give ΔG ≈ 0 and ΔS ≈ 0", || {
            let params = presets::sf1([0.4, 0.4]);
            let (g, s) = sf1_equal_shares(&params, &PolicySpec::Random, self.replications, self.seed, self.deltas)?;
            Ok((near_zero(&g) && near_zero(&s), format!("ΔG {}, ΔS {}", fmt_estimate(&g), fmt_estimate(&s))))
        })
    }

    pub fn sf1_gain_fair(&self) -> CheckOutcome {
        Self::guarded("SF1 gain-fair policy: ΔS has the sign of π0 - π1", || {
            let params = presets::sf1([0.6, 0.3]);
            let (g, s) = sf1_gain_fair(&params, self.replications, self.seed, self.deltas)?;
            let expected = (params.pi[0] - params.pi[1]).signum() as i8;
            Ok((
                near_zero(&g) && s.significant_sign() == expected,
                format!("ΔG {}, ΔS {}", fmt_estimate(&g), fmt_estimate(&s)),
            ))
        })
    }

    pub fn sf2_identities(&self) -> CheckOutcome {
        Self::guarded("SF2 improvement and gain identities", || {
            let params = Sf2Params { capacities: binding_capacities(), ..presets::sf2([0.6, 0.3]) };
            let mut passed = true;
            let mut detail = Vec::new();
            for policy in [PolicySpec::Random, PolicySpec::utilitarian()] {
                for d in sf2_identity(&params, &policy, self.replications, self.seed, self.deltas)? {
                    passed &= d.passed();
                    detail.push(format!("{} {}: {}", policy.describe(), d.metric, fmt_estimate(&d.difference)));
                }
            }
            Ok((passed, detail.join("; ")))
        })
    }

    pub fn sf2_worst(&self) -> CheckOutcome {
        Self::guarded("SF2 worst assignment gives ΔI = ΔG = 0", || {
            let params = presets::sf2([0.6, 0.3]);
            let (i, g) = sf2_worst_assignment(&params, self.replications, self.seed, self.deltas)?;
            Ok((i == 0.0 && g == 0.0, format!("max |ΔI| {i:e}, max |ΔG| {g:e}")))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_feasible() {
        for seed in 0..50 {
            let (pop, caps, alloc) = random_instance(seed, 30, 4).unwrap();
            alloc.validate(&pop, &caps).unwrap();
            assert!(pop.group_size(GROUP_ATTRIBUTE, false).unwrap() > 0);
            assert!(pop.group_size(GROUP_ATTRIBUTE, true).unwrap() > 0);
        }
    }

    #[test]
    fn calibrated_policy_is_feasible() {
        let params = presets::sf1([0.6, 0.3]);
        let pop: Population<f64> = PopulationModel::Sf1(params.clone()).sample(3).unwrap();
        let alloc = calibrated_gain_fair(&pop, &params.capacities, &params, 4).unwrap();
        alloc.validate(&pop, &params.capacities).unwrap();
    }

    #[test]
    fn homogeneous_model_fails_precondition() {
        let (a, b) = CheckSuite::flip_policies();
        let err = verify_sign_flip(&homogeneous_model(), &a, &b, &[0.5], 20, 1).unwrap_err();
        assert!(matches!(err, Error::NoHeterogeneity { .. }));
    }

    #[test]
    fn mixture_endpoints_match_children() {
        let model = interpolation_model();
        let (a, b) = CheckSuite::flip_policies();
        let r = scan_sign_flip(&model, &a, &b, &[0.0, 1.0], 10, 5).unwrap();
        let pure_b = run_experiment::<f64>(&model, &b, 10, 5).unwrap();
        let pure_a = run_experiment::<f64>(&model, &a, 10, 5).unwrap();
        assert_eq!(r.points[0].delta_i, pure_b.delta_i);
        assert_eq!(r.points[1].delta_i, pure_a.delta_i);
    }
}
