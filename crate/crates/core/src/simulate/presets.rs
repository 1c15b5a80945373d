//! Shipped parameter sets.

use super::experiment::ExperimentConfig;
use super::models::{Sf1Params, Sf2Params};
use crate::model::CapacityVector;

pub const EXPERIMENT1_JSON: &str = include_str!("../../presets/experiment1.json");
pub const EXPERIMENT2_JSON: &str = include_str!("../../presets/experiment2.json");

/// Groups with equal variances and a higher mean spread in group 1; random
/// policy.
pub fn experiment1() -> ExperimentConfig {
    ExperimentConfig::from_json(EXPERIMENT1_JSON).expect("bundled preset parses")
}

/// Groups with equal means and larger variances in group 1; utilitarian
/// policy.
pub fn experiment2() -> ExperimentConfig {
    ExperimentConfig::from_json(EXPERIMENT2_JSON).expect("bundled preset parses")
}

/// SF1 population with the given type-B shares. Capacities leave slack so
/// rank-based policies rarely hit a full service.
pub fn sf1(pi: [f64; 2]) -> Sf1Params {
    Sf1Params {
        r_high: 0.8,
        r_low: 0.4,
        pi,
        u_max_range: [0.5, 1.0],
        services: 3,
        sizes: [500, 500],
        capacities: CapacityVector::uniform(3, 400),
    }
}

/// SF2 population with the given type-C shares.
pub fn sf2(p: [f64; 2]) -> Sf2Params {
    Sf2Params {
        u_low: 0.2,
        u_high: 0.4,
        p,
        u_max_range: [0.6, 1.0],
        services: 3,
        sizes: [500, 500],
        capacities: CapacityVector::uniform(3, 400),
    }
}
