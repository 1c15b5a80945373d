//! Seeded population generators, replicated experiments and empirical
//! verification of the fairness identities.

mod experiment;
pub mod fixture;
mod models;
pub mod presets;
pub mod verify;

pub use experiment::{
    replicate, replication_seeds, run_experiment, DeltaFn, ExperimentConfig, ExperimentResult,
    ReplicationRecord, POLICY_STREAM,
};
pub use models::{
    sample_gaussian, sample_sf1, sample_sf2, GaussianGroupParams, PopulationModel, Sf1Params, Sf2Params,
    GROUP_ATTRIBUTE, SF1_TYPE_ATTRIBUTE, SF2_TYPE_ATTRIBUTE,
};
