//! Dynamic max-min fair (DMMF) repeated allocation: a deterministic
//! simulator for the mechanism under pluggable agent strategies, exact
//! long-run predictors built on the subgroup-stability theory, solvers for
//! the induced threshold game, and a Monte Carlo experiment harness.
//!
//! The mechanism allocates one indivisible item per round to the requesting
//! agent with the lowest wins-to-fair-share ratio. Under static threshold
//! strategies the process decomposes into a unique ordered partition of
//! agents with linear win rates, which makes long-run utilities computable
//! in closed form; the equilibrium and harness layers build on that.

pub mod analysis;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod harness;
pub mod mechanism;
pub mod rng;
pub mod strategies;

pub use analysis::{
    collapse_diagnostic, ideal_utility, instability_witness, is_stable, predicted_utility,
    predicted_win_slopes, splitting_partition, splitting_partition_via_maximizer,
    CollapseDiagnostic, InstabilityWitness, SplittingPartition, ThresholdProfile,
};
pub use distributions::{FiniteSupport, RequestRule, ValueDistribution};
pub use equilibrium::{
    best_response, pure_ne_scan, symmetric_optimum, two_point_du1_dp1, two_point_utility,
    BestResponseResult, EpsEquilibrium, NeScanReport, PStar, ThresholdGame,
};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutcome};
pub use mechanism::{
    checkpoint_times, run, step, Checkpoint, MechanismConfig, MechanismState, RecordingSpec,
    RoundRecord, RunSpec, Trajectory,
};
pub use strategies::{
    phi, phi_inv, thresholdize, wrm_request_probability, EtaSchedule, GenericPolicy, PublicInfo,
    Strategy, WrmParams, ZetaSchedule,
};
