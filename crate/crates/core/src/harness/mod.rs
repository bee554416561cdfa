//! Experiment orchestration: config ingestion, replicated runs, result
//! emission, and the acceptance-style checks behind the CLI exit code.

pub mod config;
pub mod experiments;
pub mod output;
pub mod stats;

pub use config::{
    AgentSpec, BoundsSpec, ConvergenceSpec, DeviationSpec, DistSpec, DominanceSpec,
    ExperimentConfig, ExperimentKind, GameSpec, MechanismSpec, PartitionCheckSpec, RecordingConfig,
    SimulationSetup, StrategySpec,
};
pub use experiments::{run_experiment, sample_profile, CheckResult, ExperimentOutcome};
