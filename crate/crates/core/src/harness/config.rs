//! Experiment configuration: one JSON document per run.

use serde::{Deserialize, Serialize};

use crate::distributions::ValueDistribution;
use crate::equilibrium::symmetric_optimum;
use crate::error::{Error, Result};
use crate::mechanism::{MechanismConfig, RecordingSpec};
use crate::strategies::{EtaSchedule, GenericPolicy, Strategy, WrmParams, ZetaSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Deviation,
    WrmConvergence,
    VerifyPartition,
    Dominance,
    UtilityBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Uniform01,
    Finite { support: Vec<(f64, f64)> },
}

impl DistSpec {
    pub fn build(&self, path: &str) -> Result<ValueDistribution> {
        match self {
            DistSpec::Uniform01 => Ok(ValueDistribution::uniform01()),
            DistSpec::Finite { support } => ValueDistribution::finite(support.clone())
                .map_err(|e| Error::InvalidConfig(format!("{path}: {e}"))),
        }
    }
}

fn default_eta0() -> f64 {
    1.0
}
fn default_eta_min() -> f64 {
    0.05
}
fn default_t0() -> u64 {
    10_000
}
fn default_epsilon() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StrategySpec {
    Static {
        p: f64,
    },
    Wrm {
        /// "paper" (eta = 1/log(t)^(1/2-epsilon), zeta = 1 - t^(-1/4)) or
        /// "linear" (zeta = 1, eta linear from eta0 down to eta_min over t0).
        schedule: String,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_eta0")]
        eta0: f64,
        #[serde(default = "default_eta_min")]
        eta_min: f64,
        #[serde(default = "default_t0")]
        t0: u64,
        /// Override the computed optimal symmetric rate.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_star: Option<f64>,
    },
    Generic {
        table: Vec<(f64, f64)>,
    },
}

impl StrategySpec {
    /// Build the strategy for an agent. `p_star_default` supplies the computed
    /// optimum when the spec does not pin one.
    pub fn build(
        &self,
        n: usize,
        dist: &ValueDistribution,
        path: &str,
        p_star_default: &mut dyn FnMut(&ValueDistribution) -> Result<f64>,
    ) -> Result<Strategy> {
        let strategy = match self {
            StrategySpec::Static { p } => Strategy::StaticThreshold(*p),
            StrategySpec::Wrm {
                schedule,
                epsilon,
                eta0,
                eta_min,
                t0,
                p_star,
            } => {
                let (eta, zeta) = match schedule.as_str() {
                    "paper" => (
                        EtaSchedule::LogDecay { epsilon: *epsilon },
                        ZetaSchedule::PolyGap,
                    ),
                    "linear" => (
                        EtaSchedule::LinearDecay {
                            eta0: *eta0,
                            eta_min: *eta_min,
                            t0: *t0,
                        },
                        ZetaSchedule::One,
                    ),
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "{path}.schedule: unknown schedule '{other}' (expected \"paper\" or \"linear\")"
                        )))
                    }
                };
                let p_star = match p_star {
                    Some(p) => *p,
                    None => p_star_default(dist)?,
                };
                Strategy::WinRateMatching(WrmParams {
                    p_star,
                    eta,
                    zeta,
                    n,
                })
            }
            StrategySpec::Generic { table } => Strategy::Generic(
                GenericPolicy::new(table.clone())
                    .map_err(|e| Error::InvalidConfig(format!("{path}.table: {e}")))?,
            ),
        };
        strategy
            .validate(n, dist)
            .map_err(|e| Error::InvalidConfig(format!("{path}: {e}")))?;
        Ok(strategy)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub dist: DistSpec,
    pub strategy: StrategySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fair_shares: Option<Vec<f64>>,
}

fn default_growth() -> f64 {
    1.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum RecordingConfig {
    Full {
        #[serde(default)]
        values: bool,
    },
    Checkpoints {
        #[serde(default = "default_growth")]
        growth: f64,
    },
}

impl RecordingConfig {
    pub fn build(&self, path: &str) -> Result<RecordingSpec> {
        match self {
            RecordingConfig::Full { values } => Ok(RecordingSpec::Full { values: *values }),
            RecordingConfig::Checkpoints { growth } => {
                if *growth <= 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "{path}.growth: must exceed 1, got {growth}"
                    )));
                }
                Ok(RecordingSpec::Checkpoints { growth: *growth })
            }
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationSpec {
    /// Index of the agent replaced in the deviant run.
    pub deviator: usize,
    pub strategy: StrategySpec,
    /// Check that the deviator's paired 95% CI lies below the baseline.
    #[serde(default = "default_true")]
    pub check_penalty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviatorThreshold {
    pub index: usize,
    pub p: f64,
}

fn default_tolerance() -> f64 {
    0.05
}
fn default_pass_fraction_90() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_pass_fraction_90")]
    pub min_pass_fraction: f64,
    /// Replace one agent by a fixed threshold; disables the p* check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviator: Option<DeviatorThreshold>,
    #[serde(default = "default_true")]
    pub check: bool,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            min_pass_fraction: default_pass_fraction_90(),
            deviator: None,
            check: true,
        }
    }
}

fn default_profiles() -> u32 {
    200
}
fn default_max_n() -> usize {
    6
}
fn default_envelope() -> f64 {
    5.0
}
fn default_pass_fraction_95() -> f64 {
    0.95
}
fn default_min_p() -> f64 {
    0.05
}
fn default_max_p() -> f64 {
    0.95
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionCheckSpec {
    #[serde(default = "default_profiles")]
    pub profiles: u32,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    /// Envelope multiplier c in |W/T - slope| <= c sqrt(T ln T) / T.
    #[serde(default = "default_envelope")]
    pub envelope: f64,
    #[serde(default = "default_pass_fraction_95")]
    pub min_pass_fraction: f64,
    #[serde(default = "default_min_p")]
    pub min_p: f64,
    #[serde(default = "default_max_p")]
    pub max_p: f64,
    /// Force equal fair shares instead of random ones.
    #[serde(default)]
    pub symmetric_shares: bool,
    #[serde(default = "default_true")]
    pub check: bool,
}

impl Default for PartitionCheckSpec {
    fn default() -> Self {
        Self {
            profiles: default_profiles(),
            max_n: default_max_n(),
            envelope: default_envelope(),
            min_pass_fraction: default_pass_fraction_95(),
            min_p: default_min_p(),
            max_p: default_max_p(),
            symmetric_shares: false,
            check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominanceSpec {
    /// Agent whose generic policy is compared against its thresholdization.
    pub agent: usize,
    #[serde(default = "default_true")]
    pub check: bool,
}

fn default_bound_tol() -> f64 {
    0.02
}
fn default_analytic_n() -> Vec<usize> {
    vec![2, 5, 10, 20]
}
fn default_log_n() -> Vec<usize> {
    vec![5, 10, 20, 50]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// Absolute slack on per-round utility against (1 - 1/e) * ideal.
    #[serde(default = "default_bound_tol")]
    pub tolerance: f64,
    #[serde(default = "default_analytic_n")]
    pub analytic_n: Vec<usize>,
    /// Agent counts for the uniform-distribution log(n)/n comparison.
    #[serde(default = "default_log_n")]
    pub uniform_log_n: Vec<usize>,
    #[serde(default = "default_true")]
    pub check: bool,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            tolerance: default_bound_tol(),
            analytic_n: default_analytic_n(),
            uniform_log_n: default_log_n(),
            check: true,
        }
    }
}

fn default_resolution() -> f64 {
    1e-3
}

/// Inputs for the analytic subcommands (pstar, best-response, ne-scan).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Symmetric shortcut: one distribution for all agents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dists: Option<Vec<DistSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fair_shares: Option<Vec<f64>>,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responder: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

fn default_replications() -> u32 {
    1
}

/// The single JSON document driving every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recording: Option<RecordingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<DeviationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_check: Option<PartitionCheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance: Option<DominanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds_check: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
}

/// Fully validated simulation inputs shared by the Monte Carlo experiments.
#[derive(Debug)]
pub struct SimulationSetup {
    pub mechanism: MechanismConfig,
    pub dists: Vec<ValueDistribution>,
    pub strategies: Vec<Strategy>,
    pub horizon: u64,
    pub replications: u32,
    pub seed: u64,
    pub recording: RecordingSpec,
}

impl ExperimentConfig {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_json(&text)
    }

    pub fn required_kind(&self) -> Result<ExperimentKind> {
        self.experiment
            .ok_or_else(|| Error::InvalidConfig("experiment: required".into()))
    }

    pub fn mechanism_config(&self) -> Result<MechanismConfig> {
        let spec = self
            .mechanism
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("mechanism: required".into()))?;
        if spec.n == 0 {
            return Err(Error::InvalidConfig("mechanism.n: must be >= 1".into()));
        }
        let cfg = match &spec.fair_shares {
            None => MechanismConfig::symmetric(spec.n),
            Some(shares) => {
                if shares.len() != spec.n {
                    return Err(Error::InvalidConfig(format!(
                        "mechanism.fair_shares: length {} does not match n = {}",
                        shares.len(),
                        spec.n
                    )));
                }
                MechanismConfig::new(shares.clone())
            }
        };
        cfg.map_err(|e| Error::InvalidConfig(format!("mechanism.fair_shares: {e}")))
    }

    /// Resolve mechanism, distributions, strategies, horizon, and recording.
    pub fn simulation_setup(&self) -> Result<SimulationSetup> {
        let mechanism = self.mechanism_config()?;
        let n = mechanism.n();
        if self.agents.len() != n {
            return Err(Error::InvalidConfig(format!(
                "agents: got {} entries for mechanism.n = {n}",
                self.agents.len()
            )));
        }
        let horizon = self
            .horizon
            .ok_or_else(|| Error::InvalidConfig("horizon: required".into()))?;
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon: must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications: must be >= 1".into()));
        }
        let mut dists = Vec::with_capacity(n);
        for (i, agent) in self.agents.iter().enumerate() {
            dists.push(agent.dist.build(&format!("agents[{i}].dist"))?);
        }
        let mut strategies = Vec::with_capacity(n);
        for (i, agent) in self.agents.iter().enumerate() {
            let mut pstar = |d: &ValueDistribution| Ok(symmetric_optimum(d, n, 1e-3)?.p);
            strategies.push(agent.strategy.build(
                n,
                &dists[i],
                &format!("agents[{i}].strategy"),
                &mut pstar,
            )?);
        }
        let recording = match &self.recording {
            None => RecordingSpec::checkpoints(),
            Some(r) => r.build("recording")?,
        };
        Ok(SimulationSetup {
            mechanism,
            dists,
            strategies,
            horizon,
            replications: self.replications,
            seed: self.seed,
            recording,
        })
    }

    pub fn game_spec(&self) -> Result<&GameSpec> {
        self.game
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("game: required for this subcommand".into()))
    }
}

impl GameSpec {
    /// Resolve the distribution list (symmetric shortcut or explicit list).
    pub fn build_dists(&self) -> Result<Vec<ValueDistribution>> {
        match (&self.dist, &self.dists) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "game: give either dist (symmetric) or dists, not both".into(),
            )),
            (Some(d), None) => {
                let n = self.n.ok_or_else(|| {
                    Error::InvalidConfig("game.n: required with game.dist".into())
                })?;
                if n == 0 {
                    return Err(Error::InvalidConfig("game.n: must be >= 1".into()));
                }
                Ok(vec![d.build("game.dist")?; n])
            }
            (None, Some(list)) => {
                if list.is_empty() {
                    return Err(Error::InvalidConfig("game.dists: must be nonempty".into()));
                }
                if let Some(n) = self.n {
                    if n != list.len() {
                        return Err(Error::InvalidConfig(format!(
                            "game.n = {n} disagrees with game.dists length {}",
                            list.len()
                        )));
                    }
                }
                list.iter()
                    .enumerate()
                    .map(|(i, d)| d.build(&format!("game.dists[{i}]")))
                    .collect()
            }
            (None, None) => Err(Error::InvalidConfig(
                "game.dist or game.dists: required".into(),
            )),
        }
    }

    pub fn build_shares(&self, n: usize) -> Result<Vec<f64>> {
        match &self.fair_shares {
            None => Ok(vec![1.0 / n as f64; n]),
            Some(shares) => {
                if shares.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "game.fair_shares: length {} does not match agent count {n}",
                        shares.len()
                    )));
                }
                Ok(shares.clone())
            }
        }
    }
}
