//! Agent request policies.
//!
//! Three families: static thresholds (request at a fixed top-p quantile every
//! round), win-rate matching (a dynamic threshold driven by the public
//! allocation count), and generic value-dependent policies given as a
//! piecewise-constant request-probability table. `thresholdize` converts a
//! generic policy into the threshold strategy with the same overall request
//! probability, which weakly improves the value conditioned on requesting.

use crate::distributions::ValueDistribution;
use crate::error::{Error, Result};

/// What a strategy may observe: the round index and the number of previous
/// rounds in which the resource was allocated. Nothing identifies who
/// requested; publishing the allocation indicator is enough.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublicInfo {
    /// Current round, 1-based.
    pub t: u64,
    /// K[t-1]: allocated rounds among 1..t-1.
    pub alloc_rounds: u64,
}

/// Probability that at least one of `n` independent p-requesters requests.
pub fn phi(p: f64, n: usize) -> f64 {
    assert!(n >= 1, "phi needs at least one agent");
    1.0 - (1.0 - p).powi(n as i32)
}

/// Inverse of [`phi`]: the per-agent rate matching a total rate `x`.
pub fn phi_inv(x: f64, n: usize) -> f64 {
    assert!(n >= 1, "phi_inv needs at least one agent");
    let x = x.clamp(0.0, 1.0);
    if n == 1 {
        return x;
    }
    1.0 - (1.0 - x).powf(1.0 / n as f64)
}

/// Drift-rate schedule for win-rate matching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaSchedule {
    /// 1 / log(t)^(1/2 - epsilon), clamped into [0,1]; epsilon in (0, 1/4).
    LogDecay { epsilon: f64 },
    /// Linear decay from `eta0` at t = 1 to `eta_min` at t = t0 + 1, frozen after.
    LinearDecay { eta0: f64, eta_min: f64, t0: u64 },
    /// Constant drift.
    Constant(f64),
}

impl EtaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EtaSchedule::LogDecay { epsilon } => {
                if !(epsilon > 0.0 && epsilon < 0.25) {
                    return Err(Error::InvalidConfig(format!(
                        "eta schedule epsilon {epsilon} outside (0, 0.25)"
                    )));
                }
            }
            EtaSchedule::LinearDecay { eta0, eta_min, t0 } => {
                if !(0.0..=1.0).contains(&eta_min) || !(0.0..=1.0).contains(&eta0) || eta_min > eta0
                {
                    return Err(Error::InvalidConfig(format!(
                        "eta schedule needs 0 <= eta_min <= eta0 <= 1, got eta0 = {eta0}, eta_min = {eta_min}"
                    )));
                }
                if t0 == 0 {
                    return Err(Error::InvalidConfig("eta schedule t0 must be >= 1".into()));
                }
            }
            EtaSchedule::Constant(e) => {
                if !(0.0..=1.0).contains(&e) {
                    return Err(Error::InvalidConfig(format!(
                        "constant eta {e} outside [0,1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: u64) -> f64 {
        match *self {
            EtaSchedule::LogDecay { epsilon } => {
                if t <= 1 {
                    1.0
                } else {
                    (1.0 / (t as f64).ln().powf(0.5 - epsilon)).clamp(0.0, 1.0)
                }
            }
            EtaSchedule::LinearDecay { eta0, eta_min, t0 } => {
                if t.saturating_sub(1) >= t0 {
                    eta_min
                } else {
                    let frac = t.saturating_sub(1) as f64 / t0 as f64;
                    eta0 + (eta_min - eta0) * frac
                }
            }
            EtaSchedule::Constant(e) => e,
        }
    }
}

/// Gap schedule keeping the matched rate away from the all-request sink.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaSchedule {
    /// 1 - t^(-1/4), approaching 1 from below.
    PolyGap,
    /// No gap.
    One,
}

impl ZetaSchedule {
    pub fn eval(&self, t: u64) -> f64 {
        match self {
            ZetaSchedule::PolyGap => 1.0 - (t as f64).powf(-0.25),
            ZetaSchedule::One => 1.0,
        }
    }
}

/// Parameters of the win-rate-matching strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct WrmParams {
    /// Target rate drifted toward (the welfare-optimal symmetric rate).
    pub p_star: f64,
    pub eta: EtaSchedule,
    pub zeta: ZetaSchedule,
    /// Number of agents in the mechanism.
    pub n: usize,
}

impl WrmParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_star) {
            return Err(Error::InvalidConfig(format!(
                "p_star {} outside [0,1]",
                self.p_star
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("agent count must be >= 1".into()));
        }
        self.eta.validate()
    }
}

/// Guard keeping the matched-rate argument strictly below 1 before inversion.
const SINK_GUARD: f64 = 1e-12;

/// The per-round request probability of win-rate matching:
/// `(1 - eta(t)) * phi_inv(zeta(t) K[t-1] / (t-1)) + eta(t) p*`.
///
/// Round 1 divides by zero in the matching term, so it returns `p*` (the
/// drift term is the only well-defined component there).
pub fn wrm_request_probability(params: &WrmParams, t: u64, alloc_rounds: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::State("rounds are 1-based".into()));
    }
    if t == 1 {
        return Ok(params.p_star);
    }
    let prev = t - 1;
    if alloc_rounds > prev {
        return Err(Error::State(format!(
            "alloc_rounds {alloc_rounds} exceeds t-1 = {prev}"
        )));
    }
    let eta = params.eta.eval(t);
    let zeta = params.zeta.eval(t);
    let arg = (zeta * alloc_rounds as f64 / prev as f64).clamp(0.0, 1.0 - SINK_GUARD);
    let m = (1.0 - eta) * phi_inv(arg, params.n) + eta * params.p_star;
    Ok(m.clamp(0.0, 1.0))
}

/// Value-dependent request probabilities as a piecewise-constant table.
///
/// Entries are (value, probability), sorted by value. Over a finite support
/// the entries are read per atom; over the uniform distribution entry k
/// applies on the interval (value_{k-1}, value_k] with value_0 = 0, so the
/// last entry must reach value 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericPolicy {
    entries: Vec<(f64, f64)>,
}

impl GenericPolicy {
    pub fn new(mut entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig("empty policy table".into()));
        }
        for &(v, q) in &entries {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "policy table value {v} outside [0,1]"
                )));
            }
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidConfig(format!(
                    "policy table probability {q} outside [0,1]"
                )));
            }
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
        entries.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 = a.1;
                true
            } else {
                false
            }
        });
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Request probability for a realized value: the first entry at or above it.
    pub fn request_prob_for(&self, value: f64) -> f64 {
        for &(v, q) in &self.entries {
            if value <= v {
                return q;
            }
        }
        0.0
    }

    /// Check the table covers the distribution's support.
    pub fn validate_for(&self, dist: &ValueDistribution) -> Result<()> {
        match dist {
            ValueDistribution::Uniform01 => {
                let last = self.entries.last().expect("nonempty").0;
                if last < 1.0 {
                    return Err(Error::InvalidConfig(
                        "policy table over uniform01 must end at value 1".into(),
                    ));
                }
                Ok(())
            }
            ValueDistribution::Finite(f) => {
                for &(v, _) in f.atoms() {
                    if !self.entries.iter().any(|&(e, _)| e == v) {
                        return Err(Error::InvalidConfig(format!(
                            "policy table missing support value {v}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Overall request probability of the policy under `dist`.
    pub fn overall_request_probability(&self, dist: &ValueDistribution) -> f64 {
        match dist {
            ValueDistribution::Uniform01 => {
                let mut total = 0.0;
                let mut prev = 0.0;
                for &(v, q) in &self.entries {
                    let hi = v.min(1.0);
                    if hi > prev {
                        total += q * (hi - prev);
                        prev = hi;
                    }
                }
                total
            }
            ValueDistribution::Finite(f) => f
                .atoms()
                .iter()
                .map(|&(v, q)| q * self.request_prob_for(v))
                .sum(),
        }
    }
}

/// An agent's policy for the whole run.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// Request at the fixed top-p quantile, independent of history.
    StaticThreshold(f64),
    /// Win-rate matching.
    WinRateMatching(WrmParams),
    /// Value-dependent request table (not a threshold strategy in general).
    Generic(GenericPolicy),
}

impl Strategy {
    /// The request probability emitted for this round, when the strategy is a
    /// dynamic threshold strategy. Generic policies have no single rate; they
    /// are handled by value in the simulation loop.
    pub fn request_probability(&self, info: PublicInfo) -> Result<Option<f64>> {
        match self {
            Strategy::StaticThreshold(p) => Ok(Some(*p)),
            Strategy::WinRateMatching(params) => Ok(Some(wrm_request_probability(
                params,
                info.t,
                info.alloc_rounds,
            )?)),
            Strategy::Generic(_) => Ok(None),
        }
    }

    pub fn validate(&self, n: usize, dist: &ValueDistribution) -> Result<()> {
        match self {
            Strategy::StaticThreshold(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidConfig(format!(
                        "static threshold p {p} outside [0,1]"
                    )));
                }
                Ok(())
            }
            Strategy::WinRateMatching(params) => {
                if params.n != n {
                    return Err(Error::InvalidConfig(format!(
                        "wrm agent count {} disagrees with mechanism n {n}",
                        params.n
                    )));
                }
                params.validate()
            }
            Strategy::Generic(policy) => policy.validate_for(dist),
        }
    }
}

/// Replace a value-dependent policy by the threshold strategy with the same
/// overall request probability.
pub fn thresholdize(policy: &GenericPolicy, dist: &ValueDistribution) -> Result<Strategy> {
    policy.validate_for(dist)?;
    let p = policy.overall_request_probability(dist).clamp(0.0, 1.0);
    Ok(Strategy::StaticThreshold(p))
}
