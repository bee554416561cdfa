//! The allocation engine.
//!
//! Each round every agent may request; the item goes to the requester with
//! the minimum wins-to-fair-share ratio W_i/alpha_i, ties to the lowest
//! index. Ratios are compared exactly by cross-multiplying the integer win
//! counts against the binary mantissa/exponent decomposition of the shares,
//! so rounding can neither create nor destroy a tie.

use std::cmp::Ordering;

use rand::Rng;

use crate::distributions::ValueDistribution;
use crate::error::{Error, Result};
use crate::rng::{strategy_rng, value_rng};
use crate::strategies::{PublicInfo, Strategy};

/// Tolerance for the fair-share sum.
const SHARE_SUM_TOL: f64 = 1e-12;

/// Agent count and fair shares.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismConfig {
    shares: Vec<f64>,
    // Cached binary decomposition of each share: share = mantissa * 2^exp.
    decomp: Vec<(u64, i32)>,
}

impl MechanismConfig {
    pub fn new(shares: Vec<f64>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::InvalidConfig("need at least one agent".into()));
        }
        for (i, &a) in shares.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "fair_shares[{i}] = {a} must be positive"
                )));
            }
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > SHARE_SUM_TOL {
            return Err(Error::InvalidConfig(format!(
                "fair shares sum to {total}, expected 1"
            )));
        }
        let decomp = shares.iter().map(|&a| decompose(a)).collect();
        Ok(Self { shares, decomp })
    }

    /// Equal shares 1/n.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }

    pub fn fair_shares(&self) -> &[f64] {
        &self.shares
    }
}

/// The Markov state of the allocation process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismState {
    t: u64,
    wins: Vec<u64>,
    total_wins: u64,
}

impl MechanismState {
    pub fn new(n: usize) -> Self {
        Self {
            t: 0,
            wins: vec![0; n],
            total_wins: 0,
        }
    }

    /// Resume from explicit win counts (round index = sum is not assumed).
    pub fn with_wins(t: u64, wins: Vec<u64>) -> Result<Self> {
        let total: u64 = wins.iter().sum();
        if total > t {
            return Err(Error::State(format!(
                "total wins {total} exceed round index {t}"
            )));
        }
        Ok(Self {
            t,
            wins,
            total_wins: total,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    pub fn total_wins(&self) -> u64 {
        self.total_wins
    }
}

/// x = mantissa * 2^exp for finite positive x.
fn decompose(x: f64) -> (u64, i32) {
    debug_assert!(x.is_finite() && x > 0.0);
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    }
}

/// Compare a * 2^shift with b without overflow.
fn shifted_cmp(a: u128, shift: u32, b: u128) -> Ordering {
    if a == 0 {
        return 0u128.cmp(&b);
    }
    if shift > a.leading_zeros() {
        // a * 2^shift exceeds u128 range while b does not.
        Ordering::Greater
    } else {
        (a << shift).cmp(&b)
    }
}

/// Exact comparison of w_i / alpha_i with w_j / alpha_j.
fn ratio_cmp(w_i: u64, d_i: (u64, i32), w_j: u64, d_j: (u64, i32)) -> Ordering {
    // w_i / (m_i 2^{e_i}) < w_j / (m_j 2^{e_j})  <=>  w_i m_j 2^{e_j} < w_j m_i 2^{e_i}
    let a = u128::from(w_i) * u128::from(d_j.0);
    let b = u128::from(w_j) * u128::from(d_i.0);
    let d = d_j.1 - d_i.1;
    if d >= 0 {
        shifted_cmp(a, d as u32, b)
    } else {
        shifted_cmp(b, (-d) as u32, a).reverse()
    }
}

/// Run one round: award the item to the requester with minimum W/alpha
/// (lowest index on ties), update the state, and return the winner.
pub fn step(
    state: &mut MechanismState,
    config: &MechanismConfig,
    requests: &[bool],
) -> Result<Option<usize>> {
    if requests.len() != config.n() {
        return Err(Error::InvalidConfig(format!(
            "requests length {} does not match agent count {}",
            requests.len(),
            config.n()
        )));
    }
    let mut winner: Option<usize> = None;
    for (i, &req) in requests.iter().enumerate() {
        if !req {
            continue;
        }
        winner = match winner {
            None => Some(i),
            Some(w) => {
                // Strictly smaller ratio takes over; ties keep the lower index.
                if ratio_cmp(
                    state.wins[i],
                    config.decomp[i],
                    state.wins[w],
                    config.decomp[w],
                ) == Ordering::Less
                {
                    Some(i)
                } else {
                    Some(w)
                }
            }
        };
    }
    state.t += 1;
    if let Some(w) = winner {
        state.wins[w] += 1;
        state.total_wins += 1;
    }
    Ok(winner)
}

/// What to keep while running.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecordingSpec {
    /// Every round; optionally keep realized values too.
    Full { values: bool },
    /// A geometric time grid ceil(growth^k), always including the horizon.
    Checkpoints { growth: f64 },
}

impl RecordingSpec {
    pub fn checkpoints() -> Self {
        RecordingSpec::Checkpoints { growth: 1.1 }
    }
}

/// One recorded round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub requests: Vec<bool>,
    pub winner: Option<usize>,
    /// Realized value collected by the winner, if any.
    pub winner_value: Option<f64>,
    /// All realized values; kept only when requested.
    pub values: Option<Vec<f64>>,
}

/// State snapshot at a recorded time, together with that round's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub wins: Vec<u64>,
    pub utilities: Vec<f64>,
    pub total_wins: u64,
    pub requests: Vec<bool>,
    pub winner: Option<usize>,
}

/// Everything recorded from one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub seed: u64,
    pub horizon: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Present only under full recording.
    pub rounds: Option<Vec<RoundRecord>>,
    pub final_wins: Vec<u64>,
    pub final_utilities: Vec<f64>,
    pub total_wins: u64,
}

/// The geometric checkpoint grid for a horizon.
pub fn checkpoint_times(horizon: u64, growth: f64) -> Vec<u64> {
    assert!(growth > 1.0, "growth must exceed 1");
    let mut times = Vec::new();
    let mut x = 1.0f64;
    loop {
        let t = x.ceil() as u64;
        if t >= horizon {
            break;
        }
        if times.last() != Some(&t) {
            times.push(t);
        }
        x *= growth;
    }
    times.push(horizon);
    times
}

/// Inputs for one deterministic run.
pub struct RunSpec<'a> {
    pub config: &'a MechanismConfig,
    pub dists: &'a [ValueDistribution],
    pub strategies: &'a [Strategy],
    pub horizon: u64,
    pub seed: u64,
    pub recording: RecordingSpec,
}

/// Simulate the mechanism for `horizon` rounds. Deterministic per seed: one
/// value stream and one randomization stream per agent, untouched by the
/// recording mode.
pub fn run(spec: &RunSpec) -> Result<Trajectory> {
    let n = spec.config.n();
    if spec.dists.len() != n || spec.strategies.len() != n {
        return Err(Error::InvalidConfig(format!(
            "distributions ({}) and strategies ({}) must both match agent count {n}",
            spec.dists.len(),
            spec.strategies.len()
        )));
    }
    if spec.horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be >= 1".into()));
    }
    for (i, s) in spec.strategies.iter().enumerate() {
        s.validate(n, &spec.dists[i])
            .map_err(|e| Error::InvalidConfig(format!("agent {i}: {e}")))?;
    }

    let mut value_rngs: Vec<_> = (0..n).map(|i| value_rng(spec.seed, i)).collect();
    let mut strat_rngs: Vec<_> = (0..n).map(|i| strategy_rng(spec.seed, i)).collect();

    // Static rules never change; build them once.
    let static_rules: Vec<Option<crate::distributions::RequestRule>> = spec
        .strategies
        .iter()
        .zip(spec.dists)
        .map(|(s, d)| match s {
            Strategy::StaticThreshold(p) => Some(d.quantile_threshold(*p)),
            _ => None,
        })
        .collect();

    let grid = match spec.recording {
        RecordingSpec::Checkpoints { growth } => checkpoint_times(spec.horizon, growth),
        RecordingSpec::Full { .. } => Vec::new(),
    };
    let mut grid_next = 0usize;

    let mut state = MechanismState::new(n);
    let mut utilities = vec![0.0f64; n];
    let mut values = vec![0.0f64; n];
    let mut requests = vec![false; n];
    let mut checkpoints = Vec::new();
    let mut rounds = match spec.recording {
        RecordingSpec::Full { .. } => Some(Vec::with_capacity(spec.horizon as usize)),
        _ => None,
    };

    for t in 1..=spec.horizon {
        for i in 0..n {
            values[i] = spec.dists[i].sample(&mut value_rngs[i]);
        }
        let info = PublicInfo {
            t,
            alloc_rounds: state.total_wins,
        };
        for i in 0..n {
            requests[i] = match &spec.strategies[i] {
                Strategy::StaticThreshold(_) => static_rules[i]
                    .as_ref()
                    .expect("cached")
                    .decide(values[i], &mut strat_rngs[i]),
                Strategy::WinRateMatching(params) => {
                    let p = crate::strategies::wrm_request_probability(
                        params,
                        info.t,
                        info.alloc_rounds,
                    )?;
                    spec.dists[i]
                        .quantile_threshold(p)
                        .decide(values[i], &mut strat_rngs[i])
                }
                Strategy::Generic(policy) => {
                    let pr = policy.request_prob_for(values[i]);
                    strat_rngs[i].random::<f64>() < pr
                }
            };
        }
        let winner = step(&mut state, spec.config, &requests)?;
        if let Some(w) = winner {
            utilities[w] += values[w];
        }
        match spec.recording {
            RecordingSpec::Full { values: keep_vals } => {
                rounds.as_mut().expect("full mode").push(RoundRecord {
                    t,
                    requests: requests.clone(),
                    winner,
                    winner_value: winner.map(|w| values[w]),
                    values: keep_vals.then(|| values.clone()),
                });
            }
            RecordingSpec::Checkpoints { .. } => {
                if grid_next < grid.len() && grid[grid_next] == t {
                    grid_next += 1;
                    checkpoints.push(Checkpoint {
                        t,
                        wins: state.wins.clone(),
                        utilities: utilities.clone(),
                        total_wins: state.total_wins,
                        requests: requests.clone(),
                        winner,
                    });
                }
            }
        }
    }

    if let Some(rs) = &rounds {
        // Full mode still exposes the final snapshot as a single checkpoint.
        let last = rs.last().expect("horizon >= 1");
        checkpoints.push(Checkpoint {
            t: spec.horizon,
            wins: state.wins.clone(),
            utilities: utilities.clone(),
            total_wins: state.total_wins,
            requests: last.requests.clone(),
            winner: last.winner,
        });
    }

    Ok(Trajectory {
        n,
        seed: spec.seed,
        horizon: spec.horizon,
        checkpoints,
        rounds,
        final_wins: state.wins().to_vec(),
        final_utilities: utilities,
        total_wins: state.total_wins(),
    })
}
