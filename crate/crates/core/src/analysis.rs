//! Long-run predictions for static threshold profiles.
//!
//! The central object is the normalized request rate of a subset S,
//!
//! ```text
//! rate(S) = (1 - prod_{k in S} (1 - p_k)) / sum_{k in S} alpha_k
//! ```
//!
//! A subset S is *stable* when every nonempty R inside S has
//! rate(R) >= rate(S): whichever agents fall behind catch up faster than the
//! group average, so normalized win counts stay within o(t) of each other.
//! When the full set is unstable the agents decompose into the unique ordered
//! *splitting partition* (C_1, ..., C_m): each group is internally stable,
//! and every later group permanently outpaces every earlier one in normalized
//! wins. The long-run win slope of agent i in group C_u is
//!
//! ```text
//! slope_i = alpha_i / sum_{k in C_u} alpha_k
//!           * (1 - prod_{k in C_u} (1 - p_k))
//!           * prod_{v < u} prod_{k in C_v} (1 - p_k)
//! ```
//!
//! and the long-run per-round utility is slope_i * V_i(p_i).

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::distributions::ValueDistribution;
use crate::error::{Error, Result};
use crate::mechanism::Trajectory;

/// Default cap on subset enumeration (the stability check is 2^|S|).
pub const DEFAULT_SUBSET_CAP: usize = 20;

/// Relative tolerance for resolving equality in the stability inequality.
const STAB_TOL: f64 = 1e-12;

fn ge_tol(a: f64, b: f64) -> bool {
    a >= b - STAB_TOL * a.abs().max(b.abs()).max(1.0)
}

fn gt_tol(a: f64, b: f64) -> bool {
    a > b + STAB_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Fair shares plus static request probabilities for every agent.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdProfile {
    fair_shares: Vec<f64>,
    request_probs: Vec<f64>,
}

impl ThresholdProfile {
    pub fn new(fair_shares: Vec<f64>, request_probs: Vec<f64>) -> Result<Self> {
        if fair_shares.len() != request_probs.len() || fair_shares.is_empty() {
            return Err(Error::InvalidConfig(
                "fair shares and request probabilities must have equal nonzero length".into(),
            ));
        }
        for (i, &a) in fair_shares.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "fair_shares[{i}] = {a} must be positive"
                )));
            }
        }
        let total: f64 = fair_shares.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "fair shares sum to {total}, expected 1"
            )));
        }
        for (i, &p) in request_probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "request_probs[{i}] = {p} outside [0,1]"
                )));
            }
        }
        Ok(Self {
            fair_shares,
            request_probs,
        })
    }

    /// Equal shares 1/n.
    pub fn symmetric(request_probs: Vec<f64>) -> Result<Self> {
        let n = request_probs.len();
        Self::new(vec![1.0 / n as f64; n], request_probs)
    }

    pub fn n(&self) -> usize {
        self.fair_shares.len()
    }

    pub fn fair_shares(&self) -> &[f64] {
        &self.fair_shares
    }

    pub fn request_probs(&self) -> &[f64] {
        &self.request_probs
    }
}

/// Reusable mask-indexed tables; lets hot loops (grid scans) avoid
/// reallocating per evaluation.
#[derive(Default)]
pub struct AnalysisWorkspace {
    prod: Vec<f64>,     // prod_{k in mask} (1 - p_k)
    share: Vec<f64>,    // sum_{k in mask} alpha_k
    rate: Vec<f64>,     // (1 - prod) / share
    min_rate: Vec<f64>, // min over nonempty submasks of rate
    groups: Vec<u32>,   // scratch for partition masks
}

impl AnalysisWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn build(&mut self, shares: &[f64], probs: &[f64]) {
        let n = shares.len();
        let size = 1usize << n;
        self.prod.clear();
        self.prod.resize(size, 1.0);
        self.share.clear();
        self.share.resize(size, 0.0);
        self.rate.clear();
        self.rate.resize(size, f64::INFINITY);
        self.min_rate.clear();
        self.min_rate.resize(size, f64::INFINITY);
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            self.prod[mask] = self.prod[rest] * (1.0 - probs[low]);
            self.share[mask] = self.share[rest] + shares[low];
            self.rate[mask] = (1.0 - self.prod[mask]) / self.share[mask];
            let mut m = self.rate[mask];
            let mut bits = mask;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                let sub = mask ^ b;
                if sub != 0 {
                    m = m.min(self.min_rate[sub]);
                }
                bits ^= b;
            }
            self.min_rate[mask] = m;
        }
    }

    fn is_stable_mask(&self, mask: usize) -> bool {
        ge_tol(self.min_rate[mask], self.rate[mask])
    }

    fn is_strictly_stable_mask(&self, mask: usize) -> bool {
        if mask.count_ones() <= 1 {
            return true;
        }
        // Minimum over proper nonempty submasks: drop one element at a time.
        let mut m = f64::INFINITY;
        let mut bits = mask;
        while bits != 0 {
            let b = bits & bits.wrapping_neg();
            let sub = mask ^ b;
            if sub != 0 {
                m = m.min(self.min_rate[sub]);
            }
            bits ^= b;
        }
        gt_tol(m, self.rate[mask])
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// Does `subset` satisfy the stability criterion? With `strict`, the
/// inequality must be strict for every proper nonempty subset.
pub fn is_stable(subset: &[usize], profile: &ThresholdProfile, strict: bool) -> Result<bool> {
    is_stable_with_cap(subset, profile, strict, DEFAULT_SUBSET_CAP)
}

pub fn is_stable_with_cap(
    subset: &[usize],
    profile: &ThresholdProfile,
    strict: bool,
    cap: usize,
) -> Result<bool> {
    if subset.is_empty() {
        return Err(Error::Domain(
            "stability of the empty set is undefined".into(),
        ));
    }
    let mut idx: Vec<usize> = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    for &i in &idx {
        if i >= profile.n() {
            return Err(Error::InvalidConfig(format!(
                "agent index {i} out of range for n = {}",
                profile.n()
            )));
        }
    }
    check_cap(idx.len(), cap)?;
    // Stability is intrinsic to the subset; compact it into its own profile.
    let shares: Vec<f64> = idx.iter().map(|&i| profile.fair_shares[i]).collect();
    let probs: Vec<f64> = idx.iter().map(|&i| profile.request_probs[i]).collect();
    let mut ws = AnalysisWorkspace::new();
    ws.build(&shares, &probs);
    let full = (1usize << idx.len()) - 1;
    Ok(if strict {
        ws.is_strictly_stable_mask(full)
    } else {
        ws.is_stable_mask(full)
    })
}

/// The ordered decomposition into internally stable groups with strictly
/// increasing normalized win rates.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SplittingPartition {
    /// Agent indices per group, in splitting order (lowest rate first).
    pub groups: Vec<Vec<usize>>,
    /// Theorem-predicted normalized win rate of each group (slope_i / alpha_i,
    /// constant within a group and strictly increasing across groups).
    pub group_rates: Vec<f64>,
    /// Per-agent long-run win slope W_i[t] / t.
    pub slopes: Vec<f64>,
}

fn argmin_priority(shares: &[f64], probs: &[f64], remaining: usize) -> usize {
    let mut best = usize::MAX;
    let mut best_val = f64::INFINITY;
    let mut bits = remaining;
    while bits != 0 {
        let b = bits & bits.wrapping_neg();
        let i = b.trailing_zeros() as usize;
        let v = probs[i] / shares[i];
        if v < best_val {
            best_val = v;
            best = i;
        }
        bits ^= b;
    }
    best
}

/// Enumerate submasks of `pool` that contain `anchor_bit`, invoking `f`.
fn for_each_submask_with(pool: usize, anchor_bit: usize, mut f: impl FnMut(usize)) {
    debug_assert!(pool & anchor_bit != 0);
    let rest = pool & !anchor_bit;
    let mut sub = rest;
    loop {
        f(sub | anchor_bit);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
}

fn partition_masks(shares: &[f64], probs: &[f64], ws: &mut AnalysisWorkspace) -> Result<()> {
    let n = shares.len();
    ws.build(shares, probs);
    ws.groups.clear();
    let mut remaining = (1usize << n) - 1;
    while remaining != 0 {
        let istar = argmin_priority(shares, probs, remaining);
        let anchor = 1usize << istar;
        // Maximal stable subset of the remaining pool containing i*.
        let mut best = 0usize;
        let mut best_pc = 0u32;
        for_each_submask_with(remaining, anchor, |m| {
            if m.count_ones() > best_pc && ws.is_stable_mask(m) {
                best = m;
                best_pc = m.count_ones();
            }
        });
        debug_assert!(best_pc >= 1, "singletons are always stable");
        // Uniqueness: every stable subset containing i* must sit inside it.
        let mut unique = true;
        for_each_submask_with(remaining, anchor, |m| {
            if unique && ws.is_stable_mask(m) && m & !best != 0 {
                unique = false;
            }
        });
        if !unique {
            return Err(Error::Invariant(format!(
                "maximal stable set containing agent {istar} is not unique; shares = {shares:?}, probs = {probs:?}"
            )));
        }
        ws.groups.push(best as u32);
        remaining &= !best;
    }
    Ok(())
}

fn slopes_from_groups(
    shares: &[f64],
    ws: &AnalysisWorkspace,
    group_rates: Option<&mut Vec<f64>>,
    slopes: &mut Vec<f64>,
) {
    slopes.clear();
    slopes.resize(shares.len(), 0.0);
    let mut rates_out = group_rates;
    let mut prefix = 1.0f64;
    for &gm in &ws.groups {
        let mask = gm as usize;
        let hit = 1.0 - ws.prod[mask];
        let share_sum = ws.share[mask];
        let rate = hit / share_sum * prefix;
        if let Some(r) = rates_out.as_deref_mut() {
            r.push(rate);
        }
        let mut bits = mask;
        while bits != 0 {
            let b = bits & bits.wrapping_neg();
            let i = b.trailing_zeros() as usize;
            slopes[i] = shares[i] / share_sum * hit * prefix;
            bits ^= b;
        }
        prefix *= ws.prod[mask];
    }
}

/// Construct the splitting partition, peeling the unique maximal stable set
/// containing the minimum-priority agent argmin p_i/alpha_i at each level.
pub fn splitting_partition(profile: &ThresholdProfile) -> Result<SplittingPartition> {
    splitting_partition_with_cap(profile, DEFAULT_SUBSET_CAP)
}

pub fn splitting_partition_with_cap(
    profile: &ThresholdProfile,
    cap: usize,
) -> Result<SplittingPartition> {
    check_cap(profile.n(), cap)?;
    let mut ws = AnalysisWorkspace::new();
    partition_masks(profile.fair_shares(), profile.request_probs(), &mut ws)?;
    let mut group_rates = Vec::with_capacity(ws.groups.len());
    let mut slopes = Vec::new();
    slopes_from_groups(
        profile.fair_shares(),
        &ws,
        Some(&mut group_rates),
        &mut slopes,
    );
    let groups: Vec<Vec<usize>> = ws
        .groups
        .iter()
        .map(|&gm| {
            let mut g: Vec<usize> = (0..profile.n()).filter(|&i| gm & (1 << i) != 0).collect();
            g.sort_unstable();
            g
        })
        .collect();
    Ok(SplittingPartition {
        groups,
        group_rates,
        slopes,
    })
}

/// Per-agent long-run win slopes (thin wrapper over the partition).
pub fn predicted_win_slopes(profile: &ThresholdProfile) -> Result<Vec<f64>> {
    Ok(splitting_partition(profile)?.slopes)
}

/// Allocation-free slope computation for grid scans. `shares`/`probs` must
/// already be validated.
pub(crate) fn predicted_win_slopes_into(
    shares: &[f64],
    probs: &[f64],
    ws: &mut AnalysisWorkspace,
    slopes: &mut Vec<f64>,
) -> Result<()> {
    partition_masks(shares, probs, ws)?;
    slopes_from_groups(shares, ws, None, slopes);
    Ok(())
}

/// Long-run per-round utility of each agent: slope_i * V_i(p_i), with the
/// convention that an agent who never requests earns zero.
pub fn predicted_utility(
    profile: &ThresholdProfile,
    dists: &[ValueDistribution],
) -> Result<Vec<f64>> {
    if dists.len() != profile.n() {
        return Err(Error::InvalidConfig(format!(
            "got {} distributions for {} agents",
            dists.len(),
            profile.n()
        )));
    }
    let slopes = predicted_win_slopes(profile)?;
    profile
        .request_probs()
        .iter()
        .zip(slopes)
        .zip(dists)
        .map(|((&p, slope), dist)| {
            if p == 0.0 {
                Ok(0.0)
            } else {
                Ok(slope * dist.conditional_mean(p)?)
            }
        })
        .collect()
}

/// Per-round utility from winning exactly a fair-share fraction of rounds at
/// one's top values: alpha * V(alpha).
pub fn ideal_utility(dist: &ValueDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "ideal utility requires alpha in (0,1], got {alpha}"
        )));
    }
    Ok(alpha * dist.conditional_mean(alpha)?)
}

/// Alternative construction of the partition that peels *top* groups off via
/// the maximizer of F_S(U) = rate(U) * prod_{k in S \ U} (1 - p_k); the
/// maximizer is always stable, which is what makes this terminate. Used as a
/// cross-check against [`splitting_partition`].
pub fn splitting_partition_via_maximizer(profile: &ThresholdProfile) -> Result<SplittingPartition> {
    check_cap(profile.n(), DEFAULT_SUBSET_CAP)?;
    let shares = profile.fair_shares();
    let probs = profile.request_probs();
    let n = profile.n();
    let mut ws = AnalysisWorkspace::new();
    ws.build(shares, probs);

    let mut ordered_masks: Vec<usize> = Vec::new();
    let mut remaining = (1usize << n) - 1;
    while remaining != 0 {
        if ws.is_stable_mask(remaining) {
            ordered_masks.push(remaining);
            break;
        }
        let istar = argmin_priority(shares, probs, remaining);
        let anchor = 1usize << istar;
        let mut inner = remaining;
        // Peel maximizers of F until the rest (which keeps i*) is stable.
        while !ws.is_stable_mask(inner) {
            let pool = inner & !anchor;
            let mut best_mask = 0usize;
            let mut best_f = f64::NEG_INFINITY;
            let mut sub = pool;
            while sub != 0 {
                let f = ws.rate[sub] * ws.prod[inner & !sub];
                let better = f > best_f + STAB_TOL * f.abs().max(1.0)
                    || ((f - best_f).abs() <= STAB_TOL * f.abs().max(1.0)
                        && (sub.count_ones() > best_mask.count_ones()
                            || (sub.count_ones() == best_mask.count_ones() && sub < best_mask)));
                if better {
                    best_f = f;
                    best_mask = sub;
                }
                sub = (sub - 1) & pool;
            }
            debug_assert!(best_mask != 0);
            inner &= !best_mask;
        }
        ordered_masks.push(inner);
        remaining &= !inner;
    }

    ws.groups.clear();
    ws.groups.extend(ordered_masks.iter().map(|&m| m as u32));
    let mut group_rates = Vec::new();
    let mut slopes = Vec::new();
    slopes_from_groups(shares, &ws, Some(&mut group_rates), &mut slopes);
    let groups = ordered_masks
        .iter()
        .map(|&gm| (0..n).filter(|&i| gm & (1 << i) != 0).collect())
        .collect();
    Ok(SplittingPartition {
        groups,
        group_rates,
        slopes,
    })
}

/// A pair of disjoint groups witnessing a necessary-condition violation:
/// the fast group R outpaces the slow group U by at least `rate_gap` wins
/// per share per round, even from the least favorable priority ordering.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct InstabilityWitness {
    pub fast_group: Vec<usize>,
    pub slow_group: Vec<usize>,
    /// C > 0: the unconditional per-round drift lower bound on
    /// sum_R W/alpha - sum_U W/alpha.
    pub rate_gap: f64,
}

/// Search all disjoint pairs (R, U) for the witness inequality
/// `rate(U) < prod_{k not in R} (1 - p_k) * rate(R)`, returning the pair with
/// the largest gap. `None` means no witness exists (n <= the enumeration cap).
pub fn instability_witness(profile: &ThresholdProfile) -> Option<InstabilityWitness> {
    let n = profile.n();
    if n > 16 {
        return None;
    }
    let mut ws = AnalysisWorkspace::new();
    ws.build(profile.fair_shares(), profile.request_probs());
    let full = (1usize << n) - 1;
    let mut best: Option<(usize, usize, f64)> = None;
    for r in 1..=full {
        let outside = ws.prod[full & !r];
        let bound = outside * ws.rate[r];
        let pool = full & !r;
        let mut u = pool;
        while u != 0 {
            let gap = bound - ws.rate[u];
            if gap > 0.0 && best.is_none_or(|(_, _, g)| gap > g) {
                best = Some((r, u, gap));
            }
            u = (u - 1) & pool;
        }
    }
    best.map(|(r, u, gap)| InstabilityWitness {
        fast_group: (0..n).filter(|&i| r & (1 << i) != 0).collect(),
        slow_group: (0..n).filter(|&i| u & (1 << i) != 0).collect(),
        rate_gap: gap,
    })
}

/// Empirical collapse diagnostics along a recorded trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseDiagnostic {
    pub times: Vec<u64>,
    /// max_{i,j} |W_i/alpha_i - W_j/alpha_j| over all agents.
    pub global_gap: Vec<f64>,
    /// Same maximum restricted to pairs inside a predicted group.
    pub within_group_gap: Vec<f64>,
    /// min over (i in earlier group, j in later group) of W_j/a_j - W_i/a_i;
    /// signed, may be negative before the groups separate.
    pub cross_group_gap: Vec<f64>,
    /// Normalized process X_i = W_i/alpha_i - K per checkpoint.
    pub x: Vec<Vec<f64>>,
    /// Fitted within-group envelope constant: max gap / sqrt(t ln t), t >= 100.
    pub within_envelope_constant: f64,
    /// Looser fit for boundary-stable groups (equality cases give only o(t),
    /// so sqrt(t ln t) is not guaranteed): max gap / t^(3/4), t >= 100.
    pub within_power_envelope_constant: f64,
    /// Fitted cross-group linear rate: min gap / t over the trailing decade
    /// of checkpoints (0 if there is a single group).
    pub cross_rate_constant: f64,
}

impl CollapseDiagnostic {
    /// Did the within-group gap stay inside c sqrt(t ln t)?
    pub fn within_envelope(&self, c: f64) -> bool {
        self.within_envelope_constant <= c
    }

    /// Did the within-group gap stay inside c t^(3/4)?
    pub fn within_power_envelope(&self, c: f64) -> bool {
        self.within_power_envelope_constant <= c
    }

    /// Did every cross-group gap grow at least linearly with rate c?
    pub fn cross_rate_at_least(&self, c: f64) -> bool {
        !self.cross_group_gap.is_empty() && self.cross_rate_constant >= c
    }
}

pub fn collapse_diagnostic(
    trajectory: &Trajectory,
    profile: &ThresholdProfile,
    partition: &SplittingPartition,
) -> Result<CollapseDiagnostic> {
    if trajectory.n != profile.n() {
        return Err(Error::InvalidConfig(
            "trajectory and profile disagree on agent count".into(),
        ));
    }
    let n = profile.n();
    let shares = profile.fair_shares();
    let mut times = Vec::with_capacity(trajectory.checkpoints.len());
    let mut global_gap = Vec::with_capacity(trajectory.checkpoints.len());
    let mut within = Vec::with_capacity(trajectory.checkpoints.len());
    let mut cross = Vec::with_capacity(trajectory.checkpoints.len());
    let mut xs = Vec::with_capacity(trajectory.checkpoints.len());
    let mut within_c = 0.0f64;
    let mut within_pow_c = 0.0f64;
    let mut cross_c = f64::INFINITY;
    let multi = partition.groups.len() > 1;

    for cp in &trajectory.checkpoints {
        let norm: Vec<f64> = (0..n).map(|i| cp.wins[i] as f64 / shares[i]).collect();
        let k = cp.total_wins as f64;
        let x: Vec<f64> = norm.iter().map(|&w| w - k).collect();
        let mut gmax = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                gmax = gmax.max((norm[i] - norm[j]).abs());
            }
        }
        let mut wmax = 0.0f64;
        for g in &partition.groups {
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    wmax = wmax.max((norm[i] - norm[j]).abs());
                }
            }
        }
        let mut cmin = f64::INFINITY;
        for (u, gu) in partition.groups.iter().enumerate() {
            for gv in &partition.groups[u + 1..] {
                for &i in gu {
                    for &j in gv {
                        cmin = cmin.min(norm[j] - norm[i]);
                    }
                }
            }
        }
        if !multi {
            cmin = 0.0;
        }
        if cp.t >= 100 {
            let t = cp.t as f64;
            within_c = within_c.max(wmax / (t * t.ln()).sqrt());
            within_pow_c = within_pow_c.max(wmax / t.powf(0.75));
        }
        // The linear-rate fit only makes sense past the burn-in where the
        // drift dominates the martingale noise; use the trailing decade.
        if multi && 10 * cp.t >= trajectory.horizon && cp.t >= 100 {
            cross_c = cross_c.min(cmin / cp.t as f64);
        }
        times.push(cp.t);
        global_gap.push(gmax);
        within.push(wmax);
        cross.push(cmin);
        xs.push(x);
    }
    Ok(CollapseDiagnostic {
        times,
        global_gap,
        within_group_gap: within,
        cross_group_gap: cross,
        x: xs,
        within_envelope_constant: within_c,
        within_power_envelope_constant: within_pow_c,
        cross_rate_constant: if multi && cross_c.is_finite() {
            cross_c
        } else {
            0.0
        },
    })
}

/// Exact-rational counterparts, offered when shares and probabilities are
/// known as true rationals (config floats like 0.2 are decimal intents, not
/// dyadic ones, so reinterpreting them would move boundary cases; pass real
/// fractions here instead).
pub mod rational {
    use super::*;

    #[derive(Clone, Debug, PartialEq)]
    pub struct RationalProfile {
        pub fair_shares: Vec<BigRational>,
        pub request_probs: Vec<BigRational>,
    }

    pub fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    impl RationalProfile {
        pub fn new(fair_shares: Vec<BigRational>, request_probs: Vec<BigRational>) -> Result<Self> {
            if fair_shares.len() != request_probs.len() || fair_shares.is_empty() {
                return Err(Error::InvalidConfig(
                    "fair shares and request probabilities must have equal nonzero length".into(),
                ));
            }
            let one = BigRational::one();
            let sum: BigRational = fair_shares.iter().cloned().sum();
            if sum != one {
                return Err(Error::InvalidConfig("rational shares must sum to 1".into()));
            }
            for a in &fair_shares {
                if *a <= BigRational::zero() {
                    return Err(Error::InvalidConfig("shares must be positive".into()));
                }
            }
            for p in &request_probs {
                if *p < BigRational::zero() || *p > one {
                    return Err(Error::InvalidConfig(
                        "probabilities must lie in [0,1]".into(),
                    ));
                }
            }
            Ok(Self {
                fair_shares,
                request_probs,
            })
        }

        pub fn n(&self) -> usize {
            self.fair_shares.len()
        }

        fn rate(&self, mask: usize) -> BigRational {
            let mut prod = BigRational::one();
            let mut share = BigRational::zero();
            for i in 0..self.n() {
                if mask & (1 << i) != 0 {
                    prod *= BigRational::one() - &self.request_probs[i];
                    share += &self.fair_shares[i];
                }
            }
            (BigRational::one() - prod) / share
        }
    }

    /// Exact stability check.
    pub fn is_stable(subset: &[usize], profile: &RationalProfile, strict: bool) -> Result<bool> {
        if subset.is_empty() {
            return Err(Error::Domain(
                "stability of the empty set is undefined".into(),
            ));
        }
        let mask: usize = subset.iter().map(|&i| 1usize << i).fold(0, |a, b| a | b);
        let full_rate = profile.rate(mask);
        let mut sub = mask;
        loop {
            sub = (sub - 1) & mask;
            if sub == 0 {
                break;
            }
            let r = profile.rate(sub);
            if r < full_rate || (strict && r == full_rate) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact splitting partition with exact per-agent slopes.
    pub fn splitting_partition(
        profile: &RationalProfile,
    ) -> Result<(Vec<Vec<usize>>, Vec<BigRational>)> {
        let n = profile.n();
        check_cap(n, DEFAULT_SUBSET_CAP)?;
        let mut slopes = vec![BigRational::zero(); n];
        let mut groups = Vec::new();
        let mut remaining = (1usize << n) - 1;
        let mut prefix = BigRational::one();
        while remaining != 0 {
            let istar = (0..n)
                .filter(|&i| remaining & (1 << i) != 0)
                .min_by(|&a, &b| {
                    let ra = &profile.request_probs[a] / &profile.fair_shares[a];
                    let rb = &profile.request_probs[b] / &profile.fair_shares[b];
                    ra.cmp(&rb)
                })
                .expect("remaining nonempty");
            let anchor = 1usize << istar;
            let mut best = 0usize;
            let mut best_pc = 0u32;
            super::for_each_submask_with(remaining, anchor, |m| {
                let members: Vec<usize> = (0..n).filter(|&i| m & (1 << i) != 0).collect();
                if m.count_ones() > best_pc && is_stable(&members, profile, false).unwrap() {
                    best = m;
                    best_pc = m.count_ones();
                }
            });
            let members: Vec<usize> = (0..n).filter(|&i| best & (1 << i) != 0).collect();
            let mut prod = BigRational::one();
            let mut share = BigRational::zero();
            for &i in &members {
                prod *= BigRational::one() - &profile.request_probs[i];
                share += &profile.fair_shares[i];
            }
            let hit = BigRational::one() - &prod;
            for &i in &members {
                slopes[i] = &profile.fair_shares[i] / &share * &hit * &prefix;
            }
            prefix *= prod;
            groups.push(members);
            remaining &= !best;
        }
        Ok((groups, slopes))
    }
}
