//! Threshold-game solvers.
//!
//! The threshold game has actions p_i in [0,1] and payoffs equal to the
//! long-run per-round utilities predicted by the analysis module. Payoffs are
//! continuous but only piecewise smooth (the splitting partition changes
//! across stability boundaries), so every solver here runs a global grid
//! scan first and refines locally afterwards.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    predicted_utility, predicted_win_slopes_into, AnalysisWorkspace, ThresholdProfile,
};
use crate::distributions::ValueDistribution;
use crate::error::{Error, Result};

/// Hard cap on grid cells in a full-profile scan.
const SCAN_CELL_CAP: usize = 4_000_000;

/// An n-player threshold game.
#[derive(Clone, Debug)]
pub struct ThresholdGame {
    fair_shares: Vec<f64>,
    dists: Vec<ValueDistribution>,
}

impl ThresholdGame {
    pub fn new(fair_shares: Vec<f64>, dists: Vec<ValueDistribution>) -> Result<Self> {
        if fair_shares.len() != dists.len() {
            return Err(Error::InvalidConfig(
                "fair shares and distributions must have equal length".into(),
            ));
        }
        // Validate via a throwaway profile.
        ThresholdProfile::new(fair_shares.clone(), vec![0.0; fair_shares.len()])?;
        Ok(Self { fair_shares, dists })
    }

    /// Symmetric game: equal shares, one distribution for everybody.
    pub fn symmetric(dist: ValueDistribution, n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n], vec![dist; n])
    }

    pub fn n(&self) -> usize {
        self.fair_shares.len()
    }

    pub fn fair_shares(&self) -> &[f64] {
        &self.fair_shares
    }

    pub fn dists(&self) -> &[ValueDistribution] {
        &self.dists
    }

    /// Long-run payoff vector for a profile of request probabilities.
    pub fn payoffs(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let profile = ThresholdProfile::new(self.fair_shares.clone(), probs.to_vec())?;
        predicted_utility(&profile, &self.dists)
    }
}

/// Welfare-optimal symmetric rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PStar {
    pub p: f64,
    pub value: f64,
}

/// Golden-section refinement of a maximum inside [lo, hi]; returns its best
/// interior point. The caller keeps whichever of grid/refined evaluates higher.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// argmax over p of V(p) (1 - (1-p)^n) / n: grid scan at `resolution`, then
/// golden-section refinement to 1e-6 on the winning bracket. Ties take the
/// smallest p.
pub fn symmetric_optimum(dist: &ValueDistribution, n: usize, resolution: f64) -> Result<PStar> {
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} outside (0, 0.5]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("agent count must be >= 1".into()));
    }
    let objective = |p: f64| -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            let p = p.min(1.0);
            dist.conditional_mean(p).expect("p in (0,1]") * (1.0 - (1.0 - p).powi(n as i32))
                / n as f64
        }
    };
    let steps = (1.0 / resolution).ceil() as usize;
    let mut best_p = 0.0;
    let mut best_v = 0.0;
    for k in 0..=steps {
        let p = (k as f64 * resolution).min(1.0);
        let v = objective(p);
        if v > best_v {
            best_v = v;
            best_p = p;
        }
    }
    let lo = (best_p - resolution).max(0.0);
    let hi = (best_p + resolution).min(1.0);
    let (p_ref, v_ref) = golden_max(lo, hi, 1e-9, &objective);
    if v_ref > best_v {
        Ok(PStar {
            p: p_ref,
            value: v_ref,
        })
    } else {
        Ok(PStar {
            p: best_p,
            value: best_v,
        })
    }
}

/// Result of a one-dimensional best-response search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestResponseResult {
    pub responder: usize,
    /// The maximizing request probability.
    pub argmax: f64,
    pub payoff: f64,
    /// Gain over the responder's incumbent coordinate in `profile`.
    pub improvement: f64,
    pub resolution: f64,
    /// Next-best grid bracket (p, payoff), for boundary diagnosis.
    pub second_best: Option<(f64, f64)>,
}

/// Grid argmax of the responder's payoff over their own coordinate, with
/// golden-section refinement around the winning bracket.
pub fn best_response(
    game: &ThresholdGame,
    responder: usize,
    profile: &[f64],
    resolution: f64,
) -> Result<BestResponseResult> {
    if responder >= game.n() {
        return Err(Error::InvalidConfig(format!(
            "responder {responder} out of range for n = {}",
            game.n()
        )));
    }
    if profile.len() != game.n() {
        return Err(Error::InvalidConfig(
            "profile length must match agent count".into(),
        ));
    }
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} outside (0, 0.5]"
        )));
    }
    let incumbent = game.payoffs(profile)?[responder];
    let mut probs = profile.to_vec();
    let mut ws = AnalysisWorkspace::new();
    let mut slopes = Vec::new();
    let mut eval = |p: f64| -> f64 {
        probs[responder] = p;
        predicted_win_slopes_into(game.fair_shares(), &probs, &mut ws, &mut slopes)
            .expect("validated profile");
        if p == 0.0 {
            0.0
        } else {
            slopes[responder] * game.dists()[responder].conditional_mean(p).expect("p > 0")
        }
    };
    let steps = (1.0 / resolution).ceil() as usize;
    let mut best = (0.0f64, f64::NEG_INFINITY);
    let mut second = (0.0f64, f64::NEG_INFINITY);
    for k in 0..=steps {
        let p = (k as f64 * resolution).min(1.0);
        let v = eval(p);
        if v > best.1 {
            second = best;
            best = (p, v);
        } else if v > second.1 {
            second = (p, v);
        }
    }
    let lo = (best.0 - resolution).max(0.0);
    let hi = (best.0 + resolution).min(1.0);
    let (p_ref, v_ref) = golden_max(lo, hi, 1e-9, &mut eval);
    let (argmax, payoff) = if v_ref > best.1 { (p_ref, v_ref) } else { best };
    Ok(BestResponseResult {
        responder,
        argmax,
        payoff,
        improvement: payoff - incumbent,
        resolution,
        second_best: (second.1 > f64::NEG_INFINITY).then_some(second),
    })
}

/// An epsilon-equilibrium found by the scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsEquilibrium {
    pub profile: Vec<f64>,
    pub max_improvement: f64,
}

/// Full-profile scan report. `certificate_gap` is the minimum over scanned
/// profiles of the maximum unilateral grid improvement; a positive gap
/// certifies that no scanned profile is an exact pure equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeScanReport {
    pub certificate_gap: f64,
    pub resolution: f64,
    pub epsilon: f64,
    pub scanned: u64,
    pub eps_equilibria: Vec<EpsEquilibrium>,
}

/// Scan the full product grid (n <= 3). `bounds` restricts each coordinate;
/// `epsilon` defaults to half the scan's own certificate gap, under which the
/// equilibrium list is empty by construction.
pub fn pure_ne_scan(
    game: &ThresholdGame,
    resolution: f64,
    epsilon: Option<f64>,
    bounds: Option<&[(f64, f64)]>,
) -> Result<NeScanReport> {
    let n = game.n();
    if n > 3 {
        return Err(Error::CapExceeded { n, cap: 3 });
    }
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} outside (0, 0.5]"
        )));
    }
    let default_bounds = vec![(0.0, 1.0); n];
    let bounds = bounds.unwrap_or(&default_bounds);
    if bounds.len() != n {
        return Err(Error::InvalidConfig("bounds length must match n".into()));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "bounds[{i}] = ({lo}, {hi}) not an interval inside [0,1]"
            )));
        }
    }

    // Per-axis grids (inclusive of both endpoints).
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            let steps = ((hi - lo) / resolution).round().max(1.0) as usize;
            (0..=steps)
                .map(|k| (lo + k as f64 * resolution).min(hi))
                .collect()
        })
        .collect();
    let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = dims.iter().product();
    if total > SCAN_CELL_CAP {
        return Err(Error::InvalidConfig(format!(
            "scan would evaluate {total} profiles (cap {SCAN_CELL_CAP}); coarsen the resolution"
        )));
    }
    // Strides for row-major flattening (last axis contiguous).
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let unflatten = |mut idx: usize, coords: &mut [usize]| {
        for i in 0..n {
            coords[i] = idx / strides[i];
            idx %= strides[i];
        }
    };

    // Conditional means per agent per own-axis point (exact-rational inner
    // evaluation is too slow for the cell loop, so cache per axis).
    let vmeans: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            axes[i]
                .iter()
                .map(|&p| {
                    if p == 0.0 {
                        0.0
                    } else {
                        game.dists()[i].conditional_mean(p).expect("p > 0")
                    }
                })
                .collect()
        })
        .collect();

    // Payoff tables per agent, built in parallel chunks.
    let shares = game.fair_shares();
    const CHUNK: usize = 8192;
    let chunks: Vec<(usize, Vec<Vec<f64>>)> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut ws = AnalysisWorkspace::new();
            let mut slopes = Vec::new();
            let mut coords = vec![0usize; n];
            let mut probs = vec![0.0f64; n];
            let mut out = vec![Vec::with_capacity(end - start); n];
            for idx in start..end {
                unflatten(idx, &mut coords);
                for i in 0..n {
                    probs[i] = axes[i][coords[i]];
                }
                predicted_win_slopes_into(shares, &probs, &mut ws, &mut slopes)
                    .expect("validated profile");
                for i in 0..n {
                    out[i].push(slopes[i] * vmeans[i][coords[i]]);
                }
            }
            (start, out)
        })
        .collect();
    let mut payoff: Vec<Vec<f64>> = vec![vec![0.0; total]; n];
    for (start, out) in chunks {
        for i in 0..n {
            payoff[i][start..start + out[i].len()].copy_from_slice(&out[i]);
        }
    }

    // Line maxima along each agent's own axis.
    let mut linemax: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let lines = total / dims[i];
        let mut lm = vec![f64::NEG_INFINITY; lines];
        let mut coords = vec![0usize; n];
        for (idx, &u) in payoff[i].iter().enumerate() {
            unflatten(idx, &mut coords);
            // Project out coordinate i.
            let mut proj = 0usize;
            let mut mult = 1usize;
            for j in (0..n).rev() {
                if j != i {
                    proj += coords[j] * mult;
                    mult *= dims[j];
                }
            }
            if u > lm[proj] {
                lm[proj] = u;
            }
        }
        linemax.push(lm);
    }

    let mut certificate = f64::INFINITY;
    let mut improvements = vec![0.0f64; total];
    {
        let mut coords = vec![0usize; n];
        for (idx, slot) in improvements.iter_mut().enumerate() {
            unflatten(idx, &mut coords);
            let mut worst = 0.0f64;
            for i in 0..n {
                let mut proj = 0usize;
                let mut mult = 1usize;
                for j in (0..n).rev() {
                    if j != i {
                        proj += coords[j] * mult;
                        mult *= dims[j];
                    }
                }
                worst = worst.max(linemax[i][proj] - payoff[i][idx]);
            }
            *slot = worst;
            certificate = certificate.min(worst);
        }
    }

    let epsilon = epsilon.unwrap_or(certificate / 2.0);
    let mut eqs = Vec::new();
    let mut coords = vec![0usize; n];
    for (idx, &imp) in improvements.iter().enumerate() {
        if imp <= epsilon {
            unflatten(idx, &mut coords);
            eqs.push(EpsEquilibrium {
                profile: (0..n).map(|i| axes[i][coords[i]]).collect(),
                max_improvement: imp,
            });
            if eqs.len() >= 1000 {
                break;
            }
        }
    }
    Ok(NeScanReport {
        certificate_gap: certificate,
        resolution,
        epsilon,
        scanned: total as u64,
        eps_equilibria: eqs,
    })
}

/// Closed-form utilities for the symmetric two-agent two-point game
/// (value 1 with mass q, value `eps` otherwise, equal shares) on the stable
/// region; unstable profiles fall back to the general predictor.
pub fn two_point_utility(p1: f64, p2: f64, q: f64, eps: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) || !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidConfig(format!(
            "two-point parameters q = {q}, eps = {eps} out of range"
        )));
    }
    for p in [p1, p2] {
        if !(p >= q && p <= 1.0) {
            return Err(Error::Domain(format!(
                "two-point closed form needs p in [q, 1], got {p}"
            )));
        }
    }
    let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
    let stable = hi * (1.0 - lo) <= lo;
    if stable {
        let hit = 1.0 - (1.0 - p1) * (1.0 - p2);
        let v1 = (q + eps * (p1 - q)) / p1;
        let v2 = (q + eps * (p2 - q)) / p2;
        Ok((hit / 2.0 * v1, hit / 2.0 * v2))
    } else {
        let dist = ValueDistribution::two_point(q, eps)?;
        let profile = ThresholdProfile::symmetric(vec![p1, p2])?;
        let u = predicted_utility(&profile, &[dist.clone(), dist])?;
        Ok((u[0], u[1]))
    }
}

/// d U_1 / d p_1 of the closed form on the stable region.
pub fn two_point_du1_dp1(p1: f64, p2: f64, q: f64, eps: f64) -> f64 {
    eps * (1.0 - p2) / 2.0 - q * (1.0 - eps) * p2 / (2.0 * p1 * p1)
}
