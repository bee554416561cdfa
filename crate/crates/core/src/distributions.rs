//! Agent value distributions and quantile request rules.
//!
//! A round value lives in [0,1]. A distribution here is either the continuous
//! uniform on [0,1] or a finite-support law given by (value, probability)
//! atoms. The request rule for a target probability `p` is the top-p-quantile
//! rule: request on every value strictly above a threshold, and randomize at
//! the threshold atom so the overall request probability is exactly `p`.
//!
//! The conditional mean `V(p)` — the expected value given that the rule
//! requested — is evaluated in exact rational arithmetic for finite supports
//! before rounding to `f64`; threshold-game analyses are sensitive to small
//! atom values, so we do not let intermediate rounding accumulate.

use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Absolute tolerance for probability mass bookkeeping.
pub const PROB_TOL: f64 = 1e-12;

/// An agent's per-round value law.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueDistribution {
    /// Continuous uniform on [0,1].
    Uniform01,
    /// Finite support with atoms in [0,1].
    Finite(FiniteSupport),
}

/// Canonicalized finite support: values strictly increasing, duplicates
/// merged, zero-mass atoms dropped, total mass 1 within [`PROB_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSupport {
    atoms: Vec<(f64, f64)>,
}

impl FiniteSupport {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, q) in pairs {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDistribution(format!(
                    "support value {v} outside [0,1]"
                )));
            }
            if !q.is_finite() || q < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {q} at value {v}"
                )));
            }
            atoms.push((v, q));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
        // Merge duplicate values so quantile and atom logic is unambiguous.
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, q) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += q,
                _ => merged.push((v, q)),
            }
        }
        merged.retain(|&(_, q)| q > 0.0);
        if merged.is_empty() {
            return Err(Error::InvalidDistribution("zero total mass".into()));
        }
        let total: f64 = merged.iter().map(|&(_, q)| q).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Threshold plus atom randomization realizing an exact request probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RequestRule {
    /// Request whenever the value is strictly above this.
    pub threshold: f64,
    /// Probability of requesting when the value equals the threshold exactly.
    pub atom_request_probability: f64,
}

impl RequestRule {
    /// Decide a single round. Draws from `rng` only on an exact atom hit.
    pub fn decide<R: Rng + ?Sized>(&self, value: f64, rng: &mut R) -> bool {
        if value > self.threshold {
            true
        } else if value == self.threshold {
            rng.random::<f64>() < self.atom_request_probability
        } else {
            false
        }
    }
}

fn rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite f64")
}

impl ValueDistribution {
    pub fn uniform01() -> Self {
        ValueDistribution::Uniform01
    }

    pub fn finite(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Ok(ValueDistribution::Finite(FiniteSupport::new(pairs)?))
    }

    /// Two-point law: value 1 with probability `top_mass`, else `low_value`.
    pub fn two_point(top_mass: f64, low_value: f64) -> Result<Self> {
        Self::finite(vec![(low_value, 1.0 - top_mass), (1.0, top_mass)])
    }

    /// Unconditional mean.
    pub fn mean(&self) -> f64 {
        match self {
            ValueDistribution::Uniform01 => 0.5,
            ValueDistribution::Finite(f) => f.atoms.iter().map(|&(v, q)| v * q).sum(),
        }
    }

    /// The top-p-quantile request rule: threshold
    /// `sup { x : P(V > x) >= p }` plus the atom probability that tops the
    /// overall request probability up to exactly `p`.
    pub fn quantile_threshold(&self, p: f64) -> RequestRule {
        assert!(
            (0.0..=1.0).contains(&p),
            "request probability {p} outside [0,1]"
        );
        if p == 0.0 {
            return RequestRule {
                threshold: 1.0,
                atom_request_probability: 0.0,
            };
        }
        match self {
            ValueDistribution::Uniform01 => RequestRule {
                threshold: 1.0 - p,
                atom_request_probability: 0.0,
            },
            ValueDistribution::Finite(f) => {
                // Walk tails from the top atom down until tail mass reaches p.
                let mut tail_above = 0.0f64;
                for &(v, q) in f.atoms.iter().rev() {
                    let tail_with = tail_above + q;
                    if tail_with >= p - PROB_TOL {
                        let atom = ((p - tail_above) / q).clamp(0.0, 1.0);
                        return RequestRule {
                            threshold: v,
                            atom_request_probability: atom,
                        };
                    }
                    tail_above = tail_with;
                }
                // Total mass can undershoot p by float slack only; request always.
                RequestRule {
                    threshold: f.atoms[0].0,
                    atom_request_probability: 1.0,
                }
            }
        }
    }

    /// Overall request probability induced by `rule` under this law.
    pub fn request_probability(&self, rule: &RequestRule) -> f64 {
        match self {
            ValueDistribution::Uniform01 => (1.0 - rule.threshold).clamp(0.0, 1.0),
            ValueDistribution::Finite(f) => {
                let mut p = 0.0;
                for &(v, q) in &f.atoms {
                    if v > rule.threshold {
                        p += q;
                    } else if v == rule.threshold {
                        p += q * rule.atom_request_probability;
                    }
                }
                p
            }
        }
    }

    /// Mean value conditioned on requesting under the top-p-quantile rule.
    ///
    /// Undefined at p = 0 (no limit convention is taken).
    pub fn conditional_mean(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!(
                "conditional mean requires p in (0,1], got {p}"
            )));
        }
        match self {
            ValueDistribution::Uniform01 => Ok(1.0 - p / 2.0),
            ValueDistribution::Finite(f) => {
                // Exact: find the threshold atom j (largest tail >= p), then
                //   V(p) = ( sum_{v_l > v_j} v_l q_l + v_j (p - tail_above_j) ) / p.
                let p_rat = rational(p);
                let mut tail_above = BigRational::zero();
                let mut weighted_above = BigRational::zero();
                for (idx, &(v, q)) in f.atoms.iter().enumerate().rev() {
                    let v_rat = rational(v);
                    let q_rat = rational(q);
                    let tail_with = &tail_above + &q_rat;
                    if tail_with >= p_rat || idx == 0 {
                        let atom_mass = &p_rat - &tail_above;
                        let numer = weighted_above + v_rat * atom_mass;
                        let mean = numer / p_rat;
                        return Ok(mean.to_f64().expect("rational fits f64"));
                    }
                    weighted_above += v_rat * &q_rat;
                    tail_above = tail_with;
                }
                unreachable!("atoms are nonempty")
            }
        }
    }

    /// Draw one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ValueDistribution::Uniform01 => rng.random::<f64>(),
            ValueDistribution::Finite(f) => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for &(v, q) in &f.atoms {
                    acc += q;
                    if u < acc {
                        return v;
                    }
                }
                f.atoms[f.atoms.len() - 1].0
            }
        }
    }
}
