//! Comptron and Rob-Comptron: utility-gap elicitation relative to the
//! largest gap on the sample.
//!
//! Every estimate starts at the (unknown) largest gap `u_max` and is halved
//! towards the truth by comparing `k/2` copies of the point against `lambda`
//! copies of a reference point with the decisions reversed. The learner never
//! sees `u_max`: estimates are dyadic multiples of it.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::error::{Error, Result};
use crate::num::{dyadic, Rational};
use crate::oracle::{Oracle, Phase, Query};

/// Output of Comptron on a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    /// Elicited label per sample position.
    pub labels: Vec<u8>,
    /// Sample position with the largest gap.
    pub i_max: usize,
    /// Per-position numerators over `2^depth`, relative to each position's
    /// reference point.
    pub numerators: Vec<u64>,
    /// Number of refinement rounds, `log2(k) - 1`.
    pub depth: u32,
    /// Oracle order the estimate was produced with.
    pub k: usize,
    /// Reference position each estimate was refined against.
    pub references: Vec<usize>,
    /// Numerators after each round (`rounds[0]` is the all-ones start).
    pub rounds: Vec<Vec<u64>>,
    coeffs: Vec<Rational>,
}

impl GapEstimate {
    /// Estimate of `g_i / u_max`, in `(0, 1]`.
    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `c_i * u_max` given the true largest gap (analysis only).
    pub fn scaled(&self, u_max: &Rational) -> Vec<Rational> {
        self.coeffs.iter().map(|c| c * u_max).collect()
    }
}

/// Which sample position each point is refined against.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ReferencePolicy {
    /// Every point against the largest-gap point.
    #[default]
    MaxGap,
    /// Per-position override; `None` falls back to the largest-gap point.
    PerPoint(Vec<Option<usize>>),
}

/// `log2(k) - 1` for a power of two `k >= 2`.
pub fn refinement_depth(k: usize) -> Result<u32> {
    if k < 2 {
        return Err(Error::InvalidOrder { k, reason: "Comptron needs k >= 2" });
    }
    if !k.is_power_of_two() {
        return Err(Error::InvalidOrder { k, reason: "Comptron needs a power of two" });
    }
    Ok(k.trailing_zeros() - 1)
}

/// Largest power of two not exceeding `k` (`k >= 1`).
pub fn round_down_power_of_two(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - k.leading_zeros())
    }
}

/// Repetitions per query for Rob-Comptron:
/// `ceil(8 / (1 - 2 eta)^2 * ln(max(n T, 1) / delta))`.
pub fn repeat_count(n: usize, depth: u32, eta: f64, delta: f64) -> Result<usize> {
    if !(0.0..0.5).contains(&eta) {
        return Err(Error::InvalidNoise { eta });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfidence { delta });
    }
    let events = (n as f64 * f64::from(depth)).max(1.0);
    let margin = 1.0 - 2.0 * eta;
    let j = libm::ceil(8.0 / (margin * margin) * libm::log(events / delta));
    Ok((j as usize).max(1))
}

/// Majority over `repeats` calls; a tied vote counts as a 1 response.
fn ask(oracle: &mut Oracle<'_>, query: &Query, phase: Phase, repeats: usize) -> Result<bool> {
    let mut ones = 0usize;
    for _ in 0..repeats {
        ones += usize::from(oracle.answer(query, phase)?);
    }
    Ok(2 * ones >= repeats)
}

fn check_sample(oracle: &Oracle<'_>, sample: &[usize]) -> Result<()> {
    let n = oracle.instance().len();
    match sample.iter().find(|&&p| p >= n) {
        Some(&point) => Err(Error::PointOutOfRange { point, n }),
        None => Ok(()),
    }
}

/// Labels from the 1-comparison `(x_i, 1, 0)`; one call per position.
pub fn elicit_labels(oracle: &mut Oracle<'_>, sample: &[usize]) -> Result<Vec<u8>> {
    elicit_labels_repeated(oracle, sample, 1)
}

pub fn elicit_labels_repeated(oracle: &mut Oracle<'_>, sample: &[usize], repeats: usize) -> Result<Vec<u8>> {
    check_sample(oracle, sample)?;
    sample
        .iter()
        .map(|&p| ask(oracle, &Query::single(p, 1, 0), Phase::Labels, repeats).map(u8::from))
        .collect()
}

/// Linear tournament over 2-comparisons. The champion is kept on ties.
pub fn find_max_gap(oracle: &mut Oracle<'_>, sample: &[usize], labels: &[u8]) -> Result<usize> {
    find_max_gap_repeated(oracle, sample, labels, 1)
}

pub fn find_max_gap_repeated(
    oracle: &mut Oracle<'_>,
    sample: &[usize],
    labels: &[u8],
    repeats: usize,
) -> Result<usize> {
    check_sample(oracle, sample)?;
    if labels.len() != sample.len() {
        return Err(Error::DimensionMismatch { expected: sample.len(), found: labels.len() });
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut champion = 0;
    for challenger in 1..sample.len() {
        let (a, b) = (sample[champion], sample[challenger]);
        let (ya, yb) = (labels[champion], labels[challenger]);
        let mut q = Query::default();
        q.push_copies(a, ya, 1 - ya, 1);
        q.push_copies(b, 1 - yb, yb, 1);
        if !ask(oracle, &q, Phase::MaxGap, repeats)? {
            champion = challenger;
        }
    }
    Ok(champion)
}

/// Noiseless Comptron against the largest-gap point.
pub fn comptron(oracle: &mut Oracle<'_>, sample: &[usize]) -> Result<GapEstimate> {
    run(oracle, sample, &ReferencePolicy::MaxGap, 1)
}

/// Comptron with per-point reference points.
pub fn comptron_with_policy(
    oracle: &mut Oracle<'_>,
    sample: &[usize],
    policy: &ReferencePolicy,
) -> Result<GapEstimate> {
    run(oracle, sample, policy, 1)
}

/// Rob-Comptron: every query (labels, tournament and refinement) is repeated
/// `repeat_count(n, T, eta, delta)` times and decided by majority.
pub fn rob_comptron(oracle: &mut Oracle<'_>, sample: &[usize], eta: f64, delta: f64) -> Result<GapEstimate> {
    let depth = refinement_depth(oracle.k())?;
    let repeats = repeat_count(sample.len(), depth, eta, delta)?;
    run(oracle, sample, &ReferencePolicy::MaxGap, repeats)
}

fn run(
    oracle: &mut Oracle<'_>,
    sample: &[usize],
    policy: &ReferencePolicy,
    repeats: usize,
) -> Result<GapEstimate> {
    let k = oracle.k();
    let depth = refinement_depth(k)?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len();
    let labels = elicit_labels_repeated(oracle, sample, repeats)?;
    let i_max = find_max_gap_repeated(oracle, sample, &labels, repeats)?;
    let references = resolve_references(policy, n, i_max)?;

    let half = k / 2;
    let full = 1u64 << depth;
    let mut numerators = vec![full; n];
    let mut rounds = vec![numerators.clone()];
    for t in 1..=depth {
        let step = 1u64 << (depth - t);
        for i in 0..n {
            // lambda = (k/2) (c_i - 2^-t) with c_i = num_i / 2^T and k/2 = 2^T
            let lambda = (numerators[i] - step) as usize;
            let (p, y) = (sample[i], labels[i]);
            let (r, yr) = (sample[references[i]], labels[references[i]]);
            let mut q = Query::default();
            q.push_copies(p, y, 1 - y, half);
            q.push_copies(r, 1 - yr, yr, lambda);
            if !ask(oracle, &q, Phase::Refinement, repeats)? {
                numerators[i] -= step;
            }
        }
        rounds.push(numerators.clone());
    }

    let coeffs = chain_coefficients(&numerators, depth, &references, i_max)?;
    Ok(GapEstimate { labels, i_max, numerators, depth, k, references, rounds, coeffs })
}

fn resolve_references(policy: &ReferencePolicy, n: usize, i_max: usize) -> Result<Vec<usize>> {
    match policy {
        ReferencePolicy::MaxGap => Ok(vec![i_max; n]),
        ReferencePolicy::PerPoint(refs) => {
            if refs.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: refs.len() });
            }
            let mut out = Vec::with_capacity(n);
            for (i, r) in refs.iter().enumerate() {
                let r = r.unwrap_or(i_max);
                if r >= n {
                    return Err(Error::InvalidReference(alloc::format!(
                        "position {i} references {r}, sample has {n} positions"
                    )));
                }
                if r == i && i != i_max {
                    return Err(Error::InvalidReference("a point cannot reference itself".to_string()));
                }
                out.push(r);
            }
            // the largest-gap point anchors every chain
            out[i_max] = i_max;
            Ok(out)
        }
    }
}

/// Multiplies the relative estimates along each reference chain down to the
/// largest-gap point.
fn chain_coefficients(numerators: &[u64], depth: u32, references: &[usize], i_max: usize) -> Result<Vec<Rational>> {
    let n = numerators.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = Rational::one();
        let mut at = i;
        let mut steps = 0;
        while at != i_max {
            c *= dyadic(numerators[at], depth);
            at = references[at];
            steps += 1;
            if steps > n {
                return Err(Error::InvalidReference("reference chain has a cycle".to_string()));
            }
        }
        out.push(c);
    }
    Ok(out)
}
