//! The k-comparison oracle.
//!
//! A query lists up to `k` points, each with two decisions. The oracle reports
//! whether the summed utility of the first decision vector is at least that of
//! the second, and under noise flips that bit independently on every call.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::TabularInstance;
use crate::num::Rational;

/// Default bound on the number of canonical reduced queries.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// One position of a query: a point and the decision on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryEntry {
    pub point: usize,
    pub first: u8,
    pub second: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    entries: Vec<QueryEntry>,
}

impl Query {
    pub fn new(entries: Vec<QueryEntry>) -> Self {
        Self { entries }
    }

    pub fn single(point: usize, first: u8, second: u8) -> Self {
        Self::new(vec![QueryEntry { point, first, second }])
    }

    pub fn push_copies(&mut self, point: usize, first: u8, second: u8, copies: usize) {
        self.entries
            .extend(core::iter::repeat_n(QueryEntry { point, first, second }, copies));
    }

    /// A raw query whose reduced form under `labels` is `coeffs`: `c_i > 0`
    /// copies favour the label at point i, `c_i < 0` copies favour the
    /// flipped decision.
    pub fn from_reduced(coeffs: &[i64], labels: &[u8]) -> Self {
        let mut query = Query::default();
        for (point, (&c, &y)) in coeffs.iter().zip(labels).enumerate() {
            let copies = c.unsigned_abs() as usize;
            if c > 0 {
                query.push_copies(point, y, 1 - y, copies);
            } else if c < 0 {
                query.push_copies(point, 1 - y, y, copies);
            }
        }
        query
    }

    pub fn entries(&self) -> &[QueryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Coefficients `c` with `c_i = sum over entries at i of 1[y1 = y_i] - 1[y2 = y_i]`,
/// so that the noiseless response equals `1[c . g >= 0]` for every gap vector
/// `g` carrying these labels.
pub fn reduce_query(query: &Query, labels: &[u8]) -> Vec<i64> {
    let mut c = vec![0i64; labels.len()];
    for e in &query.entries {
        let y = labels[e.point];
        c[e.point] += i64::from(e.first == y) - i64::from(e.second == y);
    }
    c
}

/// `1[c . g >= 0]`.
pub fn reduced_response(coeffs: &[i64], gaps: &[Rational]) -> bool {
    let mut total = Rational::zero();
    for (&c, g) in coeffs.iter().zip(gaps) {
        if c != 0 {
            total += g * Rational::from_integer(c.into());
        }
    }
    total >= Rational::zero()
}

/// Noiseless response computed from the raw cumulative utilities.
pub fn truth_bit(instance: &TabularInstance, query: &Query) -> Result<bool> {
    let n = instance.len();
    let mut diff = Rational::zero();
    for e in query.entries() {
        if e.point >= n {
            return Err(Error::PointOutOfRange { point: e.point, n });
        }
        if e.first != e.second {
            diff += instance.utility_at(e.point, e.first);
            diff -= instance.utility_at(e.point, e.second);
        }
    }
    Ok(diff >= Rational::zero())
}

/// Flip probability model. Rates must stay below 1/2.
#[derive(Clone, Default)]
pub enum Noise {
    #[default]
    Noiseless,
    Constant(f64),
    /// Query-dependent rate, checked against `bound` on every call.
    PerQuery {
        bound: f64,
        rate: Arc<dyn Fn(&Query) -> f64 + Send + Sync>,
    },
}

impl Noise {
    pub fn bound(&self) -> f64 {
        match self {
            Noise::Noiseless => 0.0,
            Noise::Constant(eta) => *eta,
            Noise::PerQuery { bound, .. } => *bound,
        }
    }

    fn validate(&self) -> Result<()> {
        let eta = self.bound();
        if (0.0..0.5).contains(&eta) {
            Ok(())
        } else {
            Err(Error::InvalidNoise { eta })
        }
    }
}

impl fmt::Debug for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::Noiseless => f.write_str("Noiseless"),
            Noise::Constant(eta) => f.debug_tuple("Constant").field(eta).finish(),
            Noise::PerQuery { bound, .. } => f.debug_struct("PerQuery").field("bound", bound).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub k: usize,
    pub noise: Noise,
    pub seed: u64,
}

impl OracleConfig {
    pub fn noiseless(k: usize) -> Self {
        Self { k, noise: Noise::Noiseless, seed: 0 }
    }

    pub fn noisy(k: usize, eta: f64, seed: u64) -> Self {
        Self { k, noise: Noise::Constant(eta), seed }
    }
}

/// Which stage of a procedure a query is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Labels,
    MaxGap,
    Refinement,
    RobustEnumeration,
    Other,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Labels,
        Phase::MaxGap,
        Phase::Refinement,
        Phase::RobustEnumeration,
        Phase::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Labels => "labels",
            Phase::MaxGap => "max-gap",
            Phase::Refinement => "refinement",
            Phase::RobustEnumeration => "robust-enumeration",
            Phase::Other => "other",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Query counts per phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryLedger {
    counts: [u64; 5],
}

impl QueryLedger {
    pub fn record(&mut self, phase: Phase) {
        self.counts[phase.slot()] += 1;
    }

    pub fn count(&self, phase: Phase) -> u64 {
        self.counts[phase.slot()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

/// One oracle call as it appears in a transcript log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptRecord {
    pub phase: Phase,
    /// Reduced form relative to the instance's true labels.
    pub coeffs: Vec<i64>,
    pub truth: bool,
    pub response: bool,
}

/// A stateful oracle handle bound to one instance. Owns its RNG and ledger,
/// so it is confined to one thread; parallel runs use separate handles.
pub struct Oracle<'a> {
    instance: &'a TabularInstance,
    config: OracleConfig,
    rng: ChaCha8Rng,
    ledger: QueryLedger,
    transcript: Option<Vec<TranscriptRecord>>,
}

impl<'a> Oracle<'a> {
    pub fn new(instance: &'a TabularInstance, config: OracleConfig) -> Result<Self> {
        if config.k == 0 {
            return Err(Error::InvalidOrder { k: 0, reason: "order must be at least 1" });
        }
        config.noise.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self { instance, config, rng, ledger: QueryLedger::default(), transcript: None })
    }

    /// Keep a record of every call.
    pub fn with_transcript(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn noise(&self) -> &Noise {
        &self.config.noise
    }

    pub fn instance(&self) -> &TabularInstance {
        self.instance
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn transcript(&self) -> Option<&[TranscriptRecord]> {
        self.transcript.as_deref()
    }

    pub fn take_transcript(&mut self) -> Option<Vec<TranscriptRecord>> {
        self.transcript.take()
    }

    /// Ask a query, charging it to `phase`.
    pub fn answer(&mut self, query: &Query, phase: Phase) -> Result<bool> {
        if query.len() > self.config.k {
            return Err(Error::QueryTooLong { len: query.len(), k: self.config.k });
        }
        let truth = truth_bit(self.instance, query)?;
        let eta = match &self.config.noise {
            Noise::Noiseless => 0.0,
            Noise::Constant(eta) => *eta,
            Noise::PerQuery { bound, rate } => {
                let eta = rate(query);
                if !(0.0..0.5).contains(&eta) || eta > *bound {
                    return Err(Error::InvalidNoise { eta });
                }
                eta
            }
        };
        let flip = eta > 0.0 && self.rng.gen_bool(eta);
        let response = truth ^ flip;
        self.ledger.record(phase);
        if let Some(log) = self.transcript.as_mut() {
            log.push(TranscriptRecord {
                phase,
                coeffs: reduce_query(query, self.instance.labels()),
                truth,
                response,
            });
        }
        Ok(response)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of canonical reduced queries: nonzero integer vectors of length `n`
/// with L1 norm at most `k`, counted once per `{c, -c}` pair.
pub fn count_reduced_queries(n: usize, k: usize) -> u128 {
    let lattice: u128 = (0..=n.min(k) as u128)
        .map(|j| {
            (1u128 << j.min(127))
                .saturating_mul(binomial(n as u128, j))
                .saturating_mul(binomial(k as u128, j))
        })
        .fold(0u128, u128::saturating_add);
    (lattice - 1) / 2
}

pub fn enumerate_reduced_queries(n: usize, k: usize) -> Result<Vec<Vec<i64>>> {
    enumerate_reduced_queries_with_cap(n, k, DEFAULT_ENUMERATION_CAP)
}

/// All canonical reduced queries (first nonzero entry positive), sorted
/// lexicographically.
pub fn enumerate_reduced_queries_with_cap(n: usize, k: usize, cap: u128) -> Result<Vec<Vec<i64>>> {
    if n == 0 || k == 0 {
        return Ok(Vec::new());
    }
    let required = count_reduced_queries(n, k);
    if required > cap {
        return Err(Error::Capacity { required, cap });
    }
    let mut out = Vec::with_capacity(required as usize);
    let mut current = vec![0i64; n];
    fill(&mut current, 0, k as i64, false, &mut out);
    out.sort();
    Ok(out)
}

fn fill(current: &mut [i64], pos: usize, budget: i64, seen_nonzero: bool, out: &mut Vec<Vec<i64>>) {
    if pos == current.len() {
        if seen_nonzero {
            out.push(current.to_vec());
        }
        return;
    }
    let low = if seen_nonzero { -budget } else { 0 };
    for v in low..=budget {
        current[pos] = v;
        fill(current, pos + 1, budget - v.abs(), seen_nonzero || v != 0, out);
    }
    current[pos] = 0;
}
