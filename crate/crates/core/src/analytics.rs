//! Closed-form error probabilities, the entropy metric and the per-query cost
//! model for both filters.
//!
//! Every kernel evaluates `(1 - 1/m)^(kn)` as `exp(kn * ln(1 - 1/m))` with
//! `ln_1p`/`expm1`, which keeps full relative precision at `m = 2^23` and
//! `kn` near `6.5e5` where naive repeated multiplication drifts.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::filter::{FilterKind, QueryOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("per-set counts are required for this formula")]
    MissingCounts,
    #[error("cardinality/label {i} outside 1..={s}")]
    IndexOutOfRange { i: usize, s: usize },
    #[error("entropy needs at least one member query")]
    EmptyTally,
}

/// Parameters of a populated filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterParams {
    pub m: u64,
    pub k: u32,
    pub s: u32,
    pub n: u64,
    /// `n_1..n_s`, summing to `n`.
    pub counts: Option<Vec<u64>>,
}

impl FilterParams {
    pub fn new(m: u64, k: u32, s: u32, n: u64) -> Result<Self, AnalyticsError> {
        if m == 0 || k == 0 || s == 0 {
            return Err(AnalyticsError::Domain(format!(
                "m = {m}, k = {k}, s = {s}: all must be positive"
            )));
        }
        Ok(Self {
            m,
            k,
            s,
            n,
            counts: None,
        })
    }

    /// Parameters with explicit per-set sizes; `s` and `n` are derived.
    pub fn with_counts(m: u64, k: u32, counts: Vec<u64>) -> Result<Self, AnalyticsError> {
        let s = u32::try_from(counts.len()).map_err(|_| AnalyticsError::Domain("too many sets".into()))?;
        let n = counts.iter().sum();
        let mut p = Self::new(m, k, s, n)?;
        p.counts = Some(counts);
        Ok(p)
    }

    /// `n` split evenly over `s` sets.
    pub fn uniform(m: u64, k: u32, s: u32, per_set: u64) -> Result<Self, AnalyticsError> {
        Self::with_counts(m, k, vec![per_set; s as usize])
    }

    fn counts(&self) -> Result<&[u64], AnalyticsError> {
        self.counts.as_deref().ok_or(AnalyticsError::MissingCounts)
    }

    /// Elements inserted after every element of set `i`: `sum_{j > i} n_j`.
    pub fn fill(&self, i: usize) -> Result<u64, AnalyticsError> {
        let counts = self.counts()?;
        self.check_index(i)?;
        Ok(counts[i..].iter().sum())
    }

    fn check_index(&self, i: usize) -> Result<(), AnalyticsError> {
        if i == 0 || i > self.s as usize {
            return Err(AnalyticsError::IndexOutOfRange { i, s: self.s as usize });
        }
        Ok(())
    }
}

/// Probability that one cell is still zero after `n` insertions of `k`
/// hashes into `m` cells, complemented: `1 - (1 - 1/m)^(kn)`.
fn occupancy(m: u64, k: u32, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let kn = k as f64 * n as f64;
    -f64::exp_m1(kn * f64::ln_1p(-1.0 / m as f64))
}

/// `1 - (1 - p)^trials`.
fn at_least_one(p: f64, trials: u32) -> f64 {
    if trials == 0 || p == 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    -f64::exp_m1(trials as f64 * f64::ln_1p(-p))
}

/// Classic Bloom filter false-positive probability `(1 - (1 - 1/m)^(kn))^k`.
pub fn bf_fpp(m: u64, k: u32, n: u64) -> Result<f64, AnalyticsError> {
    if m == 0 || k == 0 {
        return Err(AnalyticsError::Domain(format!("m = {m}, k = {k}: must be positive")));
    }
    Ok(occupancy(m, k, n).powi(k as i32))
}

/// Probability that one specific set is falsely reported for a non-member.
pub fn shbf_fpp_specific(p: &FilterParams) -> Result<f64, AnalyticsError> {
    bf_fpp(p.m, p.k, p.n)
}

/// Probability that a non-member is reported in at least one of the `s` sets.
pub fn shbf_fpp_overall(p: &FilterParams) -> Result<f64, AnalyticsError> {
    Ok(at_least_one(shbf_fpp_specific(p)?, p.s))
}

/// Probability that a member is also reported in at least one other set.
pub fn shbf_isep(p: &FilterParams) -> Result<f64, AnalyticsError> {
    Ok(at_least_one(shbf_fpp_specific(p)?, p.s - 1))
}

/// Probability that a member's candidate set has exactly `i` labels:
/// `C(s-1, i-1) q^(i-1) (1-q)^(s-i)` with `q` the set-specific rate.
pub fn shbf_isep_cardinality(p: &FilterParams, i: usize) -> Result<f64, AnalyticsError> {
    p.check_index(i)?;
    let q = shbf_fpp_specific(p)?;
    let trials = p.s as u64 - 1;
    let hits = i as u64 - 1;
    Ok(binomial_pmf(trials, hits, q))
}

fn ln_choose(n: u64, r: u64) -> f64 {
    let r = r.min(n - r);
    (1..=r).map(|j| ((n - r + j) as f64).ln() - (j as f64).ln()).sum()
}

fn binomial_pmf(trials: u64, hits: u64, q: f64) -> f64 {
    if q == 0.0 {
        return if hits == 0 { 1.0 } else { 0.0 };
    }
    if q >= 1.0 {
        return if hits == trials { 1.0 } else { 0.0 };
    }
    let misses = trials - hits;
    (ln_choose(trials, hits) + hits as f64 * q.ln() + misses as f64 * f64::ln_1p(-q)).exp()
}

/// Spatial filter false-positive probability; identical in form to
/// [`bf_fpp`] over all `n` elements and independent of `s`.
pub fn sbf_fpp(p: &FilterParams) -> Result<f64, AnalyticsError> {
    bf_fpp(p.m, p.k, p.n)
}

/// Probability that a non-member is reported as a member of set `i`.
///
/// The recursive tail-sum definition telescopes to
/// `K(sum_{j>=i} n_j) - K(sum_{j>i} n_j)` with `K` the Bloom kernel.
pub fn sbf_fpp_specific(p: &FilterParams, i: usize) -> Result<f64, AnalyticsError> {
    let counts = p.counts()?;
    p.check_index(i)?;
    let tail_from: u64 = counts[i - 1..].iter().sum();
    let tail_after: u64 = counts[i..].iter().sum();
    let v = bf_fpp(p.m, p.k, tail_from)? - bf_fpp(p.m, p.k, tail_after)?;
    Ok(v.max(0.0))
}

/// Probability that a member of set `i` is reported under a higher label.
pub fn sbf_isep_specific(p: &FilterParams, i: usize) -> Result<f64, AnalyticsError> {
    bf_fpp(p.m, p.k, p.fill(i)?)
}

/// Size-weighted mean of the set-specific inter-set error probabilities.
pub fn sbf_isep_overall(p: &FilterParams) -> Result<f64, AnalyticsError> {
    let counts = p.counts()?;
    if p.n == 0 {
        return Err(AnalyticsError::Domain("n must be positive".into()));
    }
    let mut acc = 0.0;
    for (idx, &ni) in counts.iter().enumerate() {
        acc += ni as f64 * sbf_isep_specific(p, idx + 1)?;
    }
    Ok(acc / p.n as f64)
}

/// Outcome counts of a query run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeTally {
    /// Members assigned to exactly their own set.
    pub c: u64,
    /// Members assigned to a single wrong set.
    pub e: u64,
    /// Members reported in `u` sets, keyed by `u >= 2`.
    pub u: BTreeMap<usize, u64>,
    pub fp: u64,
    pub tn: u64,
}

impl OutcomeTally {
    pub fn record(&mut self, outcome: &QueryOutcome) {
        match outcome {
            QueryOutcome::TrueNegative => self.tn += 1,
            QueryOutcome::FalsePositive { .. } => self.fp += 1,
            QueryOutcome::Correct => self.c += 1,
            QueryOutcome::MultiMatch { cardinality } => *self.u.entry(*cardinality).or_default() += 1,
            QueryOutcome::InterSetError { .. } => self.e += 1,
        }
    }

    pub fn merge(mut self, other: &OutcomeTally) -> Self {
        self.c += other.c;
        self.e += other.e;
        self.fp += other.fp;
        self.tn += other.tn;
        for (&k, &v) in &other.u {
            *self.u.entry(k).or_default() += v;
        }
        self
    }

    /// Count of members reported in exactly `i` sets.
    pub fn u(&self, i: usize) -> u64 {
        self.u.get(&i).copied().unwrap_or(0)
    }

    /// Members reported in `i` or more sets.
    pub fn u_at_least(&self, i: usize) -> u64 {
        self.u.range(i..).map(|(_, v)| v).sum()
    }

    pub fn multi_matches(&self) -> u64 {
        self.u.values().sum()
    }

    pub fn member_queries(&self) -> u64 {
        self.c + self.e + self.multi_matches()
    }

    pub fn non_member_queries(&self) -> u64 {
        self.fp + self.tn
    }
}

impl<'a> FromIterator<&'a QueryOutcome> for OutcomeTally {
    fn from_iter<I: IntoIterator<Item = &'a QueryOutcome>>(iter: I) -> Self {
        let mut t = OutcomeTally::default();
        for o in iter {
            t.record(o);
        }
        t
    }
}

/// Mean information carried by member queries: 1 for a correct answer,
/// 0 for a wrong one, `1/u` for a `u`-way ambiguity.
pub fn entropy(tally: &OutcomeTally) -> Result<f64, AnalyticsError> {
    let members = tally.member_queries();
    if members == 0 {
        return Err(AnalyticsError::EmptyTally);
    }
    let info: f64 = tally.c as f64
        + tally
            .u
            .iter()
            .map(|(&card, &count)| count as f64 / card as f64)
            .sum::<f64>();
    Ok(info / members as f64)
}

/// Entropy of a stream of outcomes; non-member outcomes are ignored.
pub fn entropy_of<'a>(outcomes: impl IntoIterator<Item = &'a QueryOutcome>) -> Result<f64, AnalyticsError> {
    entropy(&outcomes.into_iter().collect())
}

/// Per-query cost of one filter kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostProfile {
    pub lookups_per_query: u64,
    pub hashes_per_query: u64,
    pub cells_read_min: u64,
    pub cells_read_max: u64,
}

pub fn cost_model(kind: FilterKind, k: u64, s: u64) -> CostProfile {
    match kind {
        FilterKind::Shifting => CostProfile {
            lookups_per_query: s,
            hashes_per_query: k + s - 1,
            cells_read_min: s,
            cells_read_max: s * k,
        },
        FilterKind::Spatial => CostProfile {
            lookups_per_query: 1,
            hashes_per_query: k,
            cells_read_min: 1,
            cells_read_max: k,
        },
    }
}
