//! Types shared by the shifting and spatial filters.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::hash::{HashError, HashFamily, ScriptedTable};
use crate::sbf::SpatialFilter;
use crate::shbf::ShiftingFilter;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterError {
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error("filter is sealed; inserts are no longer accepted")]
    Sealed,
    #[error("set label {label} outside 1..={s}")]
    LabelOutOfRange { label: usize, s: usize },
    #[error(transparent)]
    Hash(#[from] HashError),
    /// A member was not reported under its own set (or reported under a
    /// lower label). Only a broken hash family or corrupted cells can cause this.
    #[error("internal consistency failure: element of set {label} reported as {reported}")]
    FalseNegative { label: usize, reported: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterKind {
    Shifting,
    Spatial,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Shifting => "shbf",
            FilterKind::Spatial => "sbf",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FilterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shbf" => Ok(FilterKind::Shifting),
            "sbf" => Ok(FilterKind::Spatial),
            other => Err(format!("unknown filter kind `{other}` (expected shbf or sbf)")),
        }
    }
}

/// Instrumentation counters. Updated atomically so concurrent readers of a
/// sealed filter never lose increments.
#[derive(Debug, Default)]
pub struct HashCounter {
    hash_evaluations: AtomicU64,
    cells_read: AtomicU64,
    lookups: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CounterSnapshot {
    pub hash_evaluations: u64,
    pub cells_read: u64,
    pub lookups: u64,
}

impl CounterSnapshot {
    pub fn since(&self, earlier: &CounterSnapshot) -> CounterSnapshot {
        CounterSnapshot {
            hash_evaluations: self.hash_evaluations - earlier.hash_evaluations,
            cells_read: self.cells_read - earlier.cells_read,
            lookups: self.lookups - earlier.lookups,
        }
    }
}

impl HashCounter {
    pub(crate) fn record(&self, hashes: u64, cells: u64, lookups: u64) {
        self.hash_evaluations.fetch_add(hashes, Ordering::Relaxed);
        if cells > 0 {
            self.cells_read.fetch_add(cells, Ordering::Relaxed);
        }
        if lookups > 0 {
            self.lookups.fetch_add(lookups, Ordering::Relaxed);
        }
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            hash_evaluations: self.hash_evaluations.load(Ordering::Relaxed),
            cells_read: self.cells_read.load(Ordering::Relaxed),
            lookups: self.lookups.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.hash_evaluations.store(0, Ordering::Relaxed);
        self.cells_read.store(0, Ordering::Relaxed);
        self.lookups.store(0, Ordering::Relaxed);
    }
}

impl Clone for HashCounter {
    fn clone(&self) -> Self {
        let s = self.snapshot();
        Self {
            hash_evaluations: AtomicU64::new(s.hash_evaluations),
            cells_read: AtomicU64::new(s.cells_read),
            lookups: AtomicU64::new(s.lookups),
        }
    }
}

/// Labels a shifting-filter query reports as possible homes of an element.
/// Sorted, without duplicates; empty means "in no set".
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CandidateSet(Vec<usize>);

impl CandidateSet {
    /// Builds a set from labels in any order.
    pub fn from_labels(mut labels: Vec<usize>) -> Self {
        labels.sort_unstable();
        labels.dedup();
        Self(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.0.binary_search(&label).is_ok()
    }
}

impl fmt::Display for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Ground truth compared with a filter verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryOutcome {
    /// Non-member reported in no set.
    TrueNegative,
    /// Non-member reported in at least one set.
    FalsePositive { reported: CandidateSet },
    /// Member reported in exactly its own set.
    Correct,
    /// Member reported in `cardinality > 1` sets, its own among them (shifting only).
    MultiMatch { cardinality: usize },
    /// Member reported in a single wrong set (spatial only).
    InterSetError { reported: usize },
}

/// Common surface of both multi-set filters.
pub trait AssociationFilter {
    fn kind(&self) -> FilterKind;
    /// Number of addressable cells.
    fn cells(&self) -> u64;
    /// Memory footprint of the cell vector in bits.
    fn bit_len(&self) -> u64;
    fn hash_count(&self) -> usize;
    fn set_count(&self) -> usize;
    fn insert(&mut self, element: &[u8], label: usize) -> Result<(), FilterError>;
    fn seal(&mut self);
    fn is_sealed(&self) -> bool;
    /// `true_label == 0` marks a non-member.
    fn classify(&self, element: &[u8], true_label: usize) -> Result<QueryOutcome, FilterError>;
    fn counters(&self) -> &HashCounter;
}

/// Either filter, as produced by the decoder.
#[derive(Debug, Clone)]
pub enum Filter {
    Shifting(ShiftingFilter),
    Spatial(SpatialFilter),
}

impl Filter {
    fn inner(&self) -> &dyn AssociationFilter {
        match self {
            Filter::Shifting(f) => f,
            Filter::Spatial(f) => f,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn AssociationFilter {
        match self {
            Filter::Shifting(f) => f,
            Filter::Spatial(f) => f,
        }
    }

    /// Verdict rendered as text: comma-separated labels or `none` for a
    /// shifting filter, a single label (0 = no set) for a spatial one.
    pub fn query_text(&self, element: &[u8]) -> Result<String, FilterError> {
        Ok(match self {
            Filter::Shifting(f) => f.query(element)?.to_string(),
            Filter::Spatial(f) => f.query(element)?.to_string(),
        })
    }

    /// Same cell contents, digests taken from `table` instead of the seed.
    pub fn with_scripted_digests(self, table: ScriptedTable) -> Result<Self, FilterError> {
        Ok(match self {
            Filter::Shifting(f) => {
                let family = HashFamily::scripted(*f.family().config(), table);
                Filter::Shifting(ShiftingFilter::from_parts(family, f.mode(), f.bits().clone())?)
            }
            Filter::Spatial(f) => {
                let family = HashFamily::scripted(*f.family().config(), table);
                Filter::Spatial(SpatialFilter::from_parts(family, f.packed().clone())?)
            }
        })
    }

    /// Whether the element is reported in at least one set.
    pub fn reports_member(&self, element: &[u8]) -> Result<bool, FilterError> {
        Ok(match self {
            Filter::Shifting(f) => !f.query(element)?.is_empty(),
            Filter::Spatial(f) => f.query(element)? != 0,
        })
    }
}

impl From<ShiftingFilter> for Filter {
    fn from(f: ShiftingFilter) -> Self {
        Filter::Shifting(f)
    }
}

impl From<SpatialFilter> for Filter {
    fn from(f: SpatialFilter) -> Self {
        Filter::Spatial(f)
    }
}

impl AssociationFilter for Filter {
    fn kind(&self) -> FilterKind {
        self.inner().kind()
    }
    fn cells(&self) -> u64 {
        self.inner().cells()
    }
    fn bit_len(&self) -> u64 {
        self.inner().bit_len()
    }
    fn hash_count(&self) -> usize {
        self.inner().hash_count()
    }
    fn set_count(&self) -> usize {
        self.inner().set_count()
    }
    fn insert(&mut self, element: &[u8], label: usize) -> Result<(), FilterError> {
        self.inner_mut().insert(element, label)
    }
    fn seal(&mut self) {
        self.inner_mut().seal()
    }
    fn is_sealed(&self) -> bool {
        self.inner().is_sealed()
    }
    fn classify(&self, element: &[u8], true_label: usize) -> Result<QueryOutcome, FilterError> {
        self.inner().classify(element, true_label)
    }
    fn counters(&self) -> &HashCounter {
        self.inner().counters()
    }
}

/// Largest cell count accepted by the constructors.
pub const MAX_CELLS: u64 = 1 << 40;

pub(crate) fn check_common(m: u64, k: usize, s: usize) -> Result<(), FilterError> {
    if m < 2 {
        return Err(FilterError::InvalidParams(format!("m = {m}, need m >= 2")));
    }
    if m > MAX_CELLS {
        return Err(FilterError::InvalidParams(format!("m = {m} exceeds 2^40")));
    }
    if k == 0 {
        return Err(FilterError::InvalidParams("k must be at least 1".into()));
    }
    if s == 0 {
        return Err(FilterError::InvalidParams("s must be at least 1".into()));
    }
    if s as u64 >= u32::MAX as u64 {
        return Err(FilterError::InvalidParams(format!(
            "s = {s} does not fit a 32-bit label"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_set_display_and_order() {
        let g = CandidateSet::from_labels(vec![3, 1, 3]);
        assert_eq!(g.labels(), &[1, 3]);
        assert_eq!(g.to_string(), "1,3");
        assert!(g.contains(3) && !g.contains(2));
        assert_eq!(CandidateSet::default().to_string(), "none");
    }

    #[test]
    fn counters_accumulate_and_reset() {
        let c = HashCounter::default();
        c.record(3, 2, 1);
        c.record(3, 0, 1);
        let snap = c.snapshot();
        assert_eq!(
            snap,
            CounterSnapshot {
                hash_evaluations: 6,
                cells_read: 2,
                lookups: 2
            }
        );
        assert_eq!(c.clone().snapshot(), snap);
        c.reset();
        assert_eq!(c.snapshot(), CounterSnapshot::default());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("shbf".parse::<FilterKind>().unwrap(), FilterKind::Shifting);
        assert_eq!("sbf".parse::<FilterKind>().unwrap(), FilterKind::Spatial);
        assert!("bloom".parse::<FilterKind>().is_err());
    }
}
