//! Generalized shifting Bloom filter.
//!
//! One bit vector holds every set. An element of set `i` is written at
//! `(h_j(e) + o_i(e)) mod m` for each index hash `h_j`, where the offset
//! `o_i` is 0 for set 1 and a set-specific hash otherwise. A query repeats the
//! probe for every label and reports all labels whose `k` bits are set.

use crate::bits::PackedCells;
use crate::filter::{
    check_common, AssociationFilter, CandidateSet, FilterError, FilterKind, HashCounter, QueryOutcome,
};
use crate::hash::{HashFamily, HashFamilyConfig, OffsetBound};

/// How offsets are reduced before being added to a base index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftMode {
    /// Offsets in `[0, m)`; probes wrap around the vector.
    Circular,
    /// Offsets limited to `[0, w)`, then added to the base index mod `m`.
    WordBounded(u64),
}

impl ShiftMode {
    fn bound(self) -> OffsetBound {
        match self {
            ShiftMode::Circular => OffsetBound::Unbounded,
            ShiftMode::WordBounded(w) => OffsetBound::Word(w),
        }
    }

    pub fn word(self) -> Option<u64> {
        match self {
            ShiftMode::Circular => None,
            ShiftMode::WordBounded(w) => Some(w),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShiftingFilter {
    m: u64,
    k: usize,
    s: usize,
    mode: ShiftMode,
    bits: PackedCells,
    family: HashFamily,
    sealed: bool,
    counters: HashCounter,
}

impl ShiftingFilter {
    pub fn new(m: u64, k: usize, s: usize, mode: ShiftMode, seed: u64) -> Result<Self, FilterError> {
        check_common(m, k, s)?;
        let family = HashFamily::seeded(HashFamilyConfig::new(seed, k, s, m)?);
        Self::with_family(family, mode)
    }

    /// Builds an empty filter around an existing (possibly scripted) family.
    pub fn with_family(family: HashFamily, mode: ShiftMode) -> Result<Self, FilterError> {
        let HashFamilyConfig { m, k, s, .. } = *family.config();
        check_common(m, k, s)?;
        if let ShiftMode::WordBounded(w) = mode {
            if w == 0 || w > m {
                return Err(FilterError::InvalidParams(format!("word size {w} outside 1..={m}")));
            }
        }
        Ok(Self {
            m,
            k,
            s,
            mode,
            bits: PackedCells::new(m as usize, 1),
            family,
            sealed: false,
            counters: HashCounter::default(),
        })
    }

    pub(crate) fn from_parts(family: HashFamily, mode: ShiftMode, bits: PackedCells) -> Result<Self, FilterError> {
        let mut f = Self::with_family(family, mode)?;
        debug_assert_eq!(bits.len(), f.bits.len());
        f.bits = bits;
        f.sealed = true;
        Ok(f)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn mode(&self) -> ShiftMode {
        self.mode
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub(crate) fn bits(&self) -> &PackedCells {
        &self.bits
    }

    pub fn bit(&self, i: u64) -> bool {
        self.bits.get(i as usize) == 1
    }

    pub fn popcount(&self) -> u64 {
        self.bits.count_ones()
    }

    pub fn fill_ratio(&self) -> f64 {
        self.popcount() as f64 / self.m as f64
    }

    /// Bit pattern as a `0`/`1` string, cell 0 first.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| if b == 1 { '1' } else { '0' }).collect()
    }

    fn check_label(&self, label: usize) -> Result<(), FilterError> {
        if label == 0 || label > self.s {
            return Err(FilterError::LabelOutOfRange { label, s: self.s });
        }
        Ok(())
    }

    fn base_indices(&self, element: &[u8]) -> Result<Vec<u64>, FilterError> {
        (1..=self.k)
            .map(|j| self.family.cell_index(j, element).map_err(FilterError::from))
            .collect()
    }

    pub fn insert(&mut self, element: &[u8], label: usize) -> Result<(), FilterError> {
        if self.sealed {
            return Err(FilterError::Sealed);
        }
        self.check_label(label)?;
        let bases = self.base_indices(element)?;
        let offset = self.family.offset(label, element, self.mode.bound())?;
        for base in bases {
            self.bits.set(((base + offset) % self.m) as usize, 1);
        }
        let hashes = self.k as u64 + u64::from(label > 1);
        self.counters.record(hashes, 0, 0);
        Ok(())
    }

    pub fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    /// Every label whose `k` shifted probes all hit set bits.
    ///
    /// Computes `k + s - 1` digests. Each label's probe stops at the first
    /// clear bit, so between `s` and `s * k` cells are read.
    pub fn query(&self, element: &[u8]) -> Result<CandidateSet, FilterError> {
        let bases = self.base_indices(element)?;
        let bound = self.mode.bound();
        let mut matches = Vec::new();
        let mut cells_read = 0u64;
        for label in 1..=self.s {
            let offset = self.family.offset(label, element, bound)?;
            let mut all_set = true;
            for &base in &bases {
                cells_read += 1;
                if self.bits.get(((base + offset) % self.m) as usize) == 0 {
                    all_set = false;
                    break;
                }
            }
            if all_set {
                matches.push(label);
            }
        }
        self.counters
            .record((self.k + self.s - 1) as u64, cells_read, self.s as u64);
        Ok(CandidateSet::from_labels(matches))
    }

    pub fn classify(&self, element: &[u8], true_label: usize) -> Result<QueryOutcome, FilterError> {
        if true_label > self.s {
            return Err(FilterError::LabelOutOfRange {
                label: true_label,
                s: self.s,
            });
        }
        let gamma = self.query(element)?;
        Ok(match (true_label, gamma.len()) {
            (0, 0) => QueryOutcome::TrueNegative,
            (0, _) => QueryOutcome::FalsePositive { reported: gamma },
            (label, _) if !gamma.contains(label) => {
                return Err(FilterError::FalseNegative {
                    label,
                    reported: gamma.to_string(),
                })
            }
            (_, 1) => QueryOutcome::Correct,
            (_, u) => QueryOutcome::MultiMatch { cardinality: u },
        })
    }

    pub fn counters(&self) -> &HashCounter {
        &self.counters
    }
}

impl AssociationFilter for ShiftingFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Shifting
    }
    fn cells(&self) -> u64 {
        self.m
    }
    fn bit_len(&self) -> u64 {
        self.m
    }
    fn hash_count(&self) -> usize {
        self.k
    }
    fn set_count(&self) -> usize {
        self.s
    }
    fn insert(&mut self, element: &[u8], label: usize) -> Result<(), FilterError> {
        ShiftingFilter::insert(self, element, label)
    }
    fn seal(&mut self) {
        ShiftingFilter::seal(self)
    }
    fn is_sealed(&self) -> bool {
        self.sealed
    }
    fn classify(&self, element: &[u8], true_label: usize) -> Result<QueryOutcome, FilterError> {
        ShiftingFilter::classify(self, element, true_label)
    }
    fn counters(&self) -> &HashCounter {
        &self.counters
    }
}
