//! Spatial Bloom filter.
//!
//! `m` cells of `ceil(log2(s + 1))` bits hold set labels. Inserting an element
//! of set `i` raises each of its `k` cells to `max(cell, i)`; a query returns
//! 0 if any probed cell is empty and the smallest probed label otherwise.

use crate::bits::PackedCells;
use crate::filter::{
    check_common, AssociationFilter, CandidateSet, FilterError, FilterKind, HashCounter, QueryOutcome,
};
use crate::hash::{HashFamily, HashFamilyConfig};

/// Bits needed to store labels `0..=s`.
pub fn cell_bits_for(s: usize) -> u32 {
    (usize::BITS - s.leading_zeros()).max(1)
}

#[derive(Debug, Clone)]
pub struct SpatialFilter {
    m: u64,
    k: usize,
    s: usize,
    cells: PackedCells,
    family: HashFamily,
    sealed: bool,
    counters: HashCounter,
    state: Option<usize>,
}

impl SpatialFilter {
    pub fn new(m: u64, k: usize, s: usize, seed: u64) -> Result<Self, FilterError> {
        check_common(m, k, s)?;
        Self::with_family(HashFamily::seeded(HashFamilyConfig::new(seed, k, s, m)?))
    }

    pub fn with_family(family: HashFamily) -> Result<Self, FilterError> {
        let HashFamilyConfig { m, k, s, .. } = *family.config();
        check_common(m, k, s)?;
        Ok(Self {
            m,
            k,
            s,
            cells: PackedCells::new(m as usize, cell_bits_for(s)),
            family,
            sealed: false,
            counters: HashCounter::default(),
            state: Some(0),
        })
    }

    pub(crate) fn from_parts(family: HashFamily, cells: PackedCells) -> Result<Self, FilterError> {
        let mut f = Self::with_family(family)?;
        debug_assert_eq!(cells.width(), f.cells.width());
        f.cells = cells;
        f.sealed = true;
        f.state = None;
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

    pub fn cell_bits(&self) -> u32 {
        self.cells.width()
    }

    /// Filter length in bits, `m * cell_bits`.
    pub fn bit_len(&self) -> u64 {
        self.cells.bit_len()
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub fn cell(&self, i: u64) -> usize {
        self.cells.get(i as usize) as usize
    }

    pub fn cell_values(&self) -> Vec<usize> {
        self.cells.iter().map(|v| v as usize).collect()
    }

    pub(crate) fn packed(&self) -> &PackedCells {
        &self.cells
    }

    /// Highest label inserted so far, as long as labels arrived in
    /// non-decreasing order; `None` once the order was broken (or for a
    /// decoded filter, whose history is unknown).
    pub fn state(&self) -> Option<usize> {
        self.state
    }

    pub fn insert(&mut self, element: &[u8], label: usize) -> Result<(), FilterError> {
        if self.sealed {
            return Err(FilterError::Sealed);
        }
        if label == 0 || label > self.s {
            return Err(FilterError::LabelOutOfRange { label, s: self.s });
        }
        let indices = (1..=self.k)
            .map(|j| self.family.cell_index(j, element))
            .collect::<Result<Vec<_>, _>>()?;
        for idx in indices {
            let i = idx as usize;
            if (self.cells.get(i) as usize) < label {
                self.cells.set(i, label as u64);
            }
        }
        self.counters.record(self.k as u64, 0, 0);
        self.state = match self.state {
            Some(cur) if label >= cur => Some(label),
            _ => None,
        };
        Ok(())
    }

    pub fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    /// Label assigned to `element`, 0 when it belongs to no set.
    ///
    /// All `k` digests are computed; cells are read until the first zero.
    pub fn query(&self, element: &[u8]) -> Result<usize, FilterError> {
        let indices = (1..=self.k)
            .map(|j| self.family.cell_index(j, element))
            .collect::<Result<Vec<_>, _>>()?;
        let mut verdict = usize::MAX;
        let mut cells_read = 0u64;
        for idx in indices {
            cells_read += 1;
            let v = self.cells.get(idx as usize) as usize;
            if v == 0 {
                verdict = 0;
                break;
            }
            verdict = verdict.min(v);
        }
        self.counters.record(self.k as u64, cells_read, 1);
        Ok(verdict)
    }

    pub fn classify(&self, element: &[u8], true_label: usize) -> Result<QueryOutcome, FilterError> {
        if true_label > self.s {
            return Err(FilterError::LabelOutOfRange {
                label: true_label,
                s: self.s,
            });
        }
        let verdict = self.query(element)?;
        Ok(match (true_label, verdict) {
            (0, 0) => QueryOutcome::TrueNegative,
            (0, v) => QueryOutcome::FalsePositive {
                reported: CandidateSet::from_labels(vec![v]),
            },
            (t, v) if v < t => {
                return Err(FilterError::FalseNegative {
                    label: t,
                    reported: v.to_string(),
                })
            }
            (t, v) if v == t => QueryOutcome::Correct,
            (_, v) => QueryOutcome::InterSetError { reported: v },
        })
    }

    pub fn counters(&self) -> &HashCounter {
        &self.counters
    }
}

impl AssociationFilter for SpatialFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Spatial
    }
    fn cells(&self) -> u64 {
        self.m
    }
    fn bit_len(&self) -> u64 {
        self.cells.bit_len()
    }
    fn hash_count(&self) -> usize {
        self.k
    }
    fn set_count(&self) -> usize {
        self.s
    }
    fn insert(&mut self, element: &[u8], label: usize) -> Result<(), FilterError> {
        SpatialFilter::insert(self, element, label)
    }
    fn seal(&mut self) {
        SpatialFilter::seal(self)
    }
    fn is_sealed(&self) -> bool {
        self.sealed
    }
    fn classify(&self, element: &[u8], true_label: usize) -> Result<QueryOutcome, FilterError> {
        SpatialFilter::classify(self, element, true_label)
    }
    fn counters(&self) -> &HashCounter {
        &self.counters
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worked_example as ex;

    const WORKED_CELLS: [usize; 16] = [1, 0, 0, 0, 0, 2, 0, 2, 0, 1, 0, 3, 3, 0, 0, 0];

    #[test]
    fn cell_widths() {
        assert_eq!(cell_bits_for(1), 1);
        assert_eq!(cell_bits_for(2), 2);
        assert_eq!(cell_bits_for(3), 2);
        assert_eq!(cell_bits_for(4), 3);
        assert_eq!(cell_bits_for(255), 8);
        assert_eq!(cell_bits_for(256), 9);
        for s in 1..2000usize {
            let b = cell_bits_for(s);
            assert!(1usize << b > s);
            assert!(b == 1 || 1usize << (b - 1) <= s);
        }
    }

    #[test]
    fn new_filter_shape() {
        let f = SpatialFilter::new(16, 2, 3, 0).unwrap();
        assert_eq!(f.cell_bits(), 2);
        assert_eq!(f.cell_values(), vec![0; 16]);
        assert_eq!(f.state(), Some(0));
        let f = SpatialFilter::new(1 << 10, 4, 255, 0).unwrap();
        assert_eq!(f.cell_bits(), 8);
        assert_eq!(f.bit_len(), 8 << 10);
        let f = SpatialFilter::new(1 << 10, 4, 1, 0).unwrap();
        assert_eq!(f.cell_bits(), 1);
    }

    #[test]
    fn worked_example_insertions() {
        let f = ex::spatial_filter().unwrap();
        assert_eq!(f.cell_values(), WORKED_CELLS);
        assert_eq!(f.state(), Some(3));
    }

    #[test]
    fn worked_example_queries() {
        let f = ex::spatial_filter().unwrap();
        assert_eq!(f.query(ex::D1).unwrap(), 1);
        assert_eq!(f.query(ex::ND1).unwrap(), 0);
        assert_eq!(f.query(ex::D2).unwrap(), 2);
        assert_eq!(f.query(ex::ND2).unwrap(), 1);
        assert_eq!(
            f.classify(ex::D2, 1).unwrap(),
            QueryOutcome::InterSetError { reported: 2 }
        );
        assert_eq!(
            f.classify(ex::ND2, 0).unwrap(),
            QueryOutcome::FalsePositive {
                reported: CandidateSet::from_labels(vec![1])
            }
        );
        assert_eq!(f.classify(ex::D1, 1).unwrap(), QueryOutcome::Correct);
        assert_eq!(f.classify(ex::ND1, 0).unwrap(), QueryOutcome::TrueNegative);
        // d2 holds label 2 on both cells; claiming set 3 is a regression
        assert!(matches!(
            f.classify(ex::D2, 3),
            Err(FilterError::FalseNegative { label: 3, .. })
        ));
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn every_insertion_order_gives_the_same_cells() {
        let items = ex::SPATIAL_MEMBERS;
        let orders = permutations(items.len());
        assert_eq!(orders.len(), 24);
        for order in orders {
            let mut f = SpatialFilter::with_family(ex::spatial_family()).unwrap();
            for i in order {
                let (e, l) = items[i];
                f.insert(e, l).unwrap();
            }
            assert_eq!(f.cell_values(), WORKED_CELLS);
        }
    }

    #[test]
    fn state_breaks_on_out_of_order_insert() {
        let mut f = SpatialFilter::new(64, 2, 3, 0).unwrap();
        f.insert(b"a", 1).unwrap();
        f.insert(b"b", 2).unwrap();
        assert_eq!(f.state(), Some(2));
        f.insert(b"c", 1).unwrap();
        assert_eq!(f.state(), None);
    }

    #[test]
    fn reinsert_is_idempotent() {
        let mut f = SpatialFilter::new(128, 3, 7, 1).unwrap();
        f.insert(b"x", 5).unwrap();
        let before = f.cell_values();
        f.insert(b"x", 5).unwrap();
        assert_eq!(f.cell_values(), before);
    }

    #[test]
    fn sealed_and_label_errors() {
        let mut f = SpatialFilter::new(64, 2, 3, 0).unwrap();
        assert!(matches!(f.insert(b"x", 4), Err(FilterError::LabelOutOfRange { .. })));
        assert!(matches!(f.insert(b"x", 0), Err(FilterError::LabelOutOfRange { .. })));
        f.seal();
        assert_eq!(f.insert(b"x", 1), Err(FilterError::Sealed));
    }

    #[test]
    fn counters_follow_cost_model() {
        let f = ex::spatial_filter().unwrap();
        let before = f.counters().snapshot();
        f.query(ex::ND1).unwrap(); // first probed cell is 0
        let d = f.counters().snapshot().since(&before);
        assert_eq!((d.hash_evaluations, d.cells_read, d.lookups), (2, 1, 1));
        let before = f.counters().snapshot();
        f.query(ex::D1).unwrap();
        let d = f.counters().snapshot().since(&before);
        assert_eq!((d.hash_evaluations, d.cells_read, d.lookups), (2, 2, 1));
    }
}
