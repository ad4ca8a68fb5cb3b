//! Dense fixed-width cell storage.
//!
//! Cell `j` occupies bit range `[j * width, (j + 1) * width)` of one
//! contiguous little-endian bit stream. Serialized bytes hold bits
//! least-significant first, which is exactly the byte order of the backing
//! `u64` words written little-endian.

/// Widest cell supported; set labels are 32-bit.
pub const MAX_CELL_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedCells {
    len: usize,
    width: u32,
    words: Vec<u64>,
}

impl PackedCells {
    /// `len` zeroed cells of `width` bits each.
    ///
    /// Panics if `width` is not in `1..=MAX_CELL_BITS`.
    pub fn new(len: usize, width: u32) -> Self {
        assert!(
            (1..=MAX_CELL_BITS).contains(&width),
            "cell width {width} outside 1..={MAX_CELL_BITS}"
        );
        let bits = len * width as usize;
        Self {
            len,
            width,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bit_len(&self) -> u64 {
        self.len as u64 * self.width as u64
    }

    pub fn byte_len(&self) -> usize {
        (self.len * self.width as usize).div_ceil(8)
    }

    fn mask(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mut v = self.words[w] >> off;
        if off + self.width as usize > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        v & self.mask()
    }

    /// Stores `value` in cell `i`; bits above the cell width are discarded.
    #[inline]
    pub fn set(&mut self, i: usize, value: u64) {
        debug_assert!(i < self.len);
        let mask = self.mask();
        let value = value & mask;
        let bit = i * self.width as usize;
        let (w, off) = (bit / 64, bit % 64);
        self.words[w] = (self.words[w] & !(mask << off)) | (value << off);
        if off + self.width as usize > 64 {
            let spill = 64 - off;
            self.words[w + 1] = (self.words[w + 1] & !(mask >> spill)) | (value >> spill);
        }
    }

    /// Number of set bits across the whole stream.
    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn count_nonzero(&self) -> usize {
        if self.width == 1 {
            return self.count_ones() as usize;
        }
        (0..self.len).filter(|&i| self.get(i) != 0).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.byte_len());
        out
    }

    /// Rebuilds storage from its serialized bytes. Returns `None` when the
    /// length is wrong or padding bits past the last cell are set.
    pub fn from_bytes(len: usize, width: u32, bytes: &[u8]) -> Option<Self> {
        let mut cells = Self::new(len, width);
        if bytes.len() != cells.byte_len() {
            return None;
        }
        for (chunk, word) in bytes.chunks(8).zip(cells.words.iter_mut()) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            *word = u64::from_le_bytes(buf);
        }
        let used = len * width as usize;
        if !used.is_multiple_of(64) {
            if let Some(last) = cells.words.last() {
                if last >> (used % 64) != 0 {
                    return None;
                }
            }
        }
        Some(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_bit_cells_pack_lsb_first() {
        let mut c = PackedCells::new(16, 2);
        for (i, v) in [1, 0, 0, 0, 0, 2, 0, 2, 0, 1, 0, 3, 3, 0, 0, 0].into_iter().enumerate() {
            c.set(i, v);
        }
        assert_eq!(c.to_bytes(), vec![0x01, 0x88, 0xC4, 0x03]);
    }

    #[test]
    fn cells_straddling_words() {
        let mut c = PackedCells::new(100, 7);
        for i in 0..100 {
            c.set(i, (i as u64 * 37) % 128);
        }
        for i in 0..100 {
            assert_eq!(c.get(i), (i as u64 * 37) % 128);
        }
        c.set(9, 0); // bits 63..70
        assert_eq!(c.get(8), (8 * 37) % 128);
        assert_eq!(c.get(9), 0);
        assert_eq!(c.get(10), (10 * 37) % 128);
    }

    #[test]
    fn rejects_bad_payloads() {
        assert!(PackedCells::from_bytes(10, 1, &[0, 0]).is_some());
        assert!(PackedCells::from_bytes(10, 1, &[0]).is_none());
        // bit 10 lies past the last cell
        assert!(PackedCells::from_bytes(10, 1, &[0, 0b100]).is_none());
    }

    proptest! {
        #[test]
        fn byte_round_trip(width in 1u32..=12, values in proptest::collection::vec(any::<u64>(), 0..200)) {
            let mut c = PackedCells::new(values.len(), width);
            for (i, v) in values.iter().enumerate() {
                c.set(i, *v);
            }
            let back = PackedCells::from_bytes(values.len(), width, &c.to_bytes()).unwrap();
            prop_assert_eq!(&back, &c);
            for (i, v) in values.iter().enumerate() {
                prop_assert_eq!(back.get(i), v & ((1 << width) - 1));
            }
        }
    }
}
