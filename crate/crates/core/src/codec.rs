//! Binary filter images.
//!
//! ```text
//! offset size field
//!      0    4 magic "MSF1"
//!      4    1 version: digest id << 4 | format version
//!      5    1 kind: 1 = shifting, 2 = spatial
//!      6    8 m
//!     14    4 k
//!     18    4 s
//!     22    1 mode: 0 = circular, 1 = word-bounded
//!     23    8 w (0 unless word-bounded)
//!     31    8 seed
//!     39    8 payload length in bytes
//!     47    . payload: packed cells, LSB-first
//! ```
//!
//! All integers are little-endian. The hash family is not stored; decoding
//! rebuilds a seeded family from `(seed, k, s, m)`.

use thiserror::Error;

use crate::bits::PackedCells;
use crate::filter::{check_common, Filter, FilterError};
use crate::hash::{HashFamily, HashFamilyConfig, DIGEST_ID};
use crate::sbf::{cell_bits_for, SpatialFilter};
use crate::shbf::{ShiftMode, ShiftingFilter};

pub const MAGIC: [u8; 4] = *b"MSF1";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 47;

const KIND_SHIFTING: u8 = 1;
const KIND_SPATIAL: u8 = 2;
const MODE_CIRCULAR: u8 = 0;
const MODE_WORD: u8 = 1;

pub fn version_byte() -> u8 {
    (DIGEST_ID << 4) | FORMAT_VERSION
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("filter must be sealed before encoding")]
    Unsealed,
    #[error("bad magic {0:02x?}")]
    BadMagic(Vec<u8>),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("image uses digest {found}, this build provides digest {expected}")]
    DigestMismatch { found: u8, expected: u8 },
    #[error("unknown filter kind {0}")]
    BadKind(u8),
    #[error("unknown shift mode {0}")]
    BadMode(u8),
    #[error("image truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("payload length {found} does not match expected {expected}")]
    PayloadLength { found: u64, expected: u64 },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("payload padding bits are not zero")]
    Padding,
    #[error("cell {index} holds {value}, above set count {s}")]
    CellOutOfRange { index: usize, value: u64, s: usize },
    #[error("invalid header: {0}")]
    Header(#[from] FilterError),
}

struct Header {
    kind: u8,
    m: u64,
    k: u32,
    s: u32,
    mode: u8,
    w: u64,
    seed: u64,
}

fn write_image(h: &Header, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(version_byte());
    out.push(h.kind);
    out.extend_from_slice(&h.m.to_le_bytes());
    out.extend_from_slice(&h.k.to_le_bytes());
    out.extend_from_slice(&h.s.to_le_bytes());
    out.push(h.mode);
    out.extend_from_slice(&h.w.to_le_bytes());
    out.extend_from_slice(&h.seed.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

pub fn encode_shifting(f: &ShiftingFilter) -> Result<Vec<u8>, CodecError> {
    if !f.is_sealed() {
        return Err(CodecError::Unsealed);
    }
    let (mode, w) = match f.mode() {
        ShiftMode::Circular => (MODE_CIRCULAR, 0),
        ShiftMode::WordBounded(w) => (MODE_WORD, w),
    };
    let header = Header {
        kind: KIND_SHIFTING,
        m: f.m(),
        k: f.k() as u32,
        s: f.s() as u32,
        mode,
        w,
        seed: f.family().config().seed,
    };
    Ok(write_image(&header, &f.bits().to_bytes()))
}

pub fn encode_spatial(f: &SpatialFilter) -> Result<Vec<u8>, CodecError> {
    if !f.is_sealed() {
        return Err(CodecError::Unsealed);
    }
    let header = Header {
        kind: KIND_SPATIAL,
        m: f.m(),
        k: f.k() as u32,
        s: f.s() as u32,
        mode: MODE_CIRCULAR,
        w: 0,
        seed: f.family().config().seed,
    };
    Ok(write_image(&header, &f.packed().to_bytes()))
}

pub fn encode(filter: &Filter) -> Result<Vec<u8>, CodecError> {
    match filter {
        Filter::Shifting(f) => encode_shifting(f),
        Filter::Spatial(f) => encode_spatial(f),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(CodecError::Truncated {
                needed: end,
                available: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decodes an image into a sealed filter with a seeded hash family.
pub fn decode(bytes: &[u8]) -> Result<Filter, CodecError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(CodecError::BadMagic(magic.to_vec()));
    }
    let version = r.u8()?;
    if version & 0x0F != FORMAT_VERSION {
        return Err(CodecError::UnsupportedVersion(version & 0x0F));
    }
    if version >> 4 != DIGEST_ID {
        return Err(CodecError::DigestMismatch {
            found: version >> 4,
            expected: DIGEST_ID,
        });
    }
    let header = Header {
        kind: r.u8()?,
        m: r.u64()?,
        k: r.u32()?,
        s: r.u32()?,
        mode: r.u8()?,
        w: r.u64()?,
        seed: r.u64()?,
    };
    let payload_len = r.u64()?;

    let (width, mode) = match header.kind {
        KIND_SHIFTING => {
            let mode = match header.mode {
                MODE_CIRCULAR => ShiftMode::Circular,
                MODE_WORD => ShiftMode::WordBounded(header.w),
                other => return Err(CodecError::BadMode(other)),
            };
            (1, mode)
        }
        KIND_SPATIAL => {
            if header.mode != MODE_CIRCULAR {
                return Err(CodecError::BadMode(header.mode));
            }
            (cell_bits_for(header.s as usize), ShiftMode::Circular)
        }
        other => return Err(CodecError::BadKind(other)),
    };
    check_common(header.m, header.k as usize, header.s as usize)?;

    let expected = (header.m * width as u64).div_ceil(8);
    if payload_len != expected {
        return Err(CodecError::PayloadLength {
            found: payload_len,
            expected,
        });
    }
    let payload = r.take(expected as usize)?;
    if r.pos != bytes.len() {
        return Err(CodecError::TrailingBytes(bytes.len() - r.pos));
    }
    let cells = PackedCells::from_bytes(header.m as usize, width, payload).ok_or(CodecError::Padding)?;

    let config = HashFamilyConfig::new(header.seed, header.k as usize, header.s as usize, header.m)
        .map_err(FilterError::from)?;
    let family = HashFamily::seeded(config);
    Ok(match header.kind {
        KIND_SHIFTING => Filter::Shifting(ShiftingFilter::from_parts(family, mode, cells)?),
        _ => {
            let s = header.s as usize;
            if let Some((index, value)) = cells.iter().enumerate().find(|(_, v)| *v as usize > s) {
                return Err(CodecError::CellOutOfRange { index, value, s });
            }
            Filter::Spatial(SpatialFilter::from_parts(family, cells)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worked_example as ex;

    fn worked_spatial_image() -> Vec<u8> {
        let mut f = ex::spatial_filter().unwrap();
        f.seal();
        encode_spatial(&f).unwrap()
    }

    #[test]
    fn spatial_worked_example_payload() {
        let img = worked_spatial_image();
        assert_eq!(img.len(), HEADER_LEN + 4);
        assert_eq!(&img[HEADER_LEN..], &[0x01, 0x88, 0xC4, 0x03]);
        assert_eq!(&img[..4], b"MSF1");
        assert_eq!(img[4], 0x11);
        assert_eq!(img[5], 2);
        assert_eq!(u64::from_le_bytes(img[6..14].try_into().unwrap()), 16);
        assert_eq!(u64::from_le_bytes(img[39..47].try_into().unwrap()), 4);
    }

    #[test]
    fn shifting_worked_example_payload() {
        let mut f = ex::shifting_filter().unwrap();
        f.seal();
        let img = encode_shifting(&f).unwrap();
        // bits 0,3,5 | 8,10,12,13,15
        assert_eq!(&img[HEADER_LEN..], &[0b0010_1001, 0b1011_0101]);
    }

    #[test]
    fn unsealed_is_rejected() {
        let f = ex::spatial_filter().unwrap();
        assert_eq!(encode_spatial(&f), Err(CodecError::Unsealed));
    }

    #[test]
    fn decode_errors_are_distinct() {
        let img = worked_spatial_image();

        let mut bad = img.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(CodecError::BadMagic(_))));

        let mut bad = img.clone();
        bad[4] = (DIGEST_ID << 4) | 7;
        assert_eq!(decode(&bad).unwrap_err(), CodecError::UnsupportedVersion(7));

        let mut bad = img.clone();
        bad[4] = (9 << 4) | FORMAT_VERSION;
        assert_eq!(
            decode(&bad).unwrap_err(),
            CodecError::DigestMismatch {
                found: 9,
                expected: DIGEST_ID
            }
        );

        let mut bad = img.clone();
        bad[5] = 9;
        assert_eq!(decode(&bad).unwrap_err(), CodecError::BadKind(9));

        assert!(matches!(
            decode(&img[..img.len() - 1]),
            Err(CodecError::Truncated { .. })
        ));
        assert!(matches!(decode(&img[..10]), Err(CodecError::Truncated { .. })));

        let mut bad = img.clone();
        bad.push(0);
        assert_eq!(decode(&bad).unwrap_err(), CodecError::TrailingBytes(1));

        let mut bad = img.clone();
        bad[39] = 5;
        assert!(matches!(decode(&bad), Err(CodecError::PayloadLength { found: 5, .. })));

        // s = 2 leaves label 3 in cells 11 and 12 out of range
        let mut bad = img.clone();
        bad[18] = 2;
        assert_eq!(
            decode(&bad).unwrap_err(),
            CodecError::CellOutOfRange {
                index: 11,
                value: 3,
                s: 2
            }
        );

        let mut bad = img.clone();
        bad[14] = 0; // k = 0
        assert!(matches!(decode(&bad), Err(CodecError::Header(_))));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let img = worked_spatial_image();
        let f = decode(&img).unwrap();
        assert_eq!(encode(&f).unwrap(), img);

        let mut sh = ShiftingFilter::new(1 << 10, 3, 5, ShiftMode::WordBounded(64), 99).unwrap();
        for i in 0u32..100 {
            sh.insert(&i.to_le_bytes(), 1 + i as usize % 5).unwrap();
        }
        sh.seal();
        let img = encode_shifting(&sh).unwrap();
        let back = decode(&img).unwrap();
        assert_eq!(encode(&back).unwrap(), img);
        match back {
            Filter::Shifting(b) => {
                assert_eq!(b.mode(), ShiftMode::WordBounded(64));
                for i in 0u32..500 {
                    let e = (i * 7919).to_le_bytes();
                    assert_eq!(b.query(&e).unwrap(), sh.query(&e).unwrap());
                }
            }
            _ => panic!("kind changed"),
        }
    }
}
