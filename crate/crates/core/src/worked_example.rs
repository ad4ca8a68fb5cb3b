//! A 16-cell, two-hash, three-set walkthrough with hand-scripted digests.
//!
//! Sets: `{d1, d2}` (label 1), `{d3}` (label 2), `{d4}` (label 3). `nd1` and
//! `nd2` are non-members. Each filter kind gets its own digest table; both
//! tables are chosen so the queries exhibit every outcome: a true positive
//! (`d1`), a true negative (`nd1`), a false positive (`nd2`) and an
//! inter-set error (`d2`).
//!
//! Final shifting-filter bits: `1001010010101101`.
//! Final spatial-filter cells: `[1,0,0,0,0,2,0,2,0,1,0,3,3,0,0,0]`.

use crate::filter::FilterError;
use crate::hash::{HashFamily, HashFamilyConfig, ScriptedTable};
use crate::sbf::SpatialFilter;
use crate::shbf::{ShiftMode, ShiftingFilter};

pub const D1: &[u8] = b"d1";
pub const D2: &[u8] = b"d2";
pub const D3: &[u8] = b"d3";
pub const D4: &[u8] = b"d4";
pub const ND1: &[u8] = b"nd1";
pub const ND2: &[u8] = b"nd2";

pub const M: u64 = 16;
pub const K: usize = 2;
pub const S: usize = 3;

/// Members with their labels, in insertion order.
pub const SHIFTING_MEMBERS: [(&[u8], usize); 4] = [(D1, 1), (D2, 1), (D3, 2), (D4, 3)];
pub const SPATIAL_MEMBERS: [(&[u8], usize); 4] = SHIFTING_MEMBERS;

fn config() -> HashFamilyConfig {
    HashFamilyConfig {
        seed: 0,
        k: K,
        s: S,
        m: M,
    }
}

/// `(element, [h1, h2], [offset for set 2, offset for set 3])`
const SHIFTING_SCRIPT: [(&[u8], [u64; 2], [u64; 2]); 6] = [
    (D1, [0, 3], [2, 3]),
    (D2, [5, 12], [3, 2]),
    (D3, [5, 7], [3, 1]),
    (D4, [11, 13], [1, 2]),
    (ND1, [2, 8], [1, 3]),
    (ND2, [9, 12], [2, 3]),
];

const SPATIAL_SCRIPT: [(&[u8], [u64; 2]); 6] = [
    (D1, [0, 9]),
    (D2, [5, 12]),
    (D3, [5, 7]),
    (D4, [11, 12]),
    (ND1, [2, 9]),
    (ND2, [0, 12]),
];

pub fn shifting_table() -> ScriptedTable {
    SHIFTING_SCRIPT.iter().fold(ScriptedTable::new(), |t, (e, idx, off)| {
        t.with_index(1, e, idx[0])
            .with_index(2, e, idx[1])
            .with_offset(2, e, off[0])
            .with_offset(3, e, off[1])
    })
}

pub fn spatial_table() -> ScriptedTable {
    SPATIAL_SCRIPT.iter().fold(ScriptedTable::new(), |t, (e, idx)| {
        t.with_index(1, e, idx[0]).with_index(2, e, idx[1])
    })
}

pub fn shifting_family() -> HashFamily {
    HashFamily::scripted(config(), shifting_table())
}

pub fn spatial_family() -> HashFamily {
    HashFamily::scripted(config(), spatial_table())
}

/// Populated, unsealed shifting filter.
pub fn shifting_filter() -> Result<ShiftingFilter, FilterError> {
    let mut f = ShiftingFilter::with_family(shifting_family(), ShiftMode::Circular)?;
    for (e, l) in SHIFTING_MEMBERS {
        f.insert(e, l)?;
    }
    Ok(f)
}

/// Populated, unsealed spatial filter.
pub fn spatial_filter() -> Result<SpatialFilter, FilterError> {
    let mut f = SpatialFilter::with_family(spatial_family())?;
    for (e, l) in SPATIAL_MEMBERS {
        f.insert(e, l)?;
    }
    Ok(f)
}

/// Script-file rendering of a table, readable by [`ScriptedTable::parse`].
pub fn shifting_script_text() -> String {
    let mut out = String::new();
    for (e, idx, off) in SHIFTING_SCRIPT {
        let h = hex::encode(e);
        out += &format!("index 1 {h} {}\nindex 2 {h} {}\n", idx[0], idx[1]);
        out += &format!("offset 2 {h} {}\noffset 3 {h} {}\n", off[0], off[1]);
    }
    out
}

pub fn spatial_script_text() -> String {
    let mut out = String::new();
    for (e, idx) in SPATIAL_SCRIPT {
        let h = hex::encode(e);
        out += &format!("index 1 {h} {}\nindex 2 {h} {}\n", idx[0], idx[1]);
    }
    out
}
