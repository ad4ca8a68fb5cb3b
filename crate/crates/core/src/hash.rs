//! Seeded hash family shared by both filters.
//!
//! A family exposes `k` index functions (ordinals `1..=k`) and `s - 1` offset
//! functions. Offset functions live on ordinals `k + 1 ..= k + s - 1`, so the
//! two families never share a digest stream.
//!
//! Cell indices are 0-based: the filters address cells `0..m`.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64_with_seed;

/// Identifier of the digest algorithm backing seeded families. Stored in
/// filter images so a decoder built on a different digest fails loudly.
pub const DIGEST_ID: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("invalid hash family parameters: {0}")]
    InvalidConfig(String),
    #[error("index hash ordinal {j} outside 1..={k}")]
    IndexOutOfRange { j: usize, k: usize },
    #[error("set label {label} outside 1..={s}")]
    LabelOutOfRange { label: usize, s: usize },
    #[error("offset bound must be at least 1")]
    ZeroBound,
    #[error("elements must be non-empty byte strings")]
    EmptyElement,
    #[error("scripted table has no entry for {function} on element {element}")]
    MissingScript { function: String, element: String },
    #[error("malformed script line {line}: {reason}")]
    ScriptSyntax { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashFamilyConfig {
    pub seed: u64,
    pub k: usize,
    pub s: usize,
    pub m: u64,
}

impl HashFamilyConfig {
    pub fn new(seed: u64, k: usize, s: usize, m: u64) -> Result<Self, HashError> {
        if k == 0 {
            return Err(HashError::InvalidConfig("k must be at least 1".into()));
        }
        if s == 0 {
            return Err(HashError::InvalidConfig("s must be at least 1".into()));
        }
        if m < 2 {
            return Err(HashError::InvalidConfig("m must be at least 2".into()));
        }
        if !m.is_power_of_two() {
            // Reduction by modulo is only bias-free for powers of two.
            log::warn!("m = {m} is not a power of two; cell indices carry a modulo bias");
        }
        Ok(Self { seed, k, s, m })
    }

    /// Total number of distinct hash functions: `k` index plus `s - 1` offset.
    pub fn function_count(&self) -> usize {
        self.k + self.s - 1
    }
}

/// Range limit applied to offset digests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffsetBound {
    /// Offsets span the whole filter, `[0, m)`.
    Unbounded,
    /// Offsets are limited to `[0, w)`.
    Word(u64),
}

/// Hand-written digests for tests and worked examples.
///
/// Values are taken verbatim and then reduced like seeded digests
/// (mod `m` for indices, mod the bound for offsets).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScriptedTable {
    index: HashMap<(usize, Vec<u8>), u64>,
    offset: HashMap<(usize, Vec<u8>), u64>,
}

impl ScriptedTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scripts index function `j` (1-based) on `element`.
    pub fn with_index(mut self, j: usize, element: impl AsRef<[u8]>, cell: u64) -> Self {
        self.index.insert((j, element.as_ref().to_vec()), cell);
        self
    }

    /// Scripts the offset used by set `label` (2..=s) on `element`.
    pub fn with_offset(mut self, label: usize, element: impl AsRef<[u8]>, offset: u64) -> Self {
        self.offset.insert((label, element.as_ref().to_vec()), offset);
        self
    }

    /// Parses the line-oriented script format:
    ///
    /// ```text
    /// # comment
    /// index  <j>     <hex element> <cell>
    /// offset <label> <hex element> <offset>
    /// ```
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, HashError> {
        let mut table = Self::new();
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|e| HashError::ScriptSyntax {
                line: lineno,
                reason: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |reason: &str| HashError::ScriptSyntax {
                line: lineno,
                reason: reason.to_string(),
            };
            if fields.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let ordinal: usize = fields[1].parse().map_err(|_| bad("bad ordinal"))?;
            let element = hex::decode(fields[2]).map_err(|_| bad("bad hex element"))?;
            let value: u64 = fields[3].parse().map_err(|_| bad("bad value"))?;
            table = match fields[0] {
                "index" => table.with_index(ordinal, element, value),
                "offset" => table.with_offset(ordinal, element, value),
                _ => return Err(bad("kind must be `index` or `offset`")),
            };
        }
        Ok(table)
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Mode {
    Seeded { ordinal_seeds: Vec<u64> },
    Scripted(ScriptedTable),
}

/// Source of the index and offset digests. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct HashFamily {
    config: HashFamilyConfig,
    mode: Mode,
}

impl fmt::Debug for HashFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Seeded { .. } => "seeded",
            Mode::Scripted(_) => "scripted",
        };
        f.debug_struct("HashFamily")
            .field("config", &self.config)
            .field("mode", &mode)
            .finish()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn ordinal_seed(seed: u64, ordinal: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ (ordinal as u64).wrapping_mul(0xD605_BBB5_8C8A_BBFD))
}

impl HashFamily {
    pub fn seeded(config: HashFamilyConfig) -> Self {
        // ordinal 0 is unused so that ordinals index the vector directly
        let ordinal_seeds = (0..=config.function_count())
            .map(|o| ordinal_seed(config.seed, o))
            .collect();
        Self {
            config,
            mode: Mode::Seeded { ordinal_seeds },
        }
    }

    pub fn scripted(config: HashFamilyConfig, table: ScriptedTable) -> Self {
        Self {
            config,
            mode: Mode::Scripted(table),
        }
    }

    pub fn config(&self) -> &HashFamilyConfig {
        &self.config
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self.mode, Mode::Scripted(_))
    }

    /// Cell targeted by index function `j` (1-based) for `element`, in `[0, m)`.
    pub fn cell_index(&self, j: usize, element: &[u8]) -> Result<u64, HashError> {
        if j == 0 || j > self.config.k {
            return Err(HashError::IndexOutOfRange { j, k: self.config.k });
        }
        if element.is_empty() {
            return Err(HashError::EmptyElement);
        }
        let raw = match &self.mode {
            Mode::Seeded { ordinal_seeds } => xxh3_64_with_seed(element, ordinal_seeds[j]),
            Mode::Scripted(table) => {
                *table
                    .index
                    .get(&(j, element.to_vec()))
                    .ok_or_else(|| HashError::MissingScript {
                        function: format!("index hash {j}"),
                        element: hex::encode(element),
                    })?
            }
        };
        Ok(raw % self.config.m)
    }

    /// Shift applied to probes of set `label` for `element`.
    ///
    /// Set 1 is never shifted. Set `label > 1` uses offset function
    /// `label - 1`, reduced into `[0, w)` or `[0, m)`.
    pub fn offset(&self, label: usize, element: &[u8], bound: OffsetBound) -> Result<u64, HashError> {
        if label == 0 || label > self.config.s {
            return Err(HashError::LabelOutOfRange {
                label,
                s: self.config.s,
            });
        }
        let modulus = match bound {
            OffsetBound::Unbounded => self.config.m,
            OffsetBound::Word(0) => return Err(HashError::ZeroBound),
            OffsetBound::Word(w) => w,
        };
        if label == 1 {
            return Ok(0);
        }
        if element.is_empty() {
            return Err(HashError::EmptyElement);
        }
        let raw = match &self.mode {
            Mode::Seeded { ordinal_seeds } => xxh3_64_with_seed(element, ordinal_seeds[self.config.k + label - 1]),
            Mode::Scripted(table) => {
                *table
                    .offset
                    .get(&(label, element.to_vec()))
                    .ok_or_else(|| HashError::MissingScript {
                        function: format!("offset hash {}", label - 1),
                        element: hex::encode(element),
                    })?
            }
        };
        Ok(raw % modulus)
    }
}
