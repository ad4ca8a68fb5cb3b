//! Seeded test corpora: uniform and randomly split member sets plus a
//! disjoint pool of non-elements.
//!
//! Text format, one record per line: `hex(element)<TAB>label`, with the tab
//! and label omitted for non-elements.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Byte length of generated elements.
pub const ELEMENT_LEN: usize = 16;

const MEMBER_STREAM: u64 = 0;
const NON_ELEMENT_STREAM: u64 = 1;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("label {label} outside 1..={s}")]
    LabelOutOfRange { label: usize, s: usize },
    #[error("element {0} appears more than once")]
    Duplicate(String),
    #[error("invalid workload parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub entries: Vec<(Vec<u8>, usize)>,
    pub s: usize,
    pub per_set_counts: Vec<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonElementSet {
    pub elements: Vec<Vec<u8>>,
    pub seed: u64,
}

/// One parsed line of the text format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub element: Vec<u8>,
    pub label: Option<usize>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn unique_elements(rng: &mut ChaCha8Rng, count: usize, exclude: &HashSet<&[u8]>) -> Vec<Vec<u8>> {
    let mut seen: HashSet<[u8; ELEMENT_LEN]> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let e: [u8; ELEMENT_LEN] = rng.random();
        if exclude.contains(&e[..]) || !seen.insert(e) {
            continue;
        }
        out.push(e.to_vec());
    }
    out
}

impl Dataset {
    /// Builds a dataset from explicit entries, validating labels and uniqueness.
    pub fn from_entries(entries: Vec<(Vec<u8>, usize)>, s: usize, seed: u64) -> Result<Self, WorkloadError> {
        if s == 0 {
            return Err(WorkloadError::InvalidParams("s must be at least 1".into()));
        }
        let mut counts = vec![0u64; s];
        let mut seen = HashSet::with_capacity(entries.len());
        for (e, label) in &entries {
            if *label == 0 || *label > s {
                return Err(WorkloadError::LabelOutOfRange { label: *label, s });
            }
            if !seen.insert(e.as_slice()) {
                return Err(WorkloadError::Duplicate(hex::encode(e)));
            }
            counts[label - 1] += 1;
        }
        Ok(Self {
            entries,
            s,
            per_set_counts: counts,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn element_set(&self) -> HashSet<&[u8]> {
        self.entries.iter().map(|(e, _)| e.as_slice()).collect()
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (e, l) in &self.entries {
            writeln!(w, "{}\t{}", hex::encode(e), l)?;
        }
        Ok(())
    }

    /// Reads a member file. With `s = None` the set count is the largest label seen.
    pub fn read_text<R: BufRead>(r: R, s: Option<usize>) -> Result<Self, WorkloadError> {
        let mut entries = Vec::new();
        for (i, rec) in read_records(r)?.into_iter().enumerate() {
            let label = rec.label.ok_or_else(|| WorkloadError::Parse {
                line: i + 1,
                reason: "member record without a label".into(),
            })?;
            entries.push((rec.element, label));
        }
        let s = s.unwrap_or_else(|| entries.iter().map(|(_, l)| *l).max().unwrap_or(1));
        Self::from_entries(entries, s, 0)
    }
}

impl NonElementSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.elements {
            writeln!(w, "{}", hex::encode(e))?;
        }
        Ok(())
    }
}

/// `s` sets of exactly `per_set` elements, labels in ascending order.
pub fn gen_uniform(s: usize, per_set: usize, seed: u64) -> Dataset {
    assert!(s >= 1 && per_set >= 1, "gen_uniform needs s >= 1 and per_set >= 1");
    let mut rng = rng_for(seed, MEMBER_STREAM);
    let elements = unique_elements(&mut rng, s * per_set, &HashSet::new());
    let entries = elements
        .into_iter()
        .enumerate()
        .map(|(i, e)| (e, i / per_set + 1))
        .collect();
    Dataset {
        entries,
        s,
        per_set_counts: vec![per_set as u64; s],
        seed,
    }
}

/// Whether a uniform split of `total` elements over `s` sets leaves every
/// set non-empty with probability at least 1/2 (union bound), so that
/// [`gen_random`] needs at most two draws on average.
pub fn random_split_feasible(s: usize, total: usize) -> bool {
    if s == 0 || total < s {
        return false;
    }
    let miss_one = (1.0 - 1.0 / s as f64).powf(total as f64);
    s as f64 * miss_one <= 0.5
}

/// `total` elements, each assigned a uniformly random label; splits leaving
/// any set empty are redrawn. Entries are sorted by label.
///
/// Panics unless [`random_split_feasible`] holds.
pub fn gen_random(s: usize, total: usize, seed: u64) -> Dataset {
    assert!(
        random_split_feasible(s, total),
        "gen_random({s}, {total}): too few elements for every set to be drawn"
    );
    let mut rng = rng_for(seed, MEMBER_STREAM);
    let elements = unique_elements(&mut rng, total, &HashSet::new());
    let labels = loop {
        let labels: Vec<usize> = (0..total).map(|_| rng.random_range(1..=s)).collect();
        let mut counts = vec![0u64; s];
        for l in &labels {
            counts[l - 1] += 1;
        }
        if counts.iter().all(|&c| c > 0) {
            break labels;
        }
    };
    let mut entries: Vec<(Vec<u8>, usize)> = elements.into_iter().zip(labels).collect();
    entries.sort_by_key(|(_, l)| *l);
    let mut per_set_counts = vec![0u64; s];
    for (_, l) in &entries {
        per_set_counts[l - 1] += 1;
    }
    Dataset {
        entries,
        s,
        per_set_counts,
        seed,
    }
}

/// `count` unique elements none of which occur in `exclude`.
pub fn gen_non_elements(count: usize, seed: u64, exclude: &Dataset) -> NonElementSet {
    assert!(count >= 1, "gen_non_elements needs count >= 1");
    let mut rng = rng_for(seed, NON_ELEMENT_STREAM);
    let elements = unique_elements(&mut rng, count, &exclude.element_set());
    NonElementSet { elements, seed }
}

/// Parses the line format; blank lines are skipped.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<Record>, WorkloadError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| WorkloadError::Parse { line: i + 1, reason };
        let (hex_part, label) = match line.split_once('\t') {
            Some((h, l)) => {
                let label: usize = l.trim().parse().map_err(|_| bad(format!("bad label `{l}`")))?;
                (h, Some(label))
            }
            None => (line, None),
        };
        let element = hex::decode(hex_part.trim()).map_err(|e| bad(format!("bad hex: {e}")))?;
        if element.is_empty() {
            return Err(bad("empty element".into()));
        }
        out.push(Record { element, label });
    }
    Ok(out)
}
