//! Multi-set membership filters.
//!
//! Two structures answer "which of `s` disjoint sets holds this element?"
//! from a single bit array:
//!
//! * [`ShiftingFilter`] stores each element at its `k` hashed positions,
//!   shifted by a per-set offset. Queries may return several candidate sets.
//! * [`SpatialFilter`] stores the set label itself in small cells. Queries
//!   return a single label, possibly a wrong one.
//!
//! The crate also carries closed-form error predictions ([`analytics`]),
//! deterministic workload generators ([`workload`]), a binary image format
//! ([`codec`]) and the comparison experiments ([`experiments`]).

pub mod analytics;
pub mod bits;
pub mod cli;
pub mod codec;
pub mod experiments;
pub mod filter;
pub mod hash;
pub mod sbf;
pub mod shbf;
pub mod worked_example;
pub mod workload;

pub use filter::{AssociationFilter, CandidateSet, Filter, FilterError, FilterKind, QueryOutcome};
pub use hash::{HashFamily, HashFamilyConfig, OffsetBound, ScriptedTable};
pub use sbf::SpatialFilter;
pub use shbf::{ShiftMode, ShiftingFilter};
