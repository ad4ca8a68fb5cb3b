//! Comparative experiments: word-size sweep, false-positive sweeps and
//! curves, inter-set error tallies and per-query cost counters.
//!
//! Every run is a pure function of its configuration and seed. Each report
//! carries the analytic prediction next to the measurement, and any
//! measurement outside its tolerance band is recorded in `flags`.

use std::io::Write;
use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::{self, cost_model, AnalyticsError, FilterParams, OutcomeTally};
use crate::filter::{AssociationFilter, Filter, FilterError, FilterKind};
use crate::sbf::{cell_bits_for, SpatialFilter};
use crate::shbf::{ShiftMode, ShiftingFilter};
use crate::workload::{self, Dataset, NonElementSet};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_SETS: usize = 255;
pub const DEFAULT_PER_SET: usize = 256;
pub const DEFAULT_TOTAL: usize = DEFAULT_SETS * DEFAULT_PER_SET;
pub const DEFAULT_NON_ELEMENTS: usize = 500_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall time. Off by default so reports stay byte-reproducible.
    pub timing: bool,
}

/// One filter configuration under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub m: u64,
    pub k: usize,
    pub mode: ShiftMode,
}

impl FilterSpec {
    pub fn shifting(m: u64, k: usize) -> Self {
        Self {
            kind: FilterKind::Shifting,
            m,
            k,
            mode: ShiftMode::Circular,
        }
    }

    pub fn word_bounded(m: u64, k: usize, w: u64) -> Self {
        Self {
            kind: FilterKind::Shifting,
            m,
            k,
            mode: ShiftMode::WordBounded(w),
        }
    }

    pub fn spatial(m: u64, k: usize) -> Self {
        Self {
            kind: FilterKind::Spatial,
            m,
            k,
            mode: ShiftMode::Circular,
        }
    }

    pub fn bit_len(&self, s: usize) -> u64 {
        match self.kind {
            FilterKind::Shifting => self.m,
            FilterKind::Spatial => self.m * cell_bits_for(s) as u64,
        }
    }

    /// Empty filter for `s` sets.
    pub fn build(&self, s: usize, seed: u64) -> Result<Filter, FilterError> {
        Ok(match self.kind {
            FilterKind::Shifting => ShiftingFilter::new(self.m, self.k, s, self.mode, seed)?.into(),
            FilterKind::Spatial => SpatialFilter::new(self.m, self.k, s, seed)?.into(),
        })
    }

    /// Sealed filter holding every entry of `dataset`.
    pub fn populate(&self, dataset: &Dataset, seed: u64) -> Result<Filter, FilterError> {
        let mut f = self.build(dataset.s, seed)?;
        for (e, l) in &dataset.entries {
            f.insert(e, *l)?;
        }
        f.seal();
        Ok(f)
    }
}

/// Acceptance band for an observed event count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceCheck {
    pub observed: u64,
    pub expected: f64,
    pub low: f64,
    pub high: f64,
    pub rule: ToleranceRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceRule {
    /// Expected count >= 25: expected +- 3 binomial standard deviations.
    ThreeSigma,
    /// Expected count < 25: central 99% interval of a Poisson law.
    Poisson99,
}

impl ToleranceCheck {
    pub fn passed(&self) -> bool {
        (self.low..=self.high).contains(&(self.observed as f64))
    }
}

impl std::fmt::Display for ToleranceCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rule = match self.rule {
            ToleranceRule::ThreeSigma => "3 sigma",
            ToleranceRule::Poisson99 => "Poisson 99%",
        };
        write!(
            f,
            "observed {} vs expected {:.4} ({rule} band [{:.4}, {:.4}])",
            self.observed, self.expected, self.low, self.high
        )
    }
}

/// Smallest `x` with `P(X <= x) >= q` for `X ~ Poisson(lambda)`.
fn poisson_quantile(lambda: f64, q: f64) -> u64 {
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    let mut x = 0u64;
    while cdf < q {
        x += 1;
        pmf *= lambda / x as f64;
        cdf += pmf;
    }
    x
}

/// Checks `observed` successes out of `trials` against success probability `p`.
pub fn check_count(observed: u64, trials: u64, p: f64) -> ToleranceCheck {
    let expected = trials as f64 * p;
    if expected >= 25.0 {
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        ToleranceCheck {
            observed,
            expected,
            low: expected - 3.0 * sigma,
            high: expected + 3.0 * sigma,
            rule: ToleranceRule::ThreeSigma,
        }
    } else {
        ToleranceCheck {
            observed,
            expected,
            low: poisson_quantile(expected, 0.005) as f64,
            high: poisson_quantile(expected, 0.995) as f64,
            rule: ToleranceRule::Poisson99,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub kind: FilterKind,
    pub m: u64,
    pub l_bits: u64,
    pub k: usize,
    pub s: usize,
    pub n: Option<u64>,
    pub w: Option<u64>,
    pub seed: u64,
    pub queries: Option<u64>,
    pub tally: Option<OutcomeTally>,
    pub fpp_emp: Option<f64>,
    pub fpp_ana: Option<f64>,
    pub isep_emp: Option<f64>,
    pub isep_ana: Option<f64>,
    pub entropy: Option<f64>,
    pub hashes_per_query: Option<f64>,
    pub cells_read_total: Option<u64>,
    pub elapsed_ms: Option<f64>,
    pub flags: Vec<String>,
}

impl ExperimentReport {
    fn new(experiment: &str, spec: &FilterSpec, s: usize, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            kind: spec.kind,
            m: spec.m,
            l_bits: spec.bit_len(s),
            k: spec.k,
            s,
            n: None,
            w: spec.mode.word(),
            seed,
            queries: None,
            tally: None,
            fpp_emp: None,
            fpp_ana: None,
            isep_emp: None,
            isep_ana: None,
            entropy: None,
            hashes_per_query: None,
            cells_read_total: None,
            elapsed_ms: None,
            flags: Vec::new(),
        }
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    /// Members whose candidate set held more than one label.
    pub fn multi_matches(&self) -> u64 {
        self.tally.as_ref().map_or(0, |t| t.multi_matches())
    }

    fn flag_if_outside(&mut self, what: &str, check: ToleranceCheck) {
        if !check.passed() {
            self.flags.push(format!("{what}: {check}"));
        }
    }
}

/// Queries members then non-members in parallel.
fn tally_queries(
    filter: &Filter,
    members: &[(Vec<u8>, usize)],
    non_members: &[Vec<u8>],
) -> Result<OutcomeTally, FilterError> {
    let member_tally = members
        .par_iter()
        .try_fold(OutcomeTally::default, |mut t, (e, l)| {
            t.record(&filter.classify(e, *l)?);
            Ok::<_, FilterError>(t)
        })
        .try_reduce(OutcomeTally::default, |a, b| Ok(a.merge(&b)))?;
    let non_tally = non_members
        .par_iter()
        .try_fold(OutcomeTally::default, |mut t, e| {
            t.record(&filter.classify(e, 0)?);
            Ok::<_, FilterError>(t)
        })
        .try_reduce(OutcomeTally::default, |a, b| Ok(a.merge(&b)))?;
    Ok(member_tally.merge(&non_tally))
}

fn elapsed(start: Instant, opts: RunOptions) -> Option<f64> {
    opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3)
}

/// Offset range limits for the word-size study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordSize {
    Bits(u64),
    Unbounded,
}

pub fn default_word_sizes() -> Vec<WordSize> {
    let mut v: Vec<WordSize> = [10, 12, 14, 16, 18].iter().map(|&e| WordSize::Bits(1 << e)).collect();
    v.push(WordSize::Unbounded);
    v
}

/// Member-query tallies of a shifting filter under each offset range limit.
pub fn run_word_size_sweep(
    m: u64,
    k: usize,
    words: &[WordSize],
    dataset: &Dataset,
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<ExperimentReport>, ExperimentError> {
    for w in words {
        if let WordSize::Bits(w) = *w {
            if w == 0 || w > m {
                return Err(ExperimentError::InvalidConfig(format!("word size {w} outside 1..={m}")));
            }
        }
    }
    let n = dataset.len() as u64;
    words
        .iter()
        .map(|w| {
            let start = Instant::now();
            let spec = match *w {
                WordSize::Bits(w) => FilterSpec::word_bounded(m, k, w),
                WordSize::Unbounded => FilterSpec::shifting(m, k),
            };
            let filter = spec.populate(dataset, seed)?;
            let tally = tally_queries(&filter, &dataset.entries, &[])?;
            let mut r = ExperimentReport::new("word-sweep", &spec, dataset.s, seed);
            r.n = Some(n);
            r.queries = Some(n);
            r.isep_emp = Some(tally.multi_matches() as f64 / n as f64);
            r.entropy = Some(analytics::entropy(&tally)?);
            if *w == WordSize::Unbounded {
                let p = FilterParams::new(m, k as u32, dataset.s as u32, n)?;
                let isep = analytics::shbf_isep(&p)?;
                r.isep_ana = Some(isep);
                r.flag_if_outside("multi-match count", check_count(tally.multi_matches(), n, isep));
            }
            r.tally = Some(tally);
            r.elapsed_ms = elapsed(start, opts);
            Ok(r)
        })
        .collect()
}

pub fn default_fpp_lengths() -> Vec<u64> {
    (17..=24).map(|e| 1u64 << e).collect()
}

/// Analytic false-positive probability of a populated filter.
fn fpp_prediction(kind: FilterKind, m: u64, k: usize, s: usize, n: u64) -> Result<f64, AnalyticsError> {
    let p = FilterParams::new(m, k as u32, s as u32, n)?;
    match kind {
        FilterKind::Shifting => analytics::shbf_fpp_overall(&p),
        FilterKind::Spatial => analytics::sbf_fpp(&p),
    }
}

/// Empirical false-positive rate over `non_elements` for every
/// `(kind, m)` pair, next to its analytic value.
pub fn run_fpp_sweep(
    kinds: &[FilterKind],
    lengths: &[u64],
    dataset: &Dataset,
    non_elements: &NonElementSet,
    k: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<ExperimentReport>, ExperimentError> {
    let n = dataset.len() as u64;
    let queries = non_elements.len() as u64;
    let mut out = Vec::new();
    for &kind in kinds {
        for &m in lengths {
            let start = Instant::now();
            let spec = match kind {
                FilterKind::Shifting => FilterSpec::shifting(m, k),
                FilterKind::Spatial => FilterSpec::spatial(m, k),
            };
            let filter = spec.populate(dataset, seed)?;
            let tally = tally_queries(&filter, &[], &non_elements.elements)?;
            let ana = fpp_prediction(kind, m, k, dataset.s, n)?;
            let mut r = ExperimentReport::new("fpp-sweep", &spec, dataset.s, seed);
            r.n = Some(n);
            r.queries = Some(queries);
            r.fpp_emp = Some(tally.fp as f64 / queries as f64);
            r.fpp_ana = Some(ana);
            r.flag_if_outside("false positives", check_count(tally.fp, queries, ana));
            r.tally = Some(tally);
            r.elapsed_ms = elapsed(start, opts);
            out.push(r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub kind: FilterKind,
    pub m: u64,
    pub s: u32,
    pub fpp: f64,
}

/// Analytic false-positive probability of both filters as the set count grows.
pub fn run_fpp_curves(
    ms: &[u64],
    k: usize,
    n: u64,
    s_range: RangeInclusive<u32>,
) -> Result<Vec<CurvePoint>, ExperimentError> {
    let mut out = Vec::new();
    for &m in ms {
        for kind in [FilterKind::Shifting, FilterKind::Spatial] {
            for s in s_range.clone() {
                out.push(CurvePoint {
                    kind,
                    m,
                    s,
                    fpp: fpp_prediction(kind, m, k, s as usize, n)?,
                });
            }
        }
    }
    Ok(out)
}

pub fn curve_reports(points: &[CurvePoint], k: usize, n: u64) -> Vec<ExperimentReport> {
    points
        .iter()
        .map(|p| {
            let spec = FilterSpec {
                kind: p.kind,
                m: p.m,
                k,
                mode: ShiftMode::Circular,
            };
            let mut r = ExperimentReport::new("fpp-curves", &spec, p.s as usize, 0);
            r.n = Some(n);
            r.fpp_ana = Some(p.fpp);
            r
        })
        .collect()
}

/// The three filter configurations of the inter-set comparison: a spatial
/// filter with `2^20` cells and shifting filters matching its cell count and
/// its bit length.
pub fn default_interset_specs(k: usize) -> Vec<FilterSpec> {
    vec![
        FilterSpec::spatial(1 << 20, k),
        FilterSpec::shifting(1 << 20, k),
        FilterSpec::shifting(1 << 23, k),
    ]
}

/// Member-query outcome tallies (correct, wrong, ambiguous by cardinality).
pub fn run_interset_experiment(
    name: &str,
    dataset: &Dataset,
    specs: &[FilterSpec],
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<ExperimentReport>, ExperimentError> {
    let n = dataset.len() as u64;
    specs
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let filter = spec.populate(dataset, seed)?;
            let tally = tally_queries(&filter, &dataset.entries, &[])?;
            let mut r = ExperimentReport::new(name, spec, dataset.s, seed);
            r.n = Some(n);
            r.queries = Some(n);
            r.entropy = Some(analytics::entropy(&tally)?);
            match spec.kind {
                FilterKind::Shifting => {
                    let p = FilterParams::new(spec.m, spec.k as u32, dataset.s as u32, n)?;
                    let isep = analytics::shbf_isep(&p)?;
                    r.isep_emp = Some(tally.multi_matches() as f64 / n as f64);
                    r.isep_ana = Some(isep);
                    r.flag_if_outside("multi-match count", check_count(tally.multi_matches(), n, isep));
                }
                FilterKind::Spatial => {
                    let p = FilterParams::with_counts(spec.m, spec.k as u32, dataset.per_set_counts.clone())?;
                    let isep = analytics::sbf_isep_overall(&p)?;
                    r.isep_emp = Some(tally.e as f64 / n as f64);
                    r.isep_ana = Some(isep);
                    r.flag_if_outside("inter-set errors", check_count(tally.e, n, isep));
                }
            }
            r.tally = Some(tally);
            r.elapsed_ms = elapsed(start, opts);
            Ok(r)
        })
        .collect()
}

/// Cost grid: every `s` in the list for both kinds at `k` hashes and `m` cells.
pub fn default_cost_grid(m: u64, k: usize) -> Vec<(FilterSpec, usize)> {
    let sets = [1usize, 2, 4, 8, 16, 32, 64, 128, 255];
    let mut grid = Vec::new();
    for kind in [FilterKind::Shifting, FilterKind::Spatial] {
        for &s in &sets {
            let spec = match kind {
                FilterKind::Shifting => FilterSpec::shifting(m, k),
                FilterKind::Spatial => FilterSpec::spatial(m, k),
            };
            grid.push((spec, s));
        }
    }
    grid
}

/// Elements per set stored in cost-experiment filters.
const COST_PER_SET: usize = 64;

/// Measures hash evaluations, lookups and cell reads per query, half on
/// members and half on non-members, and checks each query against the
/// cost model.
pub fn run_cost_experiment(
    grid: &[(FilterSpec, usize)],
    query_count: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Vec<ExperimentReport>, ExperimentError> {
    if query_count == 0 {
        return Err(ExperimentError::InvalidConfig("query count must be positive".into()));
    }
    grid.iter()
        .map(|(spec, s)| {
            let start = Instant::now();
            let s = *s;
            let dataset = workload::gen_uniform(s, COST_PER_SET, seed);
            let non = workload::gen_non_elements(query_count / 2 + 1, seed, &dataset);
            let filter = spec.populate(&dataset, seed)?;
            let model = cost_model(spec.kind, spec.k as u64, s as u64);

            let counters = filter.counters();
            counters.reset();
            let mut tally = OutcomeTally::default();
            let mut violations = 0u64;
            for q in 0..query_count {
                let before = counters.snapshot();
                let outcome = if q % 2 == 0 {
                    let (e, l) = &dataset.entries[(q / 2) % dataset.len()];
                    filter.classify(e, *l)?
                } else {
                    filter.classify(&non.elements[q / 2], 0)?
                };
                tally.record(&outcome);
                let d = counters.snapshot().since(&before);
                if d.hash_evaluations != model.hashes_per_query
                    || d.lookups != model.lookups_per_query
                    || !(model.cells_read_min..=model.cells_read_max).contains(&d.cells_read)
                {
                    violations += 1;
                }
            }
            let total = counters.snapshot();

            let mut r = ExperimentReport::new("cost", spec, s, seed);
            r.n = Some(dataset.len() as u64);
            r.queries = Some(query_count as u64);
            r.hashes_per_query = Some(total.hash_evaluations as f64 / query_count as f64);
            r.cells_read_total = Some(total.cells_read);
            if violations > 0 {
                r.flags.push(format!(
                    "{violations} of {query_count} queries departed from the cost model \
                     (hashes {}, lookups {}, cells [{}, {}])",
                    model.hashes_per_query, model.lookups_per_query, model.cells_read_min, model.cells_read_max
                ));
            }
            r.tally = Some(tally);
            r.elapsed_ms = elapsed(start, opts);
            Ok(r)
        })
        .collect()
}

pub const CSV_HEADER: &str = "experiment,filter,m,l_bits,k,s,n,w,seed,queries,c,e,u2,u3,u4,u5plus,fp,tn,fpp_emp,fpp_ana,isep_emp,isep_ana,entropy,hashes_per_query,cells_read_total,ms";

/// Formats like C's `%.10g`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..10).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (9 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_f(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn csv_row(r: &ExperimentReport) -> String {
    let t = r.tally.as_ref();
    let shifting = r.kind == FilterKind::Shifting;
    let member_stats = t.filter(|t| t.member_queries() > 0);
    let non_stats = t.filter(|t| t.non_member_queries() > 0);
    let fields = [
        r.experiment.clone(),
        r.kind.name().to_string(),
        r.m.to_string(),
        r.l_bits.to_string(),
        r.k.to_string(),
        r.s.to_string(),
        opt(r.n),
        opt(r.w),
        r.seed.to_string(),
        opt(r.queries),
        opt(member_stats.map(|t| t.c)),
        opt(member_stats.filter(|_| !shifting).map(|t| t.e)),
        opt(member_stats.filter(|_| shifting).map(|t| t.u(2))),
        opt(member_stats.filter(|_| shifting).map(|t| t.u(3))),
        opt(member_stats.filter(|_| shifting).map(|t| t.u(4))),
        opt(member_stats.filter(|_| shifting).map(|t| t.u_at_least(5))),
        opt(non_stats.map(|t| t.fp)),
        opt(non_stats.map(|t| t.tn)),
        opt_f(r.fpp_emp),
        opt_f(r.fpp_ana),
        opt_f(r.isep_emp),
        opt_f(r.isep_ana),
        opt_f(r.entropy),
        opt_f(r.hashes_per_query),
        opt(r.cells_read_total),
        opt_f(r.elapsed_ms),
    ];
    fields.join(",")
}

/// Header plus one row per report, LF line endings.
pub fn write_csv<W: Write>(mut w: W, reports: &[ExperimentReport]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", csv_row(r))?;
    }
    Ok(())
}
