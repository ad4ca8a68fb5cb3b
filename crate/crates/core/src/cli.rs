//! The `msf` command line: build and query filter images, evaluate the
//! error formulas, generate workloads and run the experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 tolerance violation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{self, AnalyticsError, FilterParams, OutcomeTally};
use crate::codec;
use crate::experiments::{self, ExperimentError, ExperimentReport, FilterSpec, RunOptions};
use crate::filter::{AssociationFilter, Filter, FilterError, FilterKind};
use crate::hash::ScriptedTable;
use crate::sbf::SpatialFilter;
use crate::shbf::{ShiftMode, ShiftingFilter};
use crate::workload::{self, Dataset, WorkloadError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Tolerance(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<WorkloadError> for CliError {
    fn from(e: WorkloadError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<codec::CodecError> for CliError {
    fn from(e: codec::CodecError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::InvalidParams(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "msf", version, about = "Multi-set membership filters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a filter image from a dataset file.
    Build(BuildArgs),
    /// Query a filter image.
    Query(QueryArgs),
    /// Evaluate an error or cost formula.
    Analyze(AnalyzeArgs),
    /// Write a seeded dataset or non-element corpus.
    Generate(GenerateArgs),
    /// Run one of the comparison experiments.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Shbf,
    Sbf,
}

impl From<KindArg> for FilterKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Shbf => FilterKind::Shifting,
            KindArg::Sbf => FilterKind::Spatial,
        }
    }
}

/// Cell count, as `--m 1048576`, `--m 2^20` or `--m-exp 20`.
#[derive(Debug, Clone, Args)]
pub struct SizeArgs {
    /// Number of cells (plain or `2^x`).
    #[arg(long, value_parser = parse_size, conflicts_with = "m_exp")]
    pub m: Option<u64>,
    /// Number of cells as a power of two.
    #[arg(long)]
    pub m_exp: Option<u32>,
}

impl SizeArgs {
    fn cells(&self) -> CliResult<u64> {
        match (self.m, self.m_exp) {
            (Some(m), _) => Ok(m),
            (None, Some(e)) if e < 64 => Ok(1u64 << e),
            (None, Some(e)) => Err(CliError::Usage(format!("--m-exp {e} too large"))),
            (None, None) => Err(CliError::Usage("one of --m or --m-exp is required".into())),
        }
    }
}

fn parse_size(s: &str) -> Result<u64, String> {
    if let Some(e) = s.strip_prefix("2^") {
        let e: u32 = e.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
        return 1u64
            .checked_shl(e)
            .filter(|_| e < 64)
            .ok_or_else(|| format!("`{s}` too large"));
    }
    s.parse().map_err(|_| format!("`{s}` is not a cell count"))
}

/// Per-set element counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts(pub Vec<u64>);

/// Per-set counts: `256,256,100` or `256x255`.
fn parse_counts(s: &str) -> Result<Counts, String> {
    if let Some((count, sets)) = s.split_once('x') {
        let count: u64 = count.trim().parse().map_err(|_| format!("bad count in `{s}`"))?;
        let sets: usize = sets.trim().parse().map_err(|_| format!("bad set count in `{s}`"))?;
        return Ok(Counts(vec![count; sets]));
    }
    s.split(',')
        .map(|c| c.trim().parse().map_err(|_| format!("bad count `{c}`")))
        .collect::<Result<_, _>>()
        .map(Counts)
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub filter: KindArg,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, default_value_t = experiments::DEFAULT_K)]
    pub k: usize,
    /// Number of sets; defaults to the largest label in the dataset.
    #[arg(long)]
    pub s: Option<usize>,
    /// Offset range for a word-bounded shifting filter.
    #[arg(long)]
    pub w: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Hex-encoded element; may be repeated.
    #[arg(long, conflicts_with = "file")]
    pub element: Vec<String>,
    /// Batch of elements in the dataset text format.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Print one verdict per element of a batch.
    #[arg(long, requires = "file")]
    pub each: bool,
    /// Digest script replacing the seeded hash family.
    #[arg(long)]
    pub script: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    BfFpp,
    ShbfFpp,
    ShbfFppSpecific,
    ShbfIsep,
    ShbfIsepCard,
    SbfFpp,
    SbfFppSpecific,
    SbfIsepSpecific,
    SbfIsep,
    Entropy,
    Cost,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub formula: Formula,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    /// Total number of elements.
    #[arg(long)]
    pub n: Option<u64>,
    /// Elements per set: `256,256,100` or `256x255`.
    #[arg(long, value_parser = parse_counts)]
    pub counts: Option<Counts>,
    /// Set index or match cardinality.
    #[arg(long)]
    pub i: Option<usize>,
    /// Filter kind for `cost`.
    #[arg(long, value_enum)]
    pub filter: Option<KindArg>,
    /// Correct answers, for `entropy`.
    #[arg(long)]
    pub c: Option<u64>,
    /// Single wrong answers, for `entropy`.
    #[arg(long)]
    pub e: Option<u64>,
    /// Multi-match counts u2,u3,..., for `entropy`.
    #[arg(long, value_delimiter = ',')]
    pub u: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub what: GenerateWhat,
}

#[derive(Debug, Subcommand)]
pub enum GenerateWhat {
    /// `s` sets of `per-set` elements each.
    Uniform {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        per_set: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// `total` elements with uniformly drawn labels.
    Random {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        total: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Elements disjoint from a dataset.
    NonElements {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    WordSweep,
    FppSweep,
    FppCurves,
    Interset,
    Cost,
}

impl ExperimentName {
    fn file_stem(self) -> &'static str {
        match self {
            ExperimentName::WordSweep => "word-sweep",
            ExperimentName::FppSweep => "fpp-sweep",
            ExperimentName::FppCurves => "fpp-curves",
            ExperimentName::Interset => "interset",
            ExperimentName::Cost => "cost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Human,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Directory receiving `<name>.csv`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Fill the `ms` column with wall time.
    #[arg(long)]
    pub timing: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long, default_value_t = experiments::DEFAULT_K)]
    pub k: usize,
    /// Non-element corpus size for `fpp-sweep`.
    #[arg(long, default_value_t = experiments::DEFAULT_NON_ELEMENTS)]
    pub non_elements: usize,
    /// Queries per configuration for `cost`.
    #[arg(long, default_value_t = 10_000)]
    pub queries: usize,
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "msf: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Build(a) => cmd_build(&a, out),
        Command::Query(a) => cmd_query(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Generate(a) => cmd_generate(&a.what, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomically(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(())
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_build(a: &BuildArgs, out: &mut dyn Write) -> CliResult<()> {
    let m = a.size.cells()?;
    let kind: FilterKind = a.filter.into();
    if a.w.is_some() && kind == FilterKind::Spatial {
        return Err(CliError::Usage("--w applies only to shbf".into()));
    }
    let dataset = Dataset::read_text(open(&a.dataset)?, a.s)?;
    let s = dataset.s;
    let mut filter: Filter = match kind {
        FilterKind::Shifting => {
            let mode = a.w.map_or(ShiftMode::Circular, ShiftMode::WordBounded);
            ShiftingFilter::new(m, a.k, s, mode, a.seed)?.into()
        }
        FilterKind::Spatial => SpatialFilter::new(m, a.k, s, a.seed)?.into(),
    };
    for (e, l) in &dataset.entries {
        filter.insert(e, *l)?;
    }
    filter.seal();
    let image = codec::encode(&filter)?;
    write_atomically(&a.out, |w| w.write_all(&image))?;

    let occupied = match &filter {
        Filter::Shifting(f) => f.popcount(),
        Filter::Spatial(f) => f.packed().count_nonzero() as u64,
    };
    writeln!(out, "filter: {kind}")?;
    writeln!(out, "cells: {m}")?;
    writeln!(out, "bits: {}", filter.bit_len())?;
    writeln!(out, "hashes: {}", a.k)?;
    writeln!(out, "sets: {s}")?;
    if let Some(w) = a.w {
        writeln!(out, "word: {w}")?;
    }
    writeln!(out, "elements: {}", dataset.len())?;
    writeln!(out, "occupied cells: {occupied}")?;
    writeln!(
        out,
        "fill ratio: {}",
        experiments::format_float(occupied as f64 / m as f64)
    )?;
    writeln!(out, "image bytes: {}", image.len())?;
    Ok(())
}

fn cmd_query(a: &QueryArgs, out: &mut dyn Write) -> CliResult<()> {
    let bytes = std::fs::read(&a.image).map_err(|e| CliError::Data(format!("{}: {e}", a.image.display())))?;
    let mut filter = codec::decode(&bytes)?;
    if let Some(script) = &a.script {
        let table = ScriptedTable::parse(open(script)?).map_err(|e| CliError::Data(e.to_string()))?;
        filter = filter.with_scripted_digests(table)?;
    }

    if let Some(file) = &a.file {
        let records = workload::read_records(open(file)?)?;
        let mut positives = 0u64;
        for r in &records {
            if a.each {
                writeln!(out, "{}\t{}", hex::encode(&r.element), filter.query_text(&r.element)?)?;
            }
            if filter.reports_member(&r.element)? {
                positives += 1;
            }
        }
        let total = records.len() as u64;
        writeln!(out, "queries: {total}")?;
        writeln!(out, "positives: {positives}")?;
        let fraction = if total == 0 {
            0.0
        } else {
            positives as f64 / total as f64
        };
        writeln!(out, "positive fraction: {}", experiments::format_float(fraction))?;
        return Ok(());
    }

    if a.element.is_empty() {
        return Err(CliError::Usage("one of --element or --file is required".into()));
    }
    for hex_elem in &a.element {
        let element = hex::decode(hex_elem).map_err(|e| CliError::Data(format!("element `{hex_elem}`: {e}")))?;
        if element.is_empty() {
            return Err(CliError::Data("empty element".into()));
        }
        writeln!(out, "{}", filter.query_text(&element)?)?;
    }
    Ok(())
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this formula")))
}

/// Parameters from `--counts`, or from `--s` and `--n` (split evenly when
/// `n` is a multiple of `s`).
fn analyze_params(a: &AnalyzeArgs, needs_counts: bool) -> CliResult<FilterParams> {
    let m = a.size.cells()?;
    let k = need(a.k, "k")?;
    if let Some(counts) = &a.counts {
        let p = FilterParams::with_counts(m, k, counts.0.clone())?;
        if a.s.is_some_and(|s| s != p.s) {
            return Err(CliError::Usage("--s disagrees with --counts".into()));
        }
        if a.n.is_some_and(|n| n != p.n) {
            return Err(CliError::Usage("--n disagrees with --counts".into()));
        }
        return Ok(p);
    }
    let s = need(a.s, "s")?;
    let n = need(a.n, "n")?;
    if needs_counts {
        if s == 0 || n % s as u64 != 0 {
            return Err(CliError::Usage(
                "--counts is required unless --n is a multiple of --s".into(),
            ));
        }
        return Ok(FilterParams::uniform(m, k, s, n / s as u64)?);
    }
    Ok(FilterParams::new(m, k, s, n)?)
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CliResult<()> {
    let value = match a.formula {
        Formula::BfFpp => analytics::bf_fpp(a.size.cells()?, need(a.k, "k")?, need(a.n, "n")?)?,
        Formula::ShbfFpp => analytics::shbf_fpp_overall(&analyze_params(a, false)?)?,
        Formula::ShbfFppSpecific => analytics::shbf_fpp_specific(&analyze_params(a, false)?)?,
        Formula::ShbfIsep => analytics::shbf_isep(&analyze_params(a, false)?)?,
        Formula::ShbfIsepCard => analytics::shbf_isep_cardinality(&analyze_params(a, false)?, need(a.i, "i")?)?,
        Formula::SbfFpp => analytics::sbf_fpp(&analyze_params(a, false)?)?,
        Formula::SbfFppSpecific => analytics::sbf_fpp_specific(&analyze_params(a, true)?, need(a.i, "i")?)?,
        Formula::SbfIsepSpecific => analytics::sbf_isep_specific(&analyze_params(a, true)?, need(a.i, "i")?)?,
        Formula::SbfIsep => analytics::sbf_isep_overall(&analyze_params(a, true)?)?,
        Formula::Entropy => {
            let mut tally = OutcomeTally {
                c: need(a.c, "c")?,
                e: a.e.unwrap_or(0),
                ..Default::default()
            };
            for (i, &u) in a.u.iter().enumerate() {
                if u > 0 {
                    tally.u.insert(i + 2, u);
                }
            }
            analytics::entropy(&tally)?
        }
        Formula::Cost => {
            let kind: FilterKind = need(a.filter, "filter")?.into();
            let k = need(a.k, "k")? as u64;
            let s = need(a.s, "s")? as u64;
            if k == 0 || s == 0 {
                return Err(CliError::Usage("--k and --s must be positive".into()));
            }
            let c = analytics::cost_model(kind, k, s);
            writeln!(out, "lookups/query: {}", c.lookups_per_query)?;
            writeln!(out, "hashes/query: {}", c.hashes_per_query)?;
            writeln!(out, "cells read/query: {}..={}", c.cells_read_min, c.cells_read_max)?;
            return Ok(());
        }
    };
    writeln!(out, "{}", experiments::format_float(value))?;
    Ok(())
}

fn cmd_generate(what: &GenerateWhat, out: &mut dyn Write) -> CliResult<()> {
    match what {
        GenerateWhat::Uniform {
            s,
            per_set,
            seed,
            out: path,
        } => {
            if *s == 0 || *per_set == 0 {
                return Err(CliError::Usage("--s and --per-set must be positive".into()));
            }
            let d = workload::gen_uniform(*s, *per_set, *seed);
            write_atomically(path, |w| d.write_text(w))?;
            writeln!(out, "elements: {}", d.len())?;
        }
        GenerateWhat::Random {
            s,
            total,
            seed,
            out: path,
        } => {
            if !workload::random_split_feasible(*s, *total) {
                return Err(CliError::Usage(format!(
                    "--total {total} is too small for every one of {s} sets to be drawn"
                )));
            }
            let d = workload::gen_random(*s, *total, *seed);
            write_atomically(path, |w| d.write_text(w))?;
            writeln!(out, "elements: {}", d.len())?;
        }
        GenerateWhat::NonElements {
            count,
            dataset,
            seed,
            out: path,
        } => {
            if *count == 0 {
                return Err(CliError::Usage("--count must be positive".into()));
            }
            let d = Dataset::read_text(open(dataset)?, None)?;
            let non = workload::gen_non_elements(*count, *seed, &d);
            write_atomically(path, |w| non.write_text(w))?;
            writeln!(out, "elements: {}", non.len())?;
        }
    }
    Ok(())
}

fn run_experiment(a: &ExperimentArgs) -> CliResult<Vec<ExperimentReport>> {
    let opts = RunOptions { timing: a.timing };
    let seed = a.seed;
    let k = a.k;
    let uniform = || workload::gen_uniform(experiments::DEFAULT_SETS, experiments::DEFAULT_PER_SET, seed);
    Ok(match a.name {
        ExperimentName::WordSweep => {
            experiments::run_word_size_sweep(1 << 23, k, &experiments::default_word_sizes(), &uniform(), seed, opts)?
        }
        ExperimentName::FppSweep => {
            if a.non_elements == 0 {
                return Err(CliError::Usage("--non-elements must be positive".into()));
            }
            let d = uniform();
            let non = workload::gen_non_elements(a.non_elements, seed, &d);
            experiments::run_fpp_sweep(
                &[FilterKind::Shifting, FilterKind::Spatial],
                &experiments::default_fpp_lengths(),
                &d,
                &non,
                k,
                seed,
                opts,
            )?
        }
        ExperimentName::FppCurves => {
            let n = experiments::DEFAULT_TOTAL as u64;
            let points = experiments::run_fpp_curves(&[1 << 20, 1 << 23], k, n, 1..=255)?;
            experiments::curve_reports(&points, k, n)
        }
        ExperimentName::Interset => {
            let specs = experiments::default_interset_specs(k);
            let random = workload::gen_random(experiments::DEFAULT_SETS, experiments::DEFAULT_TOTAL, seed);
            let mut r = experiments::run_interset_experiment("interset-uniform", &uniform(), &specs, seed, opts)?;
            r.extend(experiments::run_interset_experiment(
                "interset-random",
                &random,
                &specs,
                seed,
                opts,
            )?);
            r
        }
        ExperimentName::Cost => {
            let grid: Vec<(FilterSpec, usize)> = experiments::default_cost_grid(1 << 20, k);
            experiments::run_cost_experiment(&grid, a.queries, seed, opts)?
        }
    })
}

fn write_human(out: &mut dyn Write, reports: &[ExperimentReport]) -> std::io::Result<()> {
    let f = |v: Option<f64>| v.map(experiments::format_float).unwrap_or_else(|| "-".into());
    for r in reports {
        write!(
            out,
            "{:<17} {:<4} m={:<9} k={:<3} s={:<4}",
            r.experiment, r.kind, r.m, r.k, r.s
        )?;
        if let Some(w) = r.w {
            write!(out, " w={w}")?;
        }
        if let Some(t) = &r.tally {
            if t.member_queries() > 0 {
                write!(out, " c={} e={} multi={}", t.c, t.e, t.multi_matches())?;
            }
            if t.non_member_queries() > 0 {
                write!(out, " fp={}", t.fp)?;
            }
        }
        write!(
            out,
            " fpp={}/{} isep={}/{} ent={}",
            f(r.fpp_emp),
            f(r.fpp_ana),
            f(r.isep_emp),
            f(r.isep_ana),
            f(r.entropy)
        )?;
        if let Some(h) = r.hashes_per_query {
            write!(out, " hashes/query={}", experiments::format_float(h))?;
        }
        writeln!(out)?;
        for flag in &r.flags {
            writeln!(out, "  FLAG {flag}")?;
        }
    }
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> CliResult<()> {
    let reports = run_experiment(a)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", a.name.file_stem()));
        write_atomically(&path, |w| experiments::write_csv(w, &reports))?;
    }
    match a.format {
        OutputFormat::Csv => experiments::write_csv(&mut *out, &reports)?,
        OutputFormat::Human => write_human(out, &reports)?,
    }
    let flagged: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.flags
                .iter()
                .map(move |f| format!("{} {} m={}: {f}", r.experiment, r.kind, r.m))
        })
        .collect();
    if flagged.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "{} tolerance flag(s):\n  {}",
            flagged.len(),
            flagged.join("\n  ")
        )))
    }
}
