//! Report generation: the full pipeline from event files to tables.

mod table;
mod watch;

pub use table::{fmt_float, Cell, OutputFormat, Table};
pub use watch::{
    daily_records, read_watch_records, simulate_watch, Alert, WatchError, WatchRecord, Watcher,
    ALERT_HEADER,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use thiserror::Error;

use crate::discussion::{
    build_trees, delta_h, h_index, h_trace, maturity, rank_by_speed, DiscussionTree, HTrace,
    SpeedRow, DEFAULT_MATURITY_MULTIPLE, DEFAULT_MIN_COMMENTS,
};
use crate::exec::Exec;
use crate::ingest::{
    build_series_with, load_comments, load_edits, ActivityKind, ActivitySeries, CommentEvent,
    EditEvent, IngestError, InputFormat, LineDiagnostic, Loaded,
};
use crate::peakstats::{
    anniversaries, fit_power_law, interval_histogram, log_binned_histogram, overlap, pearson,
    peaks_per_article, pooled_intervals, run_lengths, Histogram,
};
use crate::timeseries::{detect_peaks, ParamError, PeakParams, PeakRun, PeakTally};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("cannot write {path}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Input {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl ReportError {
    /// Process exit code: 1 for input problems, 2 for configuration problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Config(_) | ReportError::Params(_) => 2,
            _ => 1,
        }
    }
}

pub const ALLOWED_TOLERANCES: [u32; 3] = [0, 1, 2];
pub const DEFAULT_TOP_N: usize = 15;
pub const DEFAULT_BINS_PER_DECADE: u32 = 5;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub comments: Option<PathBuf>,
    pub edits: Option<PathBuf>,
    pub input_format: InputFormat,
    pub params: PeakParams,
    pub tolerances: Vec<u32>,
    pub min_comments: usize,
    /// Maturity multiple of Δh.
    pub k: f64,
    /// Reference time for maturity; defaults to the latest event in the input.
    pub as_of: Option<DateTime<Utc>>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub top_n: usize,
    pub bins_per_decade: u32,
    pub x_min: u64,
    pub exec: Exec,
}

impl RunConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            comments: None,
            edits: None,
            input_format: InputFormat::Jsonl,
            params: PeakParams::default(),
            tolerances: ALLOWED_TOLERANCES.to_vec(),
            min_comments: DEFAULT_MIN_COMMENTS,
            k: DEFAULT_MATURITY_MULTIPLE,
            as_of: None,
            out_dir: out_dir.into(),
            format: OutputFormat::Csv,
            top_n: DEFAULT_TOP_N,
            bins_per_decade: DEFAULT_BINS_PER_DECADE,
            x_min: 1,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        self.params.validate()?;
        if let Some(t) = self.tolerances.iter().find(|t| !ALLOWED_TOLERANCES.contains(t)) {
            return Err(ReportError::Config(format!("overlap tolerance {t} not in {{0,1,2}}")));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(ReportError::Config(format!("maturity multiple {} must be >= 0", self.k)));
        }
        if self.bins_per_decade == 0 {
            return Err(ReportError::Config("bins per decade must be >= 1".into()));
        }
        if self.x_min == 0 {
            return Err(ReportError::Config("x_min must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything computed from one pair of event files.
#[derive(Debug, Default)]
pub struct Analysis {
    pub comment_load: LoadStats,
    pub edit_load: LoadStats,
    pub comment_series: BTreeMap<String, ActivitySeries>,
    pub edit_series: BTreeMap<String, ActivitySeries>,
    /// Sorted by article, then start day.
    pub comment_runs: Vec<PeakRun>,
    pub edit_runs: Vec<PeakRun>,
    pub discussions: Vec<DiscussionMetrics>,
    pub tree_errors: Vec<(String, String)>,
    pub comments_per_article: BTreeMap<String, usize>,
    pub edits_per_article: BTreeMap<String, usize>,
    pub latest_event: Option<DateTime<Utc>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub records: usize,
    pub events: usize,
    pub skipped: Vec<LineDiagnostic>,
    pub dated: usize,
    pub malformed_timestamps: usize,
}

#[derive(Clone, Debug)]
pub struct DiscussionMetrics {
    pub article: String,
    pub n_comments: usize,
    pub n_dated: usize,
    pub final_h: u32,
    pub max_depth: u32,
    pub trace: Option<HTrace>,
}

impl DiscussionMetrics {
    fn of(tree: &DiscussionTree) -> Self {
        DiscussionMetrics {
            article: tree.article().to_string(),
            n_comments: tree.len(),
            n_dated: tree.dated(),
            final_h: h_index(tree),
            max_depth: tree.max_depth(),
            trace: h_trace(tree).ok(),
        }
    }
}

fn load_stats<T>(l: &Loaded<T>, dated: usize) -> LoadStats {
    LoadStats {
        records: l.records,
        events: l.events.len(),
        skipped: l.skipped.clone(),
        dated,
        malformed_timestamps: l.malformed_timestamps,
    }
}

fn detect_sorted(series: &BTreeMap<String, ActivitySeries>, params: &PeakParams, exec: Exec) -> Vec<PeakRun> {
    let list: Vec<&ActivitySeries> = series.values().collect();
    exec.map(&list, |s| detect_peaks(s, params)).into_iter().flatten().collect()
}

impl Analysis {
    /// Runs ingestion, peak detection and tree metrics over in-memory events.
    pub fn from_events(
        comments: Loaded<CommentEvent>,
        edits: Loaded<EditEvent>,
        params: &PeakParams,
        exec: Exec,
    ) -> Self {
        let dated_comments = comments.events.iter().filter(|c| c.timestamp.is_some()).count();
        let comment_load = load_stats(&comments, dated_comments);
        let edit_load = load_stats(&edits, edits.events.len());

        let latest_event = comments
            .events
            .iter()
            .filter_map(|c| c.timestamp)
            .chain(edits.events.iter().map(|e| e.timestamp))
            .max();

        let comment_series = build_series_with(&comments.events, ActivityKind::Comment, exec);
        let edit_series = build_series_with(&edits.events, ActivityKind::Edit, exec);
        let comment_runs = detect_sorted(&comment_series, params, exec);
        let edit_runs = detect_sorted(&edit_series, params, exec);

        let mut comments_per_article: BTreeMap<String, usize> = BTreeMap::new();
        for c in &comments.events {
            *comments_per_article.entry(c.article.clone()).or_default() += 1;
        }
        let mut edits_per_article: BTreeMap<String, usize> = BTreeMap::new();
        for e in &edits.events {
            *edits_per_article.entry(e.article.clone()).or_default() += 1;
        }
        drop(edits);

        let (trees, errors) = build_trees(comments.events, exec);
        let discussions = exec.map(&trees, DiscussionMetrics::of);
        let tree_errors = errors.into_iter().map(|(a, e)| (a, e.to_string())).collect();

        Analysis {
            comment_load,
            edit_load,
            comment_series,
            edit_series,
            comment_runs,
            edit_runs,
            discussions,
            tree_errors,
            comments_per_article,
            edits_per_article,
            latest_event,
        }
    }

    pub fn load(config: &RunConfig) -> Result<Self, ReportError> {
        let comments = match &config.comments {
            Some(p) => load_comments(p, config.input_format)?,
            None => Loaded::default(),
        };
        let edits = match &config.edits {
            Some(p) => load_edits(p, config.input_format)?,
            None => Loaded::default(),
        };
        Ok(Self::from_events(comments, edits, &config.params, config.exec))
    }

    pub fn runs(&self, kind: ActivityKind) -> &[PeakRun] {
        match kind {
            ActivityKind::Comment => &self.comment_runs,
            ActivityKind::Edit => &self.edit_runs,
        }
    }

    pub fn traces(&self) -> impl Iterator<Item = &HTrace> {
        self.discussions.iter().filter_map(|d| d.trace.as_ref())
    }
}

// ---- table builders -------------------------------------------------------

pub fn peaks_table(runs: &[PeakRun]) -> Table {
    let mut t = Table::new("peaks", &["article", "kind", "start_day", "length", "max_ratio"]);
    for r in runs {
        t.push(vec![
            r.article.as_str().into(),
            r.kind.as_str().into(),
            r.start_day.to_string().into(),
            r.length.into(),
            r.max_ratio().into(),
        ]);
    }
    t
}

/// Reads a peaks table written by [`peaks_table`]. Only the maximum ratio
/// survives the round trip, so every day of a run gets that ratio.
pub fn read_peaks_csv(path: &Path) -> Result<Vec<PeakRun>, ReportError> {
    #[derive(serde::Deserialize)]
    struct Row {
        article: String,
        kind: String,
        start_day: String,
        length: u32,
        max_ratio: f64,
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| ReportError::Input {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut runs = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let bad = |message: String| ReportError::Input {
            path: path.to_path_buf(),
            line: i + 2,
            message,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let kind = row.kind.parse::<ActivityKind>().map_err(bad)?;
        let start_day = NaiveDate::parse_from_str(&row.start_day, "%Y-%m-%d")
            .map_err(|e| bad(format!("start_day: {e}")))?;
        if row.length == 0 {
            return Err(bad("zero-length run".into()));
        }
        runs.push(PeakRun {
            article: row.article,
            kind,
            start_day,
            length: row.length,
            day_ratios: vec![row.max_ratio; row.length as usize],
        });
    }
    runs.sort_by(|a, b| {
        (a.article.as_str(), a.kind, a.start_day).cmp(&(b.article.as_str(), b.kind, b.start_day))
    });
    Ok(runs)
}

pub fn overlap_table(comment_runs: &[PeakRun], edit_runs: &[PeakRun], tolerances: &[u32]) -> Table {
    let mut t = Table::new(
        "overlap",
        &["tolerance_days", "overlapping_comment_peaks", "articles_with_overlap", "comment_peaks", "fraction"],
    );
    for &tol in tolerances {
        let r = overlap(comment_runs, edit_runs, tol);
        let fraction = (!comment_runs.is_empty())
            .then(|| r.overlapping_comment_peaks as f64 / comment_runs.len() as f64);
        t.push(vec![
            tol.into(),
            r.overlapping_comment_peaks.into(),
            r.articles_with_overlap.into(),
            comment_runs.len().into(),
            fraction.into(),
        ]);
    }
    t
}

/// Articles with at least one anniversary, most anniversaries first.
pub fn anniversary_table(runs_by_kind: &[&[PeakRun]]) -> Table {
    let mut rows: Vec<(u32, String, ActivityKind)> = Vec::new();
    for runs in runs_by_kind {
        let Some(kind) = runs.first().map(|r| r.kind) else {
            continue;
        };
        for (article, n) in anniversaries(runs) {
            if n > 0 {
                rows.push((n, article, kind));
            }
        }
    }
    rows.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| (&a.1, a.2).cmp(&(&b.1, b.2))));
    let mut t = Table::new("anniversaries", &["article", "kind", "anniversaries"]);
    for (n, article, kind) in rows {
        t.push(vec![article.into(), kind.as_str().into(), n.into()]);
    }
    t
}

fn integer_distribution(name: &str, parts: &[(ActivityKind, Histogram)]) -> Table {
    let mut t = Table::new(name, &["kind", "value", "count"]);
    for (kind, h) in parts {
        for (v, c) in h.integer_counts() {
            t.push(vec![kind.as_str().into(), v.into(), c.into()]);
        }
    }
    t
}

/// Peaks per article, run lengths and inter-peak intervals, per kind.
pub fn distribution_tables(runs_by_kind: &[(ActivityKind, &[PeakRun])]) -> Vec<Table> {
    let per_article: Vec<_> = runs_by_kind.iter().map(|(k, r)| (*k, peaks_per_article(r))).collect();
    let lengths: Vec<_> = runs_by_kind.iter().map(|(k, r)| (*k, run_lengths(r))).collect();
    let intervals: Vec<_> = runs_by_kind.iter().map(|(k, r)| (*k, interval_histogram(r))).collect();
    vec![
        integer_distribution("dist_peaks_per_article", &per_article),
        integer_distribution("dist_run_lengths", &lengths),
        integer_distribution("dist_inter_peak", &intervals),
    ]
}

pub fn hindex_table(discussions: &[DiscussionMetrics]) -> Table {
    let mut t = Table::new("hindex", &["article", "final_h", "max_depth", "n_comments"]);
    for d in discussions {
        t.push(vec![
            d.article.as_str().into(),
            d.final_h.into(),
            d.max_depth.into(),
            d.n_comments.into(),
        ]);
    }
    t
}

pub fn speed_table<'a>(name: &str, rows: impl IntoIterator<Item = &'a SpeedRow>) -> Table {
    let mut t = Table::new(
        name,
        &["article", "delta_h", "start_date", "end_date", "duration", "final_h", "n_comments"],
    );
    for r in rows {
        t.push(vec![
            r.article.as_str().into(),
            r.delta_h.into(),
            r.start.to_string().into(),
            r.end.to_string().into(),
            r.duration_days.into(),
            r.final_h.into(),
            r.n_comments.into(),
        ]);
    }
    t
}

pub fn maturity_table<'a>(
    traces: impl IntoIterator<Item = &'a HTrace>,
    now: DateTime<Utc>,
    k: f64,
    min_comments: usize,
) -> Table {
    let mut t = Table::new(
        "maturity",
        &["article", "delta_h", "last_increase", "days_since_increase", "k", "mature", "degenerate_k"],
    );
    for tr in traces {
        if tr.n_comments < min_comments {
            continue;
        }
        let Ok(m) = maturity(tr, now, k) else {
            continue;
        };
        let last = tr.final_reached().expect("growth implies steps");
        t.push(vec![
            tr.article.as_str().into(),
            m.delta_h.into(),
            crate::ingest::format_timestamp(&last).into(),
            m.time_since_last_increase.into(),
            k.into(),
            m.mature.into(),
            m.degenerate.into(),
        ]);
    }
    t
}

pub fn delta_h_histogram_table(values: &[f64], bins_per_decade: u32) -> Table {
    let positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let h = log_binned_histogram(&positive, bins_per_decade).expect("positive samples");
    let mut t = Table::new("dist_delta_h", &["bin_lo", "bin_hi", "count", "density"]);
    for (b, d) in h.bins().zip(h.density()) {
        t.push(vec![b.lo.into(), b.hi.into(), b.count.into(), d.into()]);
    }
    t
}

fn daily_totals_table(a: &Analysis) -> Table {
    let mut totals: BTreeMap<NaiveDate, (u64, u64)> = BTreeMap::new();
    for s in a.edit_series.values() {
        for (i, &c) in s.counts.iter().enumerate() {
            if c > 0 {
                totals.entry(s.day(i)).or_default().0 += c as u64;
            }
        }
    }
    for s in a.comment_series.values() {
        for (i, &c) in s.counts.iter().enumerate() {
            if c > 0 {
                totals.entry(s.day(i)).or_default().1 += c as u64;
            }
        }
    }
    let mut t = Table::new("daily_totals", &["day", "edits", "comments"]);
    let (Some(&first), Some(&last)) = (totals.keys().next(), totals.keys().next_back()) else {
        return t;
    };
    let mut day = first;
    while day <= last {
        let (e, c) = totals.get(&day).copied().unwrap_or_default();
        t.push(vec![day.to_string().into(), e.into(), c.into()]);
        day = day.succ_opt().expect("date in range");
    }
    t
}

fn max_run_lengths(runs: &[PeakRun]) -> HashMap<&str, u32> {
    let mut out: HashMap<&str, u32> = HashMap::new();
    for r in runs {
        let e = out.entry(r.article.as_str()).or_default();
        *e = (*e).max(r.length);
    }
    out
}

fn run_counts(runs: &[PeakRun]) -> HashMap<&str, PeakTally> {
    let mut out: HashMap<&str, PeakTally> = HashMap::new();
    for r in runs {
        out.entry(r.article.as_str()).or_default().add(PeakTally { runs: 1, days: r.length as u64 });
    }
    out
}

fn articles_table(a: &Analysis, now: Option<DateTime<Utc>>, k: f64) -> Table {
    let mut t = Table::new(
        "articles",
        &[
            "article", "n_edits", "n_comments", "n_dated_comments", "comment_peaks", "edit_peaks",
            "comment_peak_days", "edit_peak_days", "max_comment_run", "max_edit_run", "final_h",
            "max_depth", "delta_h", "mature",
        ],
    );
    let names: BTreeSet<&str> = a
        .comments_per_article
        .keys()
        .chain(a.edits_per_article.keys())
        .map(String::as_str)
        .collect();
    let disc: HashMap<&str, &DiscussionMetrics> =
        a.discussions.iter().map(|d| (d.article.as_str(), d)).collect();
    let comment_counts = run_counts(&a.comment_runs);
    let edit_counts = run_counts(&a.edit_runs);
    let comment_max = max_run_lengths(&a.comment_runs);
    let edit_max = max_run_lengths(&a.edit_runs);
    let has_comment_series = |n: &str| a.comment_series.contains_key(n);
    let has_edit_series = |n: &str| a.edit_series.contains_key(n);
    for name in names {
        let d = disc.get(name);
        let tally = |m: &HashMap<&str, PeakTally>, has: bool| {
            has.then(|| m.get(name).copied().unwrap_or_default())
        };
        let ct = tally(&comment_counts, has_comment_series(name));
        let et = tally(&edit_counts, has_edit_series(name));
        let dh = d.and_then(|d| d.trace.as_ref()).and_then(|tr| delta_h(tr).ok());
        let mature = match (d.and_then(|d| d.trace.as_ref()), now) {
            (Some(tr), Some(now)) => maturity(tr, now, k).ok().map(|m| m.mature),
            _ => None,
        };
        t.push(vec![
            name.into(),
            a.edits_per_article.get(name).copied().unwrap_or(0).into(),
            a.comments_per_article.get(name).copied().unwrap_or(0).into(),
            d.map(|d| d.n_dated).into(),
            ct.map(|x| x.runs).into(),
            et.map(|x| x.runs).into(),
            ct.map(|x| x.days).into(),
            et.map(|x| x.days).into(),
            ct.map(|_| comment_max.get(name).copied().unwrap_or(0)).into(),
            et.map(|_| edit_max.get(name).copied().unwrap_or(0)).into(),
            d.map(|d| d.final_h).into(),
            d.map(|d| d.max_depth).into(),
            dh.map(|x| x.value).into(),
            mature.into(),
        ]);
    }
    t
}

/// Articles with the most comment peak runs (ties by edit peaks, then name).
fn top_comment_peaks_table(a: &Analysis, n: usize) -> Table {
    let comment_counts = run_counts(&a.comment_runs);
    let edit_counts = run_counts(&a.edit_runs);
    let mut rows: Vec<(&str, u64, u64)> = comment_counts
        .iter()
        .map(|(name, t)| (*name, t.runs, edit_counts.get(name).map_or(0, |e| e.runs)))
        .collect();
    rows.sort_by(|x, y| y.1.cmp(&x.1).then(y.2.cmp(&x.2)).then(x.0.cmp(y.0)));
    let mut t = Table::new("top_comment_peaks", &["article", "comment_peaks", "edit_peaks"]);
    for (name, c, e) in rows.into_iter().take(n) {
        t.push(vec![name.into(), c.into(), e.into()]);
    }
    t
}

fn diagnostics_table(a: &Analysis) -> Table {
    let mut t = Table::new("diagnostics", &["source", "article", "line", "message"]);
    for (source, load) in [("comments", &a.comment_load), ("edits", &a.edit_load)] {
        for d in &load.skipped {
            t.push(vec![source.into(), Cell::Missing, d.line.into(), d.message.as_str().into()]);
        }
    }
    for (article, e) in &a.tree_errors {
        t.push(vec!["discussion".into(), article.as_str().into(), Cell::Missing, e.as_str().into()]);
    }
    t
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

fn summary_table(a: &Analysis, config: &RunConfig, speed: &crate::discussion::SpeedTable) -> Table {
    let mut t = Table::new("summary", &["key", "value"]);
    let mut kv = |k: &str, v: Cell| t.push(vec![k.into(), v]);

    let cl = &a.comment_load;
    let el = &a.edit_load;
    kv("comment_records", cl.records.into());
    kv("comment_events", cl.events.into());
    kv("comment_records_skipped", cl.skipped.len().into());
    kv("comments_dated", cl.dated.into());
    kv("comments_undated", (cl.events - cl.dated).into());
    kv("comment_timestamps_malformed", cl.malformed_timestamps.into());
    kv("edit_records", el.records.into());
    kv("edit_events", el.events.into());
    kv("edit_records_skipped", el.skipped.len().into());
    let tree_dropped: usize = a
        .tree_errors
        .iter()
        .map(|(art, _)| a.comments_per_article.get(art).copied().unwrap_or(0))
        .sum();
    kv("discussions", a.discussions.len().into());
    kv("discussions_rejected", a.tree_errors.len().into());
    kv("comments_in_rejected_discussions", tree_dropped.into());
    kv(
        "comment_edit_ratio",
        (el.dated > 0).then(|| cl.dated as f64 / el.dated as f64).into(),
    );

    kv("peak_factor_c", config.params.c.into());
    kv("n_min", config.params.n_min.into());
    kv("window_halfwidth", config.params.window_halfwidth.into());
    for (kind, runs, series) in [
        (ActivityKind::Comment, &a.comment_runs, &a.comment_series),
        (ActivityKind::Edit, &a.edit_runs, &a.edit_series),
    ] {
        let tally = PeakTally::of(runs);
        let with_peaks: BTreeSet<&str> = runs.iter().map(|r| r.article.as_str()).collect();
        let active_days: u64 = series.values().map(|s| s.counts.iter().filter(|&&c| c > 0).count() as u64).sum();
        kv(&format!("{kind}_peak_runs"), tally.runs.into());
        kv(&format!("{kind}_peak_days"), tally.days.into());
        kv(&format!("{kind}_twin_peaks"), runs.iter().filter(|r| r.is_twin()).count().into());
        kv(&format!("{kind}_articles_with_peaks"), with_peaks.len().into());
        kv(
            &format!("{kind}_peaks_per_peaked_article"),
            (!with_peaks.is_empty()).then(|| tally.runs as f64 / with_peaks.len() as f64).into(),
        );
        kv(&format!("{kind}_active_days"), active_days.into());
        kv(
            &format!("{kind}_peak_day_fraction"),
            (active_days > 0).then(|| tally.days as f64 / active_days as f64).into(),
        );
        let per_article: Vec<u64> = peaks_per_article(runs).integer_counts().into_iter()
            .flat_map(|(v, c)| std::iter::repeat_n(v, c as usize))
            .collect();
        let lengths: Vec<u64> = runs.iter().map(|r| r.length as u64).collect();
        let intervals = pooled_intervals(runs);
        for (label, samples) in [("peaks_per_article", per_article), ("run_length", lengths), ("inter_peak", intervals)] {
            let fit = fit_power_law(&samples, config.x_min).ok();
            kv(&format!("{kind}_{label}_alpha"), fit.map(|f| f.alpha).into());
            kv(&format!("{kind}_{label}_n"), fit.map(|f| f.n_samples).into());
        }
    }

    let mut dh: Vec<f64> = speed.rows.iter().map(|r| r.delta_h).collect();
    dh.sort_by(f64::total_cmp);
    kv("min_comments", config.min_comments.into());
    kv("ranked_discussions", speed.rows.len().into());
    kv("ranked_without_growth", speed.no_growth.into());
    kv(
        "delta_h_mean",
        (!dh.is_empty()).then(|| dh.iter().sum::<f64>() / dh.len() as f64).into(),
    );
    kv("delta_h_median", median(&dh).into());
    kv("delta_h_zero", dh.iter().filter(|v| **v == 0.0).count().into());

    let edit_max = max_run_lengths(&a.edit_runs);
    let xs: Vec<f64> = speed.rows.iter().map(|r| r.delta_h).collect();
    let ys: Vec<f64> = speed
        .rows
        .iter()
        .map(|r| edit_max.get(r.article.as_str()).copied().unwrap_or(0) as f64)
        .collect();
    let corr = pearson(&xs, &ys).ok();
    kv("corr_delta_h_max_edit_run_r", corr.map(|c| c.r).into());
    kv("corr_delta_h_max_edit_run_p", corr.map(|c| c.p).into());
    kv("corr_delta_h_max_edit_run_n", corr.map(|c| c.n).into());
    t
}

/// Summary of a finished report run.
#[derive(Clone, Debug)]
pub struct ReportOutcome {
    pub files: Vec<PathBuf>,
    pub comment_load: LoadStats,
    pub edit_load: LoadStats,
    pub tree_errors: usize,
}

/// Builds every report table for an analysis.
pub fn report_tables(a: &Analysis, config: &RunConfig) -> Vec<Table> {
    let now = config.as_of.or(a.latest_event);
    let speed = rank_by_speed(a.traces(), config.min_comments);
    let mut all_runs: Vec<PeakRun> = a.comment_runs.iter().chain(&a.edit_runs).cloned().collect();
    all_runs.sort_by(|x, y| (x.article.as_str(), x.kind, x.start_day).cmp(&(y.article.as_str(), y.kind, y.start_day)));

    let mut tables = vec![
        peaks_table(&all_runs),
        overlap_table(&a.comment_runs, &a.edit_runs, &config.tolerances),
        anniversary_table(&[&a.comment_runs, &a.edit_runs]),
    ];
    tables.extend(distribution_tables(&[
        (ActivityKind::Comment, &a.comment_runs),
        (ActivityKind::Edit, &a.edit_runs),
    ]));
    let dh: Vec<f64> = speed.rows.iter().map(|r| r.delta_h).collect();
    tables.push(delta_h_histogram_table(&dh, config.bins_per_decade));
    tables.push(speed_table("speed_fastest", speed.fastest(config.top_n)));
    tables.push(speed_table("speed_slowest", speed.slowest(config.top_n)));
    tables.push(top_comment_peaks_table(a, config.top_n));
    tables.push(hindex_table(&a.discussions));
    tables.push(articles_table(a, now, config.k));
    tables.push(daily_totals_table(a));
    tables.push(summary_table(a, config, &speed));
    tables.push(diagnostics_table(a));
    tables
}

/// Runs the whole pipeline and writes one file per table into `out_dir`.
pub fn run_report(config: &RunConfig) -> Result<ReportOutcome, ReportError> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir).map_err(|source| ReportError::Output {
        path: config.out_dir.clone(),
        source,
    })?;
    let analysis = Analysis::load(config)?;
    let mut files = Vec::new();
    for table in report_tables(&analysis, config) {
        let path = table
            .write_in(&config.out_dir, config.format)
            .map_err(|source| ReportError::Output {
                path: config.out_dir.join(&table.name),
                source,
            })?;
        files.push(path);
    }
    Ok(ReportOutcome {
        files,
        tree_errors: analysis.tree_errors.len(),
        comment_load: analysis.comment_load,
        edit_load: analysis.edit_load,
    })
}
