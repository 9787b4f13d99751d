//! Loading normalized edit/comment event files and binning them into dense
//! per-article daily activity series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;

/// Wire format of event timestamps.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed CSV header in {path}")]
    CsvHeader {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityKind {
    Edit,
    Comment,
}

impl ActivityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivityKind::Edit => "edit",
            ActivityKind::Comment => "comment",
        }
    }
}

impl fmt::Display for ActivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "edit" | "edits" => Ok(ActivityKind::Edit),
            "comment" | "comments" => Ok(ActivityKind::Comment),
            other => Err(format!("unknown activity kind `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InputFormat {
    #[default]
    Jsonl,
    Csv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EditEvent {
    pub article: String,
    pub timestamp: DateTime<Utc>,
}

/// One signed comment of a talk page.
///
/// `depth` is the tree level below the article: 0 for a thread-starting
/// comment, `parent.depth + 1` for a reply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommentEvent {
    pub article: String,
    pub id: String,
    pub parent: Option<String>,
    pub depth: u32,
    pub timestamp: Option<DateTime<Utc>>,
    pub author: Option<String>,
    pub doc_order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Edit(EditEvent),
    Comment(CommentEvent),
}

/// A line that could not be turned into an event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based line number in the input (the CSV header is line 1).
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Result of reading one event file. Every non-blank record line ends up
/// either in `events` or in `skipped`.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub events: Vec<T>,
    pub skipped: Vec<LineDiagnostic>,
    /// Comment records kept with their timestamp cleared because it did not parse.
    pub malformed_timestamps: usize,
    pub records: usize,
}

impl<T> Default for Loaded<T> {
    fn default() -> Self {
        Loaded {
            events: Vec::new(),
            skipped: Vec::new(),
            malformed_timestamps: 0,
            records: 0,
        }
    }
}

impl<T> Loaded<T> {
    fn map<U>(self, f: impl FnMut(T) -> U) -> Loaded<U> {
        Loaded {
            events: self.events.into_iter().map(f).collect(),
            skipped: self.skipped,
            malformed_timestamps: self.malformed_timestamps,
            records: self.records,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawEdit {
    article: String,
    ts: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawComment {
    article: String,
    id: String,
    parent: Option<String>,
    depth: u32,
    ts: Option<String>,
    author: Option<String>,
    ord: u64,
}

fn earliest_valid() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2001, 1, 1, 0, 0, 0).unwrap()
}

/// Parses a wire timestamp and checks it lies in `[2001-01-01, now]`.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    let naive = NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
        .map_err(|e| format!("bad timestamp `{s}`: {e}"))?;
    let ts = Utc.from_utc_datetime(&naive);
    if ts < earliest_valid() || ts > Utc::now() {
        return Err(format!("timestamp `{s}` outside [2001-01-01, now]"));
    }
    Ok(ts)
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

impl RawEdit {
    fn into_event(self) -> Result<EditEvent, String> {
        let ts = self.ts.ok_or_else(|| "missing timestamp".to_string())?;
        Ok(EditEvent {
            article: self.article,
            timestamp: parse_timestamp(&ts)?,
        })
    }
}

impl RawComment {
    /// Returns the event and whether a present timestamp had to be dropped.
    fn into_event(self) -> Result<(CommentEvent, bool), String> {
        if self.parent.is_some() == (self.depth == 0) {
            return Err(format!(
                "comment `{}`: depth {} inconsistent with parent {:?}",
                self.id, self.depth, self.parent
            ));
        }
        let (timestamp, malformed) = match self.ts.as_deref() {
            None => (None, false),
            Some(s) => match parse_timestamp(s) {
                Ok(ts) => (Some(ts), false),
                Err(_) => (None, true),
            },
        };
        Ok((
            CommentEvent {
                article: self.article,
                id: self.id,
                parent: self.parent,
                depth: self.depth,
                timestamp,
                author: self.author,
                doc_order: self.ord,
            },
            malformed,
        ))
    }
}

impl From<&CommentEvent> for RawComment {
    fn from(c: &CommentEvent) -> Self {
        RawComment {
            article: c.article.clone(),
            id: c.id.clone(),
            parent: c.parent.clone(),
            depth: c.depth,
            ts: c.timestamp.as_ref().map(format_timestamp),
            author: c.author.clone(),
            ord: c.doc_order,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Streams records of type `R` out of a reader, one `(line, result)` at a time.
fn read_records<R, F, T>(
    reader: impl Read,
    format: InputFormat,
    path: &Path,
    mut convert: F,
) -> Result<Loaded<T>, IngestError>
where
    R: for<'de> Deserialize<'de>,
    F: FnMut(R, &mut Loaded<T>) -> Result<T, String>,
{
    let mut out = Loaded::default();
    match format {
        InputFormat::Jsonl => {
            let reader = BufReader::new(reader);
            for (idx, line) in reader.lines().enumerate() {
                let line = line.map_err(|source| IngestError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                out.records += 1;
                let parsed = serde_json::from_str::<R>(&line)
                    .map_err(|e| e.to_string())
                    .and_then(|raw| convert(raw, &mut out));
                match parsed {
                    Ok(ev) => out.events.push(ev),
                    Err(message) => out.skipped.push(LineDiagnostic {
                        line: idx + 1,
                        message,
                    }),
                }
            }
        }
        InputFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(false)
                .from_reader(reader);
            let headers = rdr
                .headers()
                .map_err(|source| IngestError::CsvHeader {
                    path: path.to_path_buf(),
                    source,
                })?
                .clone();
            let mut record = csv::StringRecord::new();
            loop {
                let line = rdr.position().line() as usize;
                match rdr.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {
                        out.records += 1;
                        let parsed = record
                            .deserialize::<R>(Some(&headers))
                            .map_err(|e| e.to_string())
                            .and_then(|raw| convert(raw, &mut out));
                        match parsed {
                            Ok(ev) => out.events.push(ev),
                            Err(message) => out.skipped.push(LineDiagnostic { line, message }),
                        }
                    }
                    Err(e) => {
                        if let csv::ErrorKind::Io(_) = e.kind() {
                            let csv::ErrorKind::Io(source) = e.into_kind() else {
                                unreachable!()
                            };
                            return Err(IngestError::Io {
                                path: path.to_path_buf(),
                                source,
                            });
                        }
                        out.records += 1;
                        out.skipped.push(LineDiagnostic {
                            line,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn read_edits(reader: impl Read, format: InputFormat) -> Result<Loaded<EditEvent>, IngestError> {
    read_records(reader, format, Path::new("<reader>"), |raw: RawEdit, _| raw.into_event())
}

pub fn read_comments(
    reader: impl Read,
    format: InputFormat,
) -> Result<Loaded<CommentEvent>, IngestError> {
    read_comments_at(reader, format, Path::new("<reader>"))
}

fn read_comments_at(
    reader: impl Read,
    format: InputFormat,
    path: &Path,
) -> Result<Loaded<CommentEvent>, IngestError> {
    read_records(reader, format, path, |raw: RawComment, out| {
        let (ev, malformed) = raw.into_event()?;
        if malformed {
            out.malformed_timestamps += 1;
        }
        Ok(ev)
    })
}

pub fn load_edits(path: &Path, format: InputFormat) -> Result<Loaded<EditEvent>, IngestError> {
    read_records(open(path)?, format, path, |raw: RawEdit, _| raw.into_event())
}

pub fn load_comments(path: &Path, format: InputFormat) -> Result<Loaded<CommentEvent>, IngestError> {
    read_comments_at(open(path)?, format, path)
}

/// Loads an event file of the given kind, preserving file order.
pub fn load_events(
    path: &Path,
    kind: ActivityKind,
    format: InputFormat,
) -> Result<Loaded<Event>, IngestError> {
    Ok(match kind {
        ActivityKind::Edit => load_edits(path, format)?.map(Event::Edit),
        ActivityKind::Comment => load_comments(path, format)?.map(Event::Comment),
    })
}

/// Serializes one comment in the comment JSONL schema (no trailing newline).
pub fn comment_to_json(c: &CommentEvent) -> String {
    serde_json::to_string(&RawComment::from(c)).expect("comment record serializes")
}

pub fn write_comments_jsonl<W: Write>(mut w: W, comments: &[CommentEvent]) -> io::Result<()> {
    for c in comments {
        writeln!(w, "{}", comment_to_json(c))?;
    }
    Ok(())
}

/// Anything that contributes to an article's daily activity.
pub trait DatedEvent {
    fn article(&self) -> &str;
    fn day(&self) -> Option<NaiveDate>;
}

impl DatedEvent for EditEvent {
    fn article(&self) -> &str {
        &self.article
    }
    fn day(&self) -> Option<NaiveDate> {
        Some(self.timestamp.date_naive())
    }
}

impl DatedEvent for CommentEvent {
    fn article(&self) -> &str {
        &self.article
    }
    fn day(&self) -> Option<NaiveDate> {
        self.timestamp.map(|t| t.date_naive())
    }
}

impl DatedEvent for Event {
    fn article(&self) -> &str {
        match self {
            Event::Edit(e) => &e.article,
            Event::Comment(c) => &c.article,
        }
    }
    fn day(&self) -> Option<NaiveDate> {
        match self {
            Event::Edit(e) => e.day(),
            Event::Comment(c) => c.day(),
        }
    }
}

/// Daily event counts of one article, trimmed to its active span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivitySeries {
    pub article: String,
    pub kind: ActivityKind,
    pub start_day: NaiveDate,
    /// One entry per consecutive calendar day; first and last are non-zero.
    pub counts: Vec<u32>,
}

impl ActivitySeries {
    /// Builds a series from raw counts, trimming zero days at both ends.
    /// Returns `None` when every count is zero.
    pub fn from_counts(
        article: impl Into<String>,
        kind: ActivityKind,
        start_day: NaiveDate,
        counts: &[u32],
    ) -> Option<Self> {
        let first = counts.iter().position(|&c| c > 0)?;
        let last = counts.iter().rposition(|&c| c > 0)?;
        Some(ActivitySeries {
            article: article.into(),
            kind,
            start_day: start_day + chrono::Days::new(first as u64),
            counts: counts[first..=last].to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn day(&self, index: usize) -> NaiveDate {
        self.start_day + chrono::Days::new(index as u64)
    }

    pub fn end_day(&self) -> NaiveDate {
        self.day(self.counts.len().saturating_sub(1))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Bins dated events into one [`ActivitySeries`] per article.
pub fn build_series<'a, E, I>(events: I, kind: ActivityKind) -> BTreeMap<String, ActivitySeries>
where
    E: DatedEvent + 'a,
    I: IntoIterator<Item = &'a E>,
{
    build_series_with(events, kind, Exec::default())
}

pub fn build_series_with<'a, E, I>(
    events: I,
    kind: ActivityKind,
    exec: Exec,
) -> BTreeMap<String, ActivitySeries>
where
    E: DatedEvent + 'a,
    I: IntoIterator<Item = &'a E>,
{
    let mut by_article: HashMap<&'a str, Vec<i32>> = HashMap::new();
    for ev in events {
        if let Some(day) = ev.day() {
            by_article
                .entry(ev.article())
                .or_default()
                .push(day.num_days_from_ce());
        }
    }
    let groups: Vec<(&str, Vec<i32>)> = by_article.into_iter().collect();
    exec.map_owned(groups, |(article, days)| {
        let lo = *days.iter().min().expect("group is non-empty");
        let hi = *days.iter().max().expect("group is non-empty");
        let mut counts = vec![0u32; (hi - lo) as usize + 1];
        for d in days {
            counts[(d - lo) as usize] += 1;
        }
        ActivitySeries {
            article: article.to_string(),
            kind,
            start_day: NaiveDate::from_num_days_from_ce_opt(lo).expect("day came from a date"),
            counts,
        }
    })
    .into_iter()
    .map(|s| (s.article.clone(), s))
    .collect()
}
