//! Replays daily counts through the streaming detector and raises alerts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;

use chrono::NaiveDate;
use thiserror::Error;

use crate::ingest::{ActivityKind, DatedEvent};
use crate::timeseries::{AlertTier, PeakParams, StreamError, StreamState};

#[derive(Debug, Error, PartialEq)]
pub enum WatchError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {day} is earlier than {latest}; replay with sorting enabled")]
    OutOfOrder {
        line: usize,
        day: NaiveDate,
        latest: NaiveDate,
    },
    #[error("line {line}")]
    Stream {
        line: usize,
        #[source]
        source: StreamError,
    },
}

/// One line of a watch feed: the count of `kind` events on `day`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatchRecord {
    pub article: String,
    pub kind: ActivityKind,
    pub day: NaiveDate,
    pub count: u32,
}

impl WatchRecord {
    /// Parses `article,kind,date,count`. The article may itself contain commas.
    pub fn parse(line: &str) -> Result<Self, String> {
        let mut parts = line.trim_end_matches(['\r', '\n']).rsplitn(4, ',');
        let count = parts.next().ok_or("missing count")?;
        let date = parts.next().ok_or("missing date")?;
        let kind = parts.next().ok_or("missing kind")?;
        let article = parts.next().ok_or("missing article")?;
        if article.is_empty() {
            return Err("empty article".into());
        }
        Ok(WatchRecord {
            article: article.to_string(),
            kind: kind.trim().parse()?,
            day: NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
                .map_err(|e| format!("bad date `{}`: {e}", date.trim()))?,
            count: count.trim().parse().map_err(|e| format!("bad count `{}`: {e}", count.trim()))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alert {
    pub day: NaiveDate,
    pub article: String,
    pub kind: ActivityKind,
    pub count: u32,
    pub ratio: f64,
    pub tier: AlertTier,
}

impl fmt::Display for Alert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.day,
            self.article,
            self.kind,
            self.count,
            super::fmt_float(self.ratio),
            self.tier
        )
    }
}

pub const ALERT_HEADER: &str = "day,article,kind,count,ratio,tier";

/// Streaming detector over many (article, kind) feeds at once.
#[derive(Debug)]
pub struct Watcher {
    params: PeakParams,
    states: HashMap<(String, ActivityKind), StreamState>,
    latest: Option<NaiveDate>,
    lines: usize,
}

impl Watcher {
    pub fn new(params: PeakParams) -> Self {
        Watcher {
            params,
            states: HashMap::new(),
            latest: None,
            lines: 0,
        }
    }

    /// Feeds one record; dates must not go backwards across the whole feed.
    pub fn feed(&mut self, rec: &WatchRecord) -> Result<Option<Alert>, WatchError> {
        self.lines += 1;
        let line = self.lines;
        if let Some(latest) = self.latest {
            if rec.day < latest {
                return Err(WatchError::OutOfOrder {
                    line,
                    day: rec.day,
                    latest,
                });
            }
        }
        self.latest = Some(rec.day);
        let state = self.states.entry((rec.article.clone(), rec.kind)).or_default();
        let out = state
            .step(rec.day, rec.count, &self.params)
            .map_err(|source| WatchError::Stream { line, source })?;
        if !out.is_peak {
            return Ok(None);
        }
        Ok(AlertTier::classify(out.ratio, self.params.c).map(|tier| Alert {
            day: rec.day,
            article: rec.article.clone(),
            kind: rec.kind,
            count: rec.count,
            ratio: out.ratio,
            tier,
        }))
    }

    /// Parses and feeds one text line. Blank lines and a header are ignored.
    pub fn feed_line(&mut self, line: &str) -> Result<Option<Alert>, WatchError> {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed == "article,kind,date,count" {
            self.lines += 1;
            return Ok(None);
        }
        let rec = WatchRecord::parse(trimmed).map_err(|message| WatchError::Parse {
            line: self.lines + 1,
            message,
        })?;
        self.feed(&rec)
    }
}

/// Aggregates dated events into one record per (article, kind, day),
/// ordered by day, then article, then kind.
pub fn daily_records<'a, E, I>(events: I, kind: ActivityKind) -> Vec<WatchRecord>
where
    E: DatedEvent + 'a,
    I: IntoIterator<Item = &'a E>,
{
    let mut counts: BTreeMap<(NaiveDate, String), u32> = BTreeMap::new();
    for e in events {
        if let Some(day) = e.day() {
            *counts.entry((day, e.article().to_string())).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((day, article), count)| WatchRecord { article, kind, day, count })
        .collect()
}

/// Replays a feed and returns every alert in feed order.
///
/// Without `sort`, a record dated before an earlier one is an error. With
/// `sort`, records are stably ordered by day first.
pub fn simulate_watch(
    params: &PeakParams,
    mut records: Vec<WatchRecord>,
    sort: bool,
) -> Result<Vec<Alert>, WatchError> {
    if sort {
        records.sort_by_key(|r| r.day);
    }
    let mut watcher = Watcher::new(*params);
    let mut alerts = Vec::new();
    for r in &records {
        alerts.extend(watcher.feed(r)?);
    }
    Ok(alerts)
}

/// Reads `article,kind,date,count` lines from a reader.
pub fn read_watch_records(reader: impl BufRead) -> Result<Vec<WatchRecord>, WatchError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| WatchError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t == "article,kind,date,count" {
            continue;
        }
        out.push(WatchRecord::parse(t).map_err(|message| WatchError::Parse { line: i + 1, message })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(n: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2008, 1, 1).unwrap() + chrono::Days::new(n)
    }

    fn feed(counts: &[u32]) -> Vec<WatchRecord> {
        counts
            .iter()
            .enumerate()
            .map(|(i, &count)| WatchRecord {
                article: "A".into(),
                kind: ActivityKind::Edit,
                day: day(i as u64),
                count,
            })
            .collect()
    }

    #[test]
    fn one_spike_one_alert() {
        let mut counts = vec![3; 30];
        counts[20] = 80;
        let alerts = simulate_watch(&PeakParams::default(), feed(&counts), false).unwrap();
        assert_eq!(alerts.len(), 1);
        assert_eq!(alerts[0].day, day(20));
        assert_eq!(alerts[0].tier, AlertTier::Elevated);
    }

    #[test]
    fn flat_stream_is_quiet() {
        let alerts = simulate_watch(&PeakParams::default(), feed(&[7; 60]), false).unwrap();
        assert!(alerts.is_empty());
    }

    #[test]
    fn two_spikes_two_alerts() {
        let mut counts = vec![2; 40];
        counts[20] = 60;
        counts[25] = 250;
        let alerts = simulate_watch(&PeakParams::default(), feed(&counts), false).unwrap();
        let days: Vec<_> = alerts.iter().map(|a| a.day).collect();
        assert_eq!(days, vec![day(20), day(25)]);
        assert_eq!(alerts[1].tier, AlertTier::Severe);
    }

    #[test]
    fn out_of_order_needs_sort() {
        let mut recs = feed(&[1, 2, 3]);
        recs.swap(0, 2);
        assert!(matches!(
            simulate_watch(&PeakParams::default(), recs.clone(), false),
            Err(WatchError::OutOfOrder { line: 2, .. })
        ));
        assert!(simulate_watch(&PeakParams::default(), recs, true).is_ok());
    }

    #[test]
    fn parse_line_with_comma_in_title() {
        let r = WatchRecord::parse("Foo, Bar,comment,2009-05-01,12").unwrap();
        assert_eq!(r.article, "Foo, Bar");
        assert_eq!(r.kind, ActivityKind::Comment);
        assert_eq!(r.count, 12);
        assert!(WatchRecord::parse("x,edit,2009-13-01,1").is_err());
    }

    #[test]
    fn alert_line_format() {
        let mut w = Watcher::new(PeakParams::default());
        for _ in 0..3 {
            w.feed_line("").unwrap();
        }
        let a = w.feed_line("A,edit,2009-01-01,51").unwrap().unwrap();
        assert_eq!(a.to_string(), "2009-01-01,A,edit,51,5.100000,>=c");
    }
}
