//! Signature detection: user links and dated signature stamps.

use std::fs;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveTime, TimeZone, Utc};
use regex::Regex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("cannot read pattern file {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("pattern file line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Author and/or timestamp found at the end of a comment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureMatch {
    pub author: Option<String>,
    pub timestamp: Option<DateTime<Utc>>,
    /// Byte range of the signature within the scanned text.
    pub span: Range<usize>,
}

const STANDARD_PATTERNS: &[&str] = &[
    // 12:34, 5 March 2007 (UTC)
    r"(?P<hour>\d{1,2}):(?P<minute>\d{2}),?\s+(?P<day>\d{1,2})\s+(?P<month>[A-Za-z]+)\.?,?\s+(?P<year>\d{4})\s*\((?:UTC|GMT)\)",
    // 12:34, March 5, 2007 (UTC)
    r"(?P<hour>\d{1,2}):(?P<minute>\d{2}),?\s+(?P<month>[A-Za-z]+)\.?\s+(?P<day>\d{1,2}),?\s+(?P<year>\d{4})\s*\((?:UTC|GMT)\)",
    // 5 March 2007 (UTC)
    r"(?P<day>\d{1,2})\s+(?P<month>[A-Za-z]+)\.?,?\s+(?P<year>\d{4})\s*\((?:UTC|GMT)\)",
];

/// Ordered set of date-stamp regexes.
///
/// Every pattern must define the named groups `day`, `month` and `year`;
/// `hour` and `minute` are optional and default to midnight.
#[derive(Clone, Debug)]
pub struct PatternRegistry {
    patterns: Vec<Regex>,
}

impl Default for PatternRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl PatternRegistry {
    pub fn standard() -> Self {
        PatternRegistry {
            patterns: STANDARD_PATTERNS
                .iter()
                .map(|p| Regex::new(p).expect("built-in pattern compiles"))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn add(&mut self, pattern: &str) -> Result<(), String> {
        let re = Regex::new(pattern).map_err(|e| e.to_string())?;
        let names: Vec<&str> = re.capture_names().flatten().collect();
        for required in ["day", "month", "year"] {
            if !names.contains(&required) {
                return Err(format!("pattern lacks named group `{required}`"));
            }
        }
        self.patterns.push(re);
        Ok(())
    }

    /// Standard patterns plus one regex per non-blank, non-`#` line of `text`.
    pub fn with_extra(text: &str) -> Result<Self, PatternError> {
        let mut reg = Self::standard();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            reg.add(line).map_err(|message| PatternError::Invalid {
                line: idx + 1,
                message,
            })?;
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self, PatternError> {
        let text = fs::read_to_string(path).map_err(|source| PatternError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::with_extra(&text)
    }

    /// Last date stamp in `text`: the match ending furthest right, longest on ties.
    fn last_stamp(&self, text: &str) -> Option<(Range<usize>, Option<DateTime<Utc>>)> {
        let mut best: Option<(Range<usize>, regex::Captures<'_>)> = None;
        for re in &self.patterns {
            // Scanning all matches is linear; signatures sit at the end anyway.
            if let Some(caps) = re.captures_iter(text).last() {
                let m = caps.get(0).expect("group 0");
                let better = match &best {
                    None => true,
                    Some((r, _)) => m.end() > r.end || (m.end() == r.end && m.start() < r.start),
                };
                if better {
                    best = Some((m.range(), caps));
                }
            }
        }
        best.map(|(range, caps)| (range, stamp_from_captures(&caps)))
    }
}

fn month_number(name: &str) -> Option<u32> {
    const MONTHS: [&str; 12] = [
        "january", "february", "march", "april", "may", "june", "july", "august", "september",
        "october", "november", "december",
    ];
    let lower = name.to_ascii_lowercase();
    if lower.len() < 3 {
        return None;
    }
    MONTHS
        .iter()
        .position(|m| *m == lower || (lower.len() <= 4 && m.starts_with(&lower)))
        .map(|i| i as u32 + 1)
}

/// `None` when the stamp has the right shape but names an impossible date.
fn stamp_from_captures(caps: &regex::Captures<'_>) -> Option<DateTime<Utc>> {
    let num = |name: &str| caps.name(name).and_then(|m| m.as_str().parse::<u32>().ok());
    let day = num("day")?;
    let year = num("year")? as i32;
    let month = month_number(caps.name("month")?.as_str())?;
    let hour = num("hour").unwrap_or(0);
    let minute = num("minute").unwrap_or(0);
    if year < 2001 {
        return None;
    }
    let date = NaiveDate::from_ymd_opt(year, month, day)?;
    let time = NaiveTime::from_hms_opt(hour, minute, 0)?;
    let ts = Utc.from_utc_datetime(&date.and_time(time));
    (ts <= Utc::now()).then_some(ts)
}

fn user_link_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\[\[\s*(?:user(?:[ _]talk)?\s*:\s*|special\s*:\s*contributions\s*/\s*)([^|\]\[/#]+)[^\]]*\]\]",
        )
        .unwrap()
    })
}

fn any_link_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\[[^\]]*\]\]").unwrap())
}

fn normalize_user(name: &str) -> String {
    name.trim().replace('_', " ")
}

/// Last user link fully contained in `text`, with its byte range.
fn last_user_link(text: &str) -> Option<(Range<usize>, String)> {
    user_link_re()
        .captures_iter(text)
        .last()
        .map(|c| (c.get(0).unwrap().range(), normalize_user(&c[1])))
}

/// True if `rest` holds only further links and separator punctuation.
fn is_signature_tail(rest: &str) -> bool {
    any_link_re()
        .replace_all(rest, "")
        .chars()
        .all(|ch| ch.is_whitespace() || "()-–—|·.,:;".contains(ch))
}

/// Finds the signature closing `body`, if any.
///
/// A dated signature is the last date stamp in the body; its author is the
/// last user link on the same line before the stamp. Without a stamp, a
/// user link that ends the last non-empty line counts as an undated
/// signature. Unexpanded `~~~~` is not a signature.
pub fn extract_signature(body: &str) -> Option<SignatureMatch> {
    extract_signature_with(body, &PatternRegistry::standard())
}

pub fn extract_signature_with(body: &str, patterns: &PatternRegistry) -> Option<SignatureMatch> {
    if let Some((stamp, timestamp)) = patterns.last_stamp(body) {
        let line_start = body[..stamp.start].rfind('\n').map_or(0, |i| i + 1);
        let author = last_user_link(&body[line_start..stamp.start])
            .map(|(r, name)| (r.start + line_start, name));
        if author.is_none() && timestamp.is_none() {
            return None;
        }
        let start = author.as_ref().map_or(stamp.start, |(s, _)| *s);
        return Some(SignatureMatch {
            author: author.map(|(_, n)| n),
            timestamp,
            span: start..stamp.end,
        });
    }
    let trimmed = body.trim_end();
    let line_start = trimmed.rfind('\n').map_or(0, |i| i + 1);
    let line = &trimmed[line_start..];
    let (range, name) = last_user_link(line)?;
    if !is_signature_tail(&line[range.end..]) {
        return None;
    }
    Some(SignatureMatch {
        author: Some(name),
        timestamp: None,
        span: line_start + range.start..trimmed.len(),
    })
}
