//! Peak detection on daily activity series.
//!
//! A day `t` peaks when `n(t) > c * max(m(t), n_min)`, where `m(t)` is the
//! median activity over a window centred on `t`. Consecutive peak days are
//! grouped into a [`PeakRun`]; a run of length two is a twin peak.

mod median;
mod stream;

pub use median::{sliding_median, sliding_median_counts, SortedWindow};
pub use stream::{stream_step, AlertTier, StreamError, StreamOutput, StreamState};

use chrono::NaiveDate;
use thiserror::Error;

use crate::exec::Exec;
use crate::ingest::{ActivityKind, ActivitySeries};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("peak factor c must be > 1, got {0}")]
    PeakFactor(f64),
    #[error("minimum activity n_min must be >= 1")]
    MinActivity,
    #[error("window half-width must be >= 1 day")]
    Window,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakParams {
    /// Peak factor.
    pub c: f64,
    /// Floor applied to the median.
    pub n_min: u32,
    /// Days on each side of `t` (or days before `t` when streaming).
    pub window_halfwidth: usize,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            c: 5.0,
            n_min: 10,
            window_halfwidth: 14,
        }
    }
}

impl PeakParams {
    pub fn new(c: f64, n_min: u32, window_halfwidth: usize) -> Result<Self, ParamError> {
        let p = PeakParams {
            c,
            n_min,
            window_halfwidth,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.c > 1.0 && self.c.is_finite()) {
            return Err(ParamError::PeakFactor(self.c));
        }
        if self.n_min < 1 {
            return Err(ParamError::MinActivity);
        }
        if self.window_halfwidth < 1 {
            return Err(ParamError::Window);
        }
        Ok(())
    }

    /// `max(median, n_min)`.
    #[inline]
    pub fn floor(&self, median: f64) -> f64 {
        median.max(self.n_min as f64)
    }

    #[inline]
    pub fn is_peak(&self, count: u32, median: f64) -> bool {
        count as f64 > self.c * self.floor(median)
    }

    #[inline]
    pub fn ratio(&self, count: u32, median: f64) -> f64 {
        count as f64 / self.floor(median)
    }
}

/// A maximal run of consecutive peak days.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakRun {
    pub article: String,
    pub kind: ActivityKind,
    pub start_day: NaiveDate,
    pub length: u32,
    /// `n(t) / max(m(t), n_min)` for each day of the run.
    pub day_ratios: Vec<f64>,
}

impl PeakRun {
    pub fn end_day(&self) -> NaiveDate {
        self.start_day + chrono::Days::new(self.length as u64 - 1)
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.length as u64).map(move |i| self.start_day + chrono::Days::new(i))
    }

    pub fn max_ratio(&self) -> f64 {
        self.day_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_twin(&self) -> bool {
        self.length == 2
    }
}

/// Per-day peak flags for raw counts with a centred window.
pub fn peak_days(counts: &[u32], params: &PeakParams) -> Vec<bool> {
    let medians = sliding_median_counts(counts, params.window_halfwidth);
    counts
        .iter()
        .zip(&medians)
        .map(|(&n, &m)| params.is_peak(n, m))
        .collect()
}

/// Groups consecutive flagged days into runs.
pub fn runs_from_flags(
    series: &ActivitySeries,
    flags: &[bool],
    ratios: impl Fn(usize) -> f64,
) -> Vec<PeakRun> {
    let mut runs = Vec::new();
    let mut t = 0;
    while t < flags.len() {
        if !flags[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < flags.len() && flags[t] {
            t += 1;
        }
        runs.push(PeakRun {
            article: series.article.clone(),
            kind: series.kind,
            start_day: series.day(start),
            length: (t - start) as u32,
            day_ratios: (start..t).map(&ratios).collect(),
        });
    }
    runs
}

/// Detects peak runs in chronological order.
pub fn detect_peaks(series: &ActivitySeries, params: &PeakParams) -> Vec<PeakRun> {
    let medians = sliding_median(series, params.window_halfwidth);
    let flags: Vec<bool> = series
        .counts
        .iter()
        .zip(&medians)
        .map(|(&n, &m)| params.is_peak(n, m))
        .collect();
    runs_from_flags(series, &flags, |t| params.ratio(series.counts[t], medians[t]))
}

/// Runs detection over many series; output keeps input order.
pub fn detect_all(series: &[&ActivitySeries], params: &PeakParams, exec: Exec) -> Vec<Vec<PeakRun>> {
    exec.map(series, |s| detect_peaks(s, params))
}

/// Days between start days of consecutive runs (runs count once each).
pub fn inter_peak_intervals(runs: &[PeakRun]) -> Vec<u32> {
    runs.windows(2)
        .map(|w| (w[1].start_day - w[0].start_day).num_days() as u32)
        .collect()
}

/// Both peak counters: distinct runs and individual peak days.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PeakTally {
    pub runs: u64,
    pub days: u64,
}

impl PeakTally {
    pub fn of(runs: &[PeakRun]) -> Self {
        PeakTally {
            runs: runs.len() as u64,
            days: runs.iter().map(|r| r.length as u64).sum(),
        }
    }

    pub fn add(&mut self, other: PeakTally) {
        self.runs += other.runs;
        self.days += other.days;
    }
}
