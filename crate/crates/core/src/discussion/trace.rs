use chrono::{DateTime, Utc};
use thiserror::Error;

use super::{DiscussionTree, HIndexCounter};

/// Default multiple of Δh that must pass without growth before a discussion
/// counts as mature. Heuristic.
pub const DEFAULT_MATURITY_MULTIPLE: f64 = 3.0;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("discussion {0} has no dated comments")]
    NoDatedComments(String),
    #[error("discussion {0}: no growth observed")]
    NoGrowth(String),
    #[error("maturity multiple must be a finite value >= 0, got {0}")]
    InvalidMultiple(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HStep {
    pub timestamp: DateTime<Utc>,
    pub h: u32,
}

/// The h-index of a discussion as a step function of time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HTrace {
    pub article: String,
    /// First step carries `h0`; every later step raises h by exactly one.
    pub steps: Vec<HStep>,
    pub h0: u32,
    /// Earliest dated comment.
    pub origin: DateTime<Utc>,
    pub n_comments: usize,
}

impl HTrace {
    pub fn final_h(&self) -> u32 {
        self.steps.last().map_or(0, |s| s.h)
    }

    /// When the final h-index was first reached.
    pub fn final_reached(&self) -> Option<DateTime<Utc>> {
        self.steps.last().map(|s| s.timestamp)
    }

    /// h-index in effect at `t` (0 before the first step).
    pub fn h_at(&self, t: DateTime<Utc>) -> u32 {
        self.steps
            .iter()
            .take_while(|s| s.timestamp <= t)
            .last()
            .map_or(0, |s| s.h)
    }
}

/// Effective timestamps in document order.
///
/// An undated comment takes the timestamp of the nearest preceding dated
/// comment; undated comments before any dated one take the earliest dated
/// timestamp of the discussion.
pub fn effective_timestamps(tree: &DiscussionTree) -> Option<Vec<DateTime<Utc>>> {
    let origin = tree.nodes().iter().filter_map(|n| n.timestamp).min()?;
    let mut last = origin;
    Some(
        tree.nodes()
            .iter()
            .map(|n| {
                if let Some(t) = n.timestamp {
                    last = t;
                }
                last
            })
            .collect(),
    )
}

/// Replays comments by effective timestamp and records every h increase.
///
/// All comments sharing the earliest timestamp are inserted before the
/// first step is recorded, so a trace can start above h = 1 when undated
/// history precedes the first dated comment. A later jump of several
/// levels at one instant yields one step per level, all at that instant.
pub fn h_trace(tree: &DiscussionTree) -> Result<HTrace, TraceError> {
    let effective = effective_timestamps(tree)
        .ok_or_else(|| TraceError::NoDatedComments(tree.article().to_string()))?;
    let origin = *effective.iter().min().expect("non-empty");
    let mut order: Vec<usize> = (0..effective.len()).collect();
    // nodes are in document order, so a stable sort keeps it for ties
    order.sort_by_key(|&i| effective[i]);

    let mut counter = HIndexCounter::new();
    let mut steps: Vec<HStep> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let t = effective[order[i]];
        let before = counter.h();
        while i < order.len() && effective[order[i]] == t {
            counter.insert(tree.nodes()[order[i]].depth);
            i += 1;
        }
        let after = counter.h();
        if steps.is_empty() {
            if after > 0 {
                steps.push(HStep { timestamp: t, h: after });
            }
        } else {
            steps.extend((before + 1..=after).map(|h| HStep { timestamp: t, h }));
        }
    }
    Ok(HTrace {
        article: tree.article().to_string(),
        h0: steps.first().map_or(0, |s| s.h),
        steps,
        origin,
        n_comments: tree.len(),
    })
}

/// Average time in days for the h-index to grow by one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaH {
    pub value: f64,
    pub first_increase: DateTime<Utc>,
    pub last_increase: DateTime<Utc>,
    pub final_h: u32,
    pub intervals_used: u32,
}

fn days_between(a: DateTime<Utc>, b: DateTime<Utc>) -> f64 {
    (b - a).num_seconds() as f64 / SECONDS_PER_DAY
}

/// `(t_last - t_first) / (h_last - h_first)`, averaging only over the
/// increases actually observed when the trace starts above h = 1.
pub fn delta_h(trace: &HTrace) -> Result<DeltaH, TraceError> {
    let no_growth = || TraceError::NoGrowth(trace.article.clone());
    let first = trace.steps.first().ok_or_else(no_growth)?;
    let last = trace.steps.last().ok_or_else(no_growth)?;
    if last.h <= first.h {
        return Err(no_growth());
    }
    let intervals = last.h - first.h;
    Ok(DeltaH {
        value: days_between(first.timestamp, last.timestamp) / intervals as f64,
        first_increase: first.timestamp,
        last_increase: last.timestamp,
        final_h: last.h,
        intervals_used: intervals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaturityStatus {
    pub mature: bool,
    pub time_since_last_increase: f64,
    pub threshold_multiple: f64,
    pub delta_h: f64,
    /// `threshold_multiple == 0`: every discussion is trivially mature.
    pub degenerate: bool,
}

/// Mature once `k * Δh` days have passed since the last h increase.
pub fn maturity(trace: &HTrace, now: DateTime<Utc>, k: f64) -> Result<MaturityStatus, TraceError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(TraceError::InvalidMultiple(k));
    }
    let dh = delta_h(trace)?;
    let since = days_between(dh.last_increase, now);
    Ok(MaturityStatus {
        mature: since >= k * dh.value,
        time_since_last_increase: since,
        threshold_multiple: k,
        delta_h: dh.value,
        degenerate: k == 0.0,
    })
}
