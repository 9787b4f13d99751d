//! Corpus-level statistics over detected peak runs.

mod correlation;
mod histogram;
mod powerlaw;

pub use correlation::{pearson, Correlation};
pub use histogram::{Bin, BinScheme, Histogram};
pub use powerlaw::{fit_power_law, PowerLawFit, MIN_POWER_LAW_SAMPLES};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Days, NaiveDate};
use thiserror::Error;

use crate::timeseries::PeakRun;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample {0} is not positive")]
    NonPositiveSample(f64),
    #[error("bins per decade must be >= 1")]
    BinsPerDecade,
    #[error("x_min must be >= 1")]
    XMin,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("zero variance")]
    ZeroVariance,
}

/// Inter-peak gaps that mark a yearly recurring peak.
pub const ANNIVERSARY_GAPS: [u32; 3] = [364, 365, 366];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OverlapReport {
    pub tolerance_days: u32,
    pub overlapping_comment_peaks: u64,
    pub articles_with_overlap: u64,
}

/// Comment runs with a peak day within `tolerance` days of an edit peak day
/// of the same article.
pub fn overlap(comment_runs: &[PeakRun], edit_runs: &[PeakRun], tolerance: u32) -> OverlapReport {
    let mut edit_days: HashMap<&str, BTreeSet<NaiveDate>> = HashMap::new();
    for run in edit_runs {
        edit_days.entry(&run.article).or_default().extend(run.days());
    }
    let tol = Days::new(tolerance as u64);
    let mut runs = 0u64;
    let mut articles: BTreeSet<&str> = BTreeSet::new();
    for run in comment_runs {
        let Some(days) = edit_days.get(run.article.as_str()) else {
            continue;
        };
        let hit = run.days().any(|d| days.range(d - tol..=d + tol).next().is_some());
        if hit {
            runs += 1;
            articles.insert(&run.article);
        }
    }
    OverlapReport {
        tolerance_days: tolerance,
        overlapping_comment_peaks: runs,
        articles_with_overlap: articles.len() as u64,
    }
}

/// Runs grouped per article, each group sorted by start day.
pub fn group_by_article(runs: &[PeakRun]) -> BTreeMap<&str, Vec<&PeakRun>> {
    let mut out: BTreeMap<&str, Vec<&PeakRun>> = BTreeMap::new();
    for r in runs {
        out.entry(r.article.as_str()).or_default().push(r);
    }
    for group in out.values_mut() {
        group.sort_by_key(|r| r.start_day);
    }
    out
}

/// Number of consecutive-run gaps of 364-366 days, per article with runs.
pub fn anniversaries(runs: &[PeakRun]) -> BTreeMap<String, u32> {
    group_by_article(runs)
        .into_iter()
        .map(|(article, group)| {
            let n = group
                .windows(2)
                .filter(|w| {
                    let gap = (w[1].start_day - w[0].start_day).num_days();
                    ANNIVERSARY_GAPS.contains(&(gap as u32))
                })
                .count();
            (article.to_string(), n as u32)
        })
        .collect()
}

/// Intervals between consecutive runs, pooled across articles.
pub fn pooled_intervals(runs: &[PeakRun]) -> Vec<u64> {
    group_by_article(runs)
        .values()
        .flat_map(|group| {
            group
                .windows(2)
                .map(|w| (w[1].start_day - w[0].start_day).num_days() as u64)
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Distribution of the number of runs per article (articles with >= 1 run).
pub fn peaks_per_article(runs: &[PeakRun]) -> Histogram {
    Histogram::integer(group_by_article(runs).values().map(|g| g.len() as u64))
}

pub fn run_lengths(runs: &[PeakRun]) -> Histogram {
    Histogram::integer(runs.iter().map(|r| r.length as u64))
}

pub fn interval_histogram(runs: &[PeakRun]) -> Histogram {
    Histogram::integer(pooled_intervals(runs))
}

pub fn log_binned_histogram(samples: &[f64], bins_per_decade: u32) -> Result<Histogram, StatsError> {
    Histogram::log_binned(samples, bins_per_decade)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ActivityKind;

    fn run(article: &str, kind: ActivityKind, day: u64, length: u32) -> PeakRun {
        PeakRun {
            article: article.into(),
            kind,
            start_day: NaiveDate::from_ymd_opt(2007, 1, 1).unwrap() + Days::new(day),
            length,
            day_ratios: vec![6.0; length as usize],
        }
    }

    fn c(a: &str, d: u64) -> PeakRun {
        run(a, ActivityKind::Comment, d, 1)
    }

    fn e(a: &str, d: u64) -> PeakRun {
        run(a, ActivityKind::Edit, d, 1)
    }

    #[test]
    fn same_day_overlap() {
        let r = overlap(&[c("A", 10)], &[e("A", 10)], 0);
        assert_eq!(r.overlapping_comment_peaks, 1);
        assert_eq!(r.articles_with_overlap, 1);
    }

    #[test]
    fn overlap_tolerance() {
        assert_eq!(overlap(&[c("A", 10)], &[e("A", 12)], 1).overlapping_comment_peaks, 0);
        assert_eq!(overlap(&[c("A", 10)], &[e("A", 12)], 2).overlapping_comment_peaks, 1);
        assert_eq!(overlap(&[c("A", 12)], &[e("A", 10)], 2).overlapping_comment_peaks, 1);
    }

    #[test]
    fn overlap_needs_same_article() {
        assert_eq!(overlap(&[c("A", 10)], &[e("B", 10)], 2).overlapping_comment_peaks, 0);
    }

    #[test]
    fn multi_day_runs_overlap_on_any_day() {
        let comment = run("A", ActivityKind::Comment, 10, 3);
        let edit = run("A", ActivityKind::Edit, 14, 2);
        assert_eq!(overlap(std::slice::from_ref(&comment), std::slice::from_ref(&edit), 0).overlapping_comment_peaks, 0);
        assert_eq!(overlap(&[comment], &[edit], 2).overlapping_comment_peaks, 1);
    }

    #[test]
    fn overlap_articles_are_distinct() {
        let r = overlap(&[c("A", 1), c("A", 50), c("B", 9)], &[e("A", 1), e("A", 50), e("B", 9)], 0);
        assert_eq!(r.overlapping_comment_peaks, 3);
        assert_eq!(r.articles_with_overlap, 2);
    }

    #[test]
    fn anniversary_counts() {
        assert_eq!(anniversaries(&[e("A", 0), e("A", 365)])["A"], 1);
        assert_eq!(anniversaries(&[e("A", 730), e("A", 0), e("A", 365)])["A"], 2);
        assert_eq!(anniversaries(&[e("A", 0), e("A", 300)])["A"], 0);
        assert_eq!(anniversaries(&[e("A", 0), e("A", 364), e("A", 730)])["A"], 2);
        assert_eq!(anniversaries(&[e("A", 0), e("A", 367)])["A"], 0);
    }

    #[test]
    fn grouping_histograms() {
        let runs = [e("A", 0), e("A", 5), e("B", 0)];
        assert_eq!(peaks_per_article(&runs).integer_counts(), vec![(1, 1), (2, 1)]);
        let runs = [run("A", ActivityKind::Edit, 0, 1), run("A", ActivityKind::Edit, 5, 1), run("B", ActivityKind::Edit, 0, 2)];
        assert_eq!(run_lengths(&runs).integer_counts(), vec![(1, 2), (2, 1)]);
        assert!(peaks_per_article(&[]).is_empty());
        assert!(run_lengths(&[]).is_empty());
    }

    #[test]
    fn intervals_pool_per_article() {
        let runs = [e("A", 10), e("B", 0), e("A", 0), e("B", 400)];
        let mut iv = pooled_intervals(&runs);
        iv.sort();
        assert_eq!(iv, vec![10, 400]);
    }
}
