//! Real-time peak detection with a trailing window.
//!
//! Only days strictly before the current one enter the median, so results
//! match a batch run with a trailing window, not the centred one used by
//! [`detect_peaks`](super::detect_peaks). The two peak sets legitimately
//! differ.

use std::collections::VecDeque;
use std::fmt;

use chrono::NaiveDate;
use thiserror::Error;

use super::median::median_of_sorted;
use super::PeakParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("out-of-order feed: {day} is not after {current}")]
    OutOfOrder { day: NaiveDate, current: NaiveDate },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamState {
    buffer: VecDeque<u32>,
    current_day: Option<NaiveDate>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamOutput {
    pub day: NaiveDate,
    pub count: u32,
    pub median: f64,
    pub ratio: f64,
    pub is_peak: bool,
}

impl StreamState {
    pub fn new() -> Self {
        StreamState {
            buffer: VecDeque::new(),
            current_day: None,
        }
    }

    pub fn current_day(&self) -> Option<NaiveDate> {
        self.current_day
    }

    /// The trailing counts, oldest first.
    pub fn buffer(&self) -> impl Iterator<Item = u32> + '_ {
        self.buffer.iter().copied()
    }

    fn push(&mut self, count: u32, capacity: usize) {
        if self.buffer.len() == capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(count);
    }

    fn median(&self) -> f64 {
        let mut sorted: Vec<u32> = self.buffer.iter().copied().collect();
        sorted.sort_unstable();
        median_of_sorted(&sorted)
    }

    /// Feeds the count for `day`. Skipped days are filled with zeros.
    pub fn step(
        &mut self,
        day: NaiveDate,
        count: u32,
        params: &PeakParams,
    ) -> Result<StreamOutput, StreamError> {
        let capacity = params.window_halfwidth;
        if let Some(current) = self.current_day {
            if day <= current {
                return Err(StreamError::OutOfOrder { day, current });
            }
            let missing = (day - current).num_days() - 1;
            for _ in 0..(missing as usize).min(capacity) {
                self.push(0, capacity);
            }
        }
        let median = self.median();
        let out = StreamOutput {
            day,
            count,
            median,
            ratio: params.ratio(count, median),
            is_peak: params.is_peak(count, median),
        };
        self.push(count, capacity);
        self.current_day = Some(day);
        Ok(out)
    }
}

impl Default for StreamState {
    fn default() -> Self {
        Self::new()
    }
}

/// Value-style wrapper around [`StreamState::step`].
pub fn stream_step(
    state: &StreamState,
    day: NaiveDate,
    count: u32,
    params: &PeakParams,
) -> Result<(StreamOutput, StreamState), StreamError> {
    let mut next = state.clone();
    let out = next.step(day, count, params)?;
    Ok((out, next))
}

/// Size class of a detected peak relative to the peak factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AlertTier {
    /// ratio > c
    Elevated,
    /// ratio >= 2c
    High,
    /// ratio >= 4c
    Severe,
}

impl AlertTier {
    pub fn classify(ratio: f64, c: f64) -> Option<AlertTier> {
        if ratio >= 4.0 * c {
            Some(AlertTier::Severe)
        } else if ratio >= 2.0 * c {
            Some(AlertTier::High)
        } else if ratio > c {
            Some(AlertTier::Elevated)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlertTier::Elevated => ">=c",
            AlertTier::High => ">=2c",
            AlertTier::Severe => ">=4c",
        }
    }
}

impl fmt::Display for AlertTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(i: u64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2009, 6, 1).unwrap() + chrono::Days::new(i)
    }

    #[test]
    fn spike_after_two_quiet_weeks() {
        let p = PeakParams::default();
        let mut s = StreamState::new();
        for i in 0..14 {
            assert!(!s.step(day(i), 2, &p).unwrap().is_peak);
        }
        let out = s.step(day(14), 60, &p).unwrap();
        assert_eq!(out.median, 2.0);
        assert_eq!(out.ratio, 6.0);
        assert!(out.is_peak);
    }

    #[test]
    fn zeros_never_peak() {
        let p = PeakParams::default();
        let mut s = StreamState::new();
        for i in 0..100 {
            let out = s.step(day(i), 0, &p).unwrap();
            assert_eq!(out.ratio, 0.0);
            assert!(!out.is_peak);
        }
    }

    #[test]
    fn empty_buffer_uses_zero_median() {
        let p = PeakParams::default();
        let (out, next) = stream_step(&StreamState::new(), day(0), 200, &p).unwrap();
        assert_eq!(out.median, 0.0);
        assert_eq!(out.ratio, 20.0);
        assert!(out.is_peak);
        assert_eq!(next.current_day(), Some(day(0)));
    }

    #[test]
    fn out_of_order_rejected() {
        let p = PeakParams::default();
        let mut s = StreamState::new();
        s.step(day(5), 1, &p).unwrap();
        assert!(matches!(s.step(day(5), 1, &p), Err(StreamError::OutOfOrder { .. })));
        assert!(s.step(day(3), 1, &p).is_err());
    }

    #[test]
    fn gaps_are_zero_filled_and_buffer_is_bounded() {
        let p = PeakParams::default();
        let mut s = StreamState::new();
        s.step(day(0), 7, &p).unwrap();
        s.step(day(3), 7, &p).unwrap();
        assert_eq!(s.buffer().collect::<Vec<_>>(), vec![7, 0, 0, 7]);
        s.step(day(1000), 7, &p).unwrap();
        assert_eq!(s.buffer().count(), 14);
        assert_eq!(s.buffer().filter(|&c| c == 7).count(), 1);
    }

    #[test]
    fn tiers() {
        assert_eq!(AlertTier::classify(5.0, 5.0), None);
        assert_eq!(AlertTier::classify(5.1, 5.0), Some(AlertTier::Elevated));
        assert_eq!(AlertTier::classify(10.0, 5.0), Some(AlertTier::High));
        assert_eq!(AlertTier::classify(20.0, 5.0), Some(AlertTier::Severe));
    }
}
