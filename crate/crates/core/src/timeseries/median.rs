//! Windowed medians over daily counts.

use crate::ingest::ActivitySeries;

/// A multiset of counts kept in sorted order. Windows here are a few dozen
/// samples, so shifting a `Vec` beats heap- or tree-based order statistics.
#[derive(Clone, Debug, Default)]
pub struct SortedWindow {
    values: Vec<u32>,
}

impl SortedWindow {
    pub fn with_capacity(cap: usize) -> Self {
        SortedWindow {
            values: Vec::with_capacity(cap),
        }
    }

    pub fn insert(&mut self, v: u32) {
        let pos = self.values.partition_point(|&x| x < v);
        self.values.insert(pos, v);
    }

    /// Removes one occurrence of `v`. Returns false if it was not present.
    pub fn remove(&mut self, v: u32) -> bool {
        match self.values.binary_search(&v) {
            Ok(pos) => {
                self.values.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Median of the window; midpoint of the central pair for even sizes,
    /// 0 for an empty window.
    pub fn median(&self) -> f64 {
        median_of_sorted(&self.values)
    }
}

pub(crate) fn median_of_sorted(sorted: &[u32]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

/// m(t) over `[t - halfwidth, t + halfwidth]`, truncated at the series ends.
pub fn sliding_median(series: &ActivitySeries, halfwidth: usize) -> Vec<f64> {
    sliding_median_counts(&series.counts, halfwidth)
}

pub fn sliding_median_counts(counts: &[u32], halfwidth: usize) -> Vec<f64> {
    let n = counts.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut window = SortedWindow::with_capacity(2 * halfwidth + 1);
    for &c in &counts[..=halfwidth.min(n - 1)] {
        window.insert(c);
    }
    for t in 0..n {
        out.push(window.median());
        if let Some(&entering) = counts.get(t + 1 + halfwidth) {
            window.insert(entering);
        }
        if t >= halfwidth {
            let removed = window.remove(counts[t - halfwidth]);
            debug_assert!(removed);
        }
    }
    out
}
