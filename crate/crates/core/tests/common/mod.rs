//! Reference implementations shared by the integration tests. Each one is
//! written from the definition, favouring obviousness over speed.

#![allow(dead_code)]

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use rand::Rng;

use wikipulse::ingest::{ActivityKind, ActivitySeries, CommentEvent};

pub fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2006, 1, 1).unwrap()
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2006, 1, 1, 0, 0, 0).unwrap()
}

pub fn series(counts: &[u32]) -> ActivitySeries {
    ActivitySeries {
        article: "A".into(),
        kind: ActivityKind::Edit,
        start_day: day0(),
        counts: counts.to_vec(),
    }
}

/// Median by full sort; midpoint for even sizes, 0 when empty.
pub fn median(values: &[u32]) -> f64 {
    let mut v = values.to_vec();
    v.sort();
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2] as f64,
        n => (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0,
    }
}

pub fn centred_median(counts: &[u32], t: usize, hw: usize) -> f64 {
    let lo = t.saturating_sub(hw);
    let hi = (t + hw).min(counts.len() - 1);
    median(&counts[lo..=hi])
}

/// Peak flag per day, every window recomputed from scratch.
pub fn brute_peak_flags(counts: &[u32], c: f64, n_min: u32, hw: usize) -> Vec<bool> {
    (0..counts.len())
        .map(|t| {
            let m = centred_median(counts, t, hw);
            counts[t] as f64 > c * m.max(n_min as f64)
        })
        .collect()
}

/// Peak flags against the `len` days strictly before each day.
pub fn trailing_peak_flags(counts: &[u32], c: f64, n_min: u32, len: usize) -> Vec<bool> {
    (0..counts.len())
        .map(|t| {
            let m = median(&counts[t.saturating_sub(len)..t]);
            counts[t] as f64 > c * m.max(n_min as f64)
        })
        .collect()
}

/// (start index, length) of every maximal run of true flags.
pub fn flag_runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] {
            let s = i;
            while i < flags.len() && flags[i] {
                i += 1;
            }
            out.push((s, i - s));
        } else {
            i += 1;
        }
    }
    out
}

/// Tries every θ and keeps the largest one with `θ` comments at level `θ`.
pub fn brute_h(depths: &[u32]) -> u32 {
    let max_level = depths.iter().map(|d| d + 1).max().unwrap_or(0);
    let mut best = 0;
    for theta in 1..=max_level {
        let at_level = depths.iter().filter(|&&d| d + 1 == theta).count() as u32;
        if at_level >= theta {
            best = theta;
        }
    }
    best
}

/// A random valid forest in document order: each node is a root or replies
/// to an earlier node.
pub fn random_forest<R: Rng>(rng: &mut R, n: usize, max_depth: u32) -> Vec<CommentEvent> {
    let mut nodes: Vec<CommentEvent> = Vec::with_capacity(n);
    for i in 0..n {
        let parent = if i == 0 || rng.gen_bool(0.2) {
            None
        } else {
            let p = rng.gen_range(0..i);
            (nodes[p].depth < max_depth).then_some(p)
        };
        let depth = parent.map_or(0, |p| nodes[p].depth + 1);
        let ts = rng
            .gen_bool(0.9)
            .then(|| t0() + Duration::seconds(rng.gen_range(0..86_400 * 400)));
        nodes.push(CommentEvent {
            article: "A".into(),
            id: format!("c{i}"),
            parent: parent.map(|p| format!("c{p}")),
            depth,
            timestamp: ts,
            author: Some(format!("u{}", rng.gen_range(0..20))),
            doc_order: i as u64,
        });
    }
    nodes
}

/// Exact draw from the zeta distribution `P(k) ∝ k^-a`, `k >= 1`
/// (rejection sampler of Devroye, Non-Uniform Random Variate Generation, X.6.1).
pub fn zeta<R: Rng>(rng: &mut R, a: f64) -> u64 {
    let b = 2f64.powf(a - 1.0);
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let v: f64 = rng.gen();
        let x = u.powf(-1.0 / (a - 1.0)).floor();
        if !(x.is_finite() && x < 1e18) {
            continue;
        }
        let t = (1.0 + 1.0 / x).powf(a - 1.0);
        if v * x * (t - 1.0) / (b - 1.0) <= t / b {
            return x as u64;
        }
    }
}

/// Maximiser of the continuous-approximation log-likelihood
/// `n ln(a-1) + n (a-1) ln(x_min - 1/2) - a sum ln x` over a grid of step 1e-4.
pub fn grid_alpha(samples: &[u64], x_min: u64) -> f64 {
    let tail: Vec<f64> = samples.iter().filter(|&&x| x >= x_min).map(|&x| x as f64).collect();
    let n = tail.len() as f64;
    let sum_ln: f64 = tail.iter().map(|x| x.ln()).sum();
    let shift = (x_min as f64 - 0.5).ln();
    let ll = |a: f64| n * (a - 1.0).ln() + n * (a - 1.0) * shift - a * sum_ln;
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut a = 1.0001;
    while a < 6.0 {
        let v = ll(a);
        if v > best.0 {
            best = (v, a);
        }
        a += 1e-4;
    }
    best.1
}
