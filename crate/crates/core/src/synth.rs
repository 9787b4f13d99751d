//! Deterministic synthetic corpora for benchmarks and load tests.
//!
//! Articles get a baseline of uniformly spread activity plus a handful of
//! burst days, and comments form random reply trees biased towards recent
//! comments. Nothing here is calibrated to real data.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ingest::{format_timestamp, write_comments_jsonl, CommentEvent, EditEvent};

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub articles: usize,
    pub comments: usize,
    pub edits: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub span_days: u32,
    /// Fraction of comments written without a timestamp.
    pub undated_fraction: f64,
    /// Fraction of events that land on burst days.
    pub burst_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            articles: 100,
            comments: 10_000,
            edits: 10_000,
            seed: 7,
            start: NaiveDate::from_ymd_opt(2003, 1, 1).unwrap(),
            span_days: 2_500,
            undated_fraction: 0.11,
            burst_fraction: 0.2,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SynthCorpus {
    pub comments: Vec<CommentEvent>,
    pub edits: Vec<EditEvent>,
}

/// Splits `total` over `n` buckets with uneven but deterministic shares.
fn shares(total: usize, n: usize, rng: &mut StdRng) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = (0..n).map(|_| 1.0 / rng.gen_range(0.05f64..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    let mut out: Vec<usize> = weights.iter().map(|w| (w / sum * total as f64) as usize).collect();
    let assigned: usize = out.iter().sum();
    for i in 0..(total - assigned) {
        out[i % n] += 1;
    }
    out
}

struct ArticlePlan {
    first_day: i64,
    span: i64,
    bursts: Vec<i64>,
}

impl ArticlePlan {
    fn new(cfg: &SynthConfig, rng: &mut StdRng) -> Self {
        let span = rng.gen_range(60..=cfg.span_days.max(61) as i64);
        let first_day = rng.gen_range(0..=(cfg.span_days as i64 - span).max(0));
        let n_bursts = rng.gen_range(0..6);
        let bursts = (0..n_bursts).map(|_| rng.gen_range(0..span)).collect();
        ArticlePlan {
            first_day,
            span,
            bursts,
        }
    }

    fn timestamp(&self, cfg: &SynthConfig, rng: &mut StdRng) -> DateTime<Utc> {
        let offset = if !self.bursts.is_empty() && rng.gen_bool(cfg.burst_fraction) {
            let b = self.bursts[rng.gen_range(0..self.bursts.len())];
            (b + rng.gen_range(0..2)).min(self.span - 1)
        } else {
            rng.gen_range(0..self.span)
        };
        let day = cfg.start + chrono::Days::new((self.first_day + offset) as u64);
        Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap())
            + Duration::seconds(rng.gen_range(0..86_400))
    }
}

pub fn article_name(i: usize) -> String {
    format!("Article {i:05}")
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let comment_shares = shares(cfg.comments, cfg.articles, &mut rng);
    let edit_shares = shares(cfg.edits, cfg.articles, &mut rng);
    let mut corpus = SynthCorpus {
        comments: Vec::with_capacity(cfg.comments),
        edits: Vec::with_capacity(cfg.edits),
    };
    for a in 0..cfg.articles {
        let name = article_name(a);
        let plan = ArticlePlan::new(cfg, &mut rng);

        let mut times: Vec<DateTime<Utc>> =
            (0..comment_shares[a]).map(|_| plan.timestamp(cfg, &mut rng)).collect();
        times.sort();
        let mut depths: Vec<u32> = Vec::with_capacity(times.len());
        for (j, ts) in times.into_iter().enumerate() {
            let parent = if j == 0 || rng.gen_bool(0.3) {
                None
            } else {
                let lo = j.saturating_sub(40);
                Some(rng.gen_range(lo..j))
            };
            let depth = parent.map_or(0, |p| depths[p] + 1);
            depths.push(depth);
            corpus.comments.push(CommentEvent {
                article: name.clone(),
                id: format!("c{j}"),
                parent: parent.map(|p| format!("c{p}")),
                depth,
                timestamp: (!rng.gen_bool(cfg.undated_fraction)).then_some(ts),
                author: Some(format!("User{}", rng.gen_range(0..500))),
                doc_order: j as u64,
            });
        }
        for _ in 0..edit_shares[a] {
            corpus.edits.push(EditEvent {
                article: name.clone(),
                timestamp: plan.timestamp(cfg, &mut rng),
            });
        }
    }
    corpus
}

pub fn write_edits_jsonl<W: Write>(mut w: W, edits: &[EditEvent]) -> io::Result<()> {
    for e in edits {
        writeln!(
            w,
            "{}",
            serde_json::json!({"article": e.article, "ts": format_timestamp(&e.timestamp)})
        )?;
    }
    Ok(())
}

/// Writes `comments.jsonl` and `edits.jsonl` into `dir`.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let comments = dir.join("comments.jsonl");
    let edits = dir.join("edits.jsonl");
    let mut w = BufWriter::new(File::create(&comments)?);
    write_comments_jsonl(&mut w, &corpus.comments)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&edits)?);
    write_edits_jsonl(&mut w, &corpus.edits)?;
    w.flush()?;
    Ok((comments, edits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discussion::DiscussionTree;

    #[test]
    fn deterministic_and_sized() {
        let cfg = SynthConfig {
            articles: 7,
            comments: 500,
            edits: 300,
            ..Default::default()
        };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.comments, b.comments);
        assert_eq!(a.edits, b.edits);
        assert_eq!(a.comments.len(), 500);
        assert_eq!(a.edits.len(), 300);
    }

    #[test]
    fn comment_trees_are_valid() {
        let corpus = generate(&SynthConfig {
            articles: 5,
            comments: 2_000,
            edits: 0,
            ..Default::default()
        });
        for i in 0..5 {
            let name = article_name(i);
            let nodes: Vec<_> = corpus.comments.iter().filter(|c| c.article == name).cloned().collect();
            DiscussionTree::new(name, nodes).unwrap();
        }
    }
}
