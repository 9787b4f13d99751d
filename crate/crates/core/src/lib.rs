//! Activity peaks and discussion growth for collaboratively edited articles.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`ingest`] reads normalized edit/comment event files and bins them into
//!   dense daily [`ActivitySeries`](ingest::ActivitySeries).
//! * [`talkparser`] recovers threaded comments from raw talk-page wikitext.
//! * [`timeseries`] flags activity peaks against a sliding-median baseline,
//!   in batch or one day at a time.
//! * [`peakstats`] aggregates peaks across a corpus: overlaps, anniversaries,
//!   histograms, power-law fits and correlations.
//! * [`discussion`] computes the discussion h-index, its time trace, the
//!   growth speed Δh and a maturity verdict.
//! * [`report`] wires everything into deterministic report files.
//!
//! Corpus-wide loops go through [`Exec`], which uses rayon when the
//! `parallel` feature is on and runs sequentially otherwise.

pub mod discussion;
pub mod exec;
pub mod ingest;
pub mod peakstats;
pub mod report;
pub mod synth;
pub mod talkparser;
pub mod timeseries;

pub use exec::Exec;
