//! Sequential vs parallel execution over a synthetic corpus.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use wikipulse::discussion::{build_trees, h_trace};
use wikipulse::ingest::{build_series_with, ActivityKind, ActivitySeries};
use wikipulse::synth::{generate, SynthConfig};
use wikipulse::timeseries::{detect_all, PeakParams};
use wikipulse::Exec;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn corpus() -> wikipulse::synth::SynthCorpus {
    generate(&SynthConfig {
        articles: 2_000,
        comments: 200_000,
        edits: 400_000,
        seed: 11,
        ..Default::default()
    })
}

fn benches(c: &mut Criterion) {
    let corpus = corpus();
    let series = build_series_with(&corpus.edits, ActivityKind::Edit, Exec::Parallel);
    let series: Vec<&ActivitySeries> = series.values().collect();
    let params = PeakParams::default();
    let (trees, _) = build_trees(corpus.comments.clone(), Exec::Parallel);

    let mut g = c.benchmark_group("corpus");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::new("build_series", name), &exec, |b, &exec| {
            b.iter(|| build_series_with(black_box(&corpus.edits), ActivityKind::Edit, exec))
        });
        g.bench_with_input(BenchmarkId::new("detect_peaks", name), &exec, |b, &exec| {
            b.iter(|| detect_all(black_box(&series), &params, exec))
        });
        g.bench_with_input(BenchmarkId::new("h_traces", name), &exec, |b, &exec| {
            b.iter(|| exec.map(black_box(&trees), |t| h_trace(t).ok()))
        });
        g.bench_with_input(BenchmarkId::new("build_trees", name), &exec, |b, &exec| {
            b.iter(|| build_trees(black_box(corpus.comments.clone()), exec))
        });
    }
    g.finish();
}

criterion_group!(corpus_benches, benches);
criterion_main!(corpus_benches);
