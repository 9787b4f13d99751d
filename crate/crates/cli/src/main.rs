use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wikipulse::discussion::{build_trees, h_index, h_trace, rank_by_speed, DiscussionTree};
use wikipulse::ingest::{
    build_series_with, load_comments, load_edits, parse_timestamp, write_comments_jsonl,
    ActivityKind, CommentEvent, InputFormat, Loaded,
};
use wikipulse::peakstats::fit_power_law;
use wikipulse::report::{
    anniversary_table, daily_records, distribution_tables, hindex_table, maturity_table,
    overlap_table, peaks_table, read_peaks_csv, run_report, simulate_watch, speed_table, Cell,
    DiscussionMetrics, OutputFormat, RunConfig, Table, WatchRecord, Watcher, ALERT_HEADER,
};
use wikipulse::talkparser::{PatternRegistry, RawTalkPage, TalkParser};
use wikipulse::timeseries::{detect_peaks, PeakParams, PeakRun};
use wikipulse::Exec;

#[derive(Parser)]
#[command(name = "wikipulse", version, about = "Activity peaks and discussion growth for wiki articles")]
struct Cli {
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract comment events from raw talk-page wikitext.
    ParseTalk(ParseTalkArgs),
    /// Detect edit and comment peaks.
    Peaks(PeaksArgs),
    /// Corpus statistics over a peaks table.
    Stats(StatsArgs),
    /// Final discussion h-index per article.
    Hindex(HindexArgs),
    /// Δh per discussion, fastest first.
    Deltah(DeltahArgs),
    /// Maturity verdict per discussion.
    Maturity(MaturityArgs),
    /// Full report into a directory.
    Report(ReportArgs),
    /// Streaming peak alerts.
    Watch(WatchArgs),
}

#[derive(Args)]
struct ParseTalkArgs {
    /// A wikitext file or a directory of them; the file stem names the article.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Extra date patterns, one regex per line.
    #[arg(long)]
    patterns: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PeakArgs {
    #[arg(short = 'c', long = "c", default_value_t = 5.0)]
    c: f64,
    #[arg(long, default_value_t = 10)]
    nmin: u32,
    /// Half-width of the median window in days.
    #[arg(long, default_value_t = 14)]
    window: usize,
}

impl PeakArgs {
    fn params(&self) -> Result<PeakParams, CliError> {
        PeakParams::new(self.c, self.nmin, self.window).map_err(|e| CliError::Config(e.into()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

impl From<Format> for InputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Jsonl => InputFormat::Jsonl,
            Format::Csv => InputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct PeaksArgs {
    #[arg(long)]
    edits: Option<PathBuf>,
    #[arg(long)]
    comments: Option<PathBuf>,
    /// Input format of the event files.
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    #[command(flatten)]
    peak: PeakArgs,
    /// Output file; `.json` selects JSON. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsReport {
    Overlap,
    Anniversary,
    Distributions,
}

#[derive(Args)]
struct StatsArgs {
    /// Peaks table as written by `peaks`.
    #[arg(long)]
    peaks: Option<PathBuf>,
    #[arg(long, value_enum)]
    report: Option<StatsReport>,
    /// Overlap tolerances in days.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    tolerance: Vec<u32>,
    /// Fit a power law to a column: a numeric column of `--table`, or
    /// `length`, `inter_peak` or `peaks_per_article` of `--peaks`.
    #[arg(long)]
    powerlaw: Option<String>,
    /// CSV table holding the `--powerlaw` column.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    xmin: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CommentInput {
    #[arg(long)]
    comments: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
}

#[derive(Args)]
struct HindexArgs {
    #[command(flatten)]
    input: CommentInput,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DeltahArgs {
    #[command(flatten)]
    input: CommentInput,
    /// Only discussions with more comments than this are ranked.
    #[arg(long, default_value_t = 1000)]
    min_comments: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaturityArgs {
    #[command(flatten)]
    input: CommentInput,
    /// Reference time, `YYYY-MM-DD` or a full timestamp. Defaults to the
    /// latest comment.
    #[arg(long)]
    as_of: Option<String>,
    #[arg(short = 'k', long = "k", default_value_t = 3.0)]
    k: f64,
    #[arg(long, default_value_t = 0)]
    min_comments: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    comments: Option<PathBuf>,
    #[arg(long)]
    edits: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    output_format: TableFormat,
    #[command(flatten)]
    peak: PeakArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    tolerance: Vec<u32>,
    #[arg(long, default_value_t = 1000)]
    min_comments: usize,
    #[arg(short = 'k', long = "k", default_value_t = 3.0)]
    k: f64,
    #[arg(long)]
    as_of: Option<String>,
    /// Rows in the fastest/slowest rankings.
    #[arg(long, default_value_t = 15)]
    top: usize,
    #[arg(long, default_value_t = 5)]
    bins_per_decade: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct WatchArgs {
    /// Read `article,kind,date,count` lines from standard input.
    #[arg(long, conflicts_with = "input")]
    stdin: bool,
    /// Read `article,kind,date,count` lines from a file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Replay an edit event file instead of count lines.
    #[arg(long, conflicts_with_all = ["stdin", "input"])]
    edits: Option<PathBuf>,
    /// Replay a comment event file instead of count lines.
    #[arg(long, conflicts_with_all = ["stdin", "input"])]
    comments: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Sort the feed by date before replaying it.
    #[arg(long)]
    sort: bool,
    #[command(flatten)]
    peak: PeakArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(anyhow::Error),
    Config(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(anyhow!(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let result = match cli.command {
        Command::ParseTalk(a) => parse_talk(a),
        Command::Peaks(a) => peaks(a, exec),
        Command::Stats(a) => stats(a),
        Command::Hindex(a) => hindex(a, exec),
        Command::Deltah(a) => deltah(a, exec),
        Command::Maturity(a) => maturity(a, exec),
        Command::Report(a) => report(a, exec),
        Command::Watch(a) => watch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn table_format(path: &Path) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

fn emit(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table
            .write_to(path, table_format(path))
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            let stdout = io::stdout();
            table.write_csv(stdout.lock()).context("writing to stdout")?;
        }
    }
    Ok(())
}

fn report_load<T>(label: &str, path: &Path, l: &Loaded<T>) {
    eprintln!(
        "{label} {}: {} records, {} used, {} skipped, {} malformed timestamps",
        path.display(),
        l.records,
        l.events.len(),
        l.skipped.len(),
        l.malformed_timestamps
    );
    for d in l.skipped.iter().take(20) {
        eprintln!("  line {}: {}", d.line, d.message);
    }
    if l.skipped.len() > 20 {
        eprintln!("  ... {} more", l.skipped.len() - 20);
    }
}

fn parse_as_of(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    parse_timestamp(s).map_err(|e| config_err(format!("--as-of: {e}")))
}

fn talk_files(input: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(input).with_context(|| format!("reading {}", input.display()))?;
    if meta.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(input).with_context(|| format!("listing {}", input.display()))? {
        let path = entry.context("listing talk pages")?.path();
        let hidden = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn parse_talk(a: ParseTalkArgs) -> Result<()> {
    let patterns = match &a.patterns {
        Some(p) => PatternRegistry::load(p).map_err(|e| CliError::Config(e.into()))?,
        None => PatternRegistry::standard(),
    };
    let parser = TalkParser::new(patterns);
    let mut events: Vec<CommentEvent> = Vec::new();
    for path in talk_files(&a.input)? {
        let article = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| anyhow!("{}: file name is not UTF-8", path.display()))?
            .replace('_', " ");
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = parser.parse(&RawTalkPage::new(article, text));
        for d in &parsed.diagnostics {
            eprintln!("{}: {d}", path.display());
        }
        events.extend(parsed.events);
    }
    events.sort_by(|x, y| (&x.article, x.doc_order).cmp(&(&y.article, y.doc_order)));
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = BufWriter::new(file);
    write_comments_jsonl(&mut w, &events).context("writing events")?;
    w.flush().context("writing events")?;
    eprintln!("{} comments written to {}", events.len(), a.out.display());
    Ok(())
}

fn peaks(a: PeaksArgs, exec: Exec) -> Result<()> {
    let params = a.peak.params()?;
    if a.edits.is_none() && a.comments.is_none() {
        return Err(config_err("give --edits and/or --comments"));
    }
    let mut runs: Vec<PeakRun> = Vec::new();
    if let Some(p) = &a.edits {
        let l = load_edits(p, a.format.into()).map_err(anyhow::Error::from)?;
        report_load("edits", p, &l);
        let series = build_series_with(&l.events, ActivityKind::Edit, exec);
        let list: Vec<_> = series.values().collect();
        runs.extend(exec.map(&list, |s| detect_peaks(s, &params)).into_iter().flatten());
    }
    if let Some(p) = &a.comments {
        let l = load_comments(p, a.format.into()).map_err(anyhow::Error::from)?;
        report_load("comments", p, &l);
        let series = build_series_with(&l.events, ActivityKind::Comment, exec);
        let list: Vec<_> = series.values().collect();
        runs.extend(exec.map(&list, |s| detect_peaks(s, &params)).into_iter().flatten());
    }
    runs.sort_by(|x, y| (&x.article, x.kind, x.start_day).cmp(&(&y.article, y.kind, y.start_day)));
    emit(&peaks_table(&runs), a.out.as_deref())
}

fn split_kinds(runs: Vec<PeakRun>) -> (Vec<PeakRun>, Vec<PeakRun>) {
    runs.into_iter().partition(|r| r.kind == ActivityKind::Comment)
}

fn power_law_samples(a: &StatsArgs, column: &str) -> Result<Vec<u64>> {
    if let Some(table) = &a.table {
        let mut rdr = csv::Reader::from_path(table).with_context(|| format!("opening {}", table.display()))?;
        let headers = rdr.headers().context("reading header")?.clone();
        let idx = headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| config_err(format!("no column `{column}` in {}", table.display())))?;
        let mut out = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.with_context(|| format!("{} line {}", table.display(), i + 2))?;
            let raw = rec.get(idx).unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| anyhow!("{} line {}: `{raw}` is not a number", table.display(), i + 2))?;
            if v < 1.0 || v.fract() != 0.0 {
                return Err(anyhow!("{} line {}: `{raw}` is not a positive integer", table.display(), i + 2).into());
            }
            out.push(v as u64);
        }
        return Ok(out);
    }
    let Some(peaks) = &a.peaks else {
        return Err(config_err("--powerlaw needs --table or --peaks"));
    };
    let runs = read_peaks_csv(peaks).map_err(anyhow::Error::from)?;
    let per_kind = |f: fn(&[PeakRun]) -> Vec<u64>| {
        let (c, e) = split_kinds(runs.clone());
        let mut v = f(&c);
        v.extend(f(&e));
        v
    };
    match column {
        "length" => Ok(runs.iter().map(|r| r.length as u64).collect()),
        "inter_peak" => Ok(per_kind(wikipulse::peakstats::pooled_intervals)),
        "peaks_per_article" => Ok(per_kind(|r| {
            wikipulse::peakstats::group_by_article(r).values().map(|v| v.len() as u64).collect()
        })),
        other => Err(config_err(format!(
            "unknown peaks column `{other}` (length, inter_peak, peaks_per_article)"
        ))),
    }
}

fn stats(a: StatsArgs) -> Result<()> {
    if let Some(column) = &a.powerlaw {
        let samples = power_law_samples(&a, column)?;
        let fit = fit_power_law(&samples, a.xmin).map_err(|e| anyhow!("{column}: {e}"))?;
        let mut t = Table::new("powerlaw", &["column", "alpha", "x_min", "n"]);
        t.push(vec![column.as_str().into(), fit.alpha.into(), fit.x_min.into(), fit.n_samples.into()]);
        return emit(&t, a.out.as_deref());
    }
    let report = a.report.ok_or_else(|| config_err("give --report or --powerlaw"))?;
    let peaks = a.peaks.as_ref().ok_or_else(|| config_err("--report needs --peaks"))?;
    if let Some(t) = a.tolerance.iter().find(|t| **t > 2) {
        return Err(config_err(format!("tolerance {t} not in {{0,1,2}}")));
    }
    let runs = read_peaks_csv(peaks).map_err(anyhow::Error::from)?;
    let (comment_runs, edit_runs) = split_kinds(runs);
    let table = match report {
        StatsReport::Overlap => overlap_table(&comment_runs, &edit_runs, &a.tolerance),
        StatsReport::Anniversary => anniversary_table(&[&comment_runs, &edit_runs]),
        StatsReport::Distributions => {
            let parts = distribution_tables(&[
                (ActivityKind::Comment, &comment_runs),
                (ActivityKind::Edit, &edit_runs),
            ]);
            let mut t = Table::new("distributions", &["distribution", "kind", "value", "count"]);
            for part in parts {
                let name = part.name.trim_start_matches("dist_").to_string();
                for row in part.rows {
                    let mut cells: Vec<Cell> = vec![name.as_str().into()];
                    cells.extend(row);
                    t.push(cells);
                }
            }
            t
        }
    };
    emit(&table, a.out.as_deref())
}

fn load_trees(input: &CommentInput, exec: Exec) -> Result<Vec<DiscussionTree>> {
    let l = load_comments(&input.comments, input.format.into()).map_err(anyhow::Error::from)?;
    report_load("comments", &input.comments, &l);
    let (trees, errors) = build_trees(l.events, exec);
    for (article, e) in &errors {
        eprintln!("discussion {article} rejected: {e}");
    }
    Ok(trees)
}

fn hindex(a: HindexArgs, exec: Exec) -> Result<()> {
    let trees = load_trees(&a.input, exec)?;
    let rows: Vec<DiscussionMetrics> = exec.map(&trees, |t| DiscussionMetrics {
        article: t.article().to_string(),
        n_comments: t.len(),
        n_dated: t.dated(),
        final_h: h_index(t),
        max_depth: t.max_depth(),
        trace: None,
    });
    emit(&hindex_table(&rows), a.out.as_deref())
}

fn deltah(a: DeltahArgs, exec: Exec) -> Result<()> {
    let trees = load_trees(&a.input, exec)?;
    let traces: Vec<_> = exec.map(&trees, |t| h_trace(t).ok()).into_iter().flatten().collect();
    let speed = rank_by_speed(&traces, a.min_comments);
    eprintln!(
        "{} discussions ranked, {} above the size cut without growth",
        speed.rows.len(),
        speed.no_growth
    );
    emit(&speed_table("deltah", &speed.rows), a.out.as_deref())
}

fn maturity(a: MaturityArgs, exec: Exec) -> Result<()> {
    if !(a.k >= 0.0 && a.k.is_finite()) {
        return Err(config_err(format!("-k must be >= 0, got {}", a.k)));
    }
    let as_of = a.as_of.as_deref().map(parse_as_of).transpose()?;
    let trees = load_trees(&a.input, exec)?;
    let now = match as_of {
        Some(t) => t,
        None => trees
            .iter()
            .flat_map(|t| t.nodes().iter().filter_map(|n| n.timestamp))
            .max()
            .ok_or_else(|| anyhow!("no dated comments; pass --as-of"))?,
    };
    if a.k == 0.0 {
        eprintln!("warning: -k 0 marks every growing discussion as mature");
    }
    let traces: Vec<_> = exec.map(&trees, |t| h_trace(t).ok()).into_iter().flatten().collect();
    emit(&maturity_table(&traces, now, a.k, a.min_comments), a.out.as_deref())
}

fn report(a: ReportArgs, exec: Exec) -> Result<()> {
    let mut cfg = RunConfig::new(&a.out);
    cfg.comments = a.comments;
    cfg.edits = a.edits;
    cfg.input_format = a.format.into();
    cfg.params = a.peak.params()?;
    cfg.tolerances = a.tolerance;
    cfg.min_comments = a.min_comments;
    cfg.k = a.k;
    cfg.as_of = a.as_of.as_deref().map(parse_as_of).transpose()?;
    cfg.format = match a.output_format {
        TableFormat::Csv => OutputFormat::Csv,
        TableFormat::Json => OutputFormat::Json,
    };
    cfg.top_n = a.top;
    cfg.bins_per_decade = a.bins_per_decade;
    cfg.exec = exec;
    cfg.validate().map_err(|e| CliError::Config(e.into()))?;
    let outcome = run_report(&cfg).map_err(|e| match e.exit_code() {
        2 => CliError::Config(e.into()),
        _ => CliError::Input(e.into()),
    })?;
    for (label, l) in [("comments", &outcome.comment_load), ("edits", &outcome.edit_load)] {
        eprintln!(
            "{label}: {} records = {} used + {} skipped",
            l.records,
            l.events,
            l.skipped.len()
        );
    }
    if outcome.tree_errors > 0 {
        eprintln!("{} discussions rejected (see diagnostics)", outcome.tree_errors);
    }
    eprintln!("{} files written to {}", outcome.files.len(), a.out.display());
    Ok(())
}

fn watch(a: WatchArgs) -> Result<()> {
    let params = a.peak.params()?;
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "{ALERT_HEADER}").context("writing alerts")?;

    if a.edits.is_some() || a.comments.is_some() {
        let mut records: Vec<WatchRecord> = Vec::new();
        if let Some(p) = &a.edits {
            let l = load_edits(p, a.format.into()).map_err(anyhow::Error::from)?;
            report_load("edits", p, &l);
            records.extend(daily_records(&l.events, ActivityKind::Edit));
        }
        if let Some(p) = &a.comments {
            let l = load_comments(p, a.format.into()).map_err(anyhow::Error::from)?;
            report_load("comments", p, &l);
            records.extend(daily_records(&l.events, ActivityKind::Comment));
        }
        records.sort_by(|x, y| (x.day, &x.article, x.kind).cmp(&(y.day, &y.article, y.kind)));
        for alert in simulate_watch(&params, records, false).map_err(anyhow::Error::from)? {
            writeln!(out, "{alert}").context("writing alerts")?;
        }
        out.flush().context("writing alerts")?;
        return Ok(());
    }

    let reader: Box<dyn BufRead> = match (&a.input, a.stdin) {
        (Some(p), _) => Box::new(io::BufReader::new(
            fs::File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )),
        (None, true) => Box::new(io::stdin().lock()),
        (None, false) => return Err(config_err("give --stdin, --in, --edits or --comments")),
    };
    if a.sort {
        let records = wikipulse::report::read_watch_records(reader).map_err(anyhow::Error::from)?;
        for alert in simulate_watch(&params, records, true).map_err(anyhow::Error::from)? {
            writeln!(out, "{alert}").context("writing alerts")?;
        }
    } else {
        let mut watcher = Watcher::new(params);
        for line in reader.lines() {
            let line = line.context("reading feed")?;
            if let Some(alert) = watcher.feed_line(&line).map_err(anyhow::Error::from)? {
                writeln!(out, "{alert}").context("writing alerts")?;
                out.flush().context("writing alerts")?;
            }
        }
    }
    out.flush().context("writing alerts")?;
    Ok(())
}
