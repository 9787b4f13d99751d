use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn wikipulse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wikipulse")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_wikipulse"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_peaks(dir: &Path) -> PathBuf {
    let out = dir.join("peaks.csv");
    let o = wikipulse(&[
        "peaks",
        "--edits",
        p(&fixture("report/edits.jsonl")),
        "--comments",
        p(&fixture("report/comments.jsonl")),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn peaks_to_stdout() {
    let o = wikipulse(&[
        "peaks",
        "--edits",
        p(&fixture("report/edits.jsonl")),
        "--comments",
        p(&fixture("report/comments.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let golden = fs::read_to_string(fixture("report/golden/peaks.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
    assert!(stderr(&o).contains("1302 records, 1300 used, 2 skipped"));
}

#[test]
fn peaks_json_output_and_sequential_flag_agree() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    let edits = fixture("report/edits.jsonl");
    for (out, extra) in [(&a, None), (&b, Some("--sequential"))] {
        let mut args = vec!["peaks", "--edits", p(&edits), "--out", p(out)];
        args.extend(extra);
        assert!(wikipulse(&args).status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn higher_c_finds_fewer_peaks() {
    let count = |c: &str| {
        let o = wikipulse(&["peaks", "--edits", p(&fixture("report/edits.jsonl")), "-c", c]);
        stdout(&o).lines().count() - 1
    };
    assert_eq!(count("5"), 3);
    assert_eq!(count("10"), 1);
    assert_eq!(count("20"), 0);
}

#[test]
fn invalid_parameters_exit_2() {
    for args in [
        vec!["peaks", "--edits", "x.jsonl", "-c", "1"],
        vec!["peaks", "--edits", "x.jsonl", "--window", "0"],
        vec!["report", "--out", "unused", "--tolerance", "7"],
        vec!["frobnicate"],
        vec!["peaks", "--nmin", "many"],
    ] {
        let o = wikipulse(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("error"));
    }
}

#[test]
fn missing_input_exits_1() {
    let o = wikipulse(&["hindex", "--comments", "/nonexistent/comments.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/comments.jsonl"));
}

#[test]
fn stats_overlap_and_anniversary() {
    let tmp = TempDir::new().unwrap();
    let peaks = write_peaks(tmp.path());
    let o = wikipulse(&["stats", "--peaks", p(&peaks), "--report", "overlap", "--tolerance", "0"]);
    assert_eq!(
        stdout(&o),
        "tolerance_days,overlapping_comment_peaks,articles_with_overlap,comment_peaks,fraction\n0,1,1,1,1.000000\n"
    );
    let o = wikipulse(&["stats", "--peaks", p(&peaks), "--report", "anniversary"]);
    assert_eq!(stdout(&o), "article,kind,anniversaries\nBeta,edit,1\n");
}

#[test]
fn stats_distributions() {
    let tmp = TempDir::new().unwrap();
    let peaks = write_peaks(tmp.path());
    let o = wikipulse(&["stats", "--peaks", p(&peaks), "--report", "distributions"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("kind,value,count"));
}

#[test]
fn stats_powerlaw_on_table_column() {
    let tmp = TempDir::new().unwrap();
    let table = tmp.path().join("t.csv");
    let mut text = String::from("name,x\n");
    for (i, x) in [1, 1, 1, 1, 2, 2, 3, 1, 5, 1, 2, 1, 8, 1, 1, 2].iter().enumerate() {
        text.push_str(&format!("r{i},{x}\n"));
    }
    fs::write(&table, text).unwrap();
    let o = wikipulse(&["stats", "--table", p(&table), "--powerlaw", "x"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("alpha"));

    let o = wikipulse(&["stats", "--table", p(&table), "--powerlaw", "missing"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn too_few_samples_for_power_law_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let peaks = write_peaks(tmp.path());
    let o = wikipulse(&["stats", "--peaks", p(&peaks), "--powerlaw", "length"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least"));
}

#[test]
fn hindex_deltah_maturity() {
    let comments = fixture("report/comments.jsonl");
    let o = wikipulse(&["hindex", "--comments", p(&comments)]);
    assert_eq!(stdout(&o), "article,final_h,max_depth,n_comments\nAlpha,3,3,119\nBeta,3,3,9\n");

    let o = wikipulse(&["deltah", "--comments", p(&comments), "--min-comments", "5"]);
    let out = stdout(&o);
    assert!(out.contains("Alpha,4.000000,"), "{out}");
    assert!(out.contains("Beta,48.000000,"), "{out}");

    let o = wikipulse(&["deltah", "--comments", p(&comments), "--min-comments", "10"]);
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = wikipulse(&["maturity", "--comments", p(&comments), "--as-of", "2007-01-20"]);
    let out = stdout(&o);
    assert!(out.contains("Alpha,4.000000,2007-01-09T00:00:00Z,11.000000,3.000000,false,false"), "{out}");

    let o = wikipulse(&["maturity", "--comments", p(&comments), "--as-of", "someday"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_writes_all_tables() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = wikipulse(&[
        "report",
        "--comments",
        p(&fixture("report/comments.jsonl")),
        "--edits",
        p(&fixture("report/edits.jsonl")),
        "--min-comments",
        "5",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for entry in fs::read_dir(fixture("report/golden")).unwrap() {
        let golden = entry.unwrap().path();
        let name = golden.file_name().unwrap();
        assert_eq!(
            fs::read(out.join(name)).unwrap(),
            fs::read(&golden).unwrap(),
            "{}",
            name.to_string_lossy()
        );
    }
}

#[test]
fn watch_flags_a_spike() {
    let mut feed = String::new();
    for d in 1..=20 {
        feed.push_str(&format!("Some, Article,edit,2020-01-{d:02},{}\n", 10 + d % 3));
    }
    feed.push_str("Some, Article,edit,2020-01-21,200\n");
    feed.push_str("Other,comment,2020-01-21,1\n");
    let o = with_stdin(&["watch", "--stdin"], &feed);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let alerts: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(alerts.len(), 1, "{out}");
    assert!(alerts[0].starts_with("2020-01-21,Some, Article,edit,200,"), "{}", alerts[0]);
}

#[test]
fn watch_rejects_out_of_order_unless_sorted() {
    let tmp = TempDir::new().unwrap();
    let feed = tmp.path().join("feed.csv");
    fs::write(&feed, "A,edit,2020-01-03,3\nA,edit,2020-01-02,2\n").unwrap();
    let o = wikipulse(&["watch", "--in", p(&feed)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"));
    let o = wikipulse(&["watch", "--in", p(&feed), "--sort"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn watch_replays_event_files() {
    let o = wikipulse(&["watch", "--edits", p(&fixture("report/edits.jsonl"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("2007-01-31,Alpha,edit,80,8.000000"), "{out}");
}

#[test]
fn parse_talk_directory() {
    let tmp = TempDir::new().unwrap();
    let pages = tmp.path().join("pages");
    fs::create_dir(&pages).unwrap();
    fs::copy(fixture("talk/01_single_comment.wiki"), pages.join("Foo_Bar.wiki")).unwrap();
    fs::write(pages.join(".hidden"), "ignored").unwrap();
    let out = tmp.path().join("comments.jsonl");
    let o = wikipulse(&["parse-talk", "--in", p(&pages), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = fs::read_to_string(&out).unwrap();
    let expected = fs::read_to_string(fixture("talk/01_single_comment.expected.jsonl"))
        .unwrap()
        .replace("\"article\":\"01_single_comment\"", "\"article\":\"Foo Bar\"");
    assert_eq!(got, expected);

    let o = wikipulse(&["hindex", "--comments", p(&out)]);
    assert!(stdout(&o).contains("Foo Bar,"));
}
