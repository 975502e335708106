//! End-to-end checks of the command line surface: flag handling, output
//! formats, exit codes, and the ledger/checkpoint workflows.

use std::path::Path;
use std::process::{Command, Output};

fn sqfgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqfgap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn search_emits_exact_record_lines() {
    let out = sqfgap(&["search", "--start", "1", "--end", "60", "--min-len", "1"]);
    assert_code(&out, 0);
    assert_eq!(
        stdout(&out),
        "4: 1\n8: 2\n12: 1\n16: 1\n18: 1\n20: 1\n24: 2\n27: 2\n32: 1\n36: 1\n40: 1\n44: 2\n48: 3\n52: 1\n54: 1\n56: 1\n"
    );
}

#[test]
fn search_rejects_inverted_range_with_usage_code() {
    let out = sqfgap(&["search", "--start", "5", "--end", "4", "--min-len", "1"]);
    assert_code(&out, 2);
}

#[test]
fn search_unwritable_output_is_io_error() {
    let out = sqfgap(&[
        "search",
        "--start",
        "1",
        "--end",
        "100",
        "--min-len",
        "1",
        "--out",
        "/nonexistent-dir/records.txt",
    ]);
    assert_code(&out, 3);
}

#[test]
fn worker_counts_yield_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let solo = dir.path().join("solo.txt");
    let quad = dir.path().join("quad.txt");
    let base = [
        "search", "--start", "1", "--end", "3000000", "--min-len", "2", "--chunk", "250000",
    ];
    let out = sqfgap(&[&base[..], &["--out", solo.to_str().unwrap()]].concat());
    assert_code(&out, 0);
    let out = sqfgap(
        &[&base[..], &["--workers", "4", "--out", quad.to_str().unwrap()]].concat(),
    );
    assert_code(&out, 0);
    let a = std::fs::read(&solo).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&quad).unwrap());
}

#[test]
fn checkpoint_interrupt_and_resume_match_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let straight = dir.path().join("straight.txt");
    let resumed = dir.path().join("resumed.txt");
    let cp = dir.path().join("checkpoints");
    let base = |out: &Path| {
        vec![
            "search".to_string(),
            "--start".into(),
            "1".into(),
            "--end".into(),
            "2000000".into(),
            "--min-len".into(),
            "3".into(),
            "--chunk".into(),
            "100000".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
            "--checkpoint-dir".into(),
            cp.to_str().unwrap().into(),
        ]
    };
    let args = base(&straight);
    let out = sqfgap(&args.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_code(&out, 0);

    let mut interrupted = base(&resumed);
    interrupted.push("--stop-after-chunks".into());
    interrupted.push("4".into());
    let out = sqfgap(&interrupted.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_code(&out, 0);

    let args = base(&resumed);
    let out = sqfgap(&args.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_code(&out, 0);

    assert_eq!(
        std::fs::read(&straight).unwrap(),
        std::fs::read(&resumed).unwrap()
    );
}

#[test]
fn verify_accepts_good_lines_and_flags_bad_ones() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("fixture.txt");
    std::fs::write(&fixture, "242: 4\n844: 5\n").unwrap();
    let out = sqfgap(&["verify", "--fixture", fixture.to_str().unwrap()]);
    assert_code(&out, 0);
    assert!(stdout(&out).contains("ok   242: 4"));

    std::fs::write(&fixture, "242: 4\n30: 1\n").unwrap();
    let out = sqfgap(&["verify", "--fixture", fixture.to_str().unwrap()]);
    assert_code(&out, 1);
    assert!(stdout(&out).contains("FAIL 30: 1"));
}

#[test]
fn verify_samples_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("fixture.txt");
    let lines: String = (0..40)
        .map(|i| format!("{}: 1\n", 4 + 4 * i * 9))
        .collect();
    std::fs::write(&fixture, lines).unwrap();
    let run = || {
        stdout(&sqfgap(&[
            "verify",
            "--fixture",
            fixture.to_str().unwrap(),
            "--sample",
            "5",
            "--seed",
            "11",
        ]))
    };
    assert_eq!(run(), run());
}

#[test]
fn catalog_factors_all_pass() {
    let out = sqfgap(&["catalog", "--check-factors"]);
    assert_code(&out, 0);
    let text = stdout(&out);
    assert_eq!(text.matches("witnesses ok").count(), 18);
}

#[test]
fn catalog_firsts_small() {
    let out = sqfgap(&["catalog", "--check-firsts", "5"]);
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("length  1: first at 4 (catalog 4) ok"));
    assert!(text.contains("length  5: first at 844 (catalog 844) ok"));
}

#[test]
fn np2min_prints_published_row_and_cover_gap() {
    let out = sqfgap(&["np2min", "--max-len", "20"]);
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(text.contains(" 10      7     8 bound-not-achievable"));
    assert!(text.contains(" 16     12    12"));
}

#[test]
fn bounds_tiny_length_reaches_eight() {
    let out = sqfgap(&[
        "bounds", "--length", "2", "--trials", "300", "--seed", "7", "--free", "0",
    ]);
    assert_code(&out, 0);
    let text = stdout(&out);
    let first = text.lines().next().unwrap();
    let mut fields = first.split_whitespace();
    assert_eq!(fields.next(), Some("2"));
    let bound: u64 = fields.next().unwrap().parse().unwrap();
    assert!(bound <= 8, "{first}");
}

#[test]
fn bounds_accepts_scientific_trials() {
    let out = sqfgap(&[
        "bounds", "--length", "3", "--trials", "1e2", "--seed", "3", "--free", "1",
    ]);
    assert_code(&out, 0);
}

#[test]
fn series_reports_value_and_tail() {
    let out = sqfgap(&["series", "--terms", "1000"]);
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("terms 1000"));
    assert!(text.contains("value 1.1"), "{text}");
}

#[test]
fn ledger_workflow_and_merge() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ledger");
    let b = dir.path().join("b.ledger");

    let out = sqfgap(&[
        "ledger", "claim", "--file", a.to_str().unwrap(),
        "--start", "0", "--end", "1000000000", "--min-len", "14",
    ]);
    assert_code(&out, 0);
    let out = sqfgap(&[
        "ledger", "claim", "--file", a.to_str().unwrap(),
        "--start", "1000000000", "--end", "2000000000", "--min-len", "14",
    ]);
    assert_code(&out, 0);
    // Overlap refused.
    let out = sqfgap(&[
        "ledger", "claim", "--file", a.to_str().unwrap(),
        "--start", "500", "--end", "600", "--min-len", "14",
    ]);
    assert_code(&out, 3);

    let out = sqfgap(&[
        "ledger", "complete", "--file", a.to_str().unwrap(),
        "--start", "0", "--end", "1000000000", "--min-len", "14", "--digest", "7",
    ]);
    assert_code(&out, 0);

    std::fs::write(&b, "2000000000 3000000000 14 done other 2005-09-09T00:00:00Z digest:0000000000000009\n").unwrap();
    let out = sqfgap(&[
        "ledger", "merge", "--file", a.to_str().unwrap(), "--other", b.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let out = sqfgap(&["ledger", "list", "--file", a.to_str().unwrap()]);
    assert_code(&out, 0);
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn search_with_ledger_records_digest() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("run.ledger");
    let out = sqfgap(&[
        "search", "--start", "1", "--end", "100000", "--min-len", "2",
        "--ledger", ledger.to_str().unwrap(), "--owner", "tester",
        "--out", dir.path().join("r.txt").to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let text = std::fs::read_to_string(&ledger).unwrap();
    assert!(text.contains("done"), "{text}");
    assert!(text.contains("digest:"), "{text}");
}

#[test]
fn plot_csv_qgap_lists_catalog() {
    let out = sqfgap(&["plot-csv", "--what", "qgap"]);
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(text.starts_with("length,start\n"));
    assert!(text.contains("18,125781000834058568"));
}

#[test]
fn fixture_files_parse_with_expected_shapes() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let b = std::fs::read_to_string(root.join("gaps_min14_to_5e15.txt")).unwrap();
    let c = std::fs::read_to_string(root.join("gaps_min15_to_1.26e17.txt")).unwrap();
    let d = std::fs::read_to_string(root.join("gaps_min16_to_1.26e17.txt")).unwrap();
    assert_eq!(b.lines().count(), 2876);
    assert_eq!(c.lines().count(), 2407);
    assert_eq!(d.lines().count(), 36);
    assert!(d.contains("125781000834058568: 18"));
}
