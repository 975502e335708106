//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them). The tests
//! share a gate so the wall-clock comparison runs without sibling load.
//!
//! The large first-occurrence reproduction is real but slow, so it is
//! `#[ignore]`d by default: `cargo test -p sqfgap-cli --test acceptance
//! -- --ignored` runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqfgap::analysis::{compare_measured_moves, move_series};
use sqfgap::crt::{random_search, verify_certificate, SearchStrategy};
use sqfgap::engine::{search, search_with, SearchConfig, StreamDigest, Variant};
use sqfgap::{catalog, np2min, oracle, GapRecord, PrimeTable};
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn primes_mid() -> &'static PrimeTable {
    static T: OnceLock<PrimeTable> = OnceLock::new();
    T.get_or_init(|| PrimeTable::up_to((1_000_000_000_000u64 + 1_000_000_100).isqrt() + 1024).unwrap())
}

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion}: {detail}");
}

fn sqfgap_bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sqfgap"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

#[test]
fn acceptance_01_first_occurrences_small() {
    let _g = serial();
    let t0 = Instant::now();
    let (code, text) = sqfgap_bin(&["catalog", "--check-firsts", "9"]);
    let expected = [
        (1u32, 4u64),
        (2, 8),
        (3, 48),
        (4, 242),
        (5, 844),
        (6, 22_020),
        (7, 217_070),
        (8, 1_092_747),
        (9, 8_870_024),
    ];
    let all_listed = expected.iter().all(|(len, start)| {
        text.contains(&format!("length {len:2}: first at {start} (catalog {start}) ok"))
    });
    let ok = code == 0 && all_listed;
    verdict(
        "1 (first occurrences, lengths 1-9)",
        ok,
        &format!("catalog --check-firsts 9 in {:.1?}", t0.elapsed()),
    );
}

#[test]
fn acceptance_02_first_occurrences_medium() {
    let _g = serial();
    let t0 = Instant::now();
    let primes = PrimeTable::up_to(300_000_011u64.isqrt() + 64).unwrap();
    let (records, _) = search(1, 300_000_000, 10, Variant::V7, &primes).unwrap();
    let first10 = records.iter().find(|r| r.length == 10).map(|r| r.start);
    let first11 = records.iter().find(|r| r.length == 11).map(|r| r.start);
    let ok = first10 == Some(262_315_467) && first11 == Some(221_167_422);
    verdict(
        "2 (first occurrences, lengths 10-11)",
        ok,
        &format!(
            "first exact-10 {first10:?}, first exact-11 {first11:?}, {:.1?}",
            t0.elapsed()
        ),
    );
}

#[test]
#[ignore = "slow: scans [1, 1e11]"]
fn acceptance_03_first_occurrence_length_12() {
    let _g = serial();
    let t0 = Instant::now();
    let primes = PrimeTable::up_to(100_000_000_013u64.isqrt() + 64).unwrap();
    let (records, _) = search(1, 100_000_000_000, 12, Variant::V7, &primes).unwrap();
    let first12 = records.iter().find(|r| r.length == 12).map(|r| r.start);
    let ok = first12 == Some(47_255_689_915);
    verdict(
        "3 (first occurrence, length 12, slow)",
        ok,
        &format!("first exact-12 {first12:?}, {:.1?}", t0.elapsed()),
    );
}

#[test]
fn acceptance_04_np2min_row() {
    let _g = serial();
    let computed: Vec<u32> = (1..=17).map(np2min::np2min).collect();
    let ok = computed == np2min::KNOWN_ROW.to_vec() && np2min::verify_known_row().is_ok();
    verdict(
        "4 (np2min values, lengths 1-17)",
        ok,
        &format!("{computed:?}"),
    );
}

#[test]
fn acceptance_05_witness_divisibility() {
    let _g = serial();
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let gaps = catalog::first_occurrences();
    for gap in &gaps {
        if let Err(e) = gap.verify_witnesses() {
            failures.push(e.to_string());
        }
    }
    let composites_present = [
        (14, 5, vec![13, 59]),
        (17, 1, vec![11, 23]),
        (18, 9, vec![7, 23]),
        (10, 9, vec![2, 3]),
    ]
    .iter()
    .all(|(len, offset, primes)| {
        gaps.iter()
            .find(|g| g.length == *len)
            .map(|g| g.witnesses[*offset as usize] == *primes)
            .unwrap_or(false)
    });
    let ok = failures.is_empty() && gaps.len() == 18 && composites_present;
    verdict(
        "5 (witness divisibility, all 18 rows)",
        ok,
        &format!("failures {failures:?}, {:.1?}", t0.elapsed()),
    );
}

#[test]
fn acceptance_06_appendix_spot_checks() {
    let _g = serial();
    let t0 = Instant::now();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let parse = |name: &str| -> Vec<GapRecord> {
        let text = std::fs::read_to_string(fixtures.join(name)).unwrap();
        let mut seen = std::collections::HashSet::new();
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (n, len) = l.split_once(':').unwrap();
                GapRecord::new(n.trim().parse().unwrap(), len.trim().parse().unwrap())
            })
            .filter(|r| seen.insert(*r))
            .collect()
    };
    let mut long_lists = parse("gaps_min14_to_5e15.txt");
    long_lists.extend(parse("gaps_min15_to_1.26e17.txt"));
    let d_list = parse("gaps_min16_to_1.26e17.txt");
    assert_eq!(d_list.len(), 36);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let picks = rand::seq::index::sample(&mut rng, long_lists.len(), 50);
    let mut chosen: Vec<GapRecord> = picks.iter().map(|i| long_lists[i]).collect();
    chosen.extend(d_list.iter().copied());

    let needed = chosen.iter().map(|r| r.end() + 1).max().unwrap();
    let primes = PrimeTable::up_to(needed.isqrt() + 16).unwrap();

    let mut failures = Vec::new();
    for record in &chosen {
        let lo = record.start - 1;
        let hi = record.end() + 1;
        let mask = oracle::naive_window_sieve(lo, hi, &primes).unwrap();
        let boundaries = mask[0] && mask[(hi - lo - 1) as usize];
        let interior = (record.start..record.end()).all(|n| !mask[(n - lo) as usize]);
        if !(boundaries && interior) {
            failures.push(*record);
        }
    }
    let has_longest = chosen
        .iter()
        .any(|r| r.start == 125_781_000_834_058_568 && r.length == 18);
    let ok = failures.is_empty() && has_longest;
    verdict(
        "6 (published gap lists spot checks)",
        ok,
        &format!(
            "{} lines verified (50 sampled + 36 full), failures {failures:?}, {:.1?}",
            chosen.len(),
            t0.elapsed()
        ),
    );
}

#[test]
fn acceptance_07_variant_equivalence() {
    let _g = serial();
    let t0 = Instant::now();
    let config = SearchConfig::default();
    let mut checked = 0;

    let low_primes = PrimeTable::up_to(100_000_013u64.isqrt() + 64).unwrap();
    for min_len in [1u32, 3, 5, 7] {
        let mut reference: Option<StreamDigest> = None;
        for variant in Variant::ALL {
            let mut digest = StreamDigest::default();
            search_with(1, 100_000_000, min_len, variant, &low_primes, &config, &mut digest)
                .unwrap();
            match &reference {
                None => reference = Some(digest),
                Some(expected) => assert_eq!(
                    &digest, expected,
                    "{variant} differs on [1, 1e8) at min_len {min_len}"
                ),
            }
            checked += 1;
        }
    }

    let lo = 1_000_000_000_000u64;
    let hi = lo + 1_000_000_000;
    for min_len in [13u32, 14] {
        let mut reference: Option<StreamDigest> = None;
        for variant in Variant::ALL {
            let mut digest = StreamDigest::default();
            search_with(lo, hi, min_len, variant, primes_mid(), &config, &mut digest).unwrap();
            match &reference {
                None => reference = Some(digest),
                Some(expected) => assert_eq!(
                    &digest, expected,
                    "{variant} differs on [1e12, 1e12+1e9) at min_len {min_len}"
                ),
            }
            checked += 1;
        }
    }
    verdict(
        "7 (variant equivalence)",
        true,
        &format!("{checked} runs agree, {:.1?}", t0.elapsed()),
    );
}

#[test]
fn acceptance_08_oracle_equivalence() {
    let _g = serial();
    let t0 = Instant::now();
    let primes = PrimeTable::up_to(1_100).unwrap();
    for min_len in 1..=8u32 {
        let expected = oracle::enumerate_gaps_bruteforce(1, 1_000_000, min_len, &primes).unwrap();
        for variant in Variant::ALL {
            let (got, _) = search(1, 1_000_000, min_len, variant, &primes).unwrap();
            assert_eq!(got, expected, "{variant} vs oracle at min_len {min_len}");
        }
    }
    verdict(
        "8 (engine vs brute force, lengths 1-8)",
        true,
        &format!("64 runs agree, {:.1?}", t0.elapsed()),
    );
}

#[test]
fn acceptance_09_directional_speedups() {
    let _g = serial();
    let lo = 1_000_000_000_000u64;
    let hi = lo + 1_000_000_000;
    let min_len = 14u32;
    let variants = [Variant::V1, Variant::V2, Variant::V5, Variant::V6, Variant::V7];
    let config = SearchConfig::default();
    let mut best = [f64::INFINITY; 5];

    // Interleaved repetitions; the minimum discards load spikes.
    for _ in 0..3 {
        for (i, &variant) in variants.iter().enumerate() {
            let mut digest = StreamDigest::default();
            let t0 = Instant::now();
            search_with(lo, hi, min_len, variant, primes_mid(), &config, &mut digest).unwrap();
            best[i] = best[i].min(t0.elapsed().as_secs_f64());
        }
    }
    let ms: Vec<String> = variants
        .iter()
        .zip(&best)
        .map(|(v, t)| format!("{v} {:.0} ms", t * 1e3))
        .collect();
    println!(
        "criterion 9 timings: {} | v1/v2 {:.2}x, v5/v6 {:.2}x, v6/v7 {:.2}x",
        ms.join(", "),
        best[0] / best[1],
        best[2] / best[3],
        best[3] / best[4],
    );
    let ok = best[1] < best[0] && best[3] < best[2] && best[4] < best[3];
    verdict(
        "9 (directional speedups at length 14)",
        ok,
        &format!(
            "v2 < v1: {}; v6 < v5: {}; v7 < v6: {}",
            best[1] < best[0],
            best[3] < best[2],
            best[4] < best[3]
        ),
    );
}

#[test]
fn acceptance_10_series_and_measured_moves() {
    let _g = serial();
    let t0 = Instant::now();
    let primes = PrimeTable::first_n(1_000_000).unwrap();

    let mut monotone = true;
    let mut prev = 0.0;
    for terms in [100usize, 1_000, 10_000, 100_000, 1_000_000] {
        let s = move_series(terms, &primes).unwrap();
        monotone &= s.value > prev;
        prev = s.value;
    }
    let series = move_series(1_000_000, &primes).unwrap();
    let upper = series.value + series.tail_estimate;
    let brackets = series.value <= 1.35 && upper >= 1.25;

    let lo = 1_000_000_000u64;
    let hi = lo + 100_000_000;
    let scan_primes = PrimeTable::up_to((hi + 16).isqrt() + 64).unwrap();
    let mut sink = StreamDigest::default();
    let stats = search_with(
        lo,
        hi,
        1,
        Variant::V1,
        &scan_primes,
        &SearchConfig::default(),
        &mut sink,
    )
    .unwrap();
    let comparison = compare_measured_moves(&stats, &series).unwrap();
    let enough_updates = stats.updates >= 10_000_000;
    let close = comparison.abs_difference <= 0.15;
    let flat = comparison.flatness < 0.10;

    let ok = monotone && brackets && enough_updates && close && flat;
    verdict(
        "10 (sort-cost series vs measurement)",
        ok,
        &format!(
            "value(1e6)={:.4}, bracket=[{:.4}, {:.4}], measured={:.4}, diff={:.4}, flatness={:.4}, {:.1?}",
            series.value,
            series.value,
            upper,
            comparison.measured_mean,
            comparison.abs_difference,
            comparison.flatness,
            t0.elapsed()
        ),
    );
}

#[test]
fn acceptance_11_crt_construction() {
    let _g = serial();
    let t0 = Instant::now();
    let primes = PrimeTable::first_n(1000).unwrap();
    let outcome =
        random_search(12, 100_000, 1, &SearchStrategy::default(), &primes).unwrap();
    let best = outcome.best.clone();
    let ok = outcome.successes >= 1
        && best
            .as_ref()
            .map(|b| b.length == 12 && verify_certificate(b))
            .unwrap_or(false);
    verdict(
        "11 (randomized congruence construction, length 12)",
        ok,
        &format!(
            "{} verified assignments in 1e5 trials, best bound {:?}, {:.1?}",
            outcome.successes,
            best.map(|b| b.bound.to_string()),
            t0.elapsed()
        ),
    );
}

#[test]
fn acceptance_12_determinism() {
    let _g = serial();
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    // Same flags, repeated runs: byte-identical.
    let one = dir.path().join("one.txt");
    let two = dir.path().join("two.txt");
    let run = |out: &Path, workers: &str| {
        let (code, _) = sqfgap_bin(&[
            "search", "--start", "1", "--end", "4000000", "--min-len", "2",
            "--chunk", "300000", "--workers", workers,
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        std::fs::read(out).unwrap()
    };
    let bytes_one = run(&one, "1");
    let repeat = run(&one, "1");
    let bytes_four = run(&two, "4");
    let workers_match = bytes_one == repeat && bytes_one == bytes_four;

    // Seeded construction: identical outputs across runs.
    let primes = PrimeTable::first_n(1000).unwrap();
    let strategy = SearchStrategy {
        free_offsets: 2,
        ..SearchStrategy::default()
    };
    let a = random_search(9, 500, 42, &strategy, &primes).unwrap();
    let b = random_search(9, 500, 42, &strategy, &primes).unwrap();
    let seeds_match = a.successes == b.successes
        && a.best.map(|r| r.bound) == b.best.map(|r| r.bound);

    // Interrupt/resume against straight-through, byte for byte.
    let cp = dir.path().join("cp");
    let straight = dir.path().join("straight.txt");
    let resumed = dir.path().join("resumed.txt");
    let cp_run = |out: &Path, extra: &[&str]| {
        let mut args = vec![
            "search", "--start", "1", "--end", "4000000", "--min-len", "2",
            "--chunk", "300000", "--out", out.to_str().unwrap(),
            "--checkpoint-dir", cp.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let (code, _) = sqfgap_bin(&args);
        assert_eq!(code, 0);
    };
    cp_run(&straight, &[]);
    // Interrupt at a randomized chunk, twice, then finish.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..2 {
        let stop = 1 + (rand::Rng::gen_range(&mut rng, 0..8u64));
        std::fs::remove_file(&resumed).ok();
        cp_run(&resumed, &["--stop-after-chunks", &stop.to_string()]);
        cp_run(&resumed, &["--stop-after-chunks", &(stop + 3).to_string()]);
        cp_run(&resumed, &[]);
        assert_eq!(
            std::fs::read(&straight).unwrap(),
            std::fs::read(&resumed).unwrap()
        );
    }
    let ok = workers_match && seeds_match;
    verdict(
        "12 (determinism and resume equivalence)",
        ok,
        &format!(
            "workers match: {workers_match}, seeded search matches: {seeds_match}, resume matches, {:.1?}",
            t0.elapsed()
        ),
    );
}
