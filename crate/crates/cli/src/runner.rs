//! Search orchestration: fixed-size chunks over the requested range,
//! optional worker parallelism, and checkpointed sequential runs.
//!
//! Chunk boundaries depend only on the flags — never on the worker count —
//! and each chunk owns the records starting inside it, so the merged
//! output is byte-identical across worker counts and across
//! interrupt/resume cycles.

use crate::checkpoint::{checkpoint_path, config_hash, Checkpoint};
use crate::ledger::AdditiveDigest;
use crate::records::format_record;
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use sqfgap::engine::{search_with, RunStats, SearchConfig, Variant};
use sqfgap::{GapRecord, PrimeTable};
use std::io::{Seek, SeekFrom, Write};
use std::path::PathBuf;

pub const DEFAULT_CHUNK: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub struct SearchJob {
    pub start: u64,
    pub end: u64,
    pub min_len: u32,
    pub variant: Variant,
    pub workers: usize,
    pub chunk: u64,
    pub checkpoint_dir: Option<PathBuf>,
    /// Test hook: abandon the run after this many chunks, leaving the
    /// checkpoint behind as if the process had been killed.
    pub stop_after_chunks: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct SearchOutcome {
    pub records: u64,
    pub digest: AdditiveDigest,
    /// updates, moves, skips, candidates, records.
    pub counters: [u64; 5],
    pub interrupted: bool,
}

fn accumulate(counters: &mut [u64; 5], stats: &RunStats) {
    counters[0] += stats.updates;
    counters[1] += stats.moves;
    counters[2] += stats.skips;
    counters[3] += stats.candidates;
    counters[4] += stats.records;
}

pub fn build_prime_table(end: u64, min_len: u32) -> Result<PrimeTable> {
    let limit = (end + min_len as u64 + 1).isqrt() + 1024;
    Ok(PrimeTable::up_to(limit)?)
}

fn chunk_bounds(start: u64, end: u64, chunk: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = start;
    while lo < end {
        let hi = lo.saturating_add(chunk).min(end);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Run the search, streaming record lines into `out`. Returns the outcome;
/// `interrupted` is set when the test hook stopped the run early.
pub fn run_search(job: &SearchJob, out: &mut dyn Write) -> Result<SearchOutcome> {
    if job.end <= job.start {
        bail!(sqfgap::Error::EmptyRange {
            lo: job.start,
            hi: job.end,
        });
    }
    let primes = build_prime_table(job.end, job.min_len)?;
    let chunks = chunk_bounds(job.start, job.end, job.chunk.max(1));
    let config = SearchConfig::default();

    let mut outcome = SearchOutcome::default();
    if job.workers <= 1 {
        for &(lo, hi) in &chunks {
            let mut records: Vec<GapRecord> = Vec::new();
            let stats = search_with(
                lo,
                hi,
                job.min_len,
                job.variant,
                &primes,
                &config,
                &mut records,
            )?;
            accumulate(&mut outcome.counters, &stats);
            for r in &records {
                out.write_all(format_record(r).as_bytes())?;
                outcome.digest.add_record(r);
                outcome.records += 1;
            }
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(job.workers)
            .build()
            .context("building worker pool")?;
        let results: Vec<(Vec<GapRecord>, RunStats)> = pool.install(|| {
            chunks
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut records: Vec<GapRecord> = Vec::new();
                    let stats = search_with(
                        lo,
                        hi,
                        job.min_len,
                        job.variant,
                        &primes,
                        &config,
                        &mut records,
                    )?;
                    Ok((records, stats))
                })
                .collect::<Result<_>>()
        })?;
        for (records, stats) in results {
            accumulate(&mut outcome.counters, &stats);
            for r in &records {
                out.write_all(format_record(r).as_bytes())?;
                outcome.digest.add_record(r);
                outcome.records += 1;
            }
        }
    }
    out.flush()?;
    Ok(outcome)
}

/// Checkpointed variant: single-threaded, chunk by chunk, with the output
/// file truncated to the checkpointed offset on resume.
pub fn run_search_checkpointed(
    job: &SearchJob,
    out_path: &std::path::Path,
) -> Result<SearchOutcome> {
    let dir = job
        .checkpoint_dir
        .as_ref()
        .expect("checkpointed run needs a directory");
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating checkpoint dir {}", dir.display()))?;
    let hash = config_hash(
        job.start,
        job.end,
        job.min_len,
        &job.variant.to_string(),
        job.chunk,
    );
    let cp_path = checkpoint_path(dir, hash);
    let existing = Checkpoint::load(&cp_path, hash)?;

    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .write(true)
        .read(true)
        .open(out_path)
        .with_context(|| format!("opening output {}", out_path.display()))?;

    let mut outcome = SearchOutcome::default();
    let mut resume_from = job.start;
    let mut offset = 0u64;
    if let Some(cp) = existing {
        resume_from = cp.resume;
        offset = cp.offset;
        outcome.counters = cp.counters;
        outcome.records = cp.counters[4];
    }
    file.set_len(offset).context("truncating output to checkpoint")?;
    file.seek(SeekFrom::Start(offset))?;

    let primes = build_prime_table(job.end, job.min_len)?;
    let config = SearchConfig::default();
    let chunks: Vec<(u64, u64)> = chunk_bounds(job.start, job.end, job.chunk.max(1))
        .into_iter()
        .filter(|&(lo, _)| lo >= resume_from)
        .collect();

    // Rebuild the running digest from the already-written prefix.
    if offset > 0 {
        file.seek(SeekFrom::Start(0))?;
        let text = {
            use std::io::Read;
            let mut buf = vec![0u8; offset as usize];
            file.read_exact(&mut buf)?;
            String::from_utf8(buf).context("existing output is not text")?
        };
        for line in text.lines() {
            let record = crate::records::parse_record(line)?;
            outcome.digest.add_record(&record);
        }
        file.seek(SeekFrom::Start(offset))?;
    }

    for (done, &(lo, hi)) in chunks.iter().enumerate() {
        if let Some(limit) = job.stop_after_chunks {
            if done as u64 >= limit {
                outcome.interrupted = true;
                return Ok(outcome);
            }
        }
        let mut records: Vec<GapRecord> = Vec::new();
        let stats = search_with(
            lo,
            hi,
            job.min_len,
            job.variant,
            &primes,
            &config,
            &mut records,
        )?;
        accumulate(&mut outcome.counters, &stats);
        for r in &records {
            let line = format_record(r);
            file.write_all(line.as_bytes())?;
            offset += line.len() as u64;
            outcome.digest.add_record(r);
            outcome.records += 1;
        }
        file.flush()?;
        Checkpoint {
            config_hash: hash,
            resume: hi,
            offset,
            counters: outcome.counters,
        }
        .save(&cp_path)?;
    }
    std::fs::remove_file(&cp_path).ok();
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_covers_range_exactly() {
        let chunks = chunk_bounds(10, 105, 30);
        assert_eq!(chunks, vec![(10, 40), (40, 70), (70, 100), (100, 105)]);
    }

    #[test]
    fn worker_counts_do_not_change_output() {
        let base = SearchJob {
            start: 1,
            end: 2_000_000,
            min_len: 3,
            variant: Variant::V7,
            workers: 1,
            chunk: 1 << 16,
            checkpoint_dir: None,
            stop_after_chunks: None,
        };
        let mut solo = Vec::new();
        run_search(&base, &mut solo).unwrap();
        let mut quad = Vec::new();
        run_search(
            &SearchJob {
                workers: 4,
                ..base.clone()
            },
            &mut quad,
        )
        .unwrap();
        assert_eq!(solo, quad);
        assert!(!solo.is_empty());
    }

    #[test]
    fn interrupted_run_resumes_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let job = SearchJob {
            start: 1,
            end: 3_000_000,
            min_len: 2,
            variant: Variant::V5,
            workers: 1,
            chunk: 1 << 18,
            checkpoint_dir: Some(dir.path().to_path_buf()),
            stop_after_chunks: None,
        };

        let straight = dir.path().join("straight.txt");
        let outcome = run_search_checkpointed(&job, &straight).unwrap();
        assert!(!outcome.interrupted);

        let resumed = dir.path().join("resumed.txt");
        for stop_after in [1u64, 3, 7] {
            std::fs::remove_file(&resumed).ok();
            let interrupted = run_search_checkpointed(
                &SearchJob {
                    stop_after_chunks: Some(stop_after),
                    ..job.clone()
                },
                &resumed,
            )
            .unwrap();
            assert!(interrupted.interrupted);
            let finished = run_search_checkpointed(&job, &resumed).unwrap();
            assert!(!finished.interrupted);
            assert_eq!(
                std::fs::read(&straight).unwrap(),
                std::fs::read(&resumed).unwrap(),
                "resume after {stop_after} chunks diverged"
            );
            assert_eq!(finished.digest, outcome.digest);
        }
    }
}
