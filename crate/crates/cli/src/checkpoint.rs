//! Search checkpoints: versioned line-oriented text, configuration hash
//! first. Resuming an interrupted run continues at the recorded position
//! and truncates the output file to the recorded byte offset, so the final
//! record stream is byte-identical to an uninterrupted run.

use anyhow::{bail, Context, Result};
use std::path::{Path, PathBuf};

const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub config_hash: u64,
    /// Next position to scan: everything below is finished and flushed.
    pub resume: u64,
    /// Bytes of the output file covered by the finished prefix.
    pub offset: u64,
    /// Accumulated counters: updates, moves, skips, candidates, records.
    pub counters: [u64; 5],
}

/// Stable hash of the search configuration; a checkpoint from different
/// flags must not be resumed.
pub fn config_hash(start: u64, end: u64, min_len: u32, variant: &str, chunk: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let text = format!("{VERSION} {start} {end} {min_len} {variant} {chunk}");
    let mut h = OFFSET;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}

pub fn checkpoint_path(dir: &Path, hash: u64) -> PathBuf {
    dir.join(format!("search-{hash:016x}.checkpoint"))
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = format!(
            "{VERSION} {:016x}\nresume {}\noffset {}\nstats {} {} {} {} {}\n",
            self.config_hash,
            self.resume,
            self.offset,
            self.counters[0],
            self.counters[1],
            self.counters[2],
            self.counters[3],
            self.counters[4],
        );
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).context("writing checkpoint")?;
        std::fs::rename(&tmp, path).context("replacing checkpoint")?;
        Ok(())
    }

    pub fn load(path: &Path, expected_hash: u64) -> Result<Option<Checkpoint>> {
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading checkpoint {}", path.display()))?;
        let mut lines = text.lines();
        let header = lines.next().context("empty checkpoint")?;
        let (version, hash) = header
            .split_once(' ')
            .context("malformed checkpoint header")?;
        if version != VERSION {
            bail!("unsupported checkpoint version {version:?}");
        }
        let config_hash = u64::from_str_radix(hash, 16).context("checkpoint hash")?;
        if config_hash != expected_hash {
            bail!(
                "checkpoint {} belongs to a different search configuration",
                path.display()
            );
        }
        let mut resume = None;
        let mut offset = None;
        let mut counters = [0u64; 5];
        for line in lines {
            match line.split_once(' ') {
                Some(("resume", v)) => resume = Some(v.trim().parse().context("resume")?),
                Some(("offset", v)) => offset = Some(v.trim().parse().context("offset")?),
                Some(("stats", v)) => {
                    let parts: Vec<u64> = v
                        .split_whitespace()
                        .map(|x| x.parse().context("stats"))
                        .collect::<Result<_>>()?;
                    if parts.len() != 5 {
                        bail!("stats line needs 5 counters");
                    }
                    counters.copy_from_slice(&parts);
                }
                _ => bail!("unrecognized checkpoint line {line:?}"),
            }
        }
        Ok(Some(Checkpoint {
            config_hash,
            resume: resume.context("checkpoint missing resume line")?,
            offset: offset.context("checkpoint missing offset line")?,
            counters,
        }))
    }
}
