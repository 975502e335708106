//! The production gap search.
//!
//! Eight variant levels implement the same contract — emit every maximal
//! run of at least `min_len` consecutive non-square-free integers whose
//! start lies in `[start, end)` — with progressively cheaper work per
//! position:
//!
//! - **V0**: the oracle's segmented cross-out window, wrapped in the engine
//!   interface as an independent baseline.
//! - **V1**: two parallel arrays of squared primes and their next
//!   multiples, kept sorted by insertion.
//! - **V2**: V1 plus the capacity skip — whole stretches that cannot hold
//!   `np2min(min_len)` distinct squared primes are jumped over.
//! - **V3**: the smallest squared primes leave the sorted arrays and form a
//!   base checked by trial division around each candidate.
//! - **V4**: V3 with the base residues carried incrementally instead of
//!   recomputed.
//! - **V5**: one more prime moves from the base to the sorted arrays; a
//!   candidate is examined only when the next active multiple is close.
//! - **V6**: V5 with the sort replaced by a chained list (successor
//!   indices), inserting near its predecessor slot.
//! - **V7**: a three-prime base cut with the closeness test applied two
//!   list nodes ahead.
//!
//! Every level produces the identical record list; the test suite holds
//! them to that.

mod incremental;
mod window;

pub use incremental::{IncrementalState, StepEvent};

use crate::error::{Error, Result};
use crate::oracle::GapRecord;
use crate::primes::PrimeTable;

/// Variant level of the sieve engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Segmented cross-out window (the oracle path).
    V0,
    /// Sorted squared-prime / next-multiple arrays.
    V1,
    /// V1 with the capacity skip rule.
    V2,
    /// Base split: smallest squared primes checked by trial division.
    V3,
    /// Base split with incrementally maintained residues.
    V4,
    /// Two-prime cut with the next-multiple closeness test.
    V5,
    /// Chained-list ordering instead of array sorting.
    V6,
    /// Three-prime cut, closeness tested two nodes ahead.
    V7,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::V0,
        Variant::V1,
        Variant::V2,
        Variant::V3,
        Variant::V4,
        Variant::V5,
        Variant::V6,
        Variant::V7,
    ];

    /// Size of the base: how many of the smallest squared primes leave the
    /// active structure, given the cover minimum for the target length.
    pub(crate) fn base_size(self, np2: u32) -> u32 {
        match self {
            Variant::V0 | Variant::V1 | Variant::V2 => 0,
            Variant::V3 | Variant::V4 => np2.saturating_sub(1),
            Variant::V5 | Variant::V6 => np2.saturating_sub(2),
            Variant::V7 => np2.saturating_sub(3),
        }
    }

    pub(crate) fn chained(self) -> bool {
        matches!(self, Variant::V6 | Variant::V7)
    }

    pub(crate) fn cached_residues(self) -> bool {
        matches!(self, Variant::V4 | Variant::V5 | Variant::V6 | Variant::V7)
    }

    pub(crate) fn capacity_skip(self) -> bool {
        self == Variant::V2
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "v0" | "0" => Ok(Variant::V0),
            "v1" | "1" => Ok(Variant::V1),
            "v2" | "2" => Ok(Variant::V2),
            "v3" | "3" => Ok(Variant::V3),
            "v4" | "4" => Ok(Variant::V4),
            "v5" | "5" => Ok(Variant::V5),
            "v6" | "6" => Ok(Variant::V6),
            "v7" | "7" => Ok(Variant::V7),
            other => Err(format!("unknown variant '{other}', expected v0..v7")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Variant::V0 => "v0",
            Variant::V1 => "v1",
            Variant::V2 => "v2",
            Variant::V3 => "v3",
            Variant::V4 => "v4",
            Variant::V5 => "v5",
            Variant::V6 => "v6",
            Variant::V7 => "v7",
        };
        f.write_str(s)
    }
}

/// Tunables that do not affect which records are produced.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Segment width for the V0 window, in numbers.
    pub segment: usize,
    /// Primes above this value join the active structure lazily, when the
    /// scan first approaches their square.
    pub stream_threshold: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            segment: 1 << 20,
            stream_threshold: 1 << 22,
        }
    }
}

/// Counters maintained by every search run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Width of the owned range `end - start`.
    pub span: u64,
    /// Next-multiple increments.
    pub updates: u64,
    /// Sort displacement: array cells shifted or list nodes passed.
    pub moves: u64,
    /// Capacity jumps and closeness skips.
    pub skips: u64,
    /// Candidate positions examined with a full run test.
    pub candidates: u64,
    /// Records emitted.
    pub records: u64,
    /// `moves`, split over ten equal slices of the owned range.
    pub decile_moves: [u64; 10],
}

impl RunStats {
    /// Average sort displacement per position of the scanned range. This is
    /// the quantity the cost analysis predicts.
    pub fn moves_per_position(&self) -> f64 {
        if self.span == 0 {
            return 0.0;
        }
        self.moves as f64 / self.span as f64
    }

    /// Per-decile means of the same quantity.
    pub fn decile_move_means(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        if self.span == 0 {
            return out;
        }
        let width = self.span as f64 / 10.0;
        for (i, &m) in self.decile_moves.iter().enumerate() {
            out[i] = m as f64 / width;
        }
        out
    }
}

/// Receiver for emitted records; lets large searches avoid materializing
/// record lists.
pub trait GapSink {
    fn record(&mut self, record: GapRecord);
}

impl GapSink for Vec<GapRecord> {
    fn record(&mut self, record: GapRecord) {
        self.push(record);
    }
}

impl<F: FnMut(GapRecord)> GapSink for F {
    fn record(&mut self, record: GapRecord) {
        self(record);
    }
}

/// Order-sensitive digest of a record stream; two equal streams have equal
/// digests. Used to compare variant outputs without holding them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamDigest {
    pub count: u64,
    pub hash: u64,
}

impl StreamDigest {
    pub fn push(&mut self, record: GapRecord) {
        // FNV-1a over the record fields, chained through the running hash.
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = if self.count == 0 { OFFSET } else { self.hash };
        for byte in record
            .start
            .to_le_bytes()
            .into_iter()
            .chain((record.length as u64).to_le_bytes())
        {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
        self.hash = h;
        self.count += 1;
    }
}

impl GapSink for StreamDigest {
    fn record(&mut self, record: GapRecord) {
        self.push(record);
    }
}

/// Run the gap search over `[start, end)` and collect the records.
pub fn search(
    start: u64,
    end: u64,
    min_len: u32,
    variant: Variant,
    primes: &PrimeTable,
) -> Result<(Vec<GapRecord>, RunStats)> {
    let mut records = Vec::new();
    let stats = search_with(
        start,
        end,
        min_len,
        variant,
        primes,
        &SearchConfig::default(),
        &mut records,
    )?;
    Ok((records, stats))
}

/// Run the gap search, streaming records into `sink`.
///
/// Emits exactly the maximal runs of length `>= min_len` whose start lies
/// in `[start, end)`, ascending, independent of the variant level. The
/// engine over-scans both ends so maximality is certified; a record
/// starting exactly at `end` belongs to the next work unit.
pub fn search_with(
    start: u64,
    end: u64,
    min_len: u32,
    variant: Variant,
    primes: &PrimeTable,
    config: &SearchConfig,
    sink: &mut impl GapSink,
) -> Result<RunStats> {
    if start == 0 {
        return Err(Error::OutOfDomain(0));
    }
    if end <= start {
        return Err(Error::EmptyRange { lo: start, hi: end });
    }
    if min_len == 0 {
        return Err(Error::ZeroMinLength);
    }
    primes.require_limit((end + min_len as u64 + 1).isqrt())?;

    match variant {
        Variant::V0 => window::search(start, end, min_len, primes, config, sink),
        _ => incremental::search(start, end, min_len, variant, primes, config, sink),
    }
}
