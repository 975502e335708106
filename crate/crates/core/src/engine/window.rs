//! V0: the oracle's segmented cross-out window behind the engine interface.
//!
//! Deliberately shares its code path with [`crate::oracle`] so the variant
//! equivalence suite really does pit the incremental sieve against an
//! independent baseline.

use crate::engine::{GapSink, RunStats, SearchConfig};
use crate::error::Result;
use crate::oracle;
use crate::primes::PrimeTable;

pub(super) fn search(
    start: u64,
    end: u64,
    min_len: u32,
    primes: &PrimeTable,
    config: &SearchConfig,
    sink: &mut impl GapSink,
) -> Result<RunStats> {
    let mut stats = RunStats {
        span: end - start,
        ..RunStats::default()
    };
    oracle::stream_gaps(start, end, min_len, primes, config.segment, |record| {
        stats.candidates += 1;
        stats.records += 1;
        sink.record(record);
    })?;
    Ok(stats)
}
