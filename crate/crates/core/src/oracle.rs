//! Ground-truth primitives.
//!
//! Everything here is deliberately simple: trial division, a windowed
//! cross-out sieve, and run enumeration on top of it. The production engine
//! in [`crate::engine`] is validated against these functions, so they must
//! stay independent of it.

use crate::error::{Error, Result};
use crate::primes::PrimeTable;

/// Default segment width, in numbers, for the windowed enumeration.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

/// Largest mask the one-shot window sieve will materialize.
pub const DEFAULT_MASK_BUDGET: u64 = 1 << 26;

/// A maximal run of consecutive non-square-free integers.
///
/// `start - 1` and `start + length` are square-free; every position inside
/// the run is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GapRecord {
    pub start: u64,
    pub length: u32,
}

impl GapRecord {
    pub fn new(start: u64, length: u32) -> Self {
        debug_assert!(length >= 1);
        GapRecord { start, length }
    }

    /// One past the last position of the run.
    pub fn end(&self) -> u64 {
        self.start + self.length as u64
    }
}

/// True iff no squared prime divides `n`.
///
/// Requires the table to cover primes up to `floor(sqrt(n))`; a smaller
/// table is an error, never a silent wrong answer.
pub fn is_squarefree(n: u64, primes: &PrimeTable) -> Result<bool> {
    if n == 0 {
        return Err(Error::OutOfDomain(0));
    }
    primes.require_limit(n.isqrt())?;
    let mut m = n;
    for p in primes.iter() {
        if p * p > m {
            break;
        }
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Möbius function: 0 for non-square-free `n`, otherwise (-1)^k where `k`
/// counts the distinct prime factors.
pub fn mobius(n: u64, primes: &PrimeTable) -> Result<i8> {
    if n == 0 {
        return Err(Error::OutOfDomain(0));
    }
    primes.require_limit(n.isqrt())?;
    let mut m = n;
    let mut factors = 0u32;
    for p in primes.iter() {
        if p * p > m {
            break;
        }
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return Ok(0);
            }
            factors += 1;
        }
    }
    if m > 1 {
        factors += 1;
    }
    Ok(if factors % 2 == 0 { 1 } else { -1 })
}

/// Cross out every multiple of `p*p` inside `[lo, hi]` (inclusive) in a
/// mask indexed from `lo`.
fn cross_out(mask: &mut [bool], lo: u64, hi: u64, primes: &PrimeTable) {
    for p in primes.iter() {
        let p2 = p * p;
        if p2 > hi {
            break;
        }
        let mut m = lo.div_ceil(p2) * p2;
        while m <= hi {
            mask[(m - lo) as usize] = false;
            m += p2;
        }
    }
}

/// Square-freeness mask over `[lo, hi)`: `mask[n - lo]` is true iff `n` is
/// square-free, computed by crossing out multiples of every squared prime.
pub fn naive_window_sieve(lo: u64, hi: u64, primes: &PrimeTable) -> Result<Vec<bool>> {
    naive_window_sieve_with_budget(lo, hi, primes, DEFAULT_MASK_BUDGET)
}

pub fn naive_window_sieve_with_budget(
    lo: u64,
    hi: u64,
    primes: &PrimeTable,
    budget: u64,
) -> Result<Vec<bool>> {
    if lo == 0 {
        return Err(Error::OutOfDomain(0));
    }
    if hi <= lo {
        return Err(Error::EmptyRange { lo, hi });
    }
    let len = hi - lo;
    if len > budget {
        return Err(Error::WindowTooLarge { lo, hi, len, budget });
    }
    primes.require_limit((hi - 1).isqrt())?;
    let mut mask = vec![true; len as usize];
    cross_out(&mut mask, lo, hi - 1, primes);
    Ok(mask)
}

/// All maximal runs of consecutive non-square-free integers with length
/// `>= min_len` and start inside `[lo, hi)`, ascending by start.
///
/// The examined region is silently extended on both sides (and further to
/// the right while a run is still open) so every reported run is certified
/// maximal: its neighbours really are square-free. Runs starting before
/// `lo` or at/after `hi` belong to the adjacent window and are not
/// reported. Memory is `O(segment)`, not `O(hi - lo)`.
pub fn enumerate_gaps_bruteforce(
    lo: u64,
    hi: u64,
    min_len: u32,
    primes: &PrimeTable,
) -> Result<Vec<GapRecord>> {
    enumerate_gaps_with_segment(lo, hi, min_len, primes, DEFAULT_SEGMENT)
}

pub fn enumerate_gaps_with_segment(
    lo: u64,
    hi: u64,
    min_len: u32,
    primes: &PrimeTable,
    segment: usize,
) -> Result<Vec<GapRecord>> {
    let mut records = Vec::new();
    stream_gaps(lo, hi, min_len, primes, segment, |r| records.push(r))?;
    Ok(records)
}

/// Streaming form of the brute-force enumeration: `emit` is called once per
/// qualifying run, ascending by start, without materializing the list.
pub fn stream_gaps(
    lo: u64,
    hi: u64,
    min_len: u32,
    primes: &PrimeTable,
    segment: usize,
    mut emit: impl FnMut(GapRecord),
) -> Result<()> {
    if lo == 0 {
        return Err(Error::OutOfDomain(0));
    }
    if hi <= lo {
        return Err(Error::EmptyRange { lo, hi });
    }
    if min_len == 0 {
        return Err(Error::ZeroMinLength);
    }
    primes.require_limit((hi - 1).isqrt())?;

    let ext_lo = lo.saturating_sub(min_len as u64 + 1).max(1);
    let mut last_sqf: Option<u64> = None;
    let mut seg_lo = ext_lo;
    // The scan normally ends a little past `hi`; it extends further only as
    // long as a run is still open, and the coverage check follows it.
    let mut frontier = hi + min_len as u64 + 1;
    let mut mask = vec![true; segment];

    loop {
        let seg_hi = (seg_lo + segment as u64 - 1).min(frontier);
        primes.require_limit(seg_hi.isqrt())?;
        let len = (seg_hi - seg_lo + 1) as usize;
        mask[..len].fill(true);
        cross_out(&mut mask[..len], seg_lo, seg_hi, primes);

        for (i, &sqf) in mask[..len].iter().enumerate() {
            if !sqf {
                continue;
            }
            let pos = seg_lo + i as u64;
            if let Some(prev) = last_sqf {
                let run_len = pos - prev - 1;
                let start = prev + 1;
                if run_len >= min_len as u64 && start >= lo && start < hi {
                    emit(GapRecord::new(start, run_len as u32));
                }
            }
            last_sqf = Some(pos);
            if pos >= hi {
                // Any further run starts past `hi`; nothing left to report.
                return Ok(());
            }
        }
        seg_lo = seg_hi + 1;
        if seg_lo > frontier {
            frontier += segment as u64;
        }
    }
}
