//! Expected sort cost of the V1 sieve.
//!
//! When the smallest multiple is advanced, the new value has to be moved up
//! the sorted array. Summing, over every squared prime, the chance that the
//! advanced value passes another slot gives a series for the expected
//! number of moves per position scanned. The series converges — slowly —
//! and this module computes truncations with explicit tail bounds, plus
//! the comparison against measured run statistics.

use crate::engine::RunStats;
use crate::error::{Error, Result};
use crate::primes::PrimeTable;

/// A truncated series value with a bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPartialSum {
    pub terms_used: usize,
    pub value: f64,
    pub tail_estimate: f64,
}

/// Kahan compensated accumulator; keeps the monotonicity of partial sums
/// exact in practice.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Expected moves contributed per position when the advancing slot holds
/// the `rank`-th prime (1-based): `(rank-1)/p(rank)^2 + sum_{i>rank} 1/p(i)^2`,
/// truncated at `terms` primes.
///
/// The tail bound uses `sum_{n > p} 1/n^2 < 1/p`.
pub fn rank_move_share(rank: usize, terms: usize, primes: &PrimeTable) -> Result<SeriesPartialSum> {
    if rank == 0 || terms < rank {
        return Err(Error::TooFewPrimes {
            needed: rank,
            available: terms,
        });
    }
    primes.require_count(terms)?;
    let p_rank = primes.get(rank - 1) as f64;
    let mut acc = Kahan::default();
    acc.add((rank as f64 - 1.0) / (p_rank * p_rank));
    for i in rank..terms {
        let p = primes.get(i) as f64;
        acc.add(1.0 / (p * p));
    }
    Ok(SeriesPartialSum {
        terms_used: terms,
        value: acc.value(),
        tail_estimate: 1.0 / primes.get(terms - 1) as f64,
    })
}

/// Total expected moves per position: `2 * sum_{i=2..terms} (i-1)/p(i)^2`.
///
/// The tail uses `p(n) > n ln n`, so the remainder is below
/// `2 * integral dx / (x ln^2 x) = 2 / ln(terms)`.
pub fn move_series(terms: usize, primes: &PrimeTable) -> Result<SeriesPartialSum> {
    if terms < 2 {
        return Err(Error::TooFewPrimes {
            needed: 2,
            available: terms,
        });
    }
    primes.require_count(terms)?;
    let mut acc = Kahan::default();
    for i in 2..=terms {
        let p = primes.get(i - 1) as f64;
        acc.add((i as f64 - 1.0) / (p * p));
    }
    Ok(SeriesPartialSum {
        terms_used: terms,
        value: 2.0 * acc.value(),
        tail_estimate: 2.0 / (terms as f64).ln(),
    })
}

/// Sum of [`rank_move_share`] over every rank at a common truncation. By
/// rearrangement this equals [`move_series`] at the same truncation; the
/// identity is checked numerically in the tests.
pub fn summed_rank_shares(terms: usize, primes: &PrimeTable) -> Result<f64> {
    let mut acc = Kahan::default();
    for rank in 1..=terms {
        acc.add(rank_move_share(rank, terms, primes)?.value);
    }
    Ok(acc.value())
}

/// Comparison of measured V1 sort cost against the series prediction.
#[derive(Debug, Clone)]
pub struct MoveComparison {
    pub measured_mean: f64,
    pub predicted: f64,
    pub abs_difference: f64,
    pub decile_means: [f64; 10],
    /// `|first - last| / max(first, last)` over the decile means.
    pub flatness: f64,
}

/// Compare a V1 run's measured moves-per-position against a series
/// truncation. `stats` must come from a run with at least one update.
pub fn compare_measured_moves(stats: &RunStats, series: &SeriesPartialSum) -> Result<MoveComparison> {
    if stats.updates == 0 || stats.span == 0 {
        return Err(Error::EmptyStats);
    }
    let measured = stats.moves_per_position();
    let deciles = stats.decile_move_means();
    let first = deciles[0];
    let last = deciles[9];
    let flatness = if first.max(last) > 0.0 {
        (first - last).abs() / first.max(last)
    } else {
        0.0
    };
    Ok(MoveComparison {
        measured_mean: measured,
        predicted: series.value,
        abs_difference: (measured - series.value).abs(),
        decile_means: deciles,
        flatness,
    })
}
