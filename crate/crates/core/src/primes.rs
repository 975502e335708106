//! Prime generation and the shared prime table.

use crate::error::{Error, Result};

/// Segment width for the generating sieve, in numbers.
const SEGMENT: usize = 1 << 20;

/// Ascending table of all primes up to a limit.
///
/// Primes are stored as `u32` (a limit of 2^32-1 is far beyond anything the
/// gap search needs; the verification fixtures top out near 3.6e8). The
/// table is immutable after construction and can be shared freely between
/// threads.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    primes: Vec<u32>,
    limit: u64,
}

impl PrimeTable {
    /// Build the table of every prime `<= limit` with a segmented sieve of
    /// Eratosthenes. Memory stays `O(segment + sqrt(limit))` during
    /// generation plus the output itself.
    pub fn up_to(limit: u64) -> Result<Self> {
        if limit > u32::MAX as u64 {
            return Err(Error::LimitTooLarge { limit });
        }
        let mut primes: Vec<u32> = Vec::new();
        if limit >= 2 {
            let root = limit.isqrt() as usize;
            let base = simple_sieve(root.max(2));
            primes.reserve(prime_count_estimate(limit));
            primes.extend(base.iter().map(|&p| p as u32));

            let mut lo = root as u64 + 1;
            let mut mask = vec![true; SEGMENT];
            while lo <= limit {
                let hi = (lo + SEGMENT as u64 - 1).min(limit);
                let len = (hi - lo + 1) as usize;
                mask[..len].fill(true);
                for &p in &base {
                    let p = p as u64;
                    let mut m = lo.div_ceil(p) * p;
                    while m <= hi {
                        mask[(m - lo) as usize] = false;
                        m += p;
                    }
                }
                for (i, &alive) in mask[..len].iter().enumerate() {
                    if alive {
                        primes.push((lo + i as u64) as u32);
                    }
                }
                lo = hi + 1;
            }
        }
        Ok(PrimeTable { primes, limit })
    }

    /// Build a table holding at least `count` primes.
    pub fn first_n(count: usize) -> Result<Self> {
        let mut limit = nth_prime_upper_bound(count);
        loop {
            let table = Self::up_to(limit)?;
            if table.len() >= count {
                return Ok(table);
            }
            limit = limit.saturating_mul(2);
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// The `idx`-th prime, zero-based: `get(0) == 2`.
    #[inline]
    pub fn get(&self, idx: usize) -> u64 {
        self.primes[idx] as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().map(|&p| p as u64)
    }

    /// Error unless the table covers every prime up to `needed`.
    pub fn require_limit(&self, needed: u64) -> Result<()> {
        if self.limit < needed {
            Err(Error::PrimeTableTooSmall {
                needed,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }

    pub fn require_count(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            Err(Error::TooFewPrimes {
                needed,
                available: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// All primes up to `limit` by a plain in-memory sieve; used for the base
/// primes of the segmented pass and as an independent cross-check in tests.
fn simple_sieve(limit: usize) -> Vec<usize> {
    let mut is_prime = vec![true; limit + 1];
    is_prime[0] = false;
    if limit >= 1 {
        is_prime[1] = false;
    }
    let mut p = 2usize;
    while p * p <= limit {
        if is_prime[p] {
            let mut m = p * p;
            while m <= limit {
                is_prime[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    (2..=limit).filter(|&n| is_prime[n]).collect()
}

fn prime_count_estimate(limit: u64) -> usize {
    if limit < 10 {
        return 8;
    }
    let x = limit as f64;
    (1.2 * x / x.ln()) as usize
}

/// Upper bound on the n-th prime (1-based), from p(n) <= n(ln n + ln ln n)
/// for n >= 6, with small cases handled directly.
fn nth_prime_upper_bound(n: usize) -> u64 {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64 + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        assert_eq!(PrimeTable::up_to(0).unwrap().len(), 0);
        assert_eq!(PrimeTable::up_to(1).unwrap().len(), 0);
        assert_eq!(
            PrimeTable::up_to(30).unwrap().iter().collect::<Vec<_>>(),
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        );
    }

    #[test]
    fn segmented_matches_simple() {
        let limit = 300_000;
        let table = PrimeTable::up_to(limit).unwrap();
        let reference = simple_sieve(limit as usize);
        assert_eq!(table.len(), reference.len());
        assert!(table.iter().zip(reference).all(|(a, b)| a == b as u64));
    }

    #[test]
    fn known_prime_counts() {
        assert_eq!(PrimeTable::up_to(100).unwrap().len(), 25);
        assert_eq!(PrimeTable::up_to(1_000_000).unwrap().len(), 78_498);
    }

    #[test]
    fn table_is_strictly_ascending_and_starts_at_two() {
        let table = PrimeTable::up_to(10_000).unwrap();
        assert_eq!(table.get(0), 2);
        assert!(table.iter().zip(table.iter().skip(1)).all(|(a, b)| a < b));
    }

    #[test]
    fn first_n_holds_enough_primes() {
        let table = PrimeTable::first_n(1000).unwrap();
        assert!(table.len() >= 1000);
        assert_eq!(table.get(999), 7919); // the 1000th prime
    }

    #[test]
    fn require_limit_errors() {
        let table = PrimeTable::up_to(100).unwrap();
        assert!(table.require_limit(100).is_ok());
        assert!(matches!(
            table.require_limit(101),
            Err(Error::PrimeTableTooSmall { needed: 101, limit: 100 })
        ));
    }
}
