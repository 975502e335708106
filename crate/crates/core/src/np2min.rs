//! Minimum number of distinct squared primes required to cover a gap.
//!
//! A run of `L` consecutive non-square-free integers needs every position
//! divisible by some squared prime, and the primes backing a window must be
//! distinct. `np2min(L)` is the smallest count that can possibly suffice;
//! the sieve variants V2 and above use it to skip regions that cannot hold
//! a gap of the target length.

use crate::primes::PrimeTable;

/// Values for lengths 1..=17, confirmed by several independent sources.
pub const KNOWN_ROW: [u32; 17] = [1, 2, 3, 4, 4, 5, 6, 7, 7, 7, 8, 9, 9, 10, 11, 12, 12];

/// Lengths up to which [`min_cover_exhaustive`] has confirmed the counting
/// bound; larger values should be treated as heuristic.
pub const EXHAUSTIVE_LIMIT: u32 = 20;

/// Table of `np2min` values for lengths `1..=max_len`.
#[derive(Debug, Clone)]
pub struct Np2MinTable {
    values: Vec<u32>,
}

impl Np2MinTable {
    pub fn compute(max_len: u32) -> Self {
        let values = (1..=max_len).map(np2min).collect();
        Np2MinTable { values }
    }

    pub fn get(&self, len: u32) -> u32 {
        self.values[(len - 1) as usize]
    }

    pub fn max_len(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u32 + 1, v))
    }
}

/// The raw counting bound: least `k` with
/// `sum_{i=1..k} ceil(len / p_i^2) >= len`, i.e. the point where the `k`
/// smallest squared primes have enough multiples to account for every
/// position of a `len`-wide window. This reproduces the entire known row.
///
/// The bound is necessary but not always achievable: at `len = 10` the
/// three-hit class of 4 and the only two-hit class of 9 are forced to
/// overlap, so no seven squared primes cover ten consecutive integers
/// ([`min_cover_exhaustive`] gives 8 there). It is also not monotone in
/// isolation (it dips at `len = 37`).
pub fn counting_bound(len: u32) -> u32 {
    assert!(len >= 1, "gap length must be positive");
    let len = len as u64;
    let primes = PrimeTable::first_n(len as usize)
        .expect("prime table for the counting bound");
    let mut capacity = 0u64;
    for (i, p) in primes.iter().enumerate() {
        capacity += len.div_ceil(p * p);
        if capacity >= len {
            return i as u32 + 1;
        }
    }
    unreachable!("len primes always provide capacity len");
}

/// Lower bound on the number of distinct squared primes required in a gap
/// of length `len`: the counting bound, closed under the monotonicity the
/// true minimum enjoys (a longer gap never needs fewer primes).
///
/// Values for `len <= 17` equal the known row; the sieve's skip logic only
/// needs a valid lower bound, so it matches the historical program by
/// using these values rather than the occasionally larger exact cover
/// minimum.
pub fn np2min(len: u32) -> u32 {
    (1..=len).map(counting_bound).max().expect("len >= 1")
}

/// Exact minimum cover count for a window of `len` consecutive integers,
/// by exhaustive search over residue patterns.
///
/// Primes whose square is at most `len` can cover several positions and
/// have all their `p^2` residue offsets enumerated; any other prime covers
/// exactly one position of the window (its residue class can be aimed at
/// any single offset), so uncovered positions cost one distinct prime each.
pub fn min_cover_exhaustive(len: u32) -> u32 {
    assert!(len >= 1);
    let multi: Vec<u64> = PrimeTable::up_to(len as u64)
        .expect("small table")
        .iter()
        .filter(|&p| p * p <= len as u64)
        .collect();
    let mut best = len; // every position backed by its own prime
    let combos: u64 = multi.iter().map(|&p| p * p + 1).product();
    for combo in 0..combos {
        // Offset p*p means "prime unused"; anything below aims its class.
        let mut c = combo;
        let mut covered = vec![false; len as usize];
        let mut used = 0u32;
        for &p in &multi {
            let p2 = p * p;
            let choice = c % (p2 + 1);
            c /= p2 + 1;
            if choice == p2 {
                continue;
            }
            used += 1;
            let mut pos = choice;
            while pos < len as u64 {
                covered[pos as usize] = true;
                pos += p2;
            }
        }
        let uncovered = covered.iter().filter(|&&v| !v).count() as u32;
        best = best.min(used + uncovered);
    }
    best
}

/// A disagreement between a computed row and the known values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Np2MinMismatch {
    pub len: u32,
    pub got: u32,
    pub expected: u32,
}

impl std::fmt::Display for Np2MinMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "np2min({}) = {} but the known value is {}",
            self.len, self.got, self.expected
        )
    }
}

/// Check a row provider against [`KNOWN_ROW`], reporting the first
/// offending length.
pub fn verify_row_with(
    provider: impl Fn(u32) -> u32,
) -> std::result::Result<(), Np2MinMismatch> {
    for (i, &expected) in KNOWN_ROW.iter().enumerate() {
        let len = i as u32 + 1;
        let got = provider(len);
        if got != expected {
            return Err(Np2MinMismatch { len, got, expected });
        }
    }
    Ok(())
}

/// Check the computed values for lengths 1..=17 against the known row.
pub fn verify_known_row() -> std::result::Result<(), Np2MinMismatch> {
    verify_row_with(np2min)
}
