//! Explicit gap constructions via simultaneous congruences.
//!
//! Prescribing a repeated prime for each position of a prospective run and
//! solving `x + j = 0 (mod p_j^2)` produces a concrete starting number
//! whose run is certified by direct division. Leaving a handful of
//! positions free and hoping a small squared prime happens to land there
//! (checked against the first thousand primes) finds much smaller numbers
//! than full prescription; randomizing the assignment over many trials
//! yields upper bounds for first-occurrence records.

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Most positions a trial may leave to luck.
pub const MAX_FREE_OFFSETS: usize = 5;

/// `prime^2` divides `x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Congruence {
    pub prime: u64,
    pub offset: u64,
}

/// A fully witnessed run of consecutive non-square-free integers starting
/// at `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedBound {
    pub length: u32,
    pub bound: BigUint,
    /// `witnesses[j]` lists primes whose squares divide `bound + j`.
    pub witnesses: Vec<Vec<u64>>,
}

impl CertifiedBound {
    /// Opportunistic exactness check: are `bound - 1` and `bound + length`
    /// square-free, making the run exactly `length` long? `None` when the
    /// bound is too large for the available prime table.
    pub fn check_exact(&self, primes: &PrimeTable) -> Option<bool> {
        let end = (&self.bound + BigUint::from(self.length)).to_u64()?;
        if primes.limit().saturating_mul(primes.limit()) < end {
            return None;
        }
        let start = self.bound.to_u64()?;
        let left = crate::oracle::is_squarefree(start - 1, primes).ok()?;
        let right = crate::oracle::is_squarefree(end, primes).ok()?;
        Some(left && right)
    }
}

fn mod_u64(x: &BigUint, m: u64) -> u64 {
    (x % BigUint::from(m)).to_u64().expect("residue fits u64")
}

/// Modular inverse of `a` mod `m` for coprime arguments.
fn inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "arguments must be coprime");
    old_s.rem_euclid(m as i128) as u64
}

/// Least positive `x` with `x + offset = 0 (mod prime^2)` for every
/// congruence. The primes must be pairwise distinct.
pub fn solve(congruences: &[Congruence]) -> Result<BigUint> {
    if congruences.is_empty() {
        return Err(Error::EmptyAssignment);
    }
    let mut seen: Vec<u64> = congruences.iter().map(|c| c.prime).collect();
    seen.sort_unstable();
    for w in seen.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicatePrime(w[0]));
        }
    }

    let mut x = BigUint::from(0u32);
    let mut modulus = BigUint::from(1u32);
    for c in congruences {
        let m = c.prime * c.prime;
        let want = (m - c.offset % m) % m; // target residue of x mod m
        let have = mod_u64(&x, m);
        let step = (want + m - have) % m;
        let scale = inverse(mod_u64(&modulus, m), m);
        let t = ((step as u128 * scale as u128) % m as u128) as u64;
        x += &modulus * BigUint::from(t);
        modulus *= BigUint::from(m);
    }
    if x == BigUint::from(0u32) {
        x = modulus;
    }
    Ok(x)
}

/// Witnesses implied by the congruences at every offset of the window:
/// prime `p` prescribed at offset `j` also covers `j + p^2`, `j + 2 p^2`, …
fn implied_witnesses(length: u32, congruences: &[Congruence]) -> Vec<Vec<u64>> {
    let mut witnesses = vec![Vec::new(); length as usize];
    for c in congruences {
        let m = c.prime * c.prime;
        let mut j = c.offset % m;
        while j < length as u64 {
            witnesses[j as usize].push(c.prime);
            j += m;
        }
    }
    witnesses
}

/// Try to certify `x` as a run of `length`: the prescribed congruences
/// cover their offsets, and each free offset needs some prime among the
/// table's first thousand whose square divides `x + j`. Absence of a
/// witness is a normal miss, not an error.
pub fn complete_pattern(
    x: &BigUint,
    length: u32,
    congruences: &[Congruence],
    free_offsets: &[u64],
    primes: &PrimeTable,
) -> Option<CertifiedBound> {
    if free_offsets.len() > MAX_FREE_OFFSETS {
        return None;
    }
    let mut witnesses = implied_witnesses(length, congruences);
    let candidates = primes.len().min(1000);
    for &j in free_offsets {
        let position = x + BigUint::from(j);
        let mut found = None;
        for i in 0..candidates {
            let q = primes.get(i);
            if mod_u64(&position, q * q) == 0 {
                found = Some(q);
                break;
            }
        }
        witnesses[j as usize].push(found?);
    }
    if witnesses.iter().any(|w| w.is_empty()) {
        return None;
    }
    Some(CertifiedBound {
        length,
        bound: x.clone(),
        witnesses,
    })
}

/// Re-check a certificate by exact division, independently of how it was
/// constructed.
pub fn verify_certificate(record: &CertifiedBound) -> bool {
    if record.witnesses.len() != record.length as usize {
        return false;
    }
    for (j, ws) in record.witnesses.iter().enumerate() {
        if ws.is_empty() {
            return false;
        }
        let position = &record.bound + BigUint::from(j);
        for &p in ws {
            if mod_u64(&position, p * p) != 0 {
                return false;
            }
        }
    }
    true
}

/// Knobs for the randomized pattern search.
#[derive(Debug, Clone)]
pub struct SearchStrategy {
    /// Positions left unprescribed, witnessed after the fact (0..=5).
    pub free_offsets: usize,
    /// Aim the class of prime 2 at a residue covering the most positions.
    pub bias_two: bool,
    /// Size of the pool of distinct small primes for single positions.
    pub pool: usize,
    /// Solutions examined per assignment: the congruence system admits
    /// `x0 + k * M` for every `k`, and the free-offset residues shift
    /// linearly with `k`, so scanning a few dozen shifts multiplies the
    /// effective trial count at almost no cost.
    pub shifts: u64,
}

impl Default for SearchStrategy {
    fn default() -> Self {
        SearchStrategy {
            free_offsets: MAX_FREE_OFFSETS,
            bias_two: true,
            pool: 64,
            shifts: 512,
        }
    }
}

/// Result of a randomized search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: Option<CertifiedBound>,
    pub trials: u64,
    pub successes: u64,
}

/// Randomized search for a certified run of `length` consecutive
/// non-square-free integers. Deterministic for a fixed seed: each trial
/// draws from its own stream of a seeded generator, and the best (smallest)
/// verified bound wins.
pub fn random_search(
    length: u32,
    trials: u64,
    seed: u64,
    strategy: &SearchStrategy,
    primes: &PrimeTable,
) -> Result<SearchOutcome> {
    if strategy.free_offsets > MAX_FREE_OFFSETS {
        return Err(Error::TooManyFreeOffsets(
            strategy.free_offsets,
            MAX_FREE_OFFSETS,
        ));
    }
    primes.require_count(strategy.pool.max(8))?;
    let pool: Vec<u64> = (0..strategy.pool)
        .map(|i| primes.get(i))
        .filter(|&p| p != 2 && p != 3)
        .collect();

    let mut outcome = SearchOutcome {
        best: None,
        trials,
        successes: 0,
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let Some(candidate) = run_trial(length, strategy, &pool, primes, &mut rng) else {
            continue;
        };
        debug_assert!(verify_certificate(&candidate));
        outcome.successes += 1;
        let better = match &outcome.best {
            Some(best) => candidate.bound < best.bound,
            None => true,
        };
        if better {
            outcome.best = Some(candidate);
        }
    }
    Ok(outcome)
}

fn run_trial(
    length: u32,
    strategy: &SearchStrategy,
    pool: &[u64],
    primes: &PrimeTable,
    rng: &mut ChaCha8Rng,
) -> Option<CertifiedBound> {
    let len = length as u64;
    let mut congruences: Vec<Congruence> = Vec::new();
    let mut remaining: Vec<u64> = (0..len).collect();

    // Prime 2 claims a residue class mod 4; every published factor row has
    // it on the class hitting the most positions.
    let classes = 4.min(len);
    let r4 = if strategy.bias_two {
        let max_size = (0..classes).map(|r| class_size(len, 4, r)).max().unwrap();
        let ties: Vec<u64> = (0..classes)
            .filter(|&r| class_size(len, 4, r) == max_size)
            .collect();
        ties[rng.gen_range(0..ties.len())]
    } else {
        rng.gen_range(0..classes)
    };
    congruences.push(Congruence { prime: 2, offset: r4 });
    remaining.retain(|&j| j % 4 != r4);

    // Prime 3 claims a class mod 9 through one of the still-open positions.
    if !remaining.is_empty() {
        let j = remaining[rng.gen_range(0..remaining.len())];
        congruences.push(Congruence { prime: 3, offset: j });
        let r9 = j % 9;
        remaining.retain(|&j| j % 9 != r9);
    }

    remaining.shuffle(rng);
    let free_count = strategy.free_offsets.min(remaining.len());
    let free: Vec<u64> = remaining.split_off(remaining.len() - free_count);

    if remaining.len() > pool.len() {
        return None;
    }
    let mut singles = pool.to_vec();
    singles.shuffle(rng);
    for (&j, &p) in remaining.iter().zip(&singles) {
        congruences.push(Congruence { prime: p, offset: j });
    }

    let x0 = solve(&congruences).ok()?;
    if free.is_empty() {
        return complete_pattern(&x0, length, &congruences, &free, primes);
    }

    // Scan x0, x0 + M, x0 + 2M, ... for a shift where every free offset
    // picks up a small square divisor. For a fixed prime q the witnessing
    // shifts form an arithmetic progression mod q^2, so each free offset
    // yields a bitmask over the shift range and success is a nonzero
    // intersection.
    let modulus: BigUint = congruences
        .iter()
        .map(|c| BigUint::from(c.prime * c.prime))
        .product();
    let shifts = strategy.shifts.max(1);
    let words = (shifts as usize).div_ceil(64);
    let candidates = primes.len().min(1000);

    struct Channel {
        q2: u64,
        x0_mod: u64,
        inv_step: u64,
    }
    let mut channels = Vec::with_capacity(candidates);
    for i in 0..candidates {
        let q = primes.get(i);
        let q2 = q * q;
        let step = mod_u64(&modulus, q2);
        if step == 0 {
            // q is one of the prescribed primes; its residues never move.
            continue;
        }
        channels.push(Channel {
            q2,
            x0_mod: mod_u64(&x0, q2),
            inv_step: inverse(step, q2),
        });
    }

    let mut acc = vec![u64::MAX; words];
    for &j in &free {
        let mut mask = vec![0u64; words];
        for ch in &channels {
            let r = (ch.x0_mod + j) % ch.q2;
            // Solve r + k * step = 0 (mod q2) for the smallest shift.
            let k0 = ((ch.q2 - r) % ch.q2) as u128 * ch.inv_step as u128 % ch.q2 as u128;
            let mut k = k0 as u64;
            while k < shifts {
                mask[(k / 64) as usize] |= 1 << (k % 64);
                k += ch.q2;
            }
        }
        for (a, m) in acc.iter_mut().zip(&mask) {
            *a &= m;
        }
        if acc.iter().all(|&w| w == 0) {
            return None;
        }
    }

    let k = acc
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(w, bits)| w as u64 * 64 + bits.trailing_zeros() as u64)?;
    if k >= shifts {
        return None;
    }
    let x = &x0 + &modulus * BigUint::from(k);
    complete_pattern(&x, length, &congruences, &free, primes)
}

fn class_size(len: u64, modulus: u64, r: u64) -> u64 {
    if r >= len {
        0
    } else {
        (len - r).div_ceil(modulus)
    }
}
