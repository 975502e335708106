//! Search infrastructure for gaps between square-free numbers.
//!
//! A square-free gap is a maximal run of consecutive integers, none of them
//! square-free, flanked by square-free neighbours. This crate provides:
//!
//! - [`oracle`] — trial-division ground truth: square-freeness, the Möbius
//!   function, a naive windowed cross-out sieve and brute-force gap
//!   enumeration. Everything else is validated against this module.
//! - [`np2min`] — the minimum number of distinct squared primes needed to
//!   cover a window of `L` consecutive integers, which drives the skip
//!   logic of the faster sieve variants.
//! - [`engine`] — the production gap search: an incremental squared-prime
//!   sieve with variant levels V0–V7, each level adding one optimization
//!   while emitting the identical gap set.
//! - [`crt`] — explicit gap constructions: prescribe a repeated prime per
//!   offset, solve the simultaneous congruences, and certify the result,
//!   yielding upper bounds for first-occurrence records.
//! - [`analysis`] — the expected sort-cost series of the V1 sieve and its
//!   comparison against measured run statistics.
//! - [`catalog`] — known first-occurrence records with their repeated
//!   prime factors, used as verification fixtures.

pub mod analysis;
pub mod catalog;
pub mod crt;
pub mod engine;
pub mod error;
pub mod np2min;
pub mod oracle;
pub mod primes;

pub use engine::{search, GapSink, RunStats, SearchConfig, Variant};
pub use error::{Error, Result};
pub use oracle::GapRecord;
pub use primes::PrimeTable;
