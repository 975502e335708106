//! Known first-occurrence records.
//!
//! For each gap length the catalog stores the first starting number, the
//! repeated prime factor(s) of every position in the run, and who reported
//! it. A few positions carry two repeated primes at once (for example both
//! 13 and 59 divide one position of the length-14 gap squared), so each
//! offset holds a list of witnesses.

use crate::error::Result;
use crate::oracle;
use crate::primes::PrimeTable;

/// A catalogued first occurrence of a gap of exactly `length`.
#[derive(Debug, Clone)]
pub struct KnownGap {
    pub length: u32,
    pub start: u64,
    /// `witnesses[j]` lists the primes whose squares divide `start + j`.
    pub witnesses: Vec<Vec<u64>>,
    pub reporter: &'static str,
}

impl KnownGap {
    /// Check every witness by exact division: `(start + j) % p^2 == 0`.
    pub fn verify_witnesses(&self) -> std::result::Result<(), WitnessFailure> {
        if self.witnesses.len() != self.length as usize {
            return Err(WitnessFailure {
                length: self.length,
                offset: self.witnesses.len() as u32,
                prime: 0,
            });
        }
        for (j, ws) in self.witnesses.iter().enumerate() {
            for &p in ws {
                if (self.start + j as u64) % (p * p) != 0 {
                    return Err(WitnessFailure {
                        length: self.length,
                        offset: j as u32,
                        prime: p,
                    });
                }
            }
        }
        Ok(())
    }

    /// Confirm against the oracle that the run is exactly this long:
    /// every inside position non-square-free, both neighbours square-free.
    pub fn verify_boundaries(&self, primes: &PrimeTable) -> Result<bool> {
        if !oracle::is_squarefree(self.start - 1, primes)? {
            return Ok(false);
        }
        if !oracle::is_squarefree(self.start + self.length as u64, primes)? {
            return Ok(false);
        }
        for n in self.start..self.start + self.length as u64 {
            if oracle::is_squarefree(n, primes)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A witness whose square does not divide its position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessFailure {
    pub length: u32,
    pub offset: u32,
    pub prime: u64,
}

impl std::fmt::Display for WitnessFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "length {}: prime {} squared does not divide position {}",
            self.length, self.prime, self.offset
        )
    }
}

macro_rules! w {
    ($($($p:literal)x*),* $(,)?) => {
        vec![$(vec![$($p),*]),*]
    };
}

/// The eighteen catalogued first occurrences, ascending by length.
///
/// Note the starts are not monotone: the first gap of length 11 begins at
/// 221 167 422, below the first gap of length 10.
pub fn first_occurrences() -> Vec<KnownGap> {
    vec![
        KnownGap {
            length: 1,
            start: 4,
            witnesses: w![2],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 2,
            start: 8,
            witnesses: w![2, 3],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 3,
            start: 48,
            witnesses: w![2, 7, 5],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 4,
            start: 242,
            witnesses: w![11, 3, 2, 7],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 5,
            start: 844,
            witnesses: w![2, 13, 3, 11, 2],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 6,
            start: 22_020,
            witnesses: w![2, 19, 11, 3, 2, 5],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 7,
            start: 217_070,
            witnesses: w![7, 3, 2, 113, 11, 5, 2],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 8,
            start: 1_092_747,
            witnesses: w![19, 2, 7, 5, 11, 2, 3, 13],
            reporter: "E. Friedman",
        },
        KnownGap {
            length: 9,
            start: 8_870_024,
            witnesses: w![2, 5, 11, 29, 2, 7, 31, 3, 2],
            reporter: "P. De Geest",
        },
        KnownGap {
            length: 10,
            start: 262_315_467,
            witnesses: w![3, 2, 29, 2957, 79, 2, 7, 17, 5, 2 x 3],
            reporter: "D. Bernier",
        },
        KnownGap {
            length: 11,
            start: 221_167_422,
            witnesses: w![3, 31, 2, 5, 37, 13, 2, 7, 11, 3, 2],
            reporter: "P. De Geest",
        },
        KnownGap {
            length: 12,
            start: 47_255_689_915,
            witnesses: w![7, 2, 3, 103, 43, 2, 29, 17, 13, 2, 5, 3],
            reporter: "L. Marmet",
        },
        KnownGap {
            length: 13,
            start: 82_462_576_220,
            witnesses: w![2, 3, 13, 23, 2, 5, 17, 41, 2, 19, 3, 7, 2],
            reporter: "L. Marmet",
        },
        KnownGap {
            length: 14,
            start: 1_043_460_553_364,
            witnesses: w![2, 3, 7, 19, 2, 13 x 59, 67, 43, 2, 181, 3, 5, 2, 11],
            reporter: "L. Marmet",
        },
        KnownGap {
            length: 15,
            start: 79_180_770_078_548,
            witnesses: w![2, 3, 5, 29, 2, 13, 17, 53, 2, 19, 3, 41, 2, 31, 67],
            reporter: "L. Marmet",
        },
        KnownGap {
            length: 16,
            start: 3_215_226_335_143_218,
            witnesses: w![11, 23, 2, 3, 269, 53, 2, 5, 17, 163, 2, 101, 3, 19, 2, 137],
            reporter: "Z. McGregor-Dorsey",
        },
        KnownGap {
            length: 17,
            start: 23_742_453_640_900_972,
            witnesses: w![2, 11 x 23, 127, 5, 2, 3, 53, 37, 2, 7, 13, 17, 2, 19, 3, 29, 2],
            reporter: "E. Wong",
        },
        KnownGap {
            length: 18,
            start: 125_781_000_834_058_568,
            witnesses: w![2, 3, 37, 31, 2, 19, 29, 5, 2, 7 x 23, 3, 139, 2, 11, 17, 13, 2, 199],
            reporter: "L. Marmet",
        },
    ]
}

/// The first starting number of a gap of exactly `length`, if catalogued.
pub fn first_start(length: u32) -> Option<u64> {
    first_occurrences()
        .into_iter()
        .find(|g| g.length == length)
        .map(|g| g.start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_witnesses_divide() {
        for gap in first_occurrences() {
            assert_eq!(gap.verify_witnesses(), Ok(()), "length {}", gap.length);
        }
    }

    #[test]
    fn witness_shape_matches_length() {
        for gap in first_occurrences() {
            assert_eq!(gap.witnesses.len(), gap.length as usize);
            assert!(gap.witnesses.iter().all(|ws| !ws.is_empty()));
        }
    }

    #[test]
    fn corrupted_witness_detected() {
        let mut gap = first_occurrences().into_iter().next().unwrap();
        gap.witnesses[0] = vec![3];
        assert!(gap.verify_witnesses().is_err());
    }

    #[test]
    fn starts_not_monotone_between_ten_and_eleven() {
        assert!(first_start(11).unwrap() < first_start(10).unwrap());
    }

    #[test]
    fn small_boundaries_verified_by_oracle() {
        let primes = PrimeTable::up_to(40_000).unwrap();
        for gap in first_occurrences() {
            if gap.length > 9 {
                continue;
            }
            assert!(gap.verify_boundaries(&primes).unwrap(), "length {}", gap.length);
        }
    }
}
