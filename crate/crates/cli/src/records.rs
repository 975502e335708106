//! The record line format: one run per line, `<start>: <length>`.
//!
//! This is the exact shape of the published gap lists, so they drop in as
//! verification fixtures after whitespace normalization.

use anyhow::{bail, Context, Result};
use sqfgap::GapRecord;

pub fn format_record(record: &GapRecord) -> String {
    format!("{}: {}\n", record.start, record.length)
}

pub fn parse_record(line: &str) -> Result<GapRecord> {
    let (start, length) = line
        .split_once(':')
        .with_context(|| format!("missing ':' in record line {line:?}"))?;
    let start: u64 = start.trim().parse().context("bad start")?;
    let length: u32 = length.trim().parse().context("bad length")?;
    if length == 0 {
        bail!("zero-length run in record line {line:?}");
    }
    Ok(GapRecord::new(start, length))
}

/// A parsed fixture file. Blank lines are ignored; duplicated lines (the
/// published lists contain a few) are dropped with a warning.
pub struct Fixture {
    pub records: Vec<GapRecord>,
    pub duplicates: usize,
}

pub fn parse_fixture(text: &str) -> Result<Fixture> {
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut duplicates = 0;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let record = parse_record(line)
            .with_context(|| format!("fixture line {}", idx + 1))?;
        if seen.insert(record) {
            records.push(record);
        } else {
            duplicates += 1;
            eprintln!("warning: duplicate fixture line {}: {line}", idx + 1);
        }
    }
    Ok(Fixture {
        records,
        duplicates,
    })
}

/// FNV-1a over record line bytes; used for output digests in the ledger.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LineDigest(pub u64);

impl LineDigest {
    pub fn push_bytes(&mut self, bytes: &[u8]) {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = if self.0 == 0 { OFFSET } else { self.0 };
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
        self.0 = h;
    }

    pub fn push_record(&mut self, record: &GapRecord) {
        self.push_bytes(format_record(record).as_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for record in [
            GapRecord::new(4, 1),
            GapRecord::new(1_043_460_553_364, 14),
            GapRecord::new(125_781_000_834_058_568, 18),
        ] {
            let line = format_record(&record);
            assert_eq!(parse_record(&line).unwrap(), record);
        }
    }

    #[test]
    fn parse_normalizes_whitespace() {
        assert_eq!(
            parse_record("  79180770078548:  15 ").unwrap(),
            GapRecord::new(79_180_770_078_548, 15)
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_record("no colon").is_err());
        assert!(parse_record("5: x").is_err());
        assert!(parse_record("5: 0").is_err());
    }

    #[test]
    fn fixture_dedupes_with_count() {
        let text = "8: 2\n48: 3\n8: 2\n\n";
        let fixture = parse_fixture(text).unwrap();
        assert_eq!(fixture.records.len(), 2);
        assert_eq!(fixture.duplicates, 1);
    }
}
