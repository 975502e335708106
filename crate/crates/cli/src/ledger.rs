//! Work-unit ledger: which half-open ranges have been searched, by whom.
//!
//! Line-oriented text, append-only: every claim or completion appends one
//! line, and loading folds the lines in order (the last line for a range
//! wins). Saving writes the folded state back, which doubles as
//! compaction. A sibling `.lock` file provides the advisory single-writer
//! lock.

use anyhow::{anyhow, bail, Context, Result};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitStatus {
    Pending,
    Running,
    Done,
}

impl fmt::Display for UnitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitStatus::Pending => "pending",
            UnitStatus::Running => "running",
            UnitStatus::Done => "done",
        })
    }
}

impl std::str::FromStr for UnitStatus {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(UnitStatus::Pending),
            "running" => Ok(UnitStatus::Running),
            "done" => Ok(UnitStatus::Done),
            other => bail!("unknown unit status {other:?}"),
        }
    }
}

/// A half-open search range owned by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkUnit {
    pub start: u64,
    pub end: u64,
    pub min_len: u32,
    pub status: UnitStatus,
    pub owner: String,
    pub completed_at: Option<String>,
    /// Order-free sum of per-record line hashes; lets merges compare the
    /// outputs of different splits of the same region.
    pub digest: Option<u64>,
}

impl WorkUnit {
    fn key(&self) -> (u64, u64, u32) {
        (self.start, self.end, self.min_len)
    }

    pub fn overlaps(&self, other: &WorkUnit) -> bool {
        self.min_len == other.min_len && self.start < other.end && other.start < self.end
    }

    fn to_line(&self) -> String {
        let when = self.completed_at.as_deref().unwrap_or("-");
        let mut line = format!(
            "{} {} {} {} {} {}",
            self.start, self.end, self.min_len, self.status, self.owner, when
        );
        if let Some(d) = self.digest {
            line.push_str(&format!(" digest:{d:016x}"));
        }
        line.push('\n');
        line
    }

    fn parse(line: &str) -> Result<WorkUnit> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 6 {
            bail!("ledger line needs at least 6 fields: {line:?}");
        }
        let digest = fields.get(6).and_then(|f| {
            f.strip_prefix("digest:")
                .and_then(|h| u64::from_str_radix(h, 16).ok())
        });
        Ok(WorkUnit {
            start: fields[0].parse().context("unit start")?,
            end: fields[1].parse().context("unit end")?,
            min_len: fields[2].parse().context("unit min length")?,
            status: fields[3].parse()?,
            owner: fields[4].to_string(),
            completed_at: (fields[5] != "-").then(|| fields[5].to_string()),
            digest,
        })
    }
}

#[derive(Debug, Default, Clone)]
pub struct Ledger {
    pub units: Vec<WorkUnit>,
}

impl Ledger {
    pub fn load(path: &Path) -> Result<Ledger> {
        if !path.exists() {
            return Ok(Ledger::default());
        }
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading ledger {}", path.display()))?;
        let mut ledger = Ledger::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let unit = WorkUnit::parse(line)
                .with_context(|| format!("ledger line {}", idx + 1))?;
            ledger.fold(unit);
        }
        Ok(ledger)
    }

    /// Latest line for a range supersedes earlier ones.
    fn fold(&mut self, unit: WorkUnit) {
        if let Some(existing) = self.units.iter_mut().find(|u| u.key() == unit.key()) {
            *existing = unit;
        } else {
            self.units.push(unit);
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        let mut units = self.units.clone();
        units.sort_by_key(|u| (u.min_len, u.start, u.end));
        for unit in &units {
            text.push_str(&unit.to_line());
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).context("writing ledger")?;
        std::fs::rename(&tmp, path).context("replacing ledger")?;
        Ok(())
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn find(&self, start: u64, end: u64, min_len: u32) -> Option<&WorkUnit> {
        self.units.iter().find(|u| u.key() == (start, end, min_len))
    }

    /// Claim a unit for `owner`. Disjointness is enforced per target
    /// length; re-claiming your own unit is allowed (checkpoint resume).
    pub fn claim(&mut self, start: u64, end: u64, min_len: u32, owner: &str) -> Result<WorkUnit> {
        if end <= start {
            bail!("empty unit [{start}, {end})");
        }
        let unit = WorkUnit {
            start,
            end,
            min_len,
            status: UnitStatus::Running,
            owner: owner.split_whitespace().collect::<Vec<_>>().join("-"),
            completed_at: None,
            digest: None,
        };
        for existing in &self.units {
            if existing.key() == unit.key() {
                if existing.status == UnitStatus::Done {
                    bail!(
                        "unit [{start}, {end}) at length {min_len} is already done (owner {})",
                        existing.owner
                    );
                }
                if existing.owner != unit.owner {
                    bail!(
                        "unit [{start}, {end}) is already claimed by {}",
                        existing.owner
                    );
                }
                continue;
            }
            if existing.overlaps(&unit) {
                bail!(
                    "claim [{start}, {end}) overlaps unit [{}, {}) owned by {}",
                    existing.start,
                    existing.end,
                    existing.owner
                );
            }
        }
        self.fold(unit.clone());
        Ok(unit)
    }

    /// Mark a unit done. Completing an already-done unit with the same
    /// digest is a no-op; a differing digest is an error.
    pub fn complete(
        &mut self,
        start: u64,
        end: u64,
        min_len: u32,
        digest: u64,
        completed_at: String,
    ) -> Result<()> {
        match self.units.iter_mut().find(|u| u.key() == (start, end, min_len)) {
            Some(unit) => {
                if unit.status == UnitStatus::Done {
                    if unit.digest == Some(digest) {
                        return Ok(());
                    }
                    bail!(
                        "unit [{start}, {end}) already done with digest {:016x}, got {digest:016x}",
                        unit.digest.unwrap_or(0)
                    );
                }
                unit.status = UnitStatus::Done;
                unit.completed_at = Some(completed_at);
                unit.digest = Some(digest);
                Ok(())
            }
            None => bail!("no claimed unit [{start}, {end}) at length {min_len}"),
        }
    }

    /// Merge another ledger into this one.
    ///
    /// Units over disjoint ranges accumulate. Where both ledgers cover the
    /// same region with done units — possibly split differently — the
    /// merged ledger keeps this ledger's split, provided both sides cover
    /// the identical intervals and their digest sums agree; any other
    /// overlap is a conflict naming both units.
    pub fn merge(&self, other: &Ledger) -> Result<Ledger> {
        let mut merged = self.clone();
        for unit in &other.units {
            // Identical unit: reconcile.
            if let Some(existing) = merged.units.iter().find(|u| u.key() == unit.key()) {
                match (existing.status, unit.status) {
                    (UnitStatus::Done, UnitStatus::Done) => {
                        if existing.digest != unit.digest {
                            bail!(
                                "unit [{}, {}) done on both sides with differing digests",
                                unit.start,
                                unit.end
                            );
                        }
                    }
                    (UnitStatus::Done, _) => {}
                    (_, UnitStatus::Done) => {
                        let slot = merged
                            .units
                            .iter_mut()
                            .find(|u| u.key() == unit.key())
                            .expect("just found");
                        *slot = unit.clone();
                    }
                    _ => {}
                }
                continue;
            }
            let overlapping: Vec<&WorkUnit> = merged
                .units
                .iter()
                .filter(|u| u.overlaps(unit))
                .collect();
            if overlapping.is_empty() {
                merged.units.push(unit.clone());
                continue;
            }
            // Different split of a shared region: acceptable only when
            // everything involved is done with known digests and both
            // sides cover the same intervals with the same record sums.
            let conflict = overlapping[0];
            if unit.status != UnitStatus::Done
                || overlapping.iter().any(|u| u.status != UnitStatus::Done)
            {
                bail!(
                    "unit [{}, {}) from the other ledger overlaps unfinished unit [{}, {})",
                    unit.start,
                    unit.end,
                    conflict.start,
                    conflict.end
                );
            }
            let ours = coverage(&merged.units, unit.min_len);
            let theirs = coverage(&other.units, unit.min_len);
            let region = intersect(&ours, &theirs);
            let conflict_msg = || {
                format!(
                    "overlap between unit [{}, {}) and [{}, {}) cannot be reconciled: \
                     splits do not cover the same region with whole units",
                    unit.start, unit.end, conflict.start, conflict.end
                )
            };
            let Some(sum_a) = whole_unit_digest(&merged.units, unit.min_len, &region)? else {
                bail!(conflict_msg());
            };
            let Some(sum_b) = whole_unit_digest(&other.units, unit.min_len, &region)? else {
                bail!(conflict_msg());
            };
            if sum_a != sum_b {
                bail!(
                    "overlapping done units [{}, {}) and [{}, {}) have differing outputs",
                    unit.start,
                    unit.end,
                    conflict.start,
                    conflict.end
                );
            }
            // Keep our split; the other ledger's covering units are dropped.
        }
        Ok(merged)
    }
}

/// Merged-adjacent interval union of done units at a target length.
fn coverage(units: &[WorkUnit], min_len: u32) -> Vec<(u64, u64)> {
    let mut spans: Vec<(u64, u64)> = units
        .iter()
        .filter(|u| u.min_len == min_len && u.status == UnitStatus::Done)
        .map(|u| (u.start, u.end))
        .collect();
    spans.sort_unstable();
    let mut merged: Vec<(u64, u64)> = Vec::new();
    for (s, e) in spans {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

fn intersect(a: &[(u64, u64)], b: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for &(s1, e1) in a {
        for &(s2, e2) in b {
            let s = s1.max(s2);
            let e = e1.min(e2);
            if s < e {
                out.push((s, e));
            }
        }
    }
    out
}

/// Digest sum over the done units composing `region`, provided every unit
/// touching the region lies wholly inside it and together they cover it
/// exactly; `None` when a unit straddles the region boundary.
fn whole_unit_digest(
    units: &[WorkUnit],
    min_len: u32,
    region: &[(u64, u64)],
) -> Result<Option<u64>> {
    let mut selected: Vec<&WorkUnit> = Vec::new();
    for unit in units {
        if unit.min_len != min_len || unit.status != UnitStatus::Done {
            continue;
        }
        let intersects = region
            .iter()
            .any(|&(s, e)| unit.start < e && s < unit.end);
        if !intersects {
            continue;
        }
        let inside = region
            .iter()
            .any(|&(s, e)| s <= unit.start && unit.end <= e);
        if !inside {
            return Ok(None);
        }
        selected.push(unit);
    }
    let mut spans: Vec<(u64, u64)> = selected.iter().map(|u| (u.start, u.end)).collect();
    spans.sort_unstable();
    let mut merged: Vec<(u64, u64)> = Vec::new();
    for (s, e) in spans {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    if merged != region {
        return Ok(None);
    }
    let mut sum = 0u64;
    for unit in selected {
        let digest = unit.digest.ok_or_else(|| {
            anyhow!(
                "done unit [{}, {}) has no output digest; cannot reconcile splits",
                unit.start,
                unit.end
            )
        })?;
        sum = sum.wrapping_add(digest);
    }
    Ok(Some(sum))
}

/// Order-free sum of per-record hashes; invariant under re-splitting a
/// region into different disjoint units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdditiveDigest(pub u64);

impl AdditiveDigest {
    pub fn add_record(&mut self, record: &sqfgap::GapRecord) {
        let mut line = crate::records::LineDigest::default();
        line.push_record(record);
        self.0 = self.0.wrapping_add(line.0);
    }
}

/// Advisory single-writer lock: a sibling `.lock` file created exclusively
/// and removed on drop.
pub struct LedgerLock {
    path: PathBuf,
}

impl LedgerLock {
    pub fn acquire(ledger_path: &Path) -> Result<LedgerLock> {
        let path = ledger_path.with_extension("lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LedgerLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(anyhow!(
                "ledger {} is locked (remove {} if the owner is gone)",
                ledger_path.display(),
                path.display()
            )),
            Err(e) => Err(e).context("acquiring ledger lock"),
        }
    }
}

impl Drop for LedgerLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Current time as UTC ISO-8601 with second precision, from the system
/// clock; no external dependency needed for one timestamp.
pub fn iso8601_now() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = secs / 86_400;
    let tod = secs % 86_400;
    // Civil-from-days (Gregorian), days since 1970-01-01.
    let z = days as i64 + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!(
        "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
        y,
        m,
        d,
        tod / 3600,
        (tod % 3600) / 60,
        tod % 60
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(start: u64, end: u64, status: UnitStatus, digest: Option<u64>) -> WorkUnit {
        WorkUnit {
            start,
            end,
            min_len: 14,
            status,
            owner: "tester".into(),
            completed_at: matches!(status, UnitStatus::Done).then(|| iso8601_now()),
            digest,
        }
    }

    #[test]
    fn claim_disjoint_then_overlap() {
        let mut ledger = Ledger::default();
        ledger.claim(0, 1_000_000_000, 14, "a").unwrap();
        ledger.claim(1_000_000_000, 2_000_000_000, 14, "b").unwrap();
        assert_eq!(ledger.units.len(), 2);
        let err = ledger.claim(500, 1_000, 14, "c").unwrap_err();
        assert!(err.to_string().contains("overlaps"));
    }

    #[test]
    fn completion_is_idempotent() {
        let mut ledger = Ledger::default();
        ledger.claim(0, 100, 14, "a").unwrap();
        ledger.complete(0, 100, 14, 0xabcd, iso8601_now()).unwrap();
        ledger.complete(0, 100, 14, 0xabcd, iso8601_now()).unwrap();
        assert!(ledger.complete(0, 100, 14, 0xef01, iso8601_now()).is_err());
    }

    #[test]
    fn merge_accepts_identical_outputs_across_splits() {
        // Region [0, 200) covered as one unit vs two; digest sums agree.
        let mut a = Ledger::default();
        a.units.push(unit(0, 200, UnitStatus::Done, Some(77)));
        let mut b = Ledger::default();
        b.units.push(unit(0, 120, UnitStatus::Done, Some(33)));
        b.units.push(unit(120, 200, UnitStatus::Done, Some(44)));
        let merged = a.merge(&b).unwrap();
        assert_eq!(merged.units.len(), 1, "keeps the first ledger's split");
    }

    #[test]
    fn merge_rejects_differing_outputs() {
        let mut a = Ledger::default();
        a.units.push(unit(0, 200, UnitStatus::Done, Some(77)));
        let mut b = Ledger::default();
        b.units.push(unit(0, 120, UnitStatus::Done, Some(33)));
        b.units.push(unit(120, 200, UnitStatus::Done, Some(45)));
        let err = a.merge(&b).unwrap_err();
        assert!(err.to_string().contains("differing outputs"), "{err}");
    }

    #[test]
    fn merge_rejects_partial_cover() {
        let mut a = Ledger::default();
        a.units.push(unit(0, 150, UnitStatus::Done, Some(1)));
        let mut b = Ledger::default();
        b.units.push(unit(100, 200, UnitStatus::Done, Some(2)));
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.txt");
        let mut ledger = Ledger::default();
        ledger.claim(0, 100, 14, "worker one").unwrap();
        ledger.complete(0, 100, 14, 0x1234, iso8601_now()).unwrap();
        ledger.claim(100, 300, 14, "b").unwrap();
        ledger.save(&path).unwrap();
        let loaded = Ledger::load(&path).unwrap();
        assert_eq!(loaded.units.len(), 2);
        let done = loaded.find(0, 100, 14).unwrap();
        assert_eq!(done.status, UnitStatus::Done);
        assert_eq!(done.digest, Some(0x1234));
        assert_eq!(done.owner, "worker-one");
        assert!(done.completed_at.is_some());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.txt");
        let lock = LedgerLock::acquire(&path).unwrap();
        assert!(LedgerLock::acquire(&path).is_err());
        drop(lock);
        assert!(LedgerLock::acquire(&path).is_ok());
    }

    #[test]
    fn timestamp_shape() {
        let ts = iso8601_now();
        assert_eq!(ts.len(), 20);
        assert!(ts.ends_with('Z'));
        assert_eq!(&ts[4..5], "-");
    }
}
