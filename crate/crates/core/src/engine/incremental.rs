//! The incremental squared-prime sieve behind variants V1..V7.
//!
//! The state tracks, for every squared prime, the smallest multiple
//! strictly above the current position. Consuming the minimum walks the
//! scan through every non-square-free number; runs of consecutive
//! positions are assembled at candidate time from the active multiples
//! plus residue checks against the base primes.

use crate::engine::{GapSink, RunStats, SearchConfig, Variant};
use crate::error::{Error, Result};
use crate::np2min::np2min;
use crate::oracle::GapRecord;
use crate::primes::PrimeTable;

const NONE: u32 = u32::MAX;

/// Outcome of one engine step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// The capacity rule proved no qualifying gap can start before
    /// `resume`; the scan jumped there. Positions >= `resume` stay live.
    CapacitySkip { from: u64, resume: u64 },
    /// The closeness test discarded the candidate without touching the
    /// base primes.
    ClosenessSkip { at: u64 },
    /// A full run test around a candidate position.
    Candidate { at: u64, run: GapRecord },
    /// Scan complete.
    Finished,
}

/// Per-candidate bookkeeping shared by the active structures.
struct Tally<'s> {
    stats: &'s mut RunStats,
    bucket: usize,
}

impl Tally<'_> {
    #[inline]
    fn advance(&mut self, moves: u64) {
        self.stats.updates += 1;
        self.stats.moves += moves;
        self.stats.decile_moves[self.bucket] += moves;
    }
}

/// The smallest squared primes, handled by residue arithmetic instead of
/// the sorted structure.
struct Base {
    p2: Vec<u64>,
    /// `anchor % p2[i]`, maintained only when `cached`.
    mods: Vec<u64>,
    anchor: u64,
    cached: bool,
    /// `right_target[d-1][i] = (-(d)) mod p2[i]`: the residue `anchor` must
    /// have for `anchor + d` to be divisible by `p2[i]`.
    right_target: Vec<Vec<u64>>,
    /// `left_target[d-1][i] = d mod p2[i]`, same for `anchor - d`.
    left_target: Vec<Vec<u64>>,
}

impl Base {
    fn new(p2: Vec<u64>, cached: bool, anchor: u64, reach: u32) -> Self {
        let mods = if cached {
            p2.iter().map(|&q| anchor % q).collect()
        } else {
            Vec::new()
        };
        let mut right_target = Vec::new();
        let mut left_target = Vec::new();
        if cached {
            for d in 1..=reach as u64 {
                right_target.push(p2.iter().map(|&q| (q - d % q) % q).collect());
                left_target.push(p2.iter().map(|&q| d % q).collect());
            }
        }
        Base {
            p2,
            mods,
            anchor,
            cached,
            right_target,
            left_target,
        }
    }

    /// Move the cached residues forward to position `n`.
    fn rebase(&mut self, n: u64) {
        debug_assert!(n >= self.anchor);
        let delta = n - self.anchor;
        if delta > 0 {
            for (m, &q) in self.mods.iter_mut().zip(&self.p2) {
                *m = (*m + delta) % q;
            }
            self.anchor = n;
        }
    }

    /// Is `pos` divisible by one of the base squared primes? With cached
    /// residues the anchor must already sit on the current candidate.
    #[inline]
    fn covers(&self, pos: u64) -> bool {
        if !self.cached {
            return self.p2.iter().any(|&q| pos % q == 0);
        }
        if pos >= self.anchor {
            let d = (pos - self.anchor) as usize;
            if d == 0 {
                return self.mods.iter().any(|&m| m == 0);
            }
            if d <= self.right_target.len() {
                let targets = &self.right_target[d - 1];
                return self.mods.iter().zip(targets).any(|(&m, &t)| m == t);
            }
        } else {
            let d = (self.anchor - pos) as usize;
            if d <= self.left_target.len() {
                let targets = &self.left_target[d - 1];
                return self.mods.iter().zip(targets).any(|(&m, &t)| m == t);
            }
        }
        // Runs longer than the precomputed reach fall back to division.
        self.p2.iter().any(|&q| pos % q == 0)
    }
}

/// Active slots as parallel arrays sorted ascending by next multiple.
struct Sorted {
    p2: Vec<u64>,
    nsqf: Vec<u64>,
}

impl Sorted {
    #[inline]
    fn min_value(&self) -> Option<u64> {
        self.nsqf.first().copied()
    }

    #[inline]
    fn kth_value(&self, k: usize) -> Option<u64> {
        self.nsqf.get(k).copied()
    }

    /// Advance the minimum slot by its squared prime and bubble the new
    /// value to its sorted position.
    fn advance_min(&mut self, tally: &mut Tally) {
        let p = self.p2[0];
        let v = self.nsqf[0] + p;
        let len = self.nsqf.len();
        let mut j = 0;
        while j + 1 < len && self.nsqf[j + 1] < v {
            self.nsqf[j] = self.nsqf[j + 1];
            self.p2[j] = self.p2[j + 1];
            j += 1;
        }
        self.nsqf[j] = v;
        self.p2[j] = p;
        tally.advance(j as u64);
    }

    fn consume_equal(&mut self, n: u64, tally: &mut Tally) {
        while self.nsqf.first() == Some(&n) {
            self.advance_min(tally);
        }
    }

    /// Lazily activate a freshly streamed squared prime.
    fn insert_new(&mut self, p2: u64, value: u64) {
        let at = self.nsqf.partition_point(|&v| v <= value);
        self.nsqf.insert(at, value);
        self.p2.insert(at, p2);
    }

    /// Recompute every slot whose multiple is `<= target` to its next
    /// multiple above `target`, and restore sorted order.
    fn fast_forward(&mut self, target: u64, tally: &mut Tally) {
        let dirty = self.nsqf.partition_point(|&v| v <= target);
        if dirty == 0 {
            return;
        }
        let mut fresh: Vec<(u64, u64)> = self.p2[..dirty]
            .iter()
            .map(|&q| (q * (target / q + 1), q))
            .collect();
        fresh.sort_unstable();
        let len = self.nsqf.len();
        let mut write = 0;
        let mut tail = dirty;
        let mut take = 0;
        let mut relocated = 0u64;
        while take < fresh.len() {
            if tail < len && self.nsqf[tail] < fresh[take].0 {
                self.nsqf[write] = self.nsqf[tail];
                self.p2[write] = self.p2[tail];
                tail += 1;
                relocated += 1;
            } else {
                self.nsqf[write] = fresh[take].0;
                self.p2[write] = fresh[take].1;
                take += 1;
            }
            write += 1;
        }
        for _ in 0..dirty {
            tally.advance(0);
        }
        tally.stats.moves += relocated;
        tally.stats.decile_moves[tally.bucket] += relocated;
    }

    fn pairs(&self) -> Vec<(u64, u64)> {
        self.p2.iter().copied().zip(self.nsqf.iter().copied()).collect()
    }
}

/// One slot of the chained list: its next multiple and the successor index
/// in ascending multiple order, packed together so a walk touches one cache
/// line per node.
#[derive(Clone, Copy)]
struct Node {
    nsqf: u64,
    next: u32,
}

/// Active slots ordered by a chained list: `p2` stays ascending and the
/// successor indices impose ascending multiple order without moving data.
///
/// The first few list values are mirrored in `front` (`u64::MAX` when
/// absent): the scan reads them on every step for the minimum and the
/// closeness test, and refreshing them at mutation time is cheaper than
/// chasing the pointers again.
struct Chained {
    p2: Vec<u64>,
    node: Vec<Node>,
    head: u32,
    front: [u64; 3],
}

impl Chained {
    fn build(p2: Vec<u64>, nsqf: Vec<u64>) -> Self {
        let mut order: Vec<u32> = (0..p2.len() as u32).collect();
        order.sort_by_key(|&i| (nsqf[i as usize], i));
        let mut node: Vec<Node> = nsqf
            .iter()
            .map(|&v| Node {
                nsqf: v,
                next: NONE,
            })
            .collect();
        for w in order.windows(2) {
            node[w[0] as usize].next = w[1];
        }
        let head = order.first().copied().unwrap_or(NONE);
        let mut list = Chained {
            p2,
            node,
            head,
            front: [u64::MAX; 3],
        };
        list.refresh_front();
        list
    }

    #[inline]
    fn refresh_front(&mut self) {
        self.front = [u64::MAX; 3];
        let mut cur = self.head;
        for slot in self.front.iter_mut() {
            if cur == NONE {
                break;
            }
            let n = &self.node[cur as usize];
            *slot = n.nsqf;
            cur = n.next;
        }
    }

    #[inline]
    fn min_value(&self) -> Option<u64> {
        (self.head != NONE).then_some(self.front[0])
    }

    fn kth_value(&self, k: usize) -> Option<u64> {
        if let Some(&v) = self.front.get(k) {
            return (v != u64::MAX).then_some(v);
        }
        let mut cur = self.head;
        for _ in 0..k {
            if cur == NONE {
                return None;
            }
            cur = self.node[cur as usize].next;
        }
        (cur != NONE).then(|| self.node[cur as usize].nsqf)
    }

    /// True if node `a` orders before node `b` (ascending value, ties by
    /// ascending slot index, which also means ascending squared prime).
    #[inline]
    fn before(&self, a: u32, b: u32) -> bool {
        (self.node[a as usize].nsqf, a) < (self.node[b as usize].nsqf, b)
    }

    fn advance_min(&mut self, tally: &mut Tally) {
        let i = self.head;
        let iu = i as usize;
        self.head = self.node[iu].next;
        let v = self.node[iu].nsqf + self.p2[iu];
        self.node[iu].nsqf = v;

        if self.head == NONE {
            self.node[iu].next = NONE;
            self.head = i;
            self.front[0] = v;
            tally.advance(0);
            return;
        }
        let mut comparisons = 0u64;
        // The slot just below holds a smaller squared prime, so its multiple
        // is below the new value: the search can start there instead of at
        // the head, cutting the walk roughly in half.
        let mut cur = if i > 0 { i - 1 } else { NONE };
        if cur == NONE {
            comparisons += 1;
            if self.before(i, self.head) {
                self.node[iu].next = self.head;
                self.head = i;
                self.refresh_front();
                tally.advance(comparisons);
                return;
            }
            cur = self.head;
        }
        let mut nxt = self.node[cur as usize].next;
        while nxt != NONE {
            comparisons += 1;
            let n = &self.node[nxt as usize];
            if n.nsqf < v {
                cur = nxt;
                nxt = n.next;
            } else if n.nsqf > v || nxt > i {
                break;
            } else {
                cur = nxt;
                nxt = n.next;
            }
        }
        self.node[iu].next = nxt;
        self.node[cur as usize].next = i;
        self.refresh_front();
        tally.advance(comparisons);
    }

    fn consume_equal(&mut self, n: u64, tally: &mut Tally) {
        while self.head != NONE && self.front[0] == n {
            self.advance_min(tally);
        }
    }

    /// Lazily activate a streamed squared prime. Slots arrive in ascending
    /// prime order, so pushing keeps `p2` ascending.
    fn insert_new(&mut self, p2: u64, value: u64) {
        let i = self.p2.len() as u32;
        debug_assert!(self.p2.last().is_none_or(|&q| q < p2));
        self.p2.push(p2);
        self.node.push(Node {
            nsqf: value,
            next: NONE,
        });
        if self.head == NONE {
            self.head = i;
            self.refresh_front();
            return;
        }
        if self.before(i, self.head) {
            self.node[i as usize].next = self.head;
            self.head = i;
            self.refresh_front();
            return;
        }
        let mut cur = self.head;
        loop {
            let nxt = self.node[cur as usize].next;
            if nxt == NONE || !self.before(nxt, i) {
                break;
            }
            cur = nxt;
        }
        self.node[i as usize].next = self.node[cur as usize].next;
        self.node[cur as usize].next = i;
        self.refresh_front();
    }

    fn pairs(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::with_capacity(self.p2.len());
        let mut cur = self.head;
        while cur != NONE {
            out.push((self.p2[cur as usize], self.node[cur as usize].nsqf));
            cur = self.node[cur as usize].next;
        }
        out
    }
}

enum Active {
    Sorted(Sorted),
    Chained(Chained),
}

impl Active {
    #[inline]
    fn min_value(&self) -> Option<u64> {
        match self {
            Active::Sorted(s) => s.min_value(),
            Active::Chained(c) => c.min_value(),
        }
    }

    #[inline]
    fn kth_value(&self, k: usize) -> Option<u64> {
        match self {
            Active::Sorted(s) => s.kth_value(k),
            Active::Chained(c) => c.kth_value(k),
        }
    }

    #[inline]
    fn consume_equal(&mut self, n: u64, tally: &mut Tally) {
        match self {
            Active::Sorted(s) => s.consume_equal(n, tally),
            Active::Chained(c) => c.consume_equal(n, tally),
        }
    }

    fn insert_new(&mut self, p2: u64, value: u64) {
        match self {
            Active::Sorted(s) => s.insert_new(p2, value),
            Active::Chained(c) => c.insert_new(p2, value),
        }
    }
}

/// Sieve state for the incremental variants.
pub struct IncrementalState<'a> {
    primes: &'a PrimeTable,
    variant: Variant,
    min_len: u32,
    /// Index of the capacity-rule slot for V2: `np2min(min_len) - 1`.
    skip_idx: Option<usize>,
    /// How many active multiples ahead the closeness test looks (0 = off).
    spacing: usize,
    base: Base,
    active: Active,
    /// Index into `primes` of the next not-yet-activated prime.
    pending: usize,
    /// Square of the next pending prime, `u64::MAX` when exhausted.
    pending_q2: u64,
    /// Squares at or below this are already activated.
    activation_frontier: u64,
    /// Last position consumed or abandoned; everything above is live.
    pos: u64,
    scan_until: u64,
    owned: (u64, u64),
    /// Positions above this exceed the prime table's certification range.
    coverage_end: u64,
    /// Current decile of the owned range and the position where the next
    /// one starts; kept incrementally since candidates ascend.
    bucket: usize,
    bucket_end: u64,
    bucket_width: u64,
    stats: RunStats,
    finished: bool,
}

impl<'a> IncrementalState<'a> {
    /// State positioned at `start - 1`: every tracked multiple is the
    /// smallest one at or above `start`. Runs are reported when their start
    /// lies in `[start, end)`; call sites that need certified maximality at
    /// the edges extend the range themselves (as [`crate::engine::search`]
    /// does).
    pub fn init(
        start: u64,
        end: u64,
        min_len: u32,
        variant: Variant,
        primes: &'a PrimeTable,
        config: &SearchConfig,
    ) -> Result<Self> {
        Self::with_owned(start, (start.max(1), end), min_len, variant, primes, config)
    }

    pub(super) fn with_owned(
        scan_from: u64,
        owned: (u64, u64),
        min_len: u32,
        variant: Variant,
        primes: &'a PrimeTable,
        config: &SearchConfig,
    ) -> Result<Self> {
        if owned.1 <= owned.0 {
            return Err(Error::EmptyRange {
                lo: owned.0,
                hi: owned.1,
            });
        }
        if min_len == 0 {
            return Err(Error::ZeroMinLength);
        }
        if variant == Variant::V0 {
            return Err(Error::NotIncremental(variant.to_string()));
        }
        primes.require_limit((owned.1 + min_len as u64 + 1).isqrt())?;

        let np2 = np2min(min_len);
        let base_size = (variant.base_size(np2) as usize).min(primes.len());
        // With a clamped base the closeness test degenerates gracefully:
        // it always looks `required - 1` multiples ahead, where `required`
        // is how many distinct active primes any qualifying gap must hold.
        let spacing = if matches!(variant, Variant::V5 | Variant::V6 | Variant::V7) {
            (np2 as usize - base_size).saturating_sub(1)
        } else {
            0
        };
        let skip_idx = variant.capacity_skip().then_some(np2 as usize - 1);

        let pos = scan_from.saturating_sub(1);
        let horizon = owned.1 + min_len as u64 + 1;
        let base_p2: Vec<u64> = (0..base_size).map(|i| square(primes.get(i))).collect();
        let base = Base::new(base_p2, variant.cached_residues(), pos, min_len + 2);

        let mut active_p2 = Vec::new();
        let mut active_nsqf = Vec::new();
        let mut pending = base_size;
        while pending < primes.len() {
            let p = primes.get(pending);
            let q = square(p);
            // Primes whose square is already behind the scan have live
            // multiples now and cannot wait; the rest of the stream joins
            // when the scan first approaches its square.
            let mandatory = q <= pos;
            if !mandatory && (p > config.stream_threshold || q > horizon) {
                break;
            }
            active_p2.push(q);
            active_nsqf.push(first_multiple_above(q, pos));
            pending += 1;
        }
        let activation_frontier = match active_p2.last() {
            Some(&q) => q.max(pos),
            None => pos,
        };
        let pending_q2 = if pending < primes.len() {
            square(primes.get(pending))
        } else {
            u64::MAX
        };

        let active = if variant.chained() {
            Active::Chained(Chained::build(active_p2, active_nsqf))
        } else {
            let mut pairs: Vec<(u64, u64)> = active_nsqf.into_iter().zip(active_p2).collect();
            pairs.sort_unstable();
            Active::Sorted(Sorted {
                nsqf: pairs.iter().map(|&(v, _)| v).collect(),
                p2: pairs.iter().map(|&(_, q)| q).collect(),
            })
        };

        let span = owned.1 - owned.0;
        let bucket_width = (span / 10).max(1);
        Ok(IncrementalState {
            primes,
            variant,
            min_len,
            skip_idx,
            spacing,
            base,
            active,
            pending,
            pending_q2,
            activation_frontier,
            pos,
            scan_until: owned.1 + min_len as u64,
            owned,
            coverage_end: primes.limit().saturating_mul(primes.limit()),
            bucket: 0,
            bucket_end: owned.0 + bucket_width,
            bucket_width,
            stats: RunStats {
                span,
                ..RunStats::default()
            },
            finished: false,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Last consumed or abandoned position.
    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Active `(p2, next multiple)` pairs in scan order.
    pub fn multiples(&self) -> Vec<(u64, u64)> {
        match &self.active {
            Active::Sorted(s) => s.pairs(),
            Active::Chained(c) => c.pairs(),
        }
    }

    pub fn base_squares(&self) -> &[u64] {
        &self.base.p2
    }

    /// Cached base residues `(anchor, anchor % p2)`, when maintained.
    pub fn base_residues(&self) -> Option<(u64, &[u64])> {
        self.base
            .cached
            .then_some((self.base.anchor, self.base.mods.as_slice()))
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn into_stats(self) -> RunStats {
        self.stats
    }

    #[inline]
    fn bucket_for(&mut self, n: u64) -> usize {
        while n >= self.bucket_end && self.bucket < 9 {
            self.bucket += 1;
            self.bucket_end += self.bucket_width;
        }
        self.bucket
    }

    /// Activate every pending squared prime at or below `limit`.
    #[inline]
    fn activate_up_to(&mut self, limit: u64) {
        if limit <= self.activation_frontier {
            return;
        }
        while self.pending_q2 <= limit {
            let q = self.pending_q2;
            self.active.insert_new(q, first_multiple_above(q, self.pos));
            self.pending += 1;
            self.pending_q2 = if self.pending < self.primes.len() {
                square(self.primes.get(self.pending))
            } else {
                u64::MAX
            };
        }
        self.activation_frontier = limit;
    }

    /// Lower bound for the `k`-th smallest (0-based) upcoming multiple
    /// across active and pending primes.
    fn effective_kth(&self, k: usize) -> Option<u64> {
        let pending = (self.pending_q2 != u64::MAX).then_some(self.pending_q2);
        match self.active.kth_value(k) {
            Some(v) => Some(pending.map_or(v, |q| v.min(q))),
            None => pending,
        }
    }

    /// Assemble the maximal run containing candidate `n`, consuming every
    /// active multiple that belongs to it.
    fn test_candidate(&mut self, n: u64, bucket: usize) -> Result<GapRecord> {
        if self.base.cached {
            self.base.rebase(n);
        }
        let mut tally = Tally {
            stats: &mut self.stats,
            bucket,
        };
        self.active.consume_equal(n, &mut tally);

        let mut pos = n + 1;
        loop {
            if pos > self.coverage_end {
                return Err(Error::PrimeTableTooSmall {
                    needed: pos.isqrt(),
                    limit: self.primes.limit(),
                });
            }
            self.activate_up_to(pos);
            if self.active.min_value() == Some(pos) {
                let mut tally = Tally {
                    stats: &mut self.stats,
                    bucket,
                };
                self.active.consume_equal(pos, &mut tally);
                pos += 1;
                continue;
            }
            if self.base.covers(pos) {
                pos += 1;
                continue;
            }
            break;
        }
        let right_end = pos - 1;

        let mut left = n - 1;
        while left >= 1 && self.base.covers(left) {
            left -= 1;
        }
        let start = left + 1;
        Ok(GapRecord::new(start, (right_end - start + 1) as u32))
    }

    /// Process one candidate position (or skip). Emits qualifying records
    /// into `sink`.
    pub fn step(&mut self, sink: &mut impl GapSink) -> Result<StepEvent> {
        if self.finished {
            return Ok(StepEvent::Finished);
        }
        // A pending square below every active multiple must surface first.
        loop {
            match (self.active.min_value(), self.pending_q2) {
                (_, u64::MAX) => break,
                (Some(m), q) if q > m => break,
                (_, q) => self.activate_up_to(q),
            }
        }
        let Some(n) = self.active.min_value() else {
            self.finished = true;
            return Ok(StepEvent::Finished);
        };
        if n > self.scan_until {
            self.finished = true;
            return Ok(StepEvent::Finished);
        }
        self.activate_up_to(n + self.min_len as u64 + 1);
        let bucket = self.bucket_for(n);

        if let Some(idx) = self.skip_idx {
            match self.effective_kth(idx) {
                Some(kth) if kth > n + self.min_len as u64 => {
                    // No window of `min_len` positions before `kth` can hold
                    // enough distinct squared primes; everything below
                    // `kth - min_len + 1` is certified gap-free.
                    let resume = kth - self.min_len as u64;
                    let mut tally = Tally {
                        stats: &mut self.stats,
                        bucket,
                    };
                    if let Active::Sorted(s) = &mut self.active {
                        s.fast_forward(resume, &mut tally);
                    }
                    self.stats.skips += 1;
                    self.pos = resume;
                    return Ok(StepEvent::CapacitySkip {
                        from: n,
                        resume: resume + 1,
                    });
                }
                Some(_) => {}
                None => {
                    // Fewer multiple sources remain than a gap needs.
                    self.finished = true;
                    return Ok(StepEvent::Finished);
                }
            }
        }

        if self.spacing > 0 {
            let close = match self.active.kth_value(self.spacing) {
                Some(v) => v <= n + self.min_len as u64 - 1,
                None => false,
            };
            if !close {
                let mut tally = Tally {
                    stats: &mut self.stats,
                    bucket,
                };
                self.active.consume_equal(n, &mut tally);
                self.stats.skips += 1;
                self.pos = n;
                return Ok(StepEvent::ClosenessSkip { at: n });
            }
        }

        self.stats.candidates += 1;
        let run = self.test_candidate(n, bucket)?;
        self.pos = run.end() - 1;
        if run.length >= self.min_len && run.start >= self.owned.0 && run.start < self.owned.1 {
            self.stats.records += 1;
            sink.record(run);
        }
        Ok(StepEvent::Candidate { at: n, run })
    }
}

#[inline]
fn square(p: u64) -> u64 {
    p * p
}

/// Smallest multiple of `q` strictly greater than `pos`.
#[inline]
fn first_multiple_above(q: u64, pos: u64) -> u64 {
    q * (pos / q + 1)
}

pub(super) fn search(
    start: u64,
    end: u64,
    min_len: u32,
    variant: Variant,
    primes: &PrimeTable,
    config: &SearchConfig,
    sink: &mut impl GapSink,
) -> Result<RunStats> {
    let scan_from = start.saturating_sub(min_len as u64 + 1).max(1);
    let mut state =
        IncrementalState::with_owned(scan_from, (start, end), min_len, variant, primes, config)?;
    loop {
        if matches!(state.step(sink)?, StepEvent::Finished) {
            return Ok(state.into_stats());
        }
    }
}
