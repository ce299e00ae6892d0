//! Sparse vertex-indexed storage with a zero default and atomic accumulation.
//!
//! [`AtomicTable`] is a linear-probing hash table over `u64` keys and `u64`
//! payloads. Inserts and updates run concurrently under a shared lock; the
//! table only takes the lock exclusively to double its capacity, so capacity
//! always tracks the number of keys actually touched and never the number of
//! vertices in the graph.
//!
//! [`SparseVec`] stores `f64` bit patterns in the same table. Reading an
//! absent key returns 0 and creates nothing.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use parking_lot::RwLock;

use crate::graph::VertexId;

const EMPTY: u64 = u64::MAX;
const MIN_CAPACITY: usize = 16;

/// Resize once more than 5/8 of the slots are taken.
#[inline]
fn over_load(len: usize, capacity: usize) -> bool {
    len * 8 > capacity * 5
}

#[inline]
fn hash(key: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = key.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Slots {
    keys: Box<[AtomicU64]>,
    vals: Box<[AtomicU64]>,
    len: AtomicUsize,
    mask: usize,
}

enum Probe {
    Found(usize),
    Claimed(usize),
    Full,
}

impl Slots {
    fn with_capacity(capacity: usize) -> Self {
        let capacity = capacity.max(MIN_CAPACITY).next_power_of_two();
        Slots {
            keys: (0..capacity).map(|_| AtomicU64::new(EMPTY)).collect(),
            vals: (0..capacity).map(|_| AtomicU64::new(0)).collect(),
            len: AtomicUsize::new(0),
            mask: capacity - 1,
        }
    }

    fn capacity(&self) -> usize {
        self.mask + 1
    }

    fn find(&self, key: u64) -> Option<usize> {
        let mut i = hash(key) as usize & self.mask;
        for _ in 0..=self.mask {
            match self.keys[i].load(Ordering::Acquire) {
                k if k == key => return Some(i),
                EMPTY => return None,
                _ => i = (i + 1) & self.mask,
            }
        }
        None
    }

    /// Locates `key`, claiming an empty slot for it if absent. Refuses to claim
    /// past the load threshold so the caller can grow the table first.
    fn find_or_claim(&self, key: u64) -> Probe {
        let mut i = hash(key) as usize & self.mask;
        for _ in 0..=self.mask {
            let current = self.keys[i].load(Ordering::Acquire);
            if current == key {
                return Probe::Found(i);
            }
            if current == EMPTY {
                if over_load(self.len.load(Ordering::Relaxed) + 1, self.capacity()) {
                    return Probe::Full;
                }
                match self.keys[i].compare_exchange(EMPTY, key, Ordering::AcqRel, Ordering::Acquire) {
                    Ok(_) => {
                        self.len.fetch_add(1, Ordering::Relaxed);
                        return Probe::Claimed(i);
                    }
                    Err(k) if k == key => return Probe::Found(i),
                    Err(_) => {}
                }
            }
            i = (i + 1) & self.mask;
        }
        Probe::Full
    }

    fn occupied(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.keys.iter().zip(self.vals.iter()).filter_map(|(k, v)| {
            let k = k.load(Ordering::Acquire);
            (k != EMPTY).then(|| (k, v.load(Ordering::Acquire)))
        })
    }

    fn rehash_into(&self, target: &Slots) {
        for (k, v) in self.occupied() {
            match target.find_or_claim(k) {
                Probe::Claimed(i) => target.vals[i].store(v, Ordering::Relaxed),
                _ => unreachable!("rehash target too small or duplicate key"),
            }
        }
    }
}

/// Concurrent hash table from `u64` keys (except `u64::MAX`) to `u64` payloads.
/// Absent keys read as payload 0.
pub struct AtomicTable {
    slots: RwLock<Slots>,
}

impl Default for AtomicTable {
    fn default() -> Self {
        Self::new()
    }
}

impl AtomicTable {
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    /// A table sized to hold `expected` keys without resizing.
    pub fn with_capacity(expected: usize) -> Self {
        AtomicTable {
            slots: RwLock::new(Slots::with_capacity(expected * 2)),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.read().len.load(Ordering::Relaxed)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.slots.read().capacity()
    }

    pub fn get(&self, key: u64) -> Option<u64> {
        let slots = self.slots.read();
        slots
            .find(key)
            .map(|i| slots.vals[i].load(Ordering::Acquire))
    }

    /// Atomically replaces the payload of `key` with `f(old)`, creating the key with
    /// payload 0 first if needed. Returns the previous payload and whether the key
    /// was created by this call. `f` may run more than once under contention.
    pub fn update(&self, key: u64, f: impl Fn(u64) -> u64) -> (u64, bool) {
        debug_assert_ne!(key, EMPTY);
        loop {
            {
                let slots = self.slots.read();
                let (i, created) = match slots.find_or_claim(key) {
                    Probe::Found(i) => (i, false),
                    Probe::Claimed(i) => (i, true),
                    Probe::Full => {
                        drop(slots);
                        self.grow();
                        continue;
                    }
                };
                let old = slots.vals[i]
                    .fetch_update(Ordering::AcqRel, Ordering::Acquire, |v| Some(f(v)))
                    .unwrap();
                return (old, created);
            }
        }
    }

    /// Inserts `key` if absent. Returns true iff this call inserted it.
    pub fn insert(&self, key: u64) -> bool {
        self.update(key, |v| v).1
    }

    /// Returns the dense id of `key`, assigning `next.fetch_add(1)` on first sight.
    /// Concurrent callers for the same key all observe the same id.
    pub fn dense_id(&self, key: u64, next: &AtomicU64) -> u64 {
        loop {
            {
                let slots = self.slots.read();
                match slots.find_or_claim(key) {
                    Probe::Claimed(i) => {
                        let id = next.fetch_add(1, Ordering::Relaxed);
                        slots.vals[i].store(id + 1, Ordering::Release);
                        return id;
                    }
                    Probe::Found(i) => loop {
                        // Payload 0 means the claiming thread has not published the id yet.
                        let v = slots.vals[i].load(Ordering::Acquire);
                        if v != 0 {
                            return v - 1;
                        }
                        std::hint::spin_loop();
                    },
                    Probe::Full => {}
                }
            }
            self.grow();
        }
    }

    fn grow(&self) {
        let mut slots = self.slots.write();
        let len = slots.len.load(Ordering::Relaxed);
        if !over_load(len + 1, slots.capacity()) {
            return;
        }
        let bigger = Slots::with_capacity(slots.capacity() * 2);
        slots.rehash_into(&bigger);
        *slots = bigger;
    }

    /// Snapshot of all entries. Must not race with writers to be a consistent view.
    pub fn entries(&self) -> Vec<(u64, u64)> {
        self.slots.read().occupied().collect()
    }

    pub fn clear(&mut self) {
        *self.slots.get_mut() = Slots::with_capacity(0);
    }
}

/// Sparse vertex → mass map with ⊥ = 0.
///
/// `accumulate` is a linearizable fetch-and-add and may be called from any
/// number of threads. `entries`, `clear` and iteration expect no concurrent
/// writers.
#[derive(Default)]
pub struct SparseVec {
    table: AtomicTable,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(expected: usize) -> Self {
        SparseVec {
            table: AtomicTable::with_capacity(expected),
        }
    }

    /// Builds a vector from `(vertex, value)` pairs, summing repeated keys.
    pub fn from_entries(entries: impl IntoIterator<Item = (VertexId, f64)>) -> Self {
        let v = SparseVec::new();
        for (k, x) in entries {
            v.accumulate(k, x);
        }
        v
    }

    #[inline]
    pub fn get(&self, key: VertexId) -> f64 {
        self.table
            .get(key as u64)
            .map_or(0.0, f64::from_bits)
    }

    #[inline]
    pub fn accumulate(&self, key: VertexId, delta: f64) {
        self.table
            .update(key as u64, |bits| (f64::from_bits(bits) + delta).to_bits());
    }

    /// Like `accumulate`, returning the value before the addition.
    #[inline]
    pub fn fetch_add(&self, key: VertexId, delta: f64) -> f64 {
        let (old, _) = self
            .table
            .update(key as u64, |bits| (f64::from_bits(bits) + delta).to_bits());
        f64::from_bits(old)
    }

    /// Number of keys ever created. Keys are never deleted, only cleared wholesale.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.table.capacity()
    }

    pub fn entries(&self) -> Vec<(VertexId, f64)> {
        self.table
            .entries()
            .into_iter()
            .map(|(k, bits)| (k as VertexId, f64::from_bits(bits)))
            .collect()
    }

    /// Entries sorted by vertex id.
    pub fn sorted_entries(&self) -> Vec<(VertexId, f64)> {
        let mut e = self.entries();
        e.sort_unstable_by_key(|&(k, _)| k);
        e
    }

    /// Keys holding a strictly positive value.
    pub fn support_size(&self) -> usize {
        self.entries().iter().filter(|&&(_, x)| x > 0.0).count()
    }

    /// l1 norm. Values are non-negative in every diffusion, so this is also the total mass.
    pub fn l1_norm(&self) -> f64 {
        self.entries().iter().map(|&(_, x)| x.abs()).sum()
    }

    pub fn clear(&mut self) {
        self.table.clear();
    }
}

impl Clone for SparseVec {
    fn clone(&self) -> Self {
        let out = SparseVec::with_capacity(self.len());
        for (k, x) in self.entries() {
            out.accumulate(k, x);
        }
        out
    }
}

impl std::fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.sorted_entries()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rayon::prelude::*;

    #[test]
    fn absent_key_reads_zero_without_creating() {
        let v = SparseVec::new();
        assert_eq!(v.get(5), 0.0);
        assert_eq!(v.get(5), 0.0);
        assert_eq!(v.len(), 0);
    }

    #[test]
    fn accumulate_creates_entry() {
        let v = SparseVec::new();
        v.accumulate(3, 0.5);
        assert_eq!(v.entries(), vec![(3, 0.5)]);
        v.accumulate(5, 0.25);
        assert_eq!(v.get(5), 0.25);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn entries_of_empty_and_pair() {
        assert!(SparseVec::new().entries().is_empty());
        let v = SparseVec::from_entries([(1, 0.5), (2, 0.5)]);
        let mut e = v.entries();
        e.sort_by_key(|p| p.0);
        assert_eq!(e, vec![(1, 0.5), (2, 0.5)]);
    }

    #[test]
    fn concurrent_integer_accumulates_are_exact() {
        let v = SparseVec::new();
        (0..1000).into_par_iter().for_each(|_| v.accumulate(7, 1.0));
        assert_eq!(v.get(7), 1000.0);
        assert_eq!(v.len(), 1);

        let threads: Vec<_> = (0..4)
            .map(|_| {
                let v = &v;
                move || (0..250).for_each(|_| v.accumulate(7, 1.0))
            })
            .collect();
        std::thread::scope(|s| {
            for t in threads {
                s.spawn(t);
            }
        });
        assert_eq!(v.get(7), 2000.0);
    }

    #[test]
    fn concurrent_real_accumulates_within_reassociation_bound() {
        let v = SparseVec::new();
        std::thread::scope(|s| {
            for _ in 0..10 {
                s.spawn(|| v.accumulate(3, 0.1));
            }
        });
        assert!((v.get(3) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn concurrent_growth_keeps_every_key() {
        let v = SparseVec::new();
        std::thread::scope(|s| {
            for t in 0..8u32 {
                let v = &v;
                s.spawn(move || {
                    for k in 0..5_000u32 {
                        v.accumulate(k * 8 + t, 1.0);
                        v.accumulate(k, 1.0);
                    }
                });
            }
        });
        assert_eq!(v.len(), 40_000);
        for k in 0..5_000u32 {
            assert_eq!(v.get(k), 9.0, "key {k}");
        }
        let total: f64 = v.entries().iter().map(|e| e.1).sum();
        assert_eq!(total, 80_000.0);
    }

    #[test]
    fn random_accumulates_match_scalar_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = SparseVec::new();
        let mut total = 0.0f64;
        for _ in 0..20_000 {
            let k = rng.gen_range(0..3_000u32);
            let x: f64 = rng.gen_range(0.0..1.0);
            v.accumulate(k, x);
            total += x;
        }
        let sum: f64 = v.entries().iter().map(|e| e.1).sum();
        assert!(((sum - total) / total).abs() <= 1e-9);
    }

    #[test]
    fn storage_tracks_touched_keys_not_id_range() {
        // Ids drawn from a 10^7-vertex id space.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = SparseVec::new();
        let mut keys = std::collections::HashSet::new();
        while keys.len() < 1_000 {
            let k = rng.gen_range(0..10_000_000u32);
            keys.insert(k);
            v.accumulate(k, 1.0);
        }
        assert_eq!(v.len(), 1_000);
        assert!(v.capacity() <= 4 * 1_000, "capacity {}", v.capacity());
    }

    #[test]
    fn dense_ids_are_unique_and_dense() {
        let t = AtomicTable::new();
        let next = AtomicU64::new(0);
        let keys: Vec<u64> = (0..10_000u64).map(|i| (i * 7919) % 1_000).collect();
        let ids: Vec<u64> = keys.par_iter().map(|&k| t.dense_id(k, &next)).collect();
        assert_eq!(next.load(Ordering::Relaxed), 1_000);
        let mut by_key = std::collections::HashMap::new();
        for (k, id) in keys.iter().zip(&ids) {
            assert!(*id < 1_000);
            assert_eq!(*by_key.entry(*k).or_insert(*id), *id);
        }
    }

    #[test]
    fn insert_reports_first_insertion() {
        let t = AtomicTable::new();
        assert!(t.insert(4));
        assert!(!t.insert(4));
        assert_eq!(t.get(4), Some(0));
        assert_eq!(t.get(5), None);
    }

    #[test]
    fn clear_resets() {
        let mut v = SparseVec::from_entries([(1, 1.0), (2, 2.0)]);
        v.clear();
        assert!(v.is_empty());
        assert_eq!(v.get(1), 0.0);
    }
}
