//! Data-parallel building blocks: prefix sums, filter and integer sort.
//!
//! Each primitive takes an [`Execution`] so the sequential reference paths and
//! the parallel paths share one implementation of the surrounding algorithm.
//! Parallel versions split the input into one block per worker and run the
//! classic three-phase scheme (local pass, scan of block totals, local fixup).

use rayon::prelude::*;

/// How a kernel runs: single-threaded reference or rayon-parallel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        matches!(self, Execution::Parallel)
    }
}

const MIN_BLOCK: usize = 4096;

fn block_len(len: usize) -> usize {
    let workers = rayon::current_num_threads().max(1);
    len.div_ceil(workers).max(MIN_BLOCK)
}

/// A raw pointer that may be shared across workers writing disjoint indices.
#[derive(Clone, Copy)]
struct SharedMut<T>(*mut T);
unsafe impl<T: Send> Send for SharedMut<T> {}
unsafe impl<T: Send> Sync for SharedMut<T> {}

impl<T> SharedMut<T> {
    /// # Safety
    /// `i` must be in bounds and no other thread may access index `i` concurrently.
    #[inline]
    unsafe fn write(self, i: usize, value: T) {
        self.0.add(i).write(value)
    }
}

/// Inclusive prefix sum in place: `x[i] = x[0] + ... + x[i]`.
pub fn inclusive_scan<T>(values: &mut [T], exec: Execution)
where
    T: Copy + Send + Sync + std::ops::Add<Output = T> + Default,
{
    if !exec.is_parallel() || values.len() <= MIN_BLOCK {
        let mut acc = T::default();
        for v in values.iter_mut() {
            acc = acc + *v;
            *v = acc;
        }
        return;
    }
    let block = block_len(values.len());
    let totals: Vec<T> = values
        .par_chunks_mut(block)
        .map(|chunk| {
            let mut acc = T::default();
            for v in chunk.iter_mut() {
                acc = acc + *v;
                *v = acc;
            }
            acc
        })
        .collect();
    let mut carry = Vec::with_capacity(totals.len());
    let mut acc = T::default();
    for t in totals {
        carry.push(acc);
        acc = acc + t;
    }
    values
        .par_chunks_mut(block)
        .zip(carry)
        .skip(1)
        .for_each(|(chunk, c)| chunk.iter_mut().for_each(|v| *v = c + *v));
}

/// Exclusive prefix sum. Returns `(prefix, total)` where `prefix[i] = x[0] + ... + x[i-1]`.
pub fn exclusive_scan<T>(values: &[T], exec: Execution) -> (Vec<T>, T)
where
    T: Copy + Send + Sync + std::ops::Add<Output = T> + Default,
{
    let mut inclusive = values.to_vec();
    inclusive_scan(&mut inclusive, exec);
    let total = inclusive.last().copied().unwrap_or_default();
    let mut out = Vec::with_capacity(values.len());
    out.push(T::default());
    out.extend_from_slice(&inclusive[..inclusive.len().saturating_sub(1)]);
    out.truncate(values.len());
    (out, total)
}

/// Keeps the elements satisfying `pred`, preserving their order.
pub fn filter<T, P>(values: &[T], exec: Execution, pred: P) -> Vec<T>
where
    T: Copy + Send + Sync,
    P: Fn(&T) -> bool + Sync,
{
    if exec.is_parallel() {
        values.par_iter().filter(|v| pred(v)).copied().collect()
    } else {
        values.iter().filter(|v| pred(v)).copied().collect()
    }
}

/// Stable counting sort of `items` by `key(item)`, where every key lies in `0..=max_key`.
///
/// Work is `O(len + workers * max_key)`; callers keep `max_key` proportional to `len`.
pub fn integer_sort_by_key<T, K>(items: &[T], max_key: usize, exec: Execution, key: K) -> Vec<T>
where
    T: Copy + Send + Sync,
    K: Fn(&T) -> usize + Sync,
{
    let buckets = max_key + 1;
    if !exec.is_parallel() || items.len() <= MIN_BLOCK {
        let mut counts = vec![0usize; buckets + 1];
        for it in items {
            counts[key(it) + 1] += 1;
        }
        for b in 0..buckets {
            counts[b + 1] += counts[b];
        }
        let mut out: Vec<T> = Vec::with_capacity(items.len());
        let dst = SharedMut(out.as_mut_ptr());
        for it in items {
            let k = key(it);
            // SAFETY: counts[k] walks a disjoint in-bounds range for each key.
            unsafe { dst.write(counts[k], *it) };
            counts[k] += 1;
        }
        // SAFETY: every index in 0..len was written exactly once above.
        unsafe { out.set_len(items.len()) };
        return out;
    }

    let block = block_len(items.len());
    let blocks: Vec<&[T]> = items.chunks(block).collect();
    let histograms: Vec<Vec<usize>> = blocks
        .par_iter()
        .map(|chunk| {
            let mut h = vec![0usize; buckets];
            for it in chunk.iter() {
                h[key(it)] += 1;
            }
            h
        })
        .collect();
    // Bucket-major scan: offsets[b][k] = #items with key < k, plus those with key == k in earlier blocks.
    let mut offsets: Vec<Vec<usize>> = vec![vec![0usize; buckets]; blocks.len()];
    let mut running = 0usize;
    for k in 0..buckets {
        for (b, h) in histograms.iter().enumerate() {
            offsets[b][k] = running;
            running += h[k];
        }
    }

    let mut out: Vec<T> = Vec::with_capacity(items.len());
    let dst = SharedMut(out.as_mut_ptr());
    blocks
        .par_iter()
        .zip(offsets.into_par_iter())
        .for_each(|(chunk, mut next)| {
            for it in chunk.iter() {
                let k = key(it);
                // SAFETY: each (block, key) pair owns the disjoint range reserved by the scan.
                unsafe { dst.write(next[k], *it) };
                next[k] += 1;
            }
        });
    // SAFETY: the per-block ranges partition 0..len and each slot was written once.
    unsafe { out.set_len(items.len()) };
    out
}

/// Parallel min-reduction returning the first index attaining the minimum.
pub fn argmin_first(values: &[f64], exec: Execution) -> Option<usize> {
    let pick = |a: (usize, f64), b: (usize, f64)| {
        if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    if exec.is_parallel() {
        values
            .par_iter()
            .copied()
            .enumerate()
            .reduce_with(pick)
            .map(|(i, _)| i)
    } else {
        values.iter().copied().enumerate().reduce(pick).map(|(i, _)| i)
    }
}
