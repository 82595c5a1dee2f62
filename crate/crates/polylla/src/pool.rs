//! Work-item execution for the data-parallel kernels.
//!
//! A kernel is a pure pass over `0..n_items`: every work-item reads only
//! snapshot inputs and computes values for slots it owns, so the result is
//! identical for any worker count and any execution order. Two execution
//! strategies realize that contract:
//!
//! - [`run_chunked`] gives each worker a contiguous range of items together
//!   with the matching `&mut` slice of the output, so items write their own
//!   slots directly;
//! - [`run_collect`] (used for sparse cross-slot updates and for the
//!   permuted-schedule test path) gathers each item's computed update and
//!   lets the caller apply them after the join.
//!
//! The scope join is the barrier between kernels.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Worker item ranges covering `0..n_items`.
fn chunk_ranges(workers: usize, n_items: usize) -> Vec<(usize, usize)> {
    let workers = workers.max(1).min(n_items.max(1));
    let chunk = n_items.div_ceil(workers).max(1);
    (0..workers)
        .map(|w| (w * chunk, ((w + 1) * chunk).min(n_items)))
        .filter(|&(lo, hi)| lo < hi)
        .collect()
}

/// Runs `f(item, slots)` for every item, where `slots` is the item's own
/// `per_item`-wide window of `out`. `out.len()` must be a multiple of
/// `per_item`.
pub(crate) fn run_chunked<T, F>(workers: usize, out: &mut [T], per_item: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert_eq!(out.len() % per_item, 0);
    let n_items = out.len() / per_item;
    if workers <= 1 || n_items < 2 {
        for (i, slots) in out.chunks_exact_mut(per_item).enumerate() {
            f(i, slots);
        }
        return;
    }
    let ranges = chunk_ranges(workers, n_items);
    std::thread::scope(|scope| {
        let mut rest = out;
        for &(lo, hi) in &ranges {
            let (head, tail) = rest.split_at_mut((hi - lo) * per_item);
            rest = tail;
            let f = &f;
            scope.spawn(move || {
                for (k, slots) in head.chunks_exact_mut(per_item).enumerate() {
                    f(lo + k, slots);
                }
            });
        }
    });
}

/// Computes an optional update per item and returns all updates, in worker
/// order for a fixed schedule. `order`, when given, is the execution order
/// of the items; it must be a permutation of `0..n_items`.
pub(crate) fn run_collect<U, F>(
    workers: usize,
    order: Option<&[usize]>,
    n_items: usize,
    f: F,
) -> Vec<(usize, U)>
where
    U: Send,
    F: Fn(usize) -> Option<U> + Sync,
{
    debug_assert!(order.map_or(true, |o| o.len() == n_items));
    if workers <= 1 || n_items < 2 {
        let mut out = Vec::new();
        match order {
            None => {
                for i in 0..n_items {
                    if let Some(u) = f(i) {
                        out.push((i, u));
                    }
                }
            }
            Some(perm) => {
                for &i in perm {
                    if let Some(u) = f(i) {
                        out.push((i, u));
                    }
                }
            }
        }
        return out;
    }
    let ranges = chunk_ranges(workers, n_items);
    let mut parts: Vec<Vec<(usize, U)>> = Vec::with_capacity(ranges.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(ranges.len());
        for &(lo, hi) in &ranges {
            let f = &f;
            handles.push(scope.spawn(move || {
                let mut local = Vec::new();
                match order {
                    None => {
                        for i in lo..hi {
                            if let Some(u) = f(i) {
                                local.push((i, u));
                            }
                        }
                    }
                    Some(perm) => {
                        for &i in &perm[lo..hi] {
                            if let Some(u) = f(i) {
                                local.push((i, u));
                            }
                        }
                    }
                }
                local
            }));
        }
        for h in handles {
            parts.push(h.join().expect("kernel worker panicked"));
        }
    });
    parts.into_iter().flatten().collect()
}

/// Deterministic permutation of `0..n` for schedule-independence tests.
pub(crate) fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut items: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.shuffle(&mut rng);
    items
}

/// Stream compaction: positions of the set bits, via a two-phase parallel
/// exclusive prefix sum over per-chunk counts.
pub(crate) fn scan_compact(bits: &[bool], workers: usize) -> Vec<usize> {
    let n = bits.len();
    let ranges = chunk_ranges(workers, n);

    // Phase 1: count per chunk.
    let mut counts = vec![0usize; ranges.len()];
    if ranges.len() <= 1 {
        for (c, &(lo, hi)) in counts.iter_mut().zip(&ranges) {
            *c = bits[lo..hi].iter().filter(|&&b| b).count();
        }
    } else {
        std::thread::scope(|scope| {
            for (c, &(lo, hi)) in counts.iter_mut().zip(&ranges) {
                scope.spawn(move || {
                    *c = bits[lo..hi].iter().filter(|&&b| b).count();
                });
            }
        });
    }

    // Phase 2: exclusive scan of the chunk counts.
    let total: usize = counts.iter().sum();

    // Phase 3: each chunk writes its set positions at its offset.
    let mut out = vec![0usize; total];
    {
        let mut rest: &mut [usize] = &mut out;
        let mut pieces = Vec::with_capacity(ranges.len());
        for &c in &counts {
            let (head, tail) = rest.split_at_mut(c);
            pieces.push(head);
            rest = tail;
        }
        if pieces.len() <= 1 {
            for (piece, &(lo, hi)) in pieces.into_iter().zip(&ranges) {
                fill_positions(piece, &bits[lo..hi], lo);
            }
        } else {
            std::thread::scope(|scope| {
                for (piece, &(lo, hi)) in pieces.into_iter().zip(&ranges) {
                    scope.spawn(move || fill_positions(piece, &bits[lo..hi], lo));
                }
            });
        }
    }
    out
}

fn fill_positions(out: &mut [usize], bits: &[bool], base: usize) {
    let mut k = 0;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[k] = base + i;
            k += 1;
        }
    }
    debug_assert_eq!(k, out.len());
}
