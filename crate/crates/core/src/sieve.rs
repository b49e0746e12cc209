//! Bit-per-residue covering sieve.
//!
//! A period `[0, L)` is processed in fixed-size blocks so that large periods
//! never need one contiguous allocation. Blocks are independent and are
//! scanned in parallel; the reduction (a count and a minimum) is
//! order-independent so results match a sequential run exactly.

use rayon::prelude::*;

use crate::system::ResidueClass;

/// Cells per block. 2^18 bits is 32 KiB of words.
pub const BLOCK_CELLS: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanResult {
    pub period: u64,
    pub uncovered: u64,
    pub first_uncovered: Option<u64>,
}

/// Marks every class over `[0, period)` and counts what is left.
pub fn scan(classes: &[ResidueClass], period: u64) -> ScanResult {
    let mut classes: Vec<ResidueClass> = classes.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.iter().any(|c| c.modulus() == 1) || period == 0 {
        return ScanResult {
            period,
            uncovered: 0,
            first_uncovered: None,
        };
    }
    let blocks = period.div_ceil(BLOCK_CELLS);
    let per_block = |b: u64| -> (u64, Option<u64>) {
        let start = b * BLOCK_CELLS;
        let len = BLOCK_CELLS.min(period - start);
        let mut words = vec![0u64; len.div_ceil(64) as usize];
        for c in &classes {
            mark_class(&mut words, start, len, c.modulus(), c.residue());
        }
        count_unmarked(&words, start, len)
    };
    let (uncovered, first_uncovered) = if blocks > 4 {
        (0..blocks)
            .into_par_iter()
            .map(per_block)
            .reduce(|| (0, None), merge)
    } else {
        (0..blocks).map(per_block).fold((0, None), merge)
    };
    ScanResult {
        period,
        uncovered,
        first_uncovered,
    }
}

/// Smallest uncovered cell of `[0, period)`. Blocks are scanned in order,
/// a batch at a time, and the scan stops at the first batch with a free cell.
pub fn first_uncovered(classes: &[ResidueClass], period: u64) -> Option<u64> {
    const BATCH: u64 = 16;
    let mut classes: Vec<ResidueClass> = classes.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.iter().any(|c| c.modulus() == 1) {
        return None;
    }
    let blocks = period.div_ceil(BLOCK_CELLS);
    let first_in = |b: u64| -> Option<u64> {
        let start = b * BLOCK_CELLS;
        let len = BLOCK_CELLS.min(period - start);
        let mut words = vec![0u64; len.div_ceil(64) as usize];
        for c in &classes {
            mark_class(&mut words, start, len, c.modulus(), c.residue());
        }
        count_unmarked(&words, start, len).1
    };
    let mut b = 0;
    while b < blocks {
        let end = (b + BATCH).min(blocks);
        let found = if b == 0 {
            // most systems leave a gap in the first block
            first_in(0).or_else(|| (1..end).into_par_iter().filter_map(first_in).min())
        } else {
            (b..end).into_par_iter().filter_map(first_in).min()
        };
        if found.is_some() {
            return found;
        }
        b = end;
    }
    None
}

fn merge(a: (u64, Option<u64>), b: (u64, Option<u64>)) -> (u64, Option<u64>) {
    let first = match (a.1, b.1) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    (a.0 + b.0, first)
}

fn mark_class(words: &mut [u64], start: u64, len: u64, n: u64, r: u64) {
    let off = (r + n - start % n) % n;
    let mut x = off;
    while x < len {
        words[(x >> 6) as usize] |= 1u64 << (x & 63);
        x += n;
    }
}

fn count_unmarked(words: &[u64], start: u64, len: u64) -> (u64, Option<u64>) {
    let mut count = 0u64;
    let mut first = None;
    let full = (len / 64) as usize;
    for (i, &w) in words.iter().enumerate() {
        let valid = if i < full { u64::MAX } else { (1u64 << (len % 64)) - 1 };
        let free = !w & valid;
        if free != 0 && first.is_none() {
            first = Some(start + 64 * i as u64 + free.trailing_zeros() as u64);
        }
        count += free.count_ones() as u64;
    }
    (count, first)
}

/// A dense bitset over `[0, len)`; set bits are "still uncovered".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cells {
    words: Vec<u64>,
    len: u64,
}

impl Cells {
    pub fn full(len: u64) -> Self {
        let mut words = vec![u64::MAX; len.div_ceil(64) as usize];
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        Self { words, len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn get(&self, x: u64) -> bool {
        self.words[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    /// Clears the class `r (mod n)`; returns how many set cells were cleared.
    pub fn clear_class(&mut self, n: u64, r: u64) -> u64 {
        let mut removed = 0;
        let mut x = r % n;
        while x < self.len {
            let w = &mut self.words[(x >> 6) as usize];
            let bit = 1u64 << (x & 63);
            if *w & bit != 0 {
                removed += 1;
                *w &= !bit;
            }
            x += n;
        }
        removed
    }

    /// Number of set cells in the class `r (mod n)`.
    pub fn count_class(&self, n: u64, r: u64) -> u64 {
        let mut hits = 0;
        let mut x = r % n;
        while x < self.len {
            hits += self.words[(x >> 6) as usize] >> (x & 63) & 1;
            x += n;
        }
        hits
    }

    /// Per-residue counts of set cells modulo `n`.
    pub fn class_counts(&self, n: u64) -> Vec<u64> {
        let mut counts = vec![0u64; n as usize];
        for x in self.iter_ones() {
            counts[(x % n) as usize] += 1;
        }
        counts
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(64 * i as u64 + t)
            })
        })
    }

    pub fn first_one(&self) -> Option<u64> {
        self.iter_ones().next()
    }
}
