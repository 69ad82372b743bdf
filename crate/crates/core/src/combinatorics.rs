//! Ranking and unranking of bounded-size subsets.
//!
//! All subsets of a `c`-element candidate list with at most `s` members are
//! laid out in one global order: by descending size, and lexicographically
//! within each size. For `c = 6, s = 4` index 0 is `{0,1,2,3}`, index 1 is
//! `{0,1,2,4}`, index 55 is `{5}` and index 56 is the empty set. This layout
//! addresses the score cache and the parent set table, so it must not change.
//!
//! Combinations passed to [`unrank_combination`] and [`rank_combination`] use
//! 1-based elements and 1-based ranks; everything else is 0-based.

use crate::error::{Error, Result};
use crate::model::ParentSet;

const TABLE_SIZE: usize = 65;

const fn pascal() -> [[u64; TABLE_SIZE]; TABLE_SIZE] {
    let mut t = [[0u64; TABLE_SIZE]; TABLE_SIZE];
    let mut n = 0;
    while n < TABLE_SIZE {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
            k += 1;
        }
        n += 1;
    }
    t
}

static BINOMIAL: [[u64; TABLE_SIZE]; TABLE_SIZE] = pascal();

/// Exact `C(n, k)` for `n <= 64`; zero when `k > n`.
#[inline]
pub fn binomial(n: usize, k: usize) -> u64 {
    assert!(n < TABLE_SIZE, "binomial table covers n <= 64, got {n}");
    if k > n {
        0
    } else {
        BINOMIAL[n][k]
    }
}

/// Table read without the range check; callers guarantee `n <= 64`, `k <= 64`.
#[inline]
pub(crate) fn binomial_raw(n: usize, k: usize) -> u64 {
    BINOMIAL[n][k]
}

/// Number of subsets of `candidates` elements with at most `s` members.
pub fn bounded_subset_count(candidates: usize, s: usize) -> u64 {
    (0..=s.min(candidates)).map(|j| binomial(candidates, j)).sum()
}

/// A strictly increasing list of 1-based elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Combination {
    elems: Vec<usize>,
}

impl Combination {
    pub fn new(elems: Vec<usize>) -> Result<Self> {
        if elems.first() == Some(&0) || elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("{elems:?} is not a strictly increasing 1-based combination")));
        }
        Ok(Combination { elems })
    }

    /// From 0-based elements.
    pub fn from_zero_based(elems: &[usize]) -> Result<Self> {
        Self::new(elems.iter().map(|e| e + 1).collect())
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn k(&self) -> usize {
        self.elems.len()
    }

    pub fn to_zero_based(&self) -> Vec<usize> {
        self.elems.iter().map(|e| e - 1).collect()
    }

    pub fn to_mask(&self) -> u64 {
        self.elems.iter().fold(0, |m, &e| m | 1 << (e - 1))
    }
}

/// The `l`-th (1-based) `k`-combination of `{1..n}` in lexicographic order.
///
/// Each element is found by skipping whole blocks of combinations that share
/// a smaller leading element: `C(n - shift, k - 1)` of them start with
/// `low + shift`.
pub fn unrank_combination(n: usize, k: usize, l: u64) -> Result<Combination> {
    let total = binomial(n, k);
    if l < 1 || l > total {
        return Err(Error::Rank { n, k, rank: l, total });
    }
    let mut elems = Vec::with_capacity(k);
    if k == 0 {
        return Ok(Combination { elems });
    }
    let (mut n, mut k, mut l, mut low) = (n, k, l, 0usize);
    while k > 1 {
        let mut sum = 0u64;
        let mut shift = 1;
        while shift <= n {
            let block = binomial(n - shift, k - 1);
            if sum + block < l {
                sum += block;
                shift += 1;
            } else {
                break;
            }
        }
        debug_assert!(shift <= n, "block skipping ran past the candidate list");
        elems.push(low + shift);
        n -= shift;
        k -= 1;
        l -= sum;
        low += shift;
    }
    elems.push(low + l as usize);
    Ok(Combination { elems })
}

/// Inverse of [`unrank_combination`]: the 1-based lexicographic rank of `c`
/// among the `c.k()`-combinations of `{1..n}`.
pub fn rank_combination(c: &Combination, n: usize) -> u64 {
    let k = c.k();
    assert!(c.elems.last().is_none_or(|&e| e <= n), "{c:?} not over 1..={n}");
    // count of combinations after c, read off its complement in the
    // combinatorial number system
    let after: u64 = c.elems.iter().enumerate().map(|(i, &a)| binomial(n - a, k - i)).sum();
    binomial(n, k) - after
}

/// Position of a local subset (bit `j` = candidate `j`) in the global order
/// over `candidates` elements with size limit `s`. Panics if the subset is
/// larger than `s`.
#[inline]
pub fn global_index(local: u64, candidates: usize, s: usize) -> u64 {
    let k = local.count_ones() as usize;
    assert!(k <= s, "subset of size {k} exceeds limit {s}");
    let mut idx: u64 = (k..=s.min(candidates)).map(|j| binomial(candidates, j)).sum::<u64>() - 1;
    let mut rest = local;
    let mut left = k;
    while rest != 0 {
        let c = rest.trailing_zeros() as usize;
        idx -= binomial(candidates - 1 - c, left);
        left -= 1;
        rest &= rest - 1;
    }
    idx
}

/// Inverse of [`global_index`]: the local subset at `index`, via unranking.
pub fn subset_at(index: u64, candidates: usize, s: usize) -> Result<u64> {
    let mut start = 0u64;
    for k in (0..=s.min(candidates)).rev() {
        let block = binomial(candidates, k);
        if index < start + block {
            return Ok(unrank_combination(candidates, k, index - start + 1)?.to_mask());
        }
        start += block;
    }
    Err(Error::Rank { n: candidates, k: s, rank: index, total: start })
}

/// Next subset after `local` in the global order, or `None` after the empty set.
#[inline]
pub fn next_subset(local: u64, candidates: usize) -> Option<u64> {
    let k = local.count_ones() as usize;
    if k == 0 {
        return None;
    }
    // lexicographic successor among k-subsets: find the rightmost element
    // that can still move right
    let mut top = candidates;
    let mut mask = local;
    let mut tail = 0usize;
    while mask != 0 {
        let hi = 63 - mask.leading_zeros() as usize;
        if hi + 1 < top {
            let keep = mask & !(1u64 << hi);
            let run = ((1u64 << (tail + 1)) - 1) << (hi + 1);
            return Some(keep | run);
        }
        mask &= !(1u64 << hi);
        top = hi;
        tail += 1;
    }
    // wrapped: first subset of size k - 1
    Some((1u64 << (k - 1)) - 1)
}

/// First subset in the global order.
pub fn first_subset(candidates: usize, s: usize) -> u64 {
    let k = s.min(candidates);
    if k == 0 {
        0
    } else {
        (1u64 << k) - 1
    }
}

/// Iterator over local subsets in global order.
#[derive(Clone, Debug)]
pub struct BoundedSubsets {
    candidates: usize,
    next: Option<u64>,
}

impl BoundedSubsets {
    pub fn new(candidates: usize, s: usize) -> Self {
        assert!(candidates < 64, "at most 63 candidates");
        BoundedSubsets { candidates, next: Some(first_subset(candidates, s)) }
    }
}

impl Iterator for BoundedSubsets {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = next_subset(cur, self.candidates);
        Some(cur)
    }
}

/// Maps a local subset over `candidates` onto node indices.
pub fn to_nodes(local: u64, candidates: &[usize]) -> ParentSet {
    let mut out = ParentSet::EMPTY;
    let mut rest = local;
    while rest != 0 {
        out.insert(candidates[rest.trailing_zeros() as usize]);
        rest &= rest - 1;
    }
    out
}

/// Every subset of `candidates` with at most `s` members, in global order,
/// produced one at a time.
pub fn enumerate_bounded_subsets(candidates: &[usize], s: usize) -> impl Iterator<Item = ParentSet> + '_ {
    BoundedSubsets::new(candidates.len(), s).map(move |local| to_nodes(local, candidates))
}

/// All bounded subsets of `candidates` elements, materialized in global order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentSetTable {
    candidates: usize,
    max_size: usize,
    entries: Vec<u64>,
}

impl ParentSetTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Local subset at global index `idx`.
    #[inline]
    pub fn get(&self, idx: usize) -> u64 {
        self.entries[idx]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Table footprint when each row occupies `row_bytes`.
    pub fn memory_bytes(&self, row_bytes: usize) -> usize {
        self.entries.len() * row_bytes
    }
}

pub fn build_pst(candidates: usize, s: usize) -> ParentSetTable {
    ParentSetTable { candidates, max_size: s, entries: BoundedSubsets::new(candidates, s).collect() }
}
