use std::io::{Read, Write};

use rayon::prelude::*;

use super::{count_statistics, score_counts, Hyperparams};
use crate::combinatorics::{binomial, bounded_subset_count, global_index, to_nodes, BoundedSubsets};
use crate::error::{Error, Result};
use crate::model::{Dataset, ParentSet, MAX_NODES, MAX_PARENTS};
use crate::scalar::Score;

/// First four bytes of a persisted cache.
pub const CACHE_MAGIC: [u8; 4] = *b"BNSC";
pub const CACHE_HEADER_LEN: usize = 16;

/// Local scores of every node for every parent set of size at most `s`.
///
/// Node `i`'s scores form one dense block addressed by the global index of
/// the parent set among the node's candidates (all other nodes, ascending).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreCache<S> {
    n: usize,
    s: usize,
    digest: u64,
    per_node: usize,
    /// `cumulative[k]` = number of candidate subsets with size in `k..=s`.
    cumulative: Vec<u64>,
    scores: Vec<S>,
}

/// Bytes needed for a cache over `n` nodes with parent limit `s`.
pub fn cache_bytes<S>(n: usize, s: usize) -> u128 {
    let per_node = bounded_subset_count(n.saturating_sub(1), s) as u128;
    n as u128 * per_node * std::mem::size_of::<S>() as u128
}

/// Scores every admissible `(node, parent set)` pair. Nodes are processed in
/// parallel on the current rayon pool; the result does not depend on it.
pub fn build_score_cache<S: Score>(data: &Dataset, hyper: &Hyperparams, s: usize, memory_cap: u128) -> Result<ScoreCache<S>> {
    hyper.validate()?;
    let n = data.num_nodes();
    check_shape(n, s)?;
    let needed = cache_bytes::<S>(n, s);
    if needed > memory_cap {
        return Err(Error::Capacity { needed, cap: memory_cap });
    }
    let blocks: Vec<Vec<S>> = (0..n)
        .into_par_iter()
        .map(|node| {
            let candidates: Vec<usize> = (0..n).filter(|&v| v != node).collect();
            BoundedSubsets::new(candidates.len(), s)
                .map(|local| {
                    let pset = to_nodes(local, &candidates);
                    let counts = count_statistics(data, node, pset);
                    S::from_f64_lossy(score_counts(&counts, pset.len(), hyper))
                })
                .collect()
        })
        .collect();
    let mut cache = ScoreCache::with_layout(n, s, hyper.digest());
    cache.scores = blocks.into_iter().flatten().collect();
    Ok(cache)
}

fn check_shape(n: usize, s: usize) -> Result<()> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::Config(format!("node count {n} outside 1..={MAX_NODES}")));
    }
    if s > MAX_PARENTS {
        return Err(Error::Config(format!("max parents {s} exceeds {MAX_PARENTS}")));
    }
    Ok(())
}

impl<S: Score> ScoreCache<S> {
    fn with_layout(n: usize, s: usize, digest: u64) -> Self {
        let candidates = n - 1;
        let top = s.min(candidates);
        let cumulative = (0..=s).map(|k| (k..=top).map(|j| binomial(candidates, j)).sum()).collect();
        let per_node = bounded_subset_count(candidates, s) as usize;
        ScoreCache { n, s, digest, per_node, cumulative, scores: Vec::new() }
    }

    /// A cache filled from `f(node, global_index)`; used for synthetic
    /// benchmarks and tests that need no data.
    pub fn from_fn(n: usize, s: usize, mut f: impl FnMut(usize, usize) -> S) -> Result<Self> {
        check_shape(n, s)?;
        let mut cache = Self::with_layout(n, s, 0);
        let per_node = cache.per_node;
        cache.scores = (0..n).flat_map(|i| (0..per_node).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Ok(cache)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn max_parents(&self) -> usize {
        self.s
    }

    /// Digest of the hyperparameters the scores were computed with.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    pub fn entries_per_node(&self) -> usize {
        self.per_node
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn memory_bytes(&self) -> usize {
        self.scores.len() * std::mem::size_of::<S>()
    }

    pub(crate) fn cumulative(&self) -> &[u64] {
        &self.cumulative
    }

    pub fn node_scores(&self, node: usize) -> &[S] {
        &self.scores[node * self.per_node..(node + 1) * self.per_node]
    }

    /// Global index of `pset` within `node`'s block.
    pub fn index_of(&self, node: usize, pset: ParentSet) -> usize {
        assert!(!pset.contains(node), "node {node} cannot be its own parent");
        let mask = pset.mask();
        let low = (1u64 << node) - 1;
        let local = (mask & low) | ((mask >> 1) & !low);
        global_index(local, self.n - 1, self.s) as usize
    }

    pub fn lookup(&self, node: usize, pset: ParentSet) -> S {
        self.node_scores(node)[self.index_of(node, pset)]
    }

    /// Writes the header followed by every score as a little-endian `f64`,
    /// node by node in global index order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; CACHE_HEADER_LEN];
        header[..4].copy_from_slice(&CACHE_MAGIC);
        header[4..6].copy_from_slice(&(self.n as u16).to_le_bytes());
        header[6..8].copy_from_slice(&(self.s as u16).to_le_bytes());
        header[8..16].copy_from_slice(&self.digest.to_le_bytes());
        w.write_all(&header)?;
        for &v in &self.scores {
            w.write_all(&v.to_f64_lossless().to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; CACHE_HEADER_LEN];
        r.read_exact(&mut header)?;
        if header[..4] != CACHE_MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let n = u16::from_le_bytes([header[4], header[5]]) as usize;
        let s = u16::from_le_bytes([header[6], header[7]]) as usize;
        let digest = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
        check_shape(n, s).map_err(|e| Error::CacheFormat(e.to_string()))?;
        let mut cache = Self::with_layout(n, s, digest);
        let total = n * cache.per_node;
        let mut buf = vec![0u8; total * 8];
        r.read_exact(&mut buf).map_err(|_| Error::CacheFormat(format!("expected {total} scores")))?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::CacheFormat("trailing bytes after scores".into()));
        }
        cache.scores = buf
            .chunks_exact(8)
            .map(|c| S::from_f64_lossy(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        Ok(cache)
    }
}
