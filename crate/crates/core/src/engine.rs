//! Data-parallel order scoring on a worker pool.
//!
//! Each node's parent-set index space `[0, S_node)` is split into contiguous
//! slices, every `(node, slice)` pair becomes one task, and each task reports
//! the best cell it saw. Cells are combined with a fixed tie rule (higher
//! score, then smaller index), so the result is independent of the worker
//! count and of the shape of the reduction.

use std::ops::Range;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::combinatorics::{bounded_subset_count, build_pst, next_subset, subset_at, ParentSetTable};
use crate::error::{Error, Result};
use crate::model::{Dag, IndexStrategy, Order, RunConfig};
use crate::scalar::Score;
use crate::scoring::{NodeScan, Priors, ScoreCache, ScoredGraph};

/// Half-open range of global parent-set indices of one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkSlice {
    pub node: usize,
    pub lo: u64,
    pub hi: u64,
}

/// Best score seen by one task and the global index that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArgmaxCell<S> {
    pub score: S,
    pub idx: Option<u64>,
}

impl<S: Score> ArgmaxCell<S> {
    /// Cell of a task that saw no work.
    pub fn identity() -> Self {
        ArgmaxCell { score: S::neg_infinity(), idx: None }
    }

    pub fn new(score: S, idx: u64) -> Self {
        ArgmaxCell { score, idx: Some(idx) }
    }

    pub fn is_identity(&self) -> bool {
        self.idx.is_none()
    }

    /// Associative, commutative merge: higher score wins, equal scores go to
    /// the smaller index, identity cells never win.
    #[inline]
    pub fn combine(self, other: Self) -> Self {
        match (self.idx, other.idx) {
            (None, _) => other,
            (_, None) => self,
            (Some(a), Some(b)) => {
                if self.score > other.score || (self.score == other.score && a < b) {
                    self
                } else {
                    other
                }
            }
        }
    }
}

/// Splits `[0, total)` into `workers` ranges, range `i` starting at
/// `floor(i * total / workers)`. Ranges may be empty when `total < workers`.
pub fn partition(total: u64, workers: usize) -> Vec<Range<u64>> {
    assert!(workers >= 1, "at least one worker");
    let bound = |i: usize| ((i as u128 * total as u128) / workers as u128) as u64;
    (0..workers).map(|i| bound(i)..bound(i + 1)).collect()
}

/// Tree reduction halving the live cells each round, as on a shared-memory
/// device: cell `j` is merged with cell `j + half`.
pub fn argmax_reduce<S: Score>(cells: &[ArgmaxCell<S>]) -> Result<ArgmaxCell<S>> {
    let mut live: Vec<ArgmaxCell<S>> = cells.to_vec();
    while live.len() > 1 {
        let half = live.len().div_ceil(2);
        for j in 0..live.len() - half {
            live[j] = live[j].combine(live[j + half]);
        }
        live.truncate(half);
    }
    match live.first() {
        Some(cell) if !cell.is_identity() => Ok(*cell),
        _ => Err(Error::EmptyWork),
    }
}

/// Scans one slice of `slice.node`'s predecessor parent sets under `order`.
pub fn scan_slice<S: Score>(
    slice: &WorkSlice,
    order: &Order,
    cache: &ScoreCache<S>,
    priors: &Priors<S>,
    strategy: IndexStrategy,
) -> ArgmaxCell<S> {
    let scan = NodeScan::new(slice.node, order, cache, priors);
    let s = cache.max_parents();
    match strategy {
        IndexStrategy::Pst => scan_range(&scan, slice.lo..slice.hi, s, Some(&build_pst(scan.candidates(), s))),
        IndexStrategy::Unrank => scan_range(&scan, slice.lo..slice.hi, s, None),
    }
}

#[inline]
fn scan_range<S: Score>(scan: &NodeScan<'_, S>, range: Range<u64>, s: usize, table: Option<&ParentSetTable>) -> ArgmaxCell<S> {
    let mut best = ArgmaxCell::identity();
    if range.is_empty() {
        return best;
    }
    match table {
        Some(table) => {
            for (idx, &local) in table.entries()[range.start as usize..range.end as usize].iter().enumerate() {
                let v = scan.eval(local);
                if best.is_identity() || v > best.score {
                    best = ArgmaxCell::new(v, range.start + idx as u64);
                }
            }
        }
        None => {
            let p = scan.candidates();
            let mut local = subset_at(range.start, p, s).expect("slice lies inside the node's index space");
            for idx in range {
                let v = scan.eval(local);
                if best.is_identity() || v > best.score {
                    best = ArgmaxCell::new(v, idx);
                }
                local = next_subset(local, p).unwrap_or(0);
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub workers: usize,
    /// Slices per node; defaults to the worker count.
    pub tasks_per_node: Option<usize>,
    pub strategy: IndexStrategy,
}

impl From<&RunConfig> for EngineConfig {
    fn from(cfg: &RunConfig) -> Self {
        EngineConfig { workers: cfg.workers, tasks_per_node: cfg.tasks_per_node, strategy: cfg.index_strategy }
    }
}

/// Order scorer backed by a fixed-size worker pool.
pub struct ParallelEngine<'a, S> {
    cache: &'a ScoreCache<S>,
    priors: &'a Priors<S>,
    pool: ThreadPool,
    tasks_per_node: usize,
    /// Parent set tables indexed by predecessor count; empty when unranking.
    tables: Vec<ParentSetTable>,
}

impl<'a, S: Score> ParallelEngine<'a, S> {
    pub fn new(cache: &'a ScoreCache<S>, priors: &'a Priors<S>, config: EngineConfig) -> Result<Self> {
        if config.workers == 0 || config.tasks_per_node == Some(0) {
            return Err(Error::Config("workers and tasks per node must be at least 1".into()));
        }
        if priors.num_nodes() != cache.num_nodes() {
            return Err(Error::NodeCountMismatch(priors.num_nodes(), cache.num_nodes()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        let s = cache.max_parents();
        let tables = match config.strategy {
            IndexStrategy::Pst => (0..cache.num_nodes()).map(|p| build_pst(p, s)).collect(),
            IndexStrategy::Unrank => Vec::new(),
        };
        Ok(ParallelEngine {
            cache,
            priors,
            pool,
            tasks_per_node: config.tasks_per_node.unwrap_or(config.workers),
            tables,
        })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Runs `f` inside this engine's pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Every task of one order, grouped by node in ascending node order.
    pub fn slices(&self, order: &Order) -> Vec<WorkSlice> {
        let s = self.cache.max_parents();
        (0..order.len())
            .flat_map(|node| {
                let total = bounded_subset_count(order.position(node), s);
                partition(total, self.tasks_per_node).into_iter().map(move |r| WorkSlice { node, lo: r.start, hi: r.end })
            })
            .collect()
    }

    /// Identical, bit for bit, to [`crate::scoring::score_order`].
    pub fn score_order(&self, order: &Order) -> ScoredGraph<S> {
        let n = order.len();
        assert_eq!(n, self.cache.num_nodes(), "order and cache disagree on node count");
        let s = self.cache.max_parents();
        let scans: Vec<NodeScan<'_, S>> = (0..n).map(|i| NodeScan::new(i, order, self.cache, self.priors)).collect();
        let slices = self.slices(order);
        let cells: Vec<ArgmaxCell<S>> = self.pool.install(|| {
            slices
                .par_iter()
                .map(|sl| {
                    let scan = &scans[sl.node];
                    scan_range(scan, sl.lo..sl.hi, s, self.tables.get(scan.candidates()))
                })
                .collect()
        });

        let mut parents = Vec::with_capacity(n);
        let mut total = S::zero();
        for (node, node_cells) in cells.chunks(self.tasks_per_node).enumerate() {
            let best = argmax_reduce(node_cells).expect("every node has at least the empty parent set");
            let idx = best.idx.expect("non-identity cell");
            let scan = &scans[node];
            let local = match self.tables.get(scan.candidates()) {
                Some(t) => t.get(idx as usize),
                None => subset_at(idx, scan.candidates(), s).expect("winning index is in range"),
            };
            parents.push(scan.to_parent_set(local));
            total = total + best.score;
        }
        let dag = Dag::from_parents(parents).expect("predecessor sets never contain the node");
        ScoredGraph { dag, total }
    }
}

/// One-shot parallel scoring; builds a throwaway engine.
pub fn parallel_score_order<S: Score>(
    order: &Order,
    cache: &ScoreCache<S>,
    priors: &Priors<S>,
    workers: usize,
) -> Result<ScoredGraph<S>> {
    let engine = ParallelEngine::new(cache, priors, EngineConfig { workers, tasks_per_node: None, strategy: IndexStrategy::Pst })?;
    Ok(engine.score_order(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, ParentSet};
    use crate::scoring::{build_score_cache, score_order, Hyperparams};

    fn cells(values: &[f64]) -> Vec<ArgmaxCell<f64>> {
        values.iter().enumerate().map(|(i, &v)| ArgmaxCell::new(v, i as u64)).collect()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition(57, 1), vec![0..57]);
        assert_eq!(partition(57, 4), vec![0..14, 14..28, 28..42, 42..57]);
        let tiny = partition(3, 8);
        assert_eq!(tiny.len(), 8);
        assert_eq!(tiny.iter().filter(|r| r.is_empty()).count(), 5);
        assert_eq!(tiny.iter().map(|r| r.end - r.start).sum::<u64>(), 3);
    }

    #[test]
    fn partition_covers_evenly() {
        for total in 0..200u64 {
            for workers in 1..20 {
                let parts = partition(total, workers);
                assert_eq!(parts[0].start, 0);
                assert_eq!(parts.last().unwrap().end, total);
                assert!(parts.windows(2).all(|w| w[0].end == w[1].start));
                let sizes: Vec<u64> = parts.iter().map(|r| r.end - r.start).collect();
                assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn shared_memory_example() {
        // thread 3 holds -1; thread 0 (-3) beats thread 8 in round one and
        // thread 14 (-2) is carried through entry 6 in round two
        let values = [-3.0, -5.0, -9.0, -1.0, -7.0, -6.0, -4.0, -8.0, -10.0, -11.0, -12.0, -13.0, -14.0, -15.0, -2.0, -16.0];
        let best = argmax_reduce(&cells(&values)).unwrap();
        assert_eq!(best.score, -1.0);
        assert_eq!(best.idx, Some(3));
    }

    #[test]
    fn reduction_edge_cases() {
        let one = ArgmaxCell::new(2.5, 9);
        assert_eq!(argmax_reduce(&[one]).unwrap(), one);
        let tie = [ArgmaxCell::new(1.0, 7), ArgmaxCell::new(1.0, 2)];
        assert_eq!(argmax_reduce(&tie).unwrap().idx, Some(2));
        assert_eq!(tie[0].combine(tie[1]), tie[1].combine(tie[0]));
        let mixed = [ArgmaxCell::identity(), ArgmaxCell::new(-1e300, 4), ArgmaxCell::identity()];
        assert_eq!(argmax_reduce(&mixed).unwrap().idx, Some(4));
        assert!(matches!(argmax_reduce::<f64>(&[ArgmaxCell::identity(); 3]), Err(Error::EmptyWork)));
        assert!(matches!(argmax_reduce::<f64>(&[]), Err(Error::EmptyWork)));
    }

    fn cache5() -> ScoreCache<f64> {
        let rows: Vec<Vec<u8>> = (0..60u32)
            .map(|r| {
                let a = (r % 2) as u8;
                let b = ((r / 2) % 3) as u8;
                vec![a, b, a ^ (b & 1), ((r * 7) % 2) as u8, (a + b) % 2]
            })
            .collect();
        let d = Dataset::from_rows(vec![2, 3, 2, 2, 2], &rows).unwrap();
        build_score_cache(&d, &Hyperparams::default(), 3, u128::MAX).unwrap()
    }

    #[test]
    fn slices_scan_like_the_sequential_loop() {
        let cache = cache5();
        let priors = Priors::neutral(5);
        let order = Order::new(vec![3, 1, 4, 0, 2]).unwrap();
        let reference = score_order(&order, &cache, &priors);
        for strategy in [IndexStrategy::Pst, IndexStrategy::Unrank] {
            for node in 0..5 {
                let total = bounded_subset_count(order.position(node), 3);
                let full = scan_slice(&WorkSlice { node, lo: 0, hi: total }, &order, &cache, &priors, strategy);
                let expected = crate::scoring::effective_local_score(node, reference.dag.parents(node), &cache, &priors);
                assert_eq!(full.score, expected);
                let empty_idx = total - 1;
                let only_empty = scan_slice(&WorkSlice { node, lo: empty_idx, hi: total }, &order, &cache, &priors, strategy);
                assert_eq!(only_empty.score, cache.lookup(node, ParentSet::EMPTY));
                let none = scan_slice(&WorkSlice { node, lo: 1, hi: 1 }, &order, &cache, &priors, strategy);
                assert!(none.is_identity());
            }
        }
    }

    #[test]
    fn engine_matches_sequential() {
        let cache = cache5();
        let priors = Priors::neutral(5);
        for perm in [vec![0, 1, 2, 3, 4], vec![4, 3, 2, 1, 0], vec![2, 0, 4, 1, 3]] {
            let order = Order::new(perm).unwrap();
            let reference = score_order(&order, &cache, &priors);
            for workers in [1, 2, 3] {
                for tasks in [None, Some(1), Some(7)] {
                    for strategy in [IndexStrategy::Pst, IndexStrategy::Unrank] {
                        let engine = ParallelEngine::new(&cache, &priors, EngineConfig { workers, tasks_per_node: tasks, strategy }).unwrap();
                        let got = engine.score_order(&order);
                        assert_eq!(got.dag, reference.dag);
                        assert_eq!(got.total.to_bits(), reference.total.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn slices_cover_each_node_once() {
        let cache = cache5();
        let priors = Priors::neutral(5);
        let engine = ParallelEngine::new(&cache, &priors, EngineConfig { workers: 1, tasks_per_node: Some(4), strategy: IndexStrategy::Pst }).unwrap();
        let order = Order::new(vec![1, 0, 4, 2, 3]).unwrap();
        let slices = engine.slices(&order);
        for node in 0..5 {
            let mine: Vec<_> = slices.iter().filter(|s| s.node == node).collect();
            assert_eq!(mine.len(), 4);
            assert_eq!(mine[0].lo, 0);
            assert_eq!(mine.last().unwrap().hi, bounded_subset_count(order.position(node), 3));
            assert!(mine.windows(2).all(|w| w[0].hi == w[1].lo));
        }
    }

    #[test]
    fn bad_engine_config() {
        let cache = cache5();
        let priors = Priors::neutral(5);
        let cfg = EngineConfig { workers: 0, tasks_per_node: None, strategy: IndexStrategy::Pst };
        assert!(ParallelEngine::new(&cache, &priors, cfg).is_err());
        let wrong = Priors::neutral(4);
        let cfg = EngineConfig { workers: 1, tasks_per_node: None, strategy: IndexStrategy::Pst };
        assert!(ParallelEngine::new(&cache, &wrong, cfg).is_err());
    }
}
