//! Bayesian Dirichlet local scores, the precomputed score cache, pairwise
//! priors, and graph/order scoring.
//!
//! All scores are log10. The local score of node `i` with parents `pi` is
//!
//! ```text
//! ls(i, pi) = |pi| log10(gamma)
//!           + sum_k [ lg(a_ik) - lg(a_ik + N_ik) + sum_j ( lg(N_ijk + a_ijk) - lg(a_ijk) ) ]
//! ```
//!
//! with `lg = log10 Gamma`. A prior matrix `R` adds `100 (R[i][m] - 0.5)^3`
//! for every parent `m` of `i`.

mod cache;
mod counts;

pub use cache::{build_score_cache, cache_bytes, ScoreCache, CACHE_HEADER_LEN, CACHE_MAGIC};
pub use counts::{count_statistics, CountTable};

use std::f64::consts::LN_10;

use statrs::function::gamma::ln_gamma;

use crate::combinatorics::{self, BoundedSubsets};
use crate::error::{Error, Result};
use crate::model::{AlphaScheme, Dag, Dataset, Order, ParentSet, PriorMatrix, RunConfig};
use crate::scalar::Score;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub gamma: f64,
    pub ess: f64,
    pub alpha: AlphaScheme,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { gamma: 0.1, ess: 1.0, alpha: AlphaScheme::Bdeu }
    }
}

impl From<&RunConfig> for Hyperparams {
    fn from(cfg: &RunConfig) -> Self {
        Hyperparams { gamma: cfg.gamma, ess: cfg.ess, alpha: cfg.alpha }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.alpha == AlphaScheme::Bdeu && !(self.ess > 0.0 && self.ess.is_finite()) {
            return Err(Error::Config(format!("Dirichlet hyperparameters must be positive, ess = {}", self.ess)));
        }
        Ok(())
    }

    /// `(alpha_ijk, alpha_ik)` for a node with `states` states and `configs`
    /// parent configurations.
    pub fn alphas(&self, configs: u64, states: usize) -> (f64, f64) {
        let a_ijk = match self.alpha {
            AlphaScheme::Bdeu => self.ess / (configs as f64 * states as f64),
            AlphaScheme::K2 => 1.0,
        };
        (a_ijk, a_ijk * states as f64)
    }

    /// 64-bit FNV-1a digest identifying these hyperparameters in cache files.
    pub fn digest(&self) -> u64 {
        let tag: u8 = match self.alpha {
            AlphaScheme::Bdeu => 1,
            AlphaScheme::K2 => 2,
        };
        let mut bytes = Vec::with_capacity(17);
        bytes.extend_from_slice(&self.gamma.to_bits().to_le_bytes());
        bytes.extend_from_slice(&self.ess.to_bits().to_le_bytes());
        bytes.push(tag);
        bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }
}

/// log10 local score of `node` with parent set `pset`.
pub fn local_score(data: &Dataset, node: usize, pset: ParentSet, hyper: &Hyperparams) -> Result<f64> {
    hyper.validate()?;
    let counts = count_statistics(data, node, pset);
    Ok(score_counts(&counts, pset.len(), hyper))
}

pub(crate) fn score_counts(counts: &CountTable, parents: usize, hyper: &Hyperparams) -> f64 {
    let (a_ijk, a_ik) = hyper.alphas(counts.configs(), counts.states());
    let lg_a_ijk = ln_gamma(a_ijk);
    let lg_a_ik = ln_gamma(a_ik);
    let mut ln_sum = 0.0;
    // unobserved configurations contribute exactly zero
    for (_, row) in counts.observed_rows() {
        let n_ik: u32 = row.iter().sum();
        ln_sum += lg_a_ik - ln_gamma(a_ik + n_ik as f64);
        for &n in row.iter().filter(|&&n| n > 0) {
            ln_sum += ln_gamma(n as f64 + a_ijk) - lg_a_ijk;
        }
    }
    parents as f64 * hyper.gamma.log10() + ln_sum / LN_10
}

/// Pairwise prior function `100 (r - 0.5)^3`.
pub fn ppf(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Probability(r));
    }
    let d = r - 0.5;
    Ok(100.0 * d * d * d)
}

/// Prior weights `PPF(i, m)` precomputed from a [`PriorMatrix`].
#[derive(Clone, Debug, PartialEq)]
pub struct Priors<S> {
    n: usize,
    weights: Option<Vec<S>>,
}

impl<S: Score> Priors<S> {
    pub fn neutral(n: usize) -> Self {
        Priors { n, weights: None }
    }

    pub fn from_matrix(r: &PriorMatrix) -> Self {
        let n = r.num_nodes();
        if r.is_neutral() {
            return Self::neutral(n);
        }
        let mut weights = vec![S::zero(); n * n];
        for i in 0..n {
            for m in 0..n {
                if i != m {
                    let w = ppf(r.get(i, m)).expect("PriorMatrix entries lie in [0, 1]");
                    weights[i * n + m] = S::from_f64_lossy(w);
                }
            }
        }
        Priors { n, weights: Some(weights) }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn is_neutral(&self) -> bool {
        self.weights.is_none()
    }

    /// `PPF(child, parent)`.
    #[inline]
    pub fn weight(&self, child: usize, parent: usize) -> S {
        match &self.weights {
            Some(w) => w[child * self.n + parent],
            None => S::zero(),
        }
    }
}

/// Cached local score plus the prior weight of every member of `pset`.
pub fn effective_local_score<S: Score>(node: usize, pset: ParentSet, cache: &ScoreCache<S>, priors: &Priors<S>) -> S {
    let ls = cache.lookup(node, pset);
    if priors.is_neutral() {
        return ls;
    }
    pset.iter().fold(ls, |acc, m| acc + priors.weight(node, m))
}

/// A graph together with its prior-weighted log10 score.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredGraph<S> {
    pub dag: Dag,
    pub total: S,
}

/// Sums effective local scores in node index order.
pub fn score_graph<S: Score>(dag: &Dag, cache: &ScoreCache<S>, priors: &Priors<S>) -> Result<ScoredGraph<S>> {
    let n = dag.num_nodes();
    if n != cache.num_nodes() {
        return Err(Error::NodeCountMismatch(n, cache.num_nodes()));
    }
    if let Some((node, p)) = dag.parent_sets().iter().enumerate().find(|(_, p)| p.len() > cache.max_parents()) {
        return Err(Error::ParentLimit { node, size: p.len(), limit: cache.max_parents() });
    }
    if !dag.is_acyclic() {
        return Err(Error::CyclicGraph);
    }
    let total = (0..n).fold(S::zero(), |acc, i| acc + effective_local_score(i, dag.parents(i), cache, priors));
    Ok(ScoredGraph { dag: dag.clone(), total })
}

/// Scores `order` by its best consistent graph: each node independently takes
/// the highest-scoring parent set drawn from its predecessors. Ties go to the
/// smallest global index, i.e. the larger and then lexicographically first
/// set.
pub fn score_order<S: Score>(order: &Order, cache: &ScoreCache<S>, priors: &Priors<S>) -> ScoredGraph<S> {
    let n = order.len();
    assert_eq!(n, cache.num_nodes(), "order and cache disagree on node count");
    let mut parents = Vec::with_capacity(n);
    let mut total = S::zero();
    for node in 0..n {
        let (pset, best) = best_parent_set(node, order, cache, priors);
        parents.push(pset);
        total = total + best;
    }
    let dag = Dag::from_parents(parents).expect("predecessor sets never contain the node");
    ScoredGraph { dag, total }
}

/// Best parent set of `node` among subsets of its predecessors of size at
/// most the cache's limit, visited directly in global index order.
pub fn best_parent_set<S: Score>(node: usize, order: &Order, cache: &ScoreCache<S>, priors: &Priors<S>) -> (ParentSet, S) {
    let scan = NodeScan::new(node, order, cache, priors);
    let mut best = S::neg_infinity();
    let mut best_local = 0u64;
    for local in BoundedSubsets::new(scan.candidates(), cache.max_parents()) {
        let v = scan.eval(local);
        if v > best {
            best = v;
            best_local = local;
        }
    }
    (scan.to_parent_set(best_local), best)
}

/// Same result as [`best_parent_set`], found by generating every bit vector
/// over the node's candidates and filtering out the ones that break the
/// order or the size limit. Exponential in the node count.
pub fn best_parent_set_exhaustive<S: Score>(
    node: usize,
    order: &Order,
    cache: &ScoreCache<S>,
    priors: &Priors<S>,
) -> (ParentSet, S) {
    let n = cache.num_nodes();
    let candidates: Vec<usize> = (0..n).filter(|&v| v != node).collect();
    let preds = order.predecessors(node);
    let mut best: Option<(ParentSet, S, usize)> = None;
    for vector in 0..1u64 << candidates.len() {
        let mut pset = ParentSet::EMPTY;
        let mut consistent = true;
        for (bit, &v) in candidates.iter().enumerate() {
            if vector >> bit & 1 == 1 {
                consistent &= preds.contains(v);
                pset.insert(v);
            }
        }
        if !consistent || pset.len() > cache.max_parents() {
            continue;
        }
        let score = effective_local_score(node, pset, cache, priors);
        let idx = cache.index_of(node, pset);
        let better = match best {
            None => true,
            Some((_, b, i)) => score > b || (score == b && idx < i),
        };
        if better {
            best = Some((pset, score, idx));
        }
    }
    let (pset, score, _) = best.expect("the empty set is always admissible");
    (pset, score)
}

/// Evaluates parent sets of one node drawn from its predecessors in an order.
///
/// Subsets are given as local masks over the predecessor list (ascending node
/// index); because that list maps monotonically onto the node's cache
/// candidates, local global-order indices and cache indices agree in order.
pub(crate) struct NodeScan<'a, S> {
    preds: Vec<usize>,
    /// `(n - 2) - candidate position` of each predecessor, for cache ranking.
    rev: Vec<usize>,
    weights: Vec<S>,
    cum: &'a [u64],
    scores: &'a [S],
}

impl<'a, S: Score> NodeScan<'a, S> {
    pub(crate) fn new(node: usize, order: &Order, cache: &'a ScoreCache<S>, priors: &Priors<S>) -> Self {
        let preds: Vec<usize> = order.predecessors(node).iter().collect();
        let last = cache.num_nodes().saturating_sub(2);
        let rev = preds.iter().map(|&v| last - if v < node { v } else { v - 1 }).collect();
        let weights = if priors.is_neutral() { Vec::new() } else { preds.iter().map(|&m| priors.weight(node, m)).collect() };
        NodeScan { preds, rev, weights, cum: cache.cumulative(), scores: cache.node_scores(node) }
    }

    pub(crate) fn candidates(&self) -> usize {
        self.preds.len()
    }

    #[inline]
    pub(crate) fn eval(&self, local: u64) -> S {
        let k = local.count_ones() as usize;
        let mut idx = self.cum[k] - 1;
        let mut left = k;
        let mut rest = local;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            idx -= combinatorics::binomial_raw(self.rev[j], left);
            left -= 1;
            rest &= rest - 1;
        }
        let ls = self.scores[idx as usize];
        if self.weights.is_empty() {
            return ls;
        }
        let mut acc = ls;
        let mut rest = local;
        while rest != 0 {
            acc = acc + self.weights[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        acc
    }

    pub(crate) fn to_parent_set(&self, local: u64) -> ParentSet {
        combinatorics::to_nodes(local, &self.preds)
    }
}

#[cfg(test)]
mod tests;
