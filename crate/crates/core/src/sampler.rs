//! The order-space Metropolis–Hastings chain and best-graph tracking.
//!
//! Randomness comes from ChaCha8 streams derived from one 64-bit seed (see
//! [`seeded_rng`]). The chain owns stream [`STREAM_CHAIN`]; order scoring
//! consumes no randomness, so outputs do not depend on the worker count.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;

use crate::engine::{EngineConfig, ParallelEngine};
use crate::error::{Error, Result};
use crate::model::{Dataset, Order, PriorMatrix, RunConfig};
use crate::scalar::Score;
use crate::scoring::{build_score_cache, Hyperparams, Priors, ScoreCache, ScoredGraph};

pub const STREAM_CHAIN: u64 = 0;
pub const STREAM_STRUCTURE: u64 = 1;
pub const STREAM_PARAMETERS: u64 = 2;
pub const STREAM_SAMPLES: u64 = 3;
pub const STREAM_NOISE: u64 = 4;
pub const STREAM_PRIORS: u64 = 5;

/// ChaCha8 generator for `(seed, stream)`; distinct streams never overlap.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exchanges two distinct positions chosen uniformly among all pairs.
pub fn propose_swap<R: Rng + ?Sized>(order: &Order, rng: &mut R) -> Result<Order> {
    let n = order.len();
    if n < 2 {
        return Err(Error::Proposal(n));
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    Ok(order.swapped(a, b))
}

/// Metropolis–Hastings rule in log10 space: accept iff `log10(u) < new - old`
/// for `u` uniform on `(0, 1)`. One uniform is drawn on every call.
pub fn mh_accept<S: Score, R: Rng + ?Sized>(old: S, new: S, rng: &mut R) -> bool {
    let u: f64 = rng.sample(Open01);
    S::from_f64_lossy(u.log10()) < new - old
}

/// The `capacity` best distinct graphs seen so far, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct BestGraphTracker<S> {
    capacity: usize,
    entries: Vec<ScoredGraph<S>>,
}

impl<S: Score> BestGraphTracker<S> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "tracker capacity must be positive");
        BestGraphTracker { capacity, entries: Vec::with_capacity(capacity + 1) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&ScoredGraph<S>> {
        self.entries.first()
    }

    pub fn entries(&self) -> &[ScoredGraph<S>] {
        &self.entries
    }

    /// True if `score` would enter the tracker (ignoring duplicates).
    pub fn admits(&self, score: S) -> bool {
        self.entries.len() < self.capacity || self.entries.last().is_some_and(|last| score > last.total)
    }

    /// Inserts `graph` unless it is already tracked or scores no better than
    /// the current minimum of a full tracker. Equal scores keep the earlier
    /// entry first. Returns whether the tracker changed.
    pub fn update(&mut self, graph: ScoredGraph<S>) -> bool {
        if !self.admits(graph.total) || self.entries.iter().any(|e| e.dag == graph.dag) {
            return false;
        }
        let at = self.entries.partition_point(|e| e.total >= graph.total);
        self.entries.insert(at, graph);
        self.entries.truncate(self.capacity);
        true
    }
}

/// One chain step as written to the trace CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow<S> {
    /// 1-based iteration number.
    pub iteration: usize,
    pub proposed_score: S,
    pub accepted: bool,
    /// Score of the chain's order after this step.
    pub current_score: S,
    /// Best tracked graph score after this step.
    pub best_score: S,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub preprocess: Duration,
    pub sampling: Duration,
}

#[derive(Clone, Debug)]
pub struct ChainOutput<S> {
    pub tracker: BestGraphTracker<S>,
    pub trace: Vec<TraceRow<S>>,
    pub accepted: usize,
    pub final_order: Order,
    pub timings: Timings,
}

impl<S: Score> ChainOutput<S> {
    pub fn best(&self) -> &ScoredGraph<S> {
        self.tracker.best().expect("a chain records at least one graph")
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.trace.len() as f64
    }
}

/// Mutable state of the chain.
#[derive(Clone, Debug)]
pub struct ChainState<S> {
    pub order: Order,
    pub score: S,
    pub iteration: usize,
    rng: ChaCha8Rng,
}

impl<S: Score> ChainState<S> {
    /// Starts from a uniformly random permutation drawn from the chain stream.
    pub fn start(n: usize, seed: u64, engine: &ParallelEngine<'_, S>) -> (Self, ScoredGraph<S>) {
        let mut rng = seeded_rng(seed, STREAM_CHAIN);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let order = Order::new(perm).expect("shuffled identity is a permutation");
        let scored = engine.score_order(&order);
        (ChainState { order, score: scored.total, iteration: 1, rng }, scored)
    }

    /// Proposes, scores, and accepts or rejects one swap. Returns the scored
    /// proposal and whether it was accepted.
    pub fn step(&mut self, engine: &ParallelEngine<'_, S>) -> (ScoredGraph<S>, bool) {
        self.iteration += 1;
        let proposal = if self.order.len() < 2 {
            self.order.clone()
        } else {
            propose_swap(&self.order, &mut self.rng).expect("at least two nodes")
        };
        let scored = engine.score_order(&proposal);
        let accepted = mh_accept(self.score, scored.total, &mut self.rng);
        if accepted {
            self.order = proposal;
            self.score = scored.total;
        }
        (scored, accepted)
    }
}

/// Runs the chain on a prebuilt cache.
pub fn run_chain<S: Score>(cache: &ScoreCache<S>, priors: &Priors<S>, config: &RunConfig) -> Result<ChainOutput<S>> {
    config.validate()?;
    if cache.max_parents() != config.max_parents {
        return Err(Error::Config(format!(
            "cache built for {} parents, config asks for {}",
            cache.max_parents(),
            config.max_parents
        )));
    }
    let started = Instant::now();
    let engine = ParallelEngine::new(cache, priors, EngineConfig::from(config))?;
    let mut tracker = BestGraphTracker::new(config.track_top);
    let mut trace = Vec::with_capacity(config.iterations);

    let (mut state, first) = ChainState::start(cache.num_nodes(), config.seed, &engine);
    trace.push(TraceRow {
        iteration: 1,
        proposed_score: first.total,
        accepted: true,
        current_score: state.score,
        best_score: first.total,
    });
    tracker.update(first);
    let mut accepted = 1;

    for _ in 1..config.iterations {
        let (scored, ok) = state.step(&engine);
        let proposed_score = scored.total;
        if ok {
            accepted += 1;
        }
        if ok || !config.strict_paper_tracker {
            tracker.update(scored);
        }
        #[cfg(debug_assertions)]
        if state.iteration % 100 == 0 {
            let fresh = crate::scoring::score_order(&state.order, cache, priors);
            assert_eq!(fresh.total.to_f64_lossless().to_bits(), state.score.to_f64_lossless().to_bits(), "stale chain score");
        }
        trace.push(TraceRow {
            iteration: state.iteration,
            proposed_score,
            accepted: ok,
            current_score: state.score,
            best_score: tracker.best().expect("non-empty").total,
        });
    }

    Ok(ChainOutput {
        tracker,
        trace,
        accepted,
        final_order: state.order,
        timings: Timings { preprocess: Duration::ZERO, sampling: started.elapsed() },
    })
}

/// Builds the score cache and runs the chain, all inside a pool of
/// `config.workers` threads.
pub fn run_mcmc<S: Score>(data: &Dataset, config: &RunConfig, priors: &PriorMatrix) -> Result<ChainOutput<S>> {
    config.validate()?;
    if priors.num_nodes() != data.num_nodes() {
        return Err(Error::NodeCountMismatch(priors.num_nodes(), data.num_nodes()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let started = Instant::now();
    let cache: ScoreCache<S> =
        pool.install(|| build_score_cache(data, &Hyperparams::from(config), config.max_parents, config.memory_cap))?;
    let preprocess = started.elapsed();
    let mut out = run_chain(&cache, &Priors::from_matrix(priors), config)?;
    out.timings.preprocess = preprocess;
    Ok(out)
}
