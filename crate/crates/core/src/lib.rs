//! Structure learning for discrete Bayesian networks by sampling topological
//! orders with Metropolis–Hastings.
//!
//! Every order is scored by the best graph consistent with it: for each node
//! the highest-scoring parent set drawn from its predecessors (bounded in size)
//! is selected, so the chain yields a concrete graph at every step. Local
//! scores are log10 Bayesian Dirichlet marginal likelihoods, precomputed once
//! into a dense [`ScoreCache`] and optionally shifted by pairwise edge priors.
//!
//! The score arithmetic is generic over the floating point type (see
//! [`Score`]); `f64` is the default used by the aliases below and by the CLI.

pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod evalgen;
pub mod io;
pub mod model;
pub mod sampler;
mod scalar;
pub mod scoring;

pub use error::{Error, Result};
pub use model::{Dag, Dataset, Order, ParentSet, PriorMatrix, RunConfig};
pub use scalar::Score;
pub use scoring::{ScoreCache, ScoredGraph};

/// Score cache holding double precision local scores.
pub type ScoreCache64 = scoring::ScoreCache<f64>;
/// Score cache holding single precision local scores (half the memory).
pub type ScoreCache32 = scoring::ScoreCache<f32>;
pub type ScoredGraph64 = scoring::ScoredGraph<f64>;
pub type ScoredGraph32 = scoring::ScoredGraph<f32>;
pub type Priors64 = scoring::Priors<f64>;
pub type Tracker64 = sampler::BestGraphTracker<f64>;
pub type ChainOutput64 = sampler::ChainOutput<f64>;
