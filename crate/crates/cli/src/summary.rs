use bnlearn::model::{AlphaScheme, IndexStrategy};
use bnlearn::sampler::ChainOutput;
use bnlearn::RunConfig;
use serde::{Deserialize, Serialize};

/// Every setting that influences a run, written back so it can be repeated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub data: String,
    pub priors: Option<String>,
    pub max_parents: usize,
    pub iterations: usize,
    pub gamma: f64,
    pub ess: f64,
    pub alpha: String,
    pub seed: u64,
    pub workers: usize,
    pub tasks_per_node: Option<usize>,
    pub track_top: usize,
    pub strict_paper_tracker: bool,
    pub index_strategy: String,
    pub memory_cap: u128,
}

impl ConfigEcho {
    pub fn new(cfg: &RunConfig, data: String, priors: Option<String>) -> Self {
        ConfigEcho {
            data,
            priors,
            max_parents: cfg.max_parents,
            iterations: cfg.iterations,
            gamma: cfg.gamma,
            ess: cfg.ess,
            alpha: match cfg.alpha {
                AlphaScheme::Bdeu => "bdeu".into(),
                AlphaScheme::K2 => "k2".into(),
            },
            seed: cfg.seed,
            workers: cfg.workers,
            tasks_per_node: cfg.tasks_per_node,
            track_top: cfg.track_top,
            strict_paper_tracker: cfg.strict_paper_tracker,
            index_strategy: match cfg.index_strategy {
                IndexStrategy::Pst => "pst".into(),
                IndexStrategy::Unrank => "unrank".into(),
            },
            memory_cap: cfg.memory_cap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub preprocess_secs: f64,
    pub sampling_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedGraph {
    pub score: f64,
    pub edges: Vec<(usize, usize)>,
}

/// Outcome of `learn`. Everything except `timings` is a pure function of
/// the echoed configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ConfigEcho,
    pub nodes: usize,
    pub rows: usize,
    pub seed: u64,
    pub iterations: usize,
    pub best_score: f64,
    pub best_edges: Vec<(usize, usize)>,
    pub acceptance_rate: f64,
    pub top_graphs: Vec<RankedGraph>,
    pub timings: Timings,
}

impl RunSummary {
    pub fn new(config: ConfigEcho, rows: usize, out: &ChainOutput<f64>) -> Self {
        let best = out.best();
        RunSummary {
            seed: config.seed,
            iterations: out.trace.len(),
            nodes: best.dag.num_nodes(),
            rows,
            best_score: best.total,
            best_edges: best.dag.edges(),
            acceptance_rate: out.acceptance_rate(),
            top_graphs: out.tracker.entries().iter().map(|g| RankedGraph { score: g.total, edges: g.dag.edges() }).collect(),
            timings: Timings {
                preprocess_secs: out.timings.preprocess.as_secs_f64(),
                sampling_secs: out.timings.sampling.as_secs_f64(),
            },
            config,
        }
    }
}
