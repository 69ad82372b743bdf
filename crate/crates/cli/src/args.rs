use std::path::PathBuf;

use bnlearn::model::{AlphaScheme, IndexStrategy};
use bnlearn::RunConfig;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bnlearn", version, about = "Order-space MCMC structure learning for discrete Bayesian networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random ground-truth network and a dataset from it.
    Generate(GenerateArgs),
    /// Learn a structure from a dataset.
    Learn(LearnArgs),
    /// Compare a learned graph with the truth, or run the prior sweep.
    Eval(EvalArgs),
    /// Time order scoring and parent-set enumeration.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..=64))]
    pub nodes: u16,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// In-degree cap of the generated graph.
    #[arg(long, default_value_t = 4)]
    pub max_parents: usize,
    #[arg(long, default_value_t = 0.2)]
    pub edge_prob: f64,
    /// States per variable.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..))]
    pub states: u8,
    /// Symmetric Dirichlet concentration for the CPT rows.
    #[arg(long, default_value_t = 1.0)]
    pub concentration: f64,
    /// Also write `data_noisy.csv` with each cell flipped with this probability.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlphaArg {
    Bdeu,
    K2,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("strategy").args(["pst", "unrank"])))]
pub struct RunArgs {
    #[arg(long, default_value_t = 4)]
    pub max_parents: usize,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    /// Per-parent structure penalty.
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    /// Equivalent sample size.
    #[arg(long, default_value_t = 1.0)]
    pub ess: f64,
    #[arg(long, value_enum, default_value_t = AlphaArg::Bdeu)]
    pub alpha: AlphaArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Slices per node; defaults to the worker count.
    #[arg(long)]
    pub tasks_per_node: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub track_top: usize,
    /// Only record graphs of accepted orders.
    #[arg(long)]
    pub strict_paper_tracker: bool,
    /// Look parent sets up in precomputed tables (default).
    #[arg(long)]
    pub pst: bool,
    /// Unrank parent sets on the fly instead of using tables.
    #[arg(long)]
    pub unrank: bool,
    /// Score cache budget in bytes; accepts K, M and G suffixes.
    #[arg(long, default_value = "4G", value_parser = parse_bytes)]
    pub memory_cap: u128,
}

impl RunArgs {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            max_parents: self.max_parents,
            gamma: self.gamma,
            ess: self.ess,
            alpha: match self.alpha {
                AlphaArg::Bdeu => AlphaScheme::Bdeu,
                AlphaArg::K2 => AlphaScheme::K2,
            },
            iterations: self.iterations,
            seed: self.seed,
            workers: self.workers,
            tasks_per_node: self.tasks_per_node,
            track_top: self.track_top,
            strict_paper_tracker: self.strict_paper_tracker,
            index_strategy: if self.unrank { IndexStrategy::Unrank } else { IndexStrategy::Pst },
            memory_cap: self.memory_cap,
        }
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Prior matrix CSV (n x n); all 0.5 when absent.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Directory for summary.json, trace.csv and best.edges.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth edge list.
    #[arg(long)]
    pub truth: PathBuf,
    /// Learned edge list.
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    pub learned: Option<PathBuf>,
    /// Learn a baseline from `--data`, then rerun under each standard prior
    /// configuration and report one row per configuration.
    #[arg(long, requires = "data")]
    pub sweep: bool,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Metrics CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Node counts for order-scoring timings.
    #[arg(long, value_delimiter = ',', default_values_t = [15usize, 20, 30])]
    pub nodes: Vec<usize>,
    /// Worker counts for order-scoring timings.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    pub workers: Vec<usize>,
    /// Orders timed per configuration.
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    /// Rows of synthetic data behind each score cache.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Candidate count for the bounded vs. full enumeration comparison.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u16).range(1..=30))]
    pub enum_candidates: u16,
    #[arg(long, default_value_t = 4)]
    pub max_parents: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timing CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_bytes(s: &str) -> Result<u128, String> {
    let s = s.trim();
    let (digits, scale) = match s.char_indices().last() {
        Some((i, c)) if c.is_ascii_alphabetic() => {
            let scale = match c.to_ascii_uppercase() {
                'K' => 1u128 << 10,
                'M' => 1 << 20,
                'G' => 1 << 30,
                'T' => 1 << 40,
                _ => return Err(format!("unknown size suffix {c:?}")),
            };
            (&s[..i], scale)
        }
        _ => (s, 1),
    };
    let value: u128 = digits.parse().map_err(|_| format!("bad byte count {s:?}"))?;
    value.checked_mul(scale).ok_or_else(|| format!("byte count {s:?} overflows"))
}
