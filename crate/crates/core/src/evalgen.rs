//! Synthetic ground truth, data generation, fault injection, and structure
//! recovery metrics.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::model::{Dag, Dataset, PriorMatrix, RunConfig};
use crate::sampler::{run_chain, seeded_rng, STREAM_PRIORS};
use crate::scalar::Score;
use crate::scoring::{Priors, ScoreCache};

/// Random DAG: nodes are visited in a random permutation and each earlier
/// node is admitted as a parent with probability `edge_prob`, up to
/// `max_parents` per node.
pub fn random_dag<R: Rng + ?Sized>(n: usize, max_parents: usize, edge_prob: f64, rng: &mut R) -> Dag {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for p in 1..n {
        let mut earlier = perm[..p].to_vec();
        earlier.shuffle(rng);
        let mut taken = 0;
        for from in earlier {
            if taken == max_parents {
                break;
            }
            if rng.random_bool(edge_prob) {
                edges.push((from, perm[p]));
                taken += 1;
            }
        }
    }
    Dag::from_edges(n, &edges).expect("edges follow the permutation")
}

/// A fully parameterized discrete Bayesian network.
///
/// `cpts[i]` holds one row of `cardinality(i)` probabilities per parent
/// configuration; configurations are mixed-radix over the parents in
/// ascending index order with the lowest-indexed parent least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthBn {
    dag: Dag,
    cardinalities: Vec<usize>,
    cpts: Vec<Vec<f64>>,
}

impl GroundTruthBn {
    pub fn new(dag: Dag, cardinalities: Vec<usize>, cpts: Vec<Vec<f64>>) -> Result<Self> {
        let n = dag.num_nodes();
        if cardinalities.len() != n || cpts.len() != n {
            return Err(Error::Graph("cardinalities and CPTs must cover every node".into()));
        }
        if !dag.is_acyclic() {
            return Err(Error::CyclicGraph);
        }
        for i in 0..n {
            let states = cardinalities[i];
            let configs = parent_configs(&dag, &cardinalities, i);
            if cpts[i].len() != configs * states {
                return Err(Error::Graph(format!("CPT of node {i} has {} entries, expected {}", cpts[i].len(), configs * states)));
            }
            for (k, row) in cpts[i].chunks(states).enumerate() {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Graph(format!("CPT row {k} of node {i} is not a distribution")));
                }
            }
        }
        Ok(GroundTruthBn { dag, cardinalities, cpts })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    /// Row of `node`'s CPT for parent configuration `config`.
    pub fn cpt_row(&self, node: usize, config: usize) -> &[f64] {
        let states = self.cardinalities[node];
        &self.cpts[node][config * states..(config + 1) * states]
    }

    pub fn num_configs(&self, node: usize) -> usize {
        parent_configs(&self.dag, &self.cardinalities, node)
    }

    /// Configuration index of `node`'s parents within a full assignment.
    pub fn config_of(&self, node: usize, states: &[u8]) -> usize {
        let mut key = 0;
        let mut stride = 1;
        for p in self.dag.parents(node).iter() {
            key += stride * states[p] as usize;
            stride *= self.cardinalities[p];
        }
        key
    }
}

fn parent_configs(dag: &Dag, cards: &[usize], node: usize) -> usize {
    dag.parents(node).iter().map(|p| cards[p]).product()
}

/// Parameterizes `dag` with CPT rows drawn from a symmetric Dirichlet.
pub fn random_bn<R: Rng + ?Sized>(dag: Dag, cardinalities: Vec<usize>, concentration: f64, rng: &mut R) -> Result<GroundTruthBn> {
    if concentration.is_nan() || concentration <= 0.0 {
        return Err(Error::Config(format!("Dirichlet concentration must be positive, got {concentration}")));
    }
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| Error::Config(e.to_string()))?;
    let cpts = (0..dag.num_nodes())
        .map(|i| {
            let states = cardinalities[i];
            let configs = parent_configs(&dag, &cardinalities, i);
            let mut table = Vec::with_capacity(configs * states);
            for _ in 0..configs {
                let mut row: Vec<f64> = (0..states).map(|_| gamma.sample(rng)).collect();
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    row.iter_mut().for_each(|p| *p /= sum);
                } else {
                    // every draw underflowed: degenerate to one state
                    row = (0..states).map(|j| (j == 0) as u8 as f64).collect();
                }
                table.extend(row);
            }
            table
        })
        .collect();
    GroundTruthBn::new(dag, cardinalities, cpts)
}

/// Draws `m` rows by ancestral sampling.
pub fn forward_sample<R: Rng + ?Sized>(bn: &GroundTruthBn, m: usize, rng: &mut R) -> Dataset {
    let n = bn.dag.num_nodes();
    let topo = bn.dag.topological_order().expect("ground truth is acyclic");
    let mut columns = vec![Vec::with_capacity(m); n];
    let mut states = vec![0u8; n];
    for _ in 0..m {
        for &node in topo.as_slice() {
            let row = bn.cpt_row(node, bn.config_of(node, &states));
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = row.len() - 1;
            for (j, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = j;
                    break;
                }
            }
            states[node] = pick as u8;
        }
        for (col, &v) in columns.iter_mut().zip(&states) {
            col.push(v);
        }
    }
    let names = (0..n).map(|i| format!("v{i}")).collect();
    Dataset::from_columns(names, bn.cardinalities.clone(), columns)
}

/// Flips each cell independently with probability `p`. Binary cells flip
/// `0 <-> 1`; wider variables move to a uniformly chosen different state.
pub fn inject_noise<R: Rng + ?Sized>(data: &Dataset, p: f64, rng: &mut R) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability(p));
    }
    let mut rows: Vec<Vec<u8>> = data.rows().collect();
    for row in &mut rows {
        for (i, v) in row.iter_mut().enumerate() {
            if rng.random_bool(p) {
                let card = data.cardinality(i) as u8;
                let mut other = rng.random_range(0..card - 1);
                if other >= *v {
                    other += 1;
                }
                *v = other;
            }
        }
    }
    Dataset::with_names(data.names().to_vec(), data.cardinalities().to_vec(), &rows)
}

/// Directed-edge confusion counts over all ordered pairs `(i, m)`, `i != m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    /// `tp / (tp + fn)`, or 0 when the truth has no edges.
    pub fn tp_rate(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `fp / (fp + tn)`, or 0 when the truth is complete.
    pub fn fp_rate(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn confusion(learned: &Dag, truth: &Dag) -> Result<ConfusionCounts> {
    let n = truth.num_nodes();
    if learned.num_nodes() != n {
        return Err(Error::NodeCountMismatch(learned.num_nodes(), n));
    }
    let mut c = ConfusionCounts::default();
    for to in 0..n {
        for from in (0..n).filter(|&f| f != to) {
            match (learned.has_edge(from, to), truth.has_edge(from, to)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(c)
}

/// Prior strengths applied to baseline mistakes: `present` to edges the
/// baseline missed, `absent` to edges it wrongly added.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrengthPair {
    pub present: f64,
    pub absent: f64,
}

/// Builds a prior matrix that corrects a random `fraction` of the
/// baseline's mistakes. Pairs are visited child-major in ascending order and
/// one uniform is drawn per mistaken pair.
pub fn prior_perturbation_protocol<R: Rng + ?Sized>(
    truth: &Dag,
    baseline: &Dag,
    strength: StrengthPair,
    fraction: f64,
    rng: &mut R,
) -> Result<PriorMatrix> {
    let n = truth.num_nodes();
    if baseline.num_nodes() != n {
        return Err(Error::NodeCountMismatch(baseline.num_nodes(), n));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Probability(fraction));
    }
    let mut r = PriorMatrix::neutral(n);
    for child in 0..n {
        for parent in (0..n).filter(|&m| m != child) {
            let value = match (truth.has_edge(parent, child), baseline.has_edge(parent, child)) {
                (true, false) => strength.present,
                (false, true) => strength.absent,
                _ => continue,
            };
            if rng.random_bool(fraction) {
                r.set(child, parent, value)?;
            }
        }
    }
    Ok(r)
}

/// One point of the prior-strength sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub strength: Option<StrengthPair>,
    pub fraction: f64,
}

impl SweepConfig {
    pub fn label(&self) -> String {
        match self.strength {
            None => "no-prior".to_string(),
            Some(s) => format!("{}/{}@{}", s.present, s.absent, self.fraction),
        }
    }
}

/// The five configurations, ordered by increasing prior strength: no prior,
/// then 0.7/0.2 and 0.8/0.1 each applied to 20% and 40% of the mistakes.
pub fn standard_sweep() -> Vec<SweepConfig> {
    let weak = StrengthPair { present: 0.7, absent: 0.2 };
    let strong = StrengthPair { present: 0.8, absent: 0.1 };
    vec![
        SweepConfig { strength: None, fraction: 0.0 },
        SweepConfig { strength: Some(weak), fraction: 0.2 },
        SweepConfig { strength: Some(weak), fraction: 0.4 },
        SweepConfig { strength: Some(strong), fraction: 0.2 },
        SweepConfig { strength: Some(strong), fraction: 0.4 },
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub config: SweepConfig,
    pub counts: ConfusionCounts,
    pub score: f64,
    pub runtime_secs: f64,
}

/// Learns once without priors, then once per configuration with priors
/// built from that baseline's mistakes. Every run reuses `cache` and the
/// chain seed of `run`; prior draws use the seed's prior stream.
pub fn prior_sweep<S: Score>(
    cache: &ScoreCache<S>,
    truth: &Dag,
    run: &RunConfig,
    configs: &[SweepConfig],
) -> Result<Vec<SweepRow>> {
    let n = cache.num_nodes();
    let started = Instant::now();
    let baseline = run_chain(cache, &Priors::neutral(n), run)?;
    let baseline_secs = started.elapsed().as_secs_f64();
    let baseline_dag = baseline.best().dag.clone();
    let mut rng = seeded_rng(run.seed, STREAM_PRIORS);
    configs
        .iter()
        .map(|cfg| {
            let Some(strength) = cfg.strength else {
                return Ok(SweepRow {
                    config: *cfg,
                    counts: confusion(&baseline_dag, truth)?,
                    score: baseline.best().total.to_f64_lossless(),
                    runtime_secs: baseline_secs,
                });
            };
            let r = prior_perturbation_protocol(truth, &baseline_dag, strength, cfg.fraction, &mut rng)?;
            let t = Instant::now();
            let out = run_chain(cache, &Priors::from_matrix(&r), run)?;
            Ok(SweepRow {
                config: *cfg,
                counts: confusion(&out.best().dag, truth)?,
                score: out.best().total.to_f64_lossless(),
                runtime_secs: t.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Number of labeled DAGs on `n` nodes:
/// `a(n) = sum_{k=1..n} (-1)^(k+1) C(n,k) 2^(k(n-k)) a(n-k)`, `a(0) = 1`.
pub fn count_dags(n: usize) -> BigUint {
    let mut a: Vec<BigInt> = vec![BigInt::one()];
    for m in 1..=n {
        let mut total = BigInt::zero();
        let mut choose = BigInt::one();
        for k in 1..=m {
            choose = choose * BigInt::from(m - k + 1) / BigInt::from(k);
            let term = &choose * (BigInt::one() << (k * (m - k))) * &a[m - k];
            if k % 2 == 1 {
                total += term;
            } else {
                total -= term;
            }
        }
        a.push(total);
    }
    a[n].to_biguint().expect("DAG counts are positive")
}

/// `n!`, the number of topological orders of `n` labeled nodes.
pub fn count_orders(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}
