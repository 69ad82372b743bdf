use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::Instant;

use bnlearn::engine::{EngineConfig, ParallelEngine};
use bnlearn::evalgen::{forward_sample, random_bn, random_dag};
use bnlearn::model::IndexStrategy;
use bnlearn::sampler::{seeded_rng, STREAM_CHAIN, STREAM_PARAMETERS, STREAM_SAMPLES, STREAM_STRUCTURE};
use bnlearn::scoring::{best_parent_set, best_parent_set_exhaustive, build_score_cache, Hyperparams, Priors};
use bnlearn::{Order, ScoreCache};
use rand::seq::SliceRandom;

use crate::args::BenchArgs;

pub const HEADER: &str = "phase,nodes,workers,max_parents,seconds";

/// Emits one timing row per measurement. Order-scoring rows are seconds per
/// iteration; enumeration rows are seconds per scan of one node whose every
/// other node precedes it.
pub fn run(a: &BenchArgs) -> bnlearn::Result<()> {
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "{HEADER}")?;
    let s = a.max_parents;
    for &n in &a.nodes {
        let dag = random_dag(n, s, 0.2, &mut seeded_rng(a.seed, STREAM_STRUCTURE));
        let bn = random_bn(dag, vec![2; n], 1.0, &mut seeded_rng(a.seed, STREAM_PARAMETERS))?;
        let data = forward_sample(&bn, a.samples, &mut seeded_rng(a.seed, STREAM_SAMPLES));
        let t = Instant::now();
        let cache: ScoreCache<f64> = build_score_cache(&data, &Hyperparams::default(), s, u128::MAX)?;
        writeln!(out, "preprocess,{n},1,{s},{}", t.elapsed().as_secs_f64())?;

        let priors = Priors::neutral(n);
        let mut rng = seeded_rng(a.seed, STREAM_CHAIN);
        let orders: Vec<Order> = (0..a.iterations.max(1))
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                Order::new(p).expect("a shuffled range is a permutation")
            })
            .collect();
        for &workers in &a.workers {
            let engine = ParallelEngine::new(&cache, &priors, EngineConfig { workers, tasks_per_node: None, strategy: IndexStrategy::Pst })?;
            engine.score_order(&orders[0]);
            let t = Instant::now();
            for o in &orders {
                std::hint::black_box(engine.score_order(o));
            }
            writeln!(out, "score_order,{n},{workers},{s},{}", t.elapsed().as_secs_f64() / orders.len() as f64)?;
        }
    }

    let n = a.enum_candidates as usize + 1;
    let mut rng = seeded_rng(a.seed, STREAM_PARAMETERS);
    let cache = ScoreCache::<f64>::from_fn(n, s, |_, _| -rand::Rng::random_range(&mut rng, 1.0..100.0))?;
    let priors = Priors::neutral(n);
    let order = Order::identity(n);
    let reps = 100;
    let t = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(best_parent_set(n - 1, &order, &cache, &priors));
    }
    let bounded = t.elapsed().as_secs_f64() / reps as f64;
    let t = Instant::now();
    std::hint::black_box(best_parent_set_exhaustive(n - 1, &order, &cache, &priors));
    let full = t.elapsed().as_secs_f64();
    writeln!(out, "enumerate_bounded,{},1,{s},{bounded}", n - 1)?;
    writeln!(out, "enumerate_full,{},1,{s},{full}", n - 1)?;
    out.flush()?;
    eprintln!("bounded enumeration is {:.0}x faster than full enumeration over {} candidates", full / bounded, n - 1);
    Ok(())
}
