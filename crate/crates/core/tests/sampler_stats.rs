mod common;

use std::collections::HashMap;

use bnlearn::sampler::{mh_accept, propose_swap, run_chain, run_mcmc, seeded_rng, STREAM_CHAIN};
use bnlearn::scoring::{build_score_cache, score_graph, Hyperparams, Priors};
use bnlearn::{Order, PriorMatrix, RunConfig, ScoreCache};
use common::{all_dags, synthetic};

#[test]
fn swap_pairs_are_uniform() {
    let order = Order::identity(4);
    let mut rng = seeded_rng(21, STREAM_CHAIN);
    let mut hits: HashMap<(usize, usize), usize> = HashMap::new();
    let draws = 10_000;
    for _ in 0..draws {
        let next = propose_swap(&order, &mut rng).unwrap();
        let moved: Vec<usize> = (0..4).filter(|&p| next.node_at(p) != p).collect();
        assert_eq!(moved.len(), 2);
        *hits.entry((moved[0], moved[1])).or_default() += 1;
    }
    assert_eq!(hits.len(), 6);
    for (pair, count) in hits {
        let freq = count as f64 / draws as f64;
        assert!((freq - 1.0 / 6.0).abs() < 0.02, "{pair:?}: {freq}");
    }
}

#[test]
fn acceptance_frequency_tracks_score_gap() {
    let mut rng = seeded_rng(4, STREAM_CHAIN);
    let trials = 100_000;
    let ok = (0..trials).filter(|_| mh_accept(-10.0f64, -11.0, &mut rng)).count();
    let freq = ok as f64 / trials as f64;
    assert!((freq - 0.1).abs() < 0.005, "{freq}");
    let ok = (0..trials).filter(|_| mh_accept(0.0f64, -300.0, &mut rng)).count();
    assert_eq!(ok, 0);
    assert!((0..1000).all(|_| mh_accept(-5.0f64, -5.0, &mut rng)));
}

#[test]
fn runs_are_reproducible_across_worker_counts() {
    let syn = synthetic(9, 3, 0.35, 500, 17);
    let base = RunConfig { iterations: 600, seed: 99, ..Default::default() };
    let reference = run_mcmc::<f64>(&syn.data, &base, &PriorMatrix::neutral(9)).unwrap();
    for workers in [2, 3, 8] {
        let cfg = RunConfig { workers, ..base.clone() };
        let out = run_mcmc::<f64>(&syn.data, &cfg, &PriorMatrix::neutral(9)).unwrap();
        assert_eq!(out.trace, reference.trace);
        assert_eq!(out.tracker.entries(), reference.tracker.entries());
        assert_eq!(out.final_order, reference.final_order);
    }
    let other = run_mcmc::<f64>(&syn.data, &RunConfig { seed: 100, ..base }, &PriorMatrix::neutral(9)).unwrap();
    assert_ne!(other.trace, reference.trace);
}

#[test]
fn chain_reaches_the_four_node_optimum() {
    for seed in 0..3 {
        let syn = synthetic(4, 3, 0.5, 400, seed + 40);
        let cache: ScoreCache<f64> = build_score_cache(&syn.data, &Hyperparams::default(), 3, u128::MAX).unwrap();
        let priors = Priors::neutral(4);
        let best = all_dags(4, 3)
            .iter()
            .map(|d| score_graph(d, &cache, &priors).unwrap().total)
            .fold(f64::NEG_INFINITY, f64::max);
        let cfg = RunConfig { max_parents: 3, iterations: 2000, seed, ..Default::default() };
        let out = run_chain(&cache, &priors, &cfg).unwrap();
        assert_eq!(out.best().total, best);
    }
}

#[test]
fn tracked_best_never_decreases_and_trace_is_complete() {
    let syn = synthetic(8, 3, 0.3, 800, 6);
    for strict in [false, true] {
        let cfg = RunConfig { iterations: 1500, seed: 3, strict_paper_tracker: strict, ..Default::default() };
        let out = run_mcmc::<f64>(&syn.data, &cfg, &PriorMatrix::neutral(8)).unwrap();
        assert_eq!(out.trace.len(), 1500);
        assert!(out.trace.iter().enumerate().all(|(i, r)| r.iteration == i + 1));
        assert!(out.trace.windows(2).all(|w| w[1].best_score >= w[0].best_score));
        assert!(out.tracker.entries().windows(2).all(|w| w[0].total >= w[1].total));
        assert!(out.tracker.len() <= cfg.track_top);
        assert_eq!(out.accepted, out.trace.iter().filter(|r| r.accepted).count());
        // accepted proposals become the chain state
        for r in out.trace.iter().filter(|r| r.accepted) {
            assert_eq!(r.current_score, r.proposed_score);
        }
        let last = out.trace.last().unwrap();
        assert_eq!(last.best_score, out.best().total);
    }
}

#[test]
fn tracker_sees_every_proposal_unless_strict() {
    let syn = synthetic(7, 3, 0.3, 300, 2);
    let cfg = RunConfig { iterations: 800, seed: 8, ..Default::default() };
    let loose = run_mcmc::<f64>(&syn.data, &cfg, &PriorMatrix::neutral(7)).unwrap();
    let best_proposed = loose.trace.iter().map(|r| r.proposed_score).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(loose.best().total, best_proposed);
    let strict = run_mcmc::<f64>(&syn.data, &RunConfig { strict_paper_tracker: true, ..cfg }, &PriorMatrix::neutral(7)).unwrap();
    let best_accepted = strict.trace.iter().filter(|r| r.accepted).map(|r| r.proposed_score).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(strict.best().total, best_accepted);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let syn = synthetic(5, 2, 0.3, 100, 1);
    let cfg = RunConfig { iterations: 10, ..Default::default() };
    assert!(run_mcmc::<f64>(&syn.data, &cfg, &PriorMatrix::neutral(4)).is_err());
    let cache: ScoreCache<f64> = build_score_cache(&syn.data, &Hyperparams::default(), 2, u128::MAX).unwrap();
    assert!(run_chain(&cache, &Priors::neutral(5), &cfg).is_err());
    let tight = RunConfig { memory_cap: 64, ..cfg };
    assert!(matches!(run_mcmc::<f64>(&syn.data, &tight, &PriorMatrix::neutral(5)), Err(bnlearn::Error::Capacity { .. })));
}

#[test]
fn single_precision_chain_runs() {
    let syn = synthetic(6, 2, 0.4, 300, 5);
    let cfg = RunConfig { iterations: 300, seed: 1, ..Default::default() };
    let out = run_mcmc::<f32>(&syn.data, &cfg, &PriorMatrix::neutral(6)).unwrap();
    assert!(out.best().total.is_finite());
    assert_eq!(out.trace.len(), 300);
}
