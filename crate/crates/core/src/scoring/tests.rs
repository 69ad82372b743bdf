use super::*;
use crate::model::Order;

fn hyper(gamma: f64, ess: f64) -> Hyperparams {
    Hyperparams { gamma, ess, alpha: AlphaScheme::Bdeu }
}

#[test]
fn no_data_scores_only_the_penalty() {
    let d = Dataset::empty(vec![2, 3, 2]).unwrap();
    let h = hyper(0.1, 1.0);
    assert_eq!(local_score(&d, 0, ParentSet::EMPTY, &h).unwrap(), 0.0);
    let two = local_score(&d, 0, ParentSet::from_nodes([1, 2]), &h).unwrap();
    assert!((two - 2.0 * 0.1f64.log10()).abs() < 1e-15);
}

#[test]
fn two_row_hand_value() {
    // Gamma(1)/Gamma(3) * Gamma(1.5)^2/Gamma(0.5)^2 = 1/8
    let d = Dataset::from_rows(vec![2], &[vec![0], vec![1]]).unwrap();
    let v = local_score(&d, 0, ParentSet::EMPTY, &hyper(1.0, 1.0)).unwrap();
    assert!((v - (1.0f64 / 8.0).log10()).abs() < 1e-12, "{v}");
    assert!((v + 0.9031).abs() < 1e-4);
}

#[test]
fn non_positive_hyperparameters_rejected() {
    let d = Dataset::from_rows(vec![2], &[vec![0]]).unwrap();
    assert!(matches!(local_score(&d, 0, ParentSet::EMPTY, &hyper(1.0, 0.0)), Err(Error::Config(_))));
    assert!(matches!(local_score(&d, 0, ParentSet::EMPTY, &hyper(0.0, 1.0)), Err(Error::Config(_))));
    let k2 = Hyperparams { gamma: 1.0, ess: 0.0, alpha: AlphaScheme::K2 };
    assert!(local_score(&d, 0, ParentSet::EMPTY, &k2).is_ok());
}

#[test]
fn k2_alphas() {
    let h = Hyperparams { gamma: 1.0, ess: 3.0, alpha: AlphaScheme::K2 };
    assert_eq!(h.alphas(4, 3), (1.0, 3.0));
    assert_eq!(hyper(1.0, 4.0).alphas(4, 2), (0.5, 1.0));
}

#[test]
fn ppf_values() {
    assert_eq!(ppf(0.5).unwrap(), 0.0);
    assert_eq!(ppf(1.0).unwrap(), 12.5);
    assert_eq!(ppf(0.0).unwrap(), -12.5);
    assert!((ppf(0.2).unwrap() + 2.7).abs() < 1e-12);
    assert!(ppf(0.7).unwrap() > 0.0 && ppf(0.3).unwrap() < 0.0);
    assert!(matches!(ppf(1.01), Err(Error::Probability(_))));
    assert!(ppf(-0.01).is_err());
}

fn small_cache() -> ScoreCache<f64> {
    let rows: Vec<Vec<u8>> = (0..40u8).map(|r| vec![r % 2, (r / 2) % 2, (r % 3 == 0) as u8]).collect();
    let d = Dataset::from_rows(vec![2, 2, 2], &rows).unwrap();
    build_score_cache(&d, &Hyperparams::default(), 2, u128::MAX).unwrap()
}

#[test]
fn effective_scores_with_priors() {
    let cache = small_cache();
    let neutral = Priors::<f64>::neutral(3);
    let pset = ParentSet::from_nodes([0, 1]);
    assert_eq!(effective_local_score(2, pset, &cache, &neutral), cache.lookup(2, pset));

    let mut r = PriorMatrix::neutral(3);
    r.set(2, 0, 1.0).unwrap();
    let single = Priors::from_matrix(&r);
    let one = ParentSet::from_nodes([0]);
    assert_eq!(effective_local_score(2, one, &cache, &single), cache.lookup(2, one) + 12.5);

    r.set(2, 1, 0.0).unwrap();
    let both = Priors::from_matrix(&r);
    assert_eq!(effective_local_score(2, pset, &cache, &both), cache.lookup(2, pset));
}

#[test]
fn score_graph_errors() {
    let cache = small_cache();
    let p = Priors::neutral(3);
    let cyclic = Dag::from_edges(3, &[(0, 1), (1, 0)]).unwrap();
    assert!(matches!(score_graph(&cyclic, &cache, &p), Err(Error::CyclicGraph)));
    let big = build_score_cache::<f64>(&Dataset::empty(vec![2; 4]).unwrap(), &Hyperparams::default(), 1, u128::MAX).unwrap();
    let two_parents = Dag::from_edges(4, &[(0, 3), (1, 3)]).unwrap();
    assert!(matches!(score_graph(&two_parents, &big, &Priors::neutral(4)), Err(Error::ParentLimit { node: 3, .. })));
    assert!(matches!(score_graph(&Dag::empty(2), &cache, &p), Err(Error::NodeCountMismatch(2, 3))));
}

#[test]
fn empty_graph_without_data_scores_zero() {
    let d = Dataset::empty(vec![2; 3]).unwrap();
    let cache = build_score_cache::<f64>(&d, &Hyperparams::default(), 2, u128::MAX).unwrap();
    let g = score_graph(&Dag::empty(3), &cache, &Priors::neutral(3)).unwrap();
    assert_eq!(g.total, 0.0);
}

#[test]
fn order_score_small_cases() {
    let d = Dataset::from_rows(vec![2], &[vec![0], vec![1], vec![1]]).unwrap();
    let c1 = build_score_cache::<f64>(&d, &Hyperparams::default(), 4, u128::MAX).unwrap();
    let g = score_order(&Order::identity(1), &c1, &Priors::neutral(1));
    assert_eq!(g.total, c1.lookup(0, ParentSet::EMPTY));
    assert_eq!(g.dag, Dag::empty(1));

    let sub = |keep: &[usize]| {
        let rows: Vec<Vec<u8>> = (0..40u8).map(|r| vec![r % 2, (r / 2) % 2, (r % 3 == 0) as u8]).collect();
        let rows: Vec<Vec<u8>> = rows.into_iter().map(|row| keep.iter().map(|&i| row[i]).collect()).collect();
        Dataset::from_rows(vec![2; keep.len()], &rows).unwrap()
    };
    let pair = build_score_cache::<f64>(&sub(&[0, 1]), &Hyperparams::default(), 2, u128::MAX).unwrap();
    let mut r = PriorMatrix::neutral(2);
    r.set(1, 0, 0.9).unwrap();
    let pri = Priors::from_matrix(&r);
    let g = score_order(&Order::identity(2), &pair, &pri);
    let expected = pair.lookup(0, ParentSet::EMPTY)
        + f64::max(pair.lookup(1, ParentSet::EMPTY), pair.lookup(1, ParentSet::from_nodes([0])) + ppf(0.9).unwrap());
    assert_eq!(g.total, expected);
}

#[test]
fn cache_layout_sizes() {
    let d = Dataset::empty(vec![2; 3]).unwrap();
    let c = build_score_cache::<f64>(&d, &Hyperparams::default(), 1, u128::MAX).unwrap();
    assert_eq!(c.len(), 9);
    assert_eq!(c.entries_per_node(), 3);
    assert_eq!(cache_bytes::<f64>(20, 4), 100_720 * 8);
    assert_eq!(cache_bytes::<f32>(20, 4), 100_720 * 4);
}

#[test]
fn capacity_checked_before_allocation() {
    let d = Dataset::empty(vec![2; 60]).unwrap();
    let err = build_score_cache::<f64>(&d, &Hyperparams::default(), 8, 1 << 30).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }));
}

#[test]
fn persisted_cache_round_trip() {
    let cache = small_cache();
    let mut bytes = Vec::new();
    cache.write_to(&mut bytes).unwrap();
    assert_eq!(&bytes[..4], b"BNSC");
    assert_eq!(bytes.len(), CACHE_HEADER_LEN + cache.len() * 8);
    let back = ScoreCache::<f64>::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back, cache);
    assert_eq!(back.digest(), Hyperparams::default().digest());

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(ScoreCache::<f64>::read_from(bad.as_slice()), Err(Error::CacheFormat(_))));
    assert!(ScoreCache::<f64>::read_from(&bytes[..bytes.len() - 3]).is_err());
    let mut long = bytes;
    long.push(0);
    assert!(ScoreCache::<f64>::read_from(long.as_slice()).is_err());
}

#[test]
fn single_precision_cache_rounds_double_scores() {
    let rows: Vec<Vec<u8>> = (0..40u8).map(|r| vec![r % 2, (r / 2) % 2, (r % 3 == 0) as u8]).collect();
    let d = Dataset::from_rows(vec![2, 2, 2], &rows).unwrap();
    let c32 = build_score_cache::<f32>(&d, &Hyperparams::default(), 2, u128::MAX).unwrap();
    let c64 = small_cache();
    for node in 0..3 {
        for (a, b) in c32.node_scores(node).iter().zip(c64.node_scores(node)) {
            assert_eq!(*a, *b as f32);
        }
    }
}
