#![allow(dead_code)]

use std::collections::HashMap;

use bnlearn::evalgen::{forward_sample, random_bn, random_dag, GroundTruthBn};
use bnlearn::sampler::{seeded_rng, STREAM_PARAMETERS, STREAM_SAMPLES, STREAM_STRUCTURE};
use bnlearn::{Dag, Dataset, ParentSet};
use num_bigint::BigUint;
use num_traits::One;

/// Every DAG on `n` nodes whose in-degrees are all at most `max_in`, by
/// generate-and-test over all parent-set assignments.
pub fn all_dags(n: usize, max_in: usize) -> Vec<Dag> {
    let choices: Vec<Vec<ParentSet>> = (0..n)
        .map(|i| {
            (0u64..1 << n)
                .filter(|m| m >> i & 1 == 0 && (m.count_ones() as usize) <= max_in)
                .map(ParentSet::from_mask)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; n];
    loop {
        let parents: Vec<ParentSet> = (0..n).map(|i| choices[i][pick[i]]).collect();
        let dag = Dag::from_parents(parents).unwrap();
        if is_acyclic_dfs(&dag) {
            out.push(dag);
        }
        let mut i = 0;
        while i < n {
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

/// Cycle check by colored depth-first search along parent links.
pub fn is_acyclic_dfs(dag: &Dag) -> bool {
    fn visit(dag: &Dag, v: usize, color: &mut [u8]) -> bool {
        match color[v] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        color[v] = 1;
        for p in dag.parents(v).iter() {
            if !visit(dag, p, color) {
                return false;
            }
        }
        color[v] = 2;
        true
    }
    let mut color = vec![0u8; dag.num_nodes()];
    (0..dag.num_nodes()).all(|v| visit(dag, v, &mut color))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Exact rational `p / q`.
#[derive(Clone, Debug)]
pub struct Ratio {
    pub num: BigUint,
    pub den: BigUint,
}

impl Ratio {
    pub fn one() -> Self {
        Ratio { num: BigUint::one(), den: BigUint::one() }
    }

    pub fn mul(self, num: &BigUint, den: &BigUint) -> Self {
        Ratio { num: self.num * num, den: self.den * den }
    }

    pub fn log10(&self) -> f64 {
        log10_big(&self.num) - log10_big(&self.den)
    }
}

/// log10 of an arbitrarily large integer, keeping its top 60 bits.
pub fn log10_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top: BigUint = x >> shift;
    let top = top.iter_u64_digits().next().unwrap_or(0) as f64;
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// `(a)(a+1)...(a+m-1)` for `a = p / q`, as an exact ratio.
fn rising(p: u64, q: u64, m: u64) -> Ratio {
    let mut num = BigUint::one();
    for j in 0..m {
        num *= BigUint::from(p + j * q);
    }
    Ratio { num, den: BigUint::from(q).pow(m as u32) }
}

/// Bayesian Dirichlet marginal likelihood of one node's column given its
/// parents, computed exactly with rational pseudo-counts
/// `ess / (states * configs)` where `ess = ess_num / ess_den`, times
/// `(gamma_num / gamma_den)^|parents|`. Returns its log10.
pub fn bd_oracle(
    rows: &[Vec<u8>],
    cards: &[usize],
    node: usize,
    parents: &[usize],
    (ess_num, ess_den): (u64, u64),
    (gamma_num, gamma_den): (u64, u64),
) -> f64 {
    let states = cards[node] as u64;
    let configs: u64 = parents.iter().map(|&p| cards[p] as u64).product();
    let mut tally: HashMap<Vec<u8>, Vec<u64>> = HashMap::new();
    for row in rows {
        let key: Vec<u8> = parents.iter().map(|&p| row[p]).collect();
        tally.entry(key).or_insert_with(|| vec![0; states as usize])[row[node] as usize] += 1;
    }
    // alpha_ijk = ess_num / (ess_den * states * configs); alpha_ik = ess_num / (ess_den * configs)
    let q_ijk = ess_den * states * configs;
    let q_ik = ess_den * configs;
    let mut r = Ratio::one();
    for counts in tally.values() {
        let total: u64 = counts.iter().sum();
        let denom = rising(ess_num, q_ik, total);
        r = r.mul(&denom.den, &denom.num);
        for &c in counts {
            let term = rising(ess_num, q_ijk, c);
            r = r.mul(&term.num, &term.den);
        }
    }
    let k = parents.len() as u32;
    r = r.mul(&BigUint::from(gamma_num).pow(k), &BigUint::from(gamma_den).pow(k));
    r.log10()
}

/// Seeded ground truth with binary states, as used by the recovery checks.
pub struct Synthetic {
    pub truth: GroundTruthBn,
    pub data: Dataset,
}

pub fn synthetic(n: usize, max_parents: usize, edge_prob: f64, m: usize, seed: u64) -> Synthetic {
    let dag = random_dag(n, max_parents, edge_prob, &mut seeded_rng(seed, STREAM_STRUCTURE));
    let truth = random_bn(dag, vec![2; n], 1.0, &mut seeded_rng(seed, STREAM_PARAMETERS)).unwrap();
    let data = forward_sample(&truth, m, &mut seeded_rng(seed, STREAM_SAMPLES));
    Synthetic { truth, data }
}

/// Exact joint probability of a full assignment under `bn`.
pub fn joint_probability(bn: &GroundTruthBn, states: &[u8]) -> f64 {
    (0..states.len()).map(|i| bn.cpt_row(i, bn.config_of(i, states))[states[i] as usize]).product()
}

/// Every assignment of the given cardinalities, last variable fastest.
pub fn assignments(cards: &[usize]) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..c as u8).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}
