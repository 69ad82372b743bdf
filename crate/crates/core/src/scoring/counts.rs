use crate::model::{Dataset, ParentSet};

/// Sufficient statistics of one node given one parent set.
///
/// Only parent configurations that occur in the data are stored; absent
/// configurations have all-zero counts. Configuration ids are mixed-radix
/// with the lowest-indexed parent as the least significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    states: usize,
    configs: u64,
    observed: Vec<u64>,
    counts: Vec<u32>,
}

/// Dense tallies are used while `configs * states` stays below this.
const DENSE_LIMIT: u64 = 1 << 16;

impl CountTable {
    /// `|v_i|`, the child's state count.
    pub fn states(&self) -> usize {
        self.states
    }

    /// `r_i`, the number of parent configurations.
    pub fn configs(&self) -> u64 {
        self.configs
    }

    pub fn n_ijk(&self, config: u64, state: usize) -> u32 {
        match self.observed.binary_search(&config) {
            Ok(pos) => self.counts[pos * self.states + state],
            Err(_) => 0,
        }
    }

    pub fn n_ik(&self, config: u64) -> u32 {
        match self.observed.binary_search(&config) {
            Ok(pos) => self.row(pos).iter().sum(),
            Err(_) => 0,
        }
    }

    /// Total number of samples tallied.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// `(config, counts over child states)` for every observed configuration.
    pub fn observed_rows(&self) -> impl Iterator<Item = (u64, &[u32])> {
        self.observed.iter().enumerate().map(|(pos, &k)| (k, self.row(pos)))
    }

    fn row(&self, pos: usize) -> &[u32] {
        &self.counts[pos * self.states..(pos + 1) * self.states]
    }
}

pub fn count_statistics(data: &Dataset, node: usize, pset: ParentSet) -> CountTable {
    assert!(!pset.contains(node), "node {node} cannot be its own parent");
    let states = data.cardinality(node);
    let child = data.column(node);
    let mut keys = vec![0u64; data.num_rows()];
    let mut stride = 1u64;
    for p in pset.iter() {
        for (key, &v) in keys.iter_mut().zip(data.column(p)) {
            *key += stride * v as u64;
        }
        stride *= data.cardinality(p) as u64;
    }
    let configs = stride;

    if configs.saturating_mul(states as u64) <= DENSE_LIMIT {
        let mut dense = vec![0u32; configs as usize * states];
        for (&key, &y) in keys.iter().zip(child) {
            dense[key as usize * states + y as usize] += 1;
        }
        let mut observed = Vec::new();
        let mut counts = Vec::new();
        for (k, row) in dense.chunks(states).enumerate() {
            if row.iter().any(|&c| c > 0) {
                observed.push(k as u64);
                counts.extend_from_slice(row);
            }
        }
        return CountTable { states, configs, observed, counts };
    }

    let mut pairs: Vec<(u64, u8)> = keys.into_iter().zip(child.iter().copied()).collect();
    pairs.sort_unstable();
    let mut observed: Vec<u64> = Vec::new();
    let mut counts: Vec<u32> = Vec::new();
    for (key, y) in pairs {
        if observed.last() != Some(&key) {
            observed.push(key);
            counts.extend(std::iter::repeat_n(0, states));
        }
        let base = counts.len() - states;
        counts[base + y as usize] += 1;
    }
    CountTable { states, configs, observed, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_data_gives_zero_table() {
        let d = Dataset::empty(vec![2, 2]).unwrap();
        let t = count_statistics(&d, 0, ParentSet::from_nodes([1]));
        assert_eq!(t.configs(), 2);
        assert_eq!(t.total(), 0);
        assert_eq!(t.n_ik(0), 0);
        assert_eq!(t.n_ijk(1, 1), 0);
    }

    #[test]
    fn frequency_count() {
        let d = Dataset::from_rows(vec![2], &[vec![0], vec![1], vec![1]]).unwrap();
        let t = count_statistics(&d, 0, ParentSet::EMPTY);
        assert_eq!(t.configs(), 1);
        assert_eq!((t.n_ijk(0, 0), t.n_ijk(0, 1)), (1, 2));
        assert_eq!(t.n_ik(0), 3);
    }

    #[test]
    fn xor_child() {
        // columns: a, b, child = a ^ b
        let rows: Vec<Vec<u8>> = [(0, 0), (1, 0), (0, 1), (1, 1)].iter().map(|&(a, b)| vec![a, b, a ^ b]).collect();
        let d = Dataset::from_rows(vec![2, 2, 2], &rows).unwrap();
        let t = count_statistics(&d, 2, ParentSet::from_nodes([0, 1]));
        assert_eq!(t.configs(), 4);
        for k in 0..4u64 {
            // a is the low digit
            let (a, b) = (k & 1, k >> 1);
            assert_eq!(t.n_ik(k), 1);
            assert_eq!(t.n_ijk(k, (a ^ b) as usize), 1);
            assert_eq!(t.n_ijk(k, (1 - (a ^ b)) as usize), 0);
        }
    }

    #[test]
    fn sparse_path_matches_dense_semantics() {
        // 8 parents with 4 states each exceed the dense limit
        let cards = vec![4; 10];
        let rows: Vec<Vec<u8>> = (0..200u32)
            .map(|r| (0..10).map(|c| ((r * 7 + c * 13 + r * c) % 4) as u8).collect())
            .collect();
        let d = Dataset::from_rows(cards, &rows).unwrap();
        let pset = ParentSet::from_nodes(1..9);
        let t = count_statistics(&d, 0, pset);
        assert_eq!(t.configs(), 4u64.pow(8));
        assert_eq!(t.total(), 200);
        let mut row_sum = 0;
        for (k, row) in t.observed_rows() {
            let s: u32 = row.iter().sum();
            assert_eq!(s, t.n_ik(k));
            row_sum += s;
        }
        assert_eq!(row_sum, 200);
    }
}
