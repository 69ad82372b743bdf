//! Domain types shared by every other module.

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported network; parent sets are single 64-bit words.
pub const MAX_NODES: usize = 64;
/// Largest supported parent-set size limit.
pub const MAX_PARENTS: usize = 8;

/// A set of node indices packed into one machine word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ParentSet(u64);

impl ParentSet {
    pub const EMPTY: ParentSet = ParentSet(0);

    pub const fn from_mask(mask: u64) -> Self {
        ParentSet(mask)
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(nodes: I) -> Self {
        let mut mask = 0u64;
        for v in nodes {
            assert!(v < MAX_NODES, "node index {v} exceeds {MAX_NODES}");
            mask |= 1 << v;
        }
        ParentSet(mask)
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, v: usize) -> bool {
        v < MAX_NODES && self.0 & (1 << v) != 0
    }

    pub fn insert(&mut self, v: usize) {
        self.0 |= 1 << v;
    }

    pub fn remove(&mut self, v: usize) {
        self.0 &= !(1 << v);
    }

    pub const fn is_subset(self, other: ParentSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(v)
            }
        })
    }

    /// Highest member, if any.
    pub fn highest(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

impl fmt::Debug for ParentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for ParentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ParentSet::from_nodes(iter)
    }
}

/// Complete discrete observations, stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    cardinalities: Vec<usize>,
    columns: Vec<Vec<u8>>,
    rows: usize,
}

impl Dataset {
    /// Builds a dataset from row-major samples; every state must be below its
    /// column's cardinality.
    pub fn from_rows(cardinalities: Vec<usize>, rows: &[Vec<u8>]) -> Result<Self> {
        let n = cardinalities.len();
        let names = (0..n).map(|i| format!("v{i}")).collect();
        Self::with_names(names, cardinalities, rows)
    }

    pub fn with_names(names: Vec<String>, cardinalities: Vec<usize>, rows: &[Vec<u8>]) -> Result<Self> {
        let n = cardinalities.len();
        if n == 0 || n > MAX_NODES {
            return Err(Error::Data(format!("node count {n} outside 1..={MAX_NODES}")));
        }
        if names.len() != n {
            return Err(Error::Data(format!("{} names for {n} variables", names.len())));
        }
        if let Some((i, &c)) = cardinalities.iter().enumerate().find(|(_, &c)| !(2..=255).contains(&c)) {
            return Err(Error::Data(format!("variable {i} has cardinality {c}, expected 2..=255")));
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Data(format!("row {r} has {} values, expected {n}", row.len())));
            }
            for (i, &state) in row.iter().enumerate() {
                if state as usize >= cardinalities[i] {
                    return Err(Error::Data(format!(
                        "row {r}, variable {i}: state {state} not below cardinality {}",
                        cardinalities[i]
                    )));
                }
                columns[i].push(state);
            }
        }
        Ok(Dataset { names, cardinalities, columns, rows: rows.len() })
    }

    /// A dataset with no samples.
    pub fn empty(cardinalities: Vec<usize>) -> Result<Self> {
        Self::from_rows(cardinalities, &[])
    }

    pub fn num_nodes(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn cardinality(&self, node: usize) -> usize {
        self.cardinalities[node]
    }

    pub fn column(&self, node: usize) -> &[u8] {
        &self.columns[node]
    }

    pub fn value(&self, row: usize, node: usize) -> u8 {
        self.columns[node][row]
    }

    pub fn row(&self, row: usize) -> Vec<u8> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        (0..self.rows).map(|r| self.row(r))
    }

    /// Same data with row `r` moved to `perm[r]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rows);
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mut out = vec![0u8; col.len()];
                for (r, &dst) in perm.iter().enumerate() {
                    out[dst] = col[r];
                }
                out
            })
            .collect();
        Dataset { columns, ..self.clone() }
    }

    pub(crate) fn from_columns(names: Vec<String>, cardinalities: Vec<usize>, columns: Vec<Vec<u8>>) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        Dataset { names, cardinalities, columns, rows }
    }
}

/// A directed graph stored as one parent set per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dag {
    parents: Vec<ParentSet>,
}

impl Dag {
    /// Validates parent indices and rejects self loops. Acyclicity is checked
    /// separately with [`Dag::is_acyclic`].
    pub fn from_parents(parents: Vec<ParentSet>) -> Result<Self> {
        let n = parents.len();
        if n > MAX_NODES {
            return Err(Error::Graph(format!("{n} nodes exceeds {MAX_NODES}")));
        }
        for (i, p) in parents.iter().enumerate() {
            if p.contains(i) {
                return Err(Error::Graph(format!("self loop on node {i}")));
            }
            if let Some(hi) = p.highest() {
                if hi >= n {
                    return Err(Error::Graph(format!("node {i} has parent {hi} outside 0..{n}")));
                }
            }
        }
        Ok(Dag { parents })
    }

    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_NODES);
        Dag { parents: vec![ParentSet::EMPTY; n] }
    }

    /// Builds a graph from `(from, to)` pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_NODES {
            return Err(Error::Graph(format!("{n} nodes exceeds {MAX_NODES}")));
        }
        let mut parents = vec![ParentSet::EMPTY; n];
        for &(from, to) in edges {
            if from >= n || to >= n {
                return Err(Error::Graph(format!("edge {from} -> {to} outside 0..{n}")));
            }
            parents[to].insert(from);
        }
        Self::from_parents(parents)
    }

    pub fn num_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: usize) -> ParentSet {
        self.parents[node]
    }

    pub fn parent_sets(&self) -> &[ParentSet] {
        &self.parents
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// Edges as `(from, to)`, sorted by child then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(to, p)| p.iter().map(move |from| (from, to)))
            .collect()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Kahn's procedure, always releasing the lowest-indexed ready node.
    pub fn topological_order(&self) -> Result<Order> {
        let n = self.parents.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut children = vec![Vec::new(); n];
        for (to, p) in self.parents.iter().enumerate() {
            for from in p.iter() {
                children[from].push(to);
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut perm = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            perm.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        if perm.len() != n {
            return Err(Error::CyclicGraph);
        }
        Order::new(perm)
    }
}

/// A permutation of node indices; `node_at(p)` is the node at position `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Order {
    perm: Vec<usize>,
    position: Vec<usize>,
}

impl Order {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n > MAX_NODES {
            return Err(Error::Order(format!("{n} nodes exceeds {MAX_NODES}")));
        }
        let mut position = vec![usize::MAX; n];
        for (p, &v) in perm.iter().enumerate() {
            if v >= n || position[v] != usize::MAX {
                return Err(Error::Order(format!("{perm:?} is not a permutation of 0..{n}")));
            }
            position[v] = p;
        }
        Ok(Order { perm, position })
    }

    pub fn identity(n: usize) -> Self {
        Order::new((0..n).collect()).expect("identity is a permutation")
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn node_at(&self, pos: usize) -> usize {
        self.perm[pos]
    }

    pub fn position(&self, node: usize) -> usize {
        self.position[node]
    }

    /// Nodes placed before `node`.
    pub fn predecessors(&self, node: usize) -> ParentSet {
        ParentSet::from_nodes(self.perm[..self.position[node]].iter().copied())
    }

    /// True iff every member of `pset` precedes `node`.
    pub fn consistent(&self, pset: ParentSet, node: usize) -> bool {
        let at = self.position[node];
        pset.iter().all(|m| m < self.len() && self.position[m] < at)
    }

    /// True iff every parent set of `dag` is consistent with this order.
    pub fn admits(&self, dag: &Dag) -> bool {
        dag.num_nodes() == self.len() && (0..self.len()).all(|i| self.consistent(dag.parents(i), i))
    }

    /// Copy with the nodes at positions `a` and `b` exchanged.
    pub fn swapped(&self, a: usize, b: usize) -> Order {
        let mut next = self.clone();
        next.perm.swap(a, b);
        next.position[next.perm[a]] = a;
        next.position[next.perm[b]] = b;
        next
    }
}

/// Pairwise edge beliefs: entry `(i, m)` is the belief in an edge `m -> i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorMatrix {
    n: usize,
    values: Vec<f64>,
}

impl PriorMatrix {
    /// All entries 0.5: no bias on any edge.
    pub fn neutral(n: usize) -> Self {
        PriorMatrix { n, values: vec![0.5; n * n] }
    }

    /// Row-major `n x n` values in `[0, 1]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!("prior row {i} has {} entries, expected {n}", row.len())));
            }
            for &v in row {
                check_unit(v)?;
                values.push(v);
            }
        }
        Ok(PriorMatrix { n, values })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, child: usize, parent: usize) -> f64 {
        self.values[child * self.n + parent]
    }

    pub fn set(&mut self, child: usize, parent: usize, value: f64) -> Result<()> {
        check_unit(value)?;
        self.values[child * self.n + parent] = value;
        Ok(())
    }

    /// True when every off-diagonal entry is exactly 0.5.
    pub fn is_neutral(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|m| i == m || self.get(i, m) == 0.5))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n.max(1)).take(self.n)
    }
}

fn check_unit(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Probability(v))
    }
}

/// Dirichlet hyperparameter convention for the local score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AlphaScheme {
    /// `alpha_ijk = ess / (r_i * |v_i|)`.
    #[default]
    Bdeu,
    /// `alpha_ijk = 1`.
    K2,
}

/// How the parallel engine turns a global parent-set index into a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IndexStrategy {
    /// Read a precomputed parent set table.
    #[default]
    Pst,
    /// Unrank the first index of each slice, then step to successors.
    Unrank,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Maximum parent-set size `s`.
    pub max_parents: usize,
    /// Per-parent structure penalty, in `(0, 1]`.
    pub gamma: f64,
    /// Equivalent sample size of the Dirichlet prior.
    pub ess: f64,
    pub alpha: AlphaScheme,
    pub iterations: usize,
    pub seed: u64,
    pub workers: usize,
    /// Slices per node in the parallel engine; `None` means one per worker.
    pub tasks_per_node: Option<usize>,
    /// Number of best graphs retained.
    pub track_top: usize,
    /// Only record graphs of accepted orders.
    pub strict_paper_tracker: bool,
    pub index_strategy: IndexStrategy,
    /// Upper bound on the score cache size, in bytes.
    pub memory_cap: u128,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_parents: 4,
            gamma: 0.1,
            ess: 1.0,
            alpha: AlphaScheme::Bdeu,
            iterations: 10_000,
            seed: 0,
            workers: 1,
            tasks_per_node: None,
            track_top: 10,
            strict_paper_tracker: false,
            index_strategy: IndexStrategy::Pst,
            memory_cap: 4 << 30,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_parents > MAX_PARENTS {
            return Err(Error::Config(format!("max parents {} exceeds {MAX_PARENTS}", self.max_parents)));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.tasks_per_node == Some(0) {
            return Err(Error::Config("tasks per node must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        if !(self.ess > 0.0 && self.ess.is_finite()) {
            return Err(Error::Config(format!("ess {} must be positive", self.ess)));
        }
        if self.track_top == 0 {
            return Err(Error::Config("track_top must be at least 1".into()));
        }
        Ok(())
    }
}
