//! Finite simple graphs, isomorphism classes of small graphs and induced densities.

use crate::error::{Error, Result};
use crate::perm::Permutation;
use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::BigRational;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Largest order with a packed [`GraphKey`].
pub const MAX_KEY_ORDER: usize = 8;

/// A simple graph on vertices `0..n` stored as adjacency bitsets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    rows: Vec<Vec<u64>>,
}

fn pair_bit(i: usize, j: usize) -> u32 {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    (j * (j - 1) / 2 + i) as u32
}

/// A graph of order at most [`MAX_KEY_ORDER`] packed into its edge bitmask;
/// edge `{i, j}` with `i < j` is bit `j(j−1)/2 + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphKey {
    pub order: u8,
    pub mask: u32,
}

impl GraphKey {
    pub fn has_edge(self, i: usize, j: usize) -> bool {
        self.mask >> pair_bit(i, j) & 1 == 1
    }

    fn degrees(self) -> Vec<u32> {
        let n = self.order as usize;
        (0..n)
            .map(|i| (0..n).filter(|&j| j != i && self.has_edge(i, j)).count() as u32)
            .collect()
    }

    /// Least relabeled mask over vertex orders that list vertices by
    /// nondecreasing degree; equal for isomorphic graphs.
    pub fn canonical(self) -> GraphKey {
        let n = self.order as usize;
        if n <= 1 {
            return self;
        }
        let deg = self.degrees();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in (0..n).sorted_by_key(|&v| deg[v]) {
            match classes.last_mut() {
                Some(c) if deg[c[0]] == deg[v] => c.push(v),
                _ => classes.push(vec![v]),
            }
        }
        let mut best = u32::MAX;
        let orders = classes
            .iter()
            .map(|c| c.iter().copied().permutations(c.len()).collect::<Vec<_>>())
            .multi_cartesian_product();
        for parts in orders {
            let order: Vec<usize> = parts.into_iter().flatten().collect();
            let mut mask = 0u32;
            for q in 1..n {
                for p in 0..q {
                    if self.has_edge(order[p], order[q]) {
                        mask |= 1 << pair_bit(p, q);
                    }
                }
            }
            best = best.min(mask);
        }
        GraphKey { order: self.order, mask: best }
    }

    pub fn to_graph(self) -> Graph {
        let n = self.order as usize;
        let mut g = Graph::empty(n);
        for j in 1..n {
            for i in 0..j {
                if self.has_edge(i, j) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

/// Memoized canonical forms.
#[derive(Debug, Default, Clone)]
pub struct CanonicalCache {
    map: HashMap<GraphKey, GraphKey>,
}

impl CanonicalCache {
    pub fn canonical(&mut self, key: GraphKey) -> GraphKey {
        *self.map.entry(key).or_insert_with(|| key.canonical())
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            rows: vec![vec![0; n.div_ceil(64)]; n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for j in 1..n {
            for i in 0..j {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    /// Builds a graph from zero-based edges.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::invalid(format!("edge {}-{} invalid for order {n}", i + 1, j + 1)));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    /// Disjoint union of complete graphs of the given orders.
    pub fn clique_union(sizes: &[usize]) -> Self {
        sizes
            .iter()
            .fold(Graph::empty(0), |g, &s| g.disjoint_union(&Graph::complete(s)))
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut g = Graph::empty(self.n + other.n);
        for (i, j) in self.edges() {
            g.add_edge(i, j);
        }
        for (i, j) in other.edges() {
            g.add_edge(self.n + i, self.n + j);
        }
        g
    }

    pub(crate) fn add_edge(&mut self, i: usize, j: usize) {
        self.rows[i][j / 64] |= 1 << (j % 64);
        self.rows[j][i / 64] |= 1 << (i % 64);
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
    }

    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// Vertex sets of the connected components, each sorted, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for v in 0..self.n {
                    if !seen[v] && self.has_edge(u, v) {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Whether every component is a complete graph.
    pub fn is_clique_union(&self) -> bool {
        self.components().iter().all(|c| c.iter().all(|&v| self.degree(v) == c.len() - 1))
    }

    pub fn key(&self) -> Option<GraphKey> {
        if self.n > MAX_KEY_ORDER {
            return None;
        }
        let mut mask = 0u32;
        for (i, j) in self.edges() {
            mask |= 1 << pair_bit(i, j);
        }
        Some(GraphKey { order: self.n as u8, mask })
    }

    pub fn canonical_key(&self) -> Option<GraphKey> {
        self.key().map(GraphKey::canonical)
    }

    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        if self.n != other.n || self.edge_count() != other.edge_count() {
            return false;
        }
        match (self.canonical_key(), other.canonical_key()) {
            (Some(a), Some(b)) => a == b,
            _ => {
                let mut map = Vec::with_capacity(self.n);
                let mut used = vec![false; self.n];
                self.extend_isomorphism(other, &mut map, &mut used)
            }
        }
    }

    fn extend_isomorphism(&self, other: &Graph, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let u = map.len();
        if u == self.n {
            return true;
        }
        for v in 0..other.n {
            if used[v] || self.degree(u) != other.degree(v) {
                continue;
            }
            if (0..u).all(|w| self.has_edge(w, u) == other.has_edge(map[w], v)) {
                map.push(v);
                used[v] = true;
                if self.extend_isomorphism(other, map, used) {
                    return true;
                }
                map.pop();
                used[v] = false;
            }
        }
        false
    }

    /// `|Aut(G)|` by brute force over all vertex permutations.
    pub fn automorphism_count(&self) -> u64 {
        let edges: Vec<(usize, usize)> = self.edges().collect();
        (0..self.n)
            .permutations(self.n)
            .filter(|p| edges.iter().all(|&(i, j)| self.has_edge(p[i], p[j])))
            .count() as u64
    }

    /// The inversion graph: `ij` is an edge iff positions `i`, `j` of `pi` are inverted.
    pub fn inversion_graph(pi: &Permutation) -> Graph {
        let v = pi.zero_based();
        let mut g = Graph::empty(v.len());
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i] > v[j] {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

/// One representative of every isomorphism class of order `k`, sorted by canonical key.
pub fn graphs_of_order(k: usize) -> Result<Vec<Graph>> {
    if k == 0 || k > 6 {
        return Err(Error::UnsupportedSize(format!("graph class enumeration supports 1 ≤ k ≤ 6, got {k}")));
    }
    let bits = k * (k - 1) / 2;
    let keys: std::collections::BTreeSet<GraphKey> = (0u32..1 << bits)
        .map(|mask| GraphKey { order: k as u8, mask }.canonical())
        .collect();
    Ok(keys.into_iter().map(GraphKey::to_graph).collect())
}

/// Exact induced density `d(H, G)`; zero when `|H| > |G|`.
pub fn graph_density(h: &Graph, g: &Graph) -> BigRational {
    let (k, n) = (h.order(), g.order());
    if k > n {
        return BigRational::from_integer(0.into());
    }
    let count = match h.canonical_key() {
        Some(target) => {
            let mut cache = CanonicalCache::default();
            (0..n)
                .combinations(k)
                .filter(|s| cache.canonical(g.induced(s).key().expect("small order")) == target)
                .count()
        }
        None => (0..n).combinations(k).filter(|s| g.induced(s).is_isomorphic(h)).count(),
    };
    let total = num_integer::binomial(BigUint::from(n), BigUint::from(k));
    BigRational::new(BigUint::from(count).into(), total.into())
}

impl fmt::Display for Graph {
    /// `n; i-j,i-j,…` with one-based vertices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect();
        write!(f, "{}; {}", self.n, edges.join(","))
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph({self})")
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Parses `n; i-j,…` as well as the names `K<n>`, `P<n>`, `E<n>` and
    /// clique unions such as `2+3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::parse(format!("bad graph {s:?}"));
        if let Some((n, rest)) = s.split_once(';') {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            let mut edges = Vec::new();
            for e in rest.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                let (i, j) = e.split_once('-').ok_or_else(bad)?;
                let i: usize = i.trim().parse().map_err(|_| bad())?;
                let j: usize = j.trim().parse().map_err(|_| bad())?;
                if i == 0 || j == 0 {
                    return Err(bad());
                }
                edges.push((i - 1, j - 1));
            }
            return Graph::new(n, &edges).map_err(|e| Error::parse(e.to_string()));
        }
        let named = |prefix: char| -> Option<usize> {
            s.strip_prefix(prefix)
                .or_else(|| s.strip_prefix(prefix.to_ascii_lowercase()))
                .and_then(|t| t.parse().ok())
        };
        if let Some(n) = named('K') {
            return Ok(Graph::complete(n));
        }
        if let Some(n) = named('P') {
            return Ok(Graph::path(n));
        }
        if let Some(n) = named('E') {
            return Ok(Graph::empty(n));
        }
        let sizes = s
            .split('+')
            .map(|t| t.trim().parse::<usize>().ok().filter(|&v| v >= 1))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        Ok(Graph::clique_union(&sizes))
    }
}
