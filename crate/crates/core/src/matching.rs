//! Exact maximum-weight matching primitives.
//!
//! * [`max_weight_bipartite_matching`]: Hungarian method with integer
//!   potentials, plus a greedy pass that picks the lexicographically smallest
//!   optimal pair list.
//! * [`max_weight_set_packing`]: exhaustive search over pairwise-disjoint
//!   hyperedges.
//! * [`max_weight_general_matching`]: exhaustive search over matchings of a
//!   general graph, memoised on `(edge index, used vertices)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{ensure_budget, Error, Result};

/// Complete bipartite graph with nonnegative integer weights. Missing pairs
/// weigh 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedBipartiteGraph {
    left_count: usize,
    right_count: usize,
    weights: BTreeMap<(usize, usize), u64>,
}

impl WeightedBipartiteGraph {
    pub fn new(left_count: usize, right_count: usize) -> Self {
        WeightedBipartiteGraph {
            left_count,
            right_count,
            weights: BTreeMap::new(),
        }
    }

    /// Rows are left vertices, columns right vertices.
    pub fn from_matrix(rows: &[Vec<u64>]) -> Result<Self> {
        let right_count = rows.first().map_or(0, Vec::len);
        let mut graph = WeightedBipartiteGraph::new(rows.len(), right_count);
        for (l, row) in rows.iter().enumerate() {
            if row.len() != right_count {
                return Err(Error::InvalidInstance(format!(
                    "weight matrix row {l} has {} entries, expected {right_count}",
                    row.len()
                )));
            }
            for (r, &w) in row.iter().enumerate() {
                graph.set_weight(l, r, w)?;
            }
        }
        Ok(graph)
    }

    pub fn set_weight(&mut self, left: usize, right: usize, weight: u64) -> Result<()> {
        if left >= self.left_count || right >= self.right_count {
            return Err(Error::InvalidInstance(format!(
                "edge ({left}, {right}) outside a {}x{} graph",
                self.left_count, self.right_count
            )));
        }
        if weight == 0 {
            self.weights.remove(&(left, right));
        } else {
            self.weights.insert((left, right), weight);
        }
        Ok(())
    }

    pub fn weight(&self, left: usize, right: usize) -> u64 {
        self.weights.get(&(left, right)).copied().unwrap_or(0)
    }

    pub fn left_count(&self) -> usize {
        self.left_count
    }

    pub fn right_count(&self) -> usize {
        self.right_count
    }
}

/// A set of `(left, right)` pairs with no repeated vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Sorted ascending.
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: u64,
}

/// Maximum-weight matching of a bipartite graph.
///
/// Only positive-weight pairs are reported. Among all maximum-weight
/// matchings the lexicographically smallest sorted pair list is returned.
pub fn max_weight_bipartite_matching(graph: &WeightedBipartiteGraph) -> Matching {
    let all_left = vec![true; graph.left_count];
    let all_right = vec![true; graph.right_count];
    let optimum = restricted_optimum(graph, &all_left, &all_right);

    // Greedy lexicographic construction: fix pairs one at a time, each time
    // taking the smallest pair that still admits an optimal completion using
    // only larger left vertices. Stopping early is smallest when the prefix
    // is already optimal.
    let mut pairs = Vec::new();
    let mut fixed_weight = 0u64;
    let mut right_free = all_right;
    let mut next_left = 0;
    while fixed_weight < optimum {
        let mut chosen = None;
        'search: for l in next_left..graph.left_count {
            for r in 0..graph.right_count {
                let w = graph.weight(l, r);
                if w == 0 || !right_free[r] {
                    continue;
                }
                let left_allowed: Vec<bool> = (0..graph.left_count).map(|x| x > l).collect();
                let mut right_allowed = right_free.clone();
                right_allowed[r] = false;
                let rest = restricted_optimum(graph, &left_allowed, &right_allowed);
                if fixed_weight + w + rest == optimum {
                    chosen = Some((l, r, w));
                    break 'search;
                }
            }
        }
        let (l, r, w) = chosen.expect("an optimal completion always exists");
        pairs.push((l, r));
        fixed_weight += w;
        right_free[r] = false;
        next_left = l + 1;
    }
    Matching {
        pairs,
        total_weight: optimum,
    }
}

/// Optimal weight using only the allowed vertices.
fn restricted_optimum(
    graph: &WeightedBipartiteGraph,
    left_allowed: &[bool],
    right_allowed: &[bool],
) -> u64 {
    let lefts: Vec<usize> = (0..graph.left_count).filter(|&l| left_allowed[l]).collect();
    let rights: Vec<usize> = (0..graph.right_count).filter(|&r| right_allowed[r]).collect();
    if lefts.is_empty() || rights.is_empty() {
        return 0;
    }
    let size = lefts.len().max(rights.len());
    // Minimise negated weights over a square matrix padded with zeros.
    let mut cost = vec![vec![0i64; size]; size];
    for (a, &l) in lefts.iter().enumerate() {
        for (b, &r) in rights.iter().enumerate() {
            cost[a][b] = -(graph.weight(l, r) as i64);
        }
    }
    let assignment = hungarian(&cost);
    assignment
        .iter()
        .enumerate()
        .map(|(a, &b)| (-cost[a][b]) as u64)
        .sum()
}

/// Minimum-cost perfect assignment on a square matrix (rows to columns).
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = i64::MAX / 4;
    // 1-indexed potentials; column 0 is a sentinel.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut min_slack = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let row0 = owner[col0];
            let mut delta = inf;
            let mut col1 = 0usize;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[row0 - 1][col - 1] - u[row0] - v[col];
                if reduced < min_slack[col] {
                    min_slack[col] = reduced;
                    way[col] = col0;
                }
                if min_slack[col] < delta {
                    delta = min_slack[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Hypergraph with nonnegative integer edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedHypergraph {
    vertex_count: usize,
    edges: Vec<(Vec<usize>, u64)>,
}

impl WeightedHypergraph {
    pub fn new(vertex_count: usize) -> Self {
        WeightedHypergraph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    /// Adds an edge and returns its index.
    pub fn add_edge(&mut self, vertices: Vec<usize>, weight: u64) -> Result<usize> {
        if vertices.is_empty() {
            return Err(Error::InvalidInstance("hyperedge has no vertices".into()));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= self.vertex_count) {
            return Err(Error::InvalidInstance(format!(
                "hyperedge vertex {v} outside {} vertices",
                self.vertex_count
            )));
        }
        let mut vertices = vertices;
        vertices.sort_unstable();
        vertices.dedup();
        self.edges.push((vertices, weight));
        Ok(self.edges.len() - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(Vec<usize>, u64)] {
        &self.edges
    }
}

/// Pairwise-disjoint hyperedges selected by [`max_weight_set_packing`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    /// Ascending edge indices.
    pub edges: Vec<usize>,
    pub total_weight: u64,
}

/// Maximum-weight set of pairwise-disjoint hyperedges, by exhaustive search.
///
/// Ties go to the lexicographically smallest ascending index sequence.
pub fn max_weight_set_packing(graph: &WeightedHypergraph, edge_cap: usize) -> Result<Packing> {
    ensure_budget(
        "set packing edge",
        graph.edges.len() as u128,
        edge_cap as u128,
    )?;
    let words = graph.vertex_count.div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = graph
        .edges
        .iter()
        .map(|(vertices, _)| {
            let mut mask = vec![0u64; words];
            for &v in vertices {
                mask[v / 64] |= 1 << (v % 64);
            }
            mask
        })
        .collect();
    let weights: Vec<u64> = graph.edges.iter().map(|(_, w)| *w).collect();

    let mut search = PackingSearch {
        masks: &masks,
        weights: &weights,
        used: vec![0u64; words],
        current: Vec::new(),
        best: Packing {
            edges: Vec::new(),
            total_weight: 0,
        },
    };
    search.extend(0, 0);
    Ok(search.best)
}

struct PackingSearch<'a> {
    masks: &'a [Vec<u64>],
    weights: &'a [u64],
    used: Vec<u64>,
    current: Vec<usize>,
    best: Packing,
}

impl PackingSearch<'_> {
    /// Visits every packing whose next edge index is at least `from`.
    fn extend(&mut self, from: usize, weight: u64) {
        if weight > self.best.total_weight
            || (weight == self.best.total_weight && self.current < self.best.edges)
        {
            self.best = Packing {
                edges: self.current.clone(),
                total_weight: weight,
            };
        }
        for e in from..self.masks.len() {
            let mask = &self.masks[e];
            if mask.iter().zip(&self.used).any(|(a, b)| a & b != 0) {
                continue;
            }
            for (u, m) in self.used.iter_mut().zip(mask) {
                *u |= m;
            }
            self.current.push(e);
            self.extend(e + 1, weight + self.weights[e]);
            self.current.pop();
            for (u, m) in self.used.iter_mut().zip(mask) {
                *u &= !m;
            }
        }
    }
}

/// An undirected weighted edge `(u, v, weight)`.
pub type GraphEdge = (usize, usize, u64);

/// Maximum-weight matching of a general graph on at most 128 vertices.
///
/// Exhaustive: for each edge in order, either skip it or take it when both
/// endpoints are free. Memoised on the edge index and the used vertices that
/// later edges can still touch. On ties the edge is skipped. Returns the
/// selected edge indices (ascending) and their total weight.
pub fn max_weight_general_matching(
    vertex_count: usize,
    edges: &[GraphEdge],
    state_cap: usize,
) -> Result<(Vec<usize>, u64)> {
    if vertex_count > 128 {
        return Err(Error::BudgetExceeded {
            what: "general matching vertex",
            needed: vertex_count as u128,
            limit: 128,
        });
    }
    if let Some(&(u, v, _)) = edges
        .iter()
        .find(|&&(u, v, _)| u >= vertex_count || v >= vertex_count || u == v)
    {
        return Err(Error::InvalidInstance(format!("bad graph edge ({u}, {v})")));
    }
    // relevant[e]: vertices touched by edges e.. (only these matter to the
    // memo key at position e).
    let mut relevant = vec![0u128; edges.len() + 1];
    for e in (0..edges.len()).rev() {
        let (u, v, _) = edges[e];
        relevant[e] = relevant[e + 1] | (1 << u) | (1 << v);
    }
    let mut search = GeneralSearch {
        edges,
        relevant: &relevant,
        memo: HashMap::new(),
        state_cap,
    };
    search.best(0, 0)?;

    // Replay the memoised decisions.
    let mut chosen = Vec::new();
    let mut used = 0u128;
    for (e, &(u, v, w)) in edges.iter().enumerate() {
        let skip = search.best(e + 1, used)?;
        let endpoints = (1u128 << u) | (1u128 << v);
        if used & endpoints == 0 && w + search.best(e + 1, used | endpoints)? > skip {
            chosen.push(e);
            used |= endpoints;
        }
    }
    let total = chosen.iter().map(|&e| edges[e].2).sum();
    Ok((chosen, total))
}

struct GeneralSearch<'a> {
    edges: &'a [GraphEdge],
    relevant: &'a [u128],
    memo: HashMap<(usize, u128), u64>,
    state_cap: usize,
}

impl GeneralSearch<'_> {
    fn best(&mut self, e: usize, used: u128) -> Result<u64> {
        if e == self.edges.len() {
            return Ok(0);
        }
        let key = (e, used & self.relevant[e]);
        if let Some(&value) = self.memo.get(&key) {
            return Ok(value);
        }
        ensure_budget(
            "general matching state",
            self.memo.len() as u128 + 1,
            self.state_cap as u128,
        )?;
        let (u, v, w) = self.edges[e];
        let endpoints = (1u128 << u) | (1u128 << v);
        let mut value = self.best(e + 1, used)?;
        if used & endpoints == 0 {
            value = value.max(w + self.best(e + 1, used | endpoints)?);
        }
        self.memo.insert(key, value);
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle: every partial assignment of left vertices to distinct rights.
    fn brute_bipartite(weights: &[Vec<u64>]) -> u64 {
        fn go(weights: &[Vec<u64>], l: usize, used: &mut Vec<bool>) -> u64 {
            if l == weights.len() {
                return 0;
            }
            let mut best = go(weights, l + 1, used);
            for r in 0..used.len() {
                if !used[r] {
                    used[r] = true;
                    best = best.max(weights[l][r] + go(weights, l + 1, used));
                    used[r] = false;
                }
            }
            best
        }
        let right = weights.first().map_or(0, Vec::len);
        go(weights, 0, &mut vec![false; right])
    }

    #[test]
    fn bipartite_examples() {
        let g = WeightedBipartiteGraph::from_matrix(&[vec![1, 2], vec![3, 0]]).unwrap();
        let m = max_weight_bipartite_matching(&g);
        assert_eq!(m.total_weight, 5);
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);

        let g = WeightedBipartiteGraph::from_matrix(&[vec![0]]).unwrap();
        let m = max_weight_bipartite_matching(&g);
        assert_eq!(m.total_weight, 0);
        assert!(m.pairs.is_empty());

        for n in 1..6 {
            let rows: Vec<Vec<u64>> = (0..n)
                .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
                .collect();
            let m = max_weight_bipartite_matching(&WeightedBipartiteGraph::from_matrix(&rows).unwrap());
            assert_eq!(m.total_weight, n as u64);
            assert_eq!(m.pairs, (0..n).map(|i| (i, i)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn bipartite_tie_break_is_lexicographic() {
        // Both (0,0)+(1,1) and (0,1)+(1,0) weigh 2; the first sorts lower.
        let g = WeightedBipartiteGraph::from_matrix(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(max_weight_bipartite_matching(&g).pairs, vec![(0, 0), (1, 1)]);
        let g = WeightedBipartiteGraph::from_matrix(&[vec![0, 2], vec![2, 0], vec![0, 0]]).unwrap();
        assert_eq!(max_weight_bipartite_matching(&g).pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn set_packing_examples() {
        let mut h = WeightedHypergraph::new(4);
        h.add_edge(vec![0, 1], 3).unwrap();
        h.add_edge(vec![1, 2], 3).unwrap();
        h.add_edge(vec![3], 1).unwrap();
        let p = max_weight_set_packing(&h, 24).unwrap();
        assert_eq!(p.edges, vec![0, 2]);
        assert_eq!(p.total_weight, 4);

        let p = max_weight_set_packing(&WeightedHypergraph::new(3), 24).unwrap();
        assert!(p.edges.is_empty());
        assert_eq!(p.total_weight, 0);

        let mut h = WeightedHypergraph::new(3);
        h.add_edge(vec![0, 1, 2], 7).unwrap();
        let p = max_weight_set_packing(&h, 24).unwrap();
        assert_eq!((p.edges, p.total_weight), (vec![0], 7));
    }

    #[test]
    fn set_packing_cap() {
        let mut h = WeightedHypergraph::new(30);
        for v in 0..25 {
            h.add_edge(vec![v], 1).unwrap();
        }
        assert!(matches!(
            max_weight_set_packing(&h, 24),
            Err(Error::BudgetExceeded { .. })
        ));
        assert_eq!(max_weight_set_packing(&h, 25).unwrap().total_weight, 25);
    }

    #[test]
    fn hyperedges_are_validated() {
        let mut h = WeightedHypergraph::new(2);
        assert!(h.add_edge(vec![], 1).is_err());
        assert!(h.add_edge(vec![2], 1).is_err());
    }

    #[test]
    fn general_matching_triangle() {
        // Triangle plus a pendant: best is (1,2) + (0,3) = 4 + 2.
        let edges = [(0, 1, 3), (1, 2, 4), (0, 2, 3), (0, 3, 2)];
        let (chosen, weight) = max_weight_general_matching(4, &edges, 1 << 20).unwrap();
        assert_eq!(weight, 6);
        assert_eq!(chosen, vec![1, 3]);
    }

    fn brute_packing(edges: &[(Vec<usize>, u64)]) -> u64 {
        (0u32..1 << edges.len())
            .filter_map(|mask| {
                let picked: Vec<_> = (0..edges.len()).filter(|e| mask >> e & 1 == 1).collect();
                let mut seen = std::collections::HashSet::new();
                let disjoint = picked
                    .iter()
                    .all(|&e| edges[e].0.iter().all(|v| seen.insert(*v)));
                disjoint.then(|| picked.iter().map(|&e| edges[e].1).sum())
            })
            .max()
            .unwrap_or(0)
    }

    proptest! {
        #[test]
        fn bipartite_matches_brute_force(
            rows in 1usize..=6,
            cols in 1usize..=6,
            seed in proptest::collection::vec(0u64..=10, 36),
        ) {
            let weights: Vec<Vec<u64>> = (0..rows)
                .map(|l| (0..cols).map(|r| seed[l * 6 + r]).collect())
                .collect();
            let g = WeightedBipartiteGraph::from_matrix(&weights).unwrap();
            let m = max_weight_bipartite_matching(&g);
            prop_assert_eq!(m.total_weight, brute_bipartite(&weights));

            let mut lefts = std::collections::HashSet::new();
            let mut rights = std::collections::HashSet::new();
            for &(l, r) in &m.pairs {
                prop_assert!(lefts.insert(l) && rights.insert(r));
            }
            let recomputed: u64 = m.pairs.iter().map(|&(l, r)| weights[l][r]).sum();
            prop_assert_eq!(recomputed, m.total_weight);

            // Scaling keeps the tie-broken pair list.
            let scaled: Vec<Vec<u64>> = weights.iter().map(|r| r.iter().map(|w| w * 3).collect()).collect();
            let ms = max_weight_bipartite_matching(&WeightedBipartiteGraph::from_matrix(&scaled).unwrap());
            prop_assert_eq!(ms.total_weight, 3 * m.total_weight);
            prop_assert_eq!(ms.pairs, m.pairs);
        }

        #[test]
        fn packing_matches_brute_force(
            edges in proptest::collection::vec(
                (proptest::collection::btree_set(0usize..8, 1..4), 0u64..=10), 0..10),
        ) {
            let mut h = WeightedHypergraph::new(8);
            for (vs, w) in &edges {
                h.add_edge(vs.iter().copied().collect(), *w).unwrap();
            }
            let p = max_weight_set_packing(&h, 24).unwrap();
            prop_assert_eq!(p.total_weight, brute_packing(h.edges()));
            let mut seen = std::collections::HashSet::new();
            for &e in &p.edges {
                for v in &h.edges()[e].0 {
                    prop_assert!(seen.insert(*v));
                }
            }
            let recomputed: u64 = p.edges.iter().map(|&e| h.edges()[e].1).sum();
            prop_assert_eq!(recomputed, p.total_weight);

            let mut scaled = WeightedHypergraph::new(8);
            for (vs, w) in h.edges() {
                scaled.add_edge(vs.clone(), w * 5).unwrap();
            }
            let ps = max_weight_set_packing(&scaled, 24).unwrap();
            prop_assert_eq!(ps.total_weight, 5 * p.total_weight);
            prop_assert_eq!(ps.edges, p.edges);
        }

        #[test]
        fn general_matching_matches_packing(
            edges in proptest::collection::vec((0usize..7, 0usize..7, 0u64..=10), 0..12),
        ) {
            let edges: Vec<GraphEdge> = edges.into_iter().filter(|(u, v, _)| u != v).collect();
            let (chosen, weight) = max_weight_general_matching(7, &edges, 1 << 20).unwrap();
            let as_sets: Vec<(Vec<usize>, u64)> =
                edges.iter().map(|&(u, v, w)| (vec![u, v], w)).collect();
            prop_assert_eq!(weight, brute_packing(&as_sets));
            let mut seen = std::collections::HashSet::new();
            for &e in &chosen {
                prop_assert!(seen.insert(edges[e].0) && seen.insert(edges[e].1));
            }
        }
    }
}
