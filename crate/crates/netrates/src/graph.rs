//! Random network models: union graphs, components, cut probabilities and the
//! rate of consensus.
//!
//! The network process draws an i.i.d. sequence of simple undirected graphs
//! `G_t` on vertices `1..=n`. The key derived quantity is the rate of
//! consensus
//!
//! ```text
//! J = |log p*|,   p* = max { P(G_t in H) : H a graph collection with disconnected union }
//! ```
//!
//! A union graph is disconnected exactly when some vertex cut is crossed by no
//! edge of any member, and the most likely collection for a fixed cut is the
//! set of all support graphs avoiding that cut. So `p*` is found by maximizing
//! the single-draw cut-isolation probability over all `2^(n-1) - 1` cuts,
//! instead of searching over all `2^|support|` collections.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Vertex-count cap for exhaustive cut enumeration.
pub const CUT_ENUMERATION_CAP: usize = 24;

/// Simple undirected graph on vertices `1..=n`.
///
/// Edges are stored normalized as pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from a list of (possibly unordered) vertex pairs.
    ///
    /// Duplicate pairs collapse; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a, b));
            }
            for v in [a, b] {
                if v < 1 || v > n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeSet::new() }
    }

    /// Path graph `1 - 2 - ... - n`.
    pub fn chain(n: usize) -> Self {
        Self {
            n,
            edges: (1..n).map(|i| (i, i + 1)).collect(),
        }
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let mut edges = BTreeSet::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                edges.insert((i, j));
            }
        }
        Self { n, edges }
    }

    /// Star graph with `center` joined to every other vertex.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        Self::new(n, (1..=n).filter(|&v| v != center).map(|v| (center, v)))
    }

    /// Circulant graph where each vertex links to `degree/2` neighbors on each
    /// side; `degree` must be even and at most `n - 1`.
    pub fn circulant(n: usize, degree: usize) -> Result<Self> {
        if degree % 2 != 0 || degree > n.saturating_sub(1) {
            return Err(Error::Config(format!(
                "circulant degree must be even and < n; got degree {degree}, n {n}"
            )));
        }
        let mut edges = Vec::new();
        for v in 0..n {
            for k in 1..=(degree / 2) {
                edges.push((v + 1, (v + k) % n + 1));
            }
        }
        Self::new(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// True when every edge of `self` is an edge of `other` (same vertex set).
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.edges.is_subset(&other.edges)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self).len() <= 1
    }
}

/// Probability law over simple undirected graphs on a fixed vertex set.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphDistribution {
    /// Finite support listed with strictly positive probabilities summing to 1.
    Explicit(Vec<(Graph, f64)>),
    /// Every edge of `base` fails independently with probability `fail_prob`.
    IidFailures { base: Graph, fail_prob: f64 },
}

impl GraphDistribution {
    pub fn explicit(support: Vec<(Graph, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let n = support[0].0.n;
        let mut seen = BTreeSet::new();
        let mut sum = 0.0;
        for (g, p) in &support {
            if g.n != n {
                return Err(Error::MixedVertexCounts);
            }
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::ProbabilityOutOfRange(*p));
            }
            if !seen.insert(g.clone()) {
                return Err(Error::DuplicateSupportGraph);
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(sum));
        }
        Ok(Self::Explicit(support))
    }

    pub fn iid_failures(base: Graph, fail_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fail_prob) {
            return Err(Error::ProbabilityOutOfRange(fail_prob));
        }
        Ok(Self::IidFailures { base, fail_prob })
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Self::Explicit(support) => support[0].0.n,
            Self::IidFailures { base, .. } => base.n,
        }
    }
}

/// Set of distinct graphs sharing a vertex count, drawn from some support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCollection {
    graphs: BTreeSet<Graph>,
}

impl GraphCollection {
    pub fn new(graphs: impl IntoIterator<Item = Graph>) -> Result<Self> {
        let graphs: BTreeSet<Graph> = graphs.into_iter().collect();
        let mut counts = graphs.iter().map(|g| g.n);
        if let Some(first) = counts.next() {
            if counts.any(|n| n != first) {
                return Err(Error::MixedVertexCounts);
            }
        }
        Ok(Self { graphs })
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Graph> {
        self.graphs.iter()
    }
}

/// One side of a vertex cut; the cut separates `side` from its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSpec {
    side: BTreeSet<usize>,
}

impl CutSpec {
    pub fn new(side: impl IntoIterator<Item = usize>) -> Result<Self> {
        let side: BTreeSet<usize> = side.into_iter().collect();
        if side.is_empty() {
            return Err(Error::InvalidCut);
        }
        Ok(Self { side })
    }

    pub fn side(&self) -> &BTreeSet<usize> {
        &self.side
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Some(&v) = self.side.iter().find(|&&v| v < 1 || v > n) {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        if self.side.len() >= n {
            return Err(Error::InvalidCut);
        }
        Ok(())
    }

    fn crosses(&self, a: usize, b: usize) -> bool {
        self.side.contains(&a) != self.side.contains(&b)
    }
}

/// Union graph of a collection: shared vertex set, union of edge sets.
pub fn union_graph(c: &GraphCollection) -> Result<Graph> {
    let mut iter = c.graphs.iter();
    let first = iter.next().ok_or(Error::EmptyCollection)?;
    let mut edges = first.edges.clone();
    for g in iter {
        edges.extend(g.edges.iter().copied());
    }
    Ok(Graph { n: first.n, edges })
}

/// Maximal connected vertex sets, sorted by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n;
    let mut adj = vec![Vec::new(); n + 1];
    for &(a, b) in &g.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n + 1];
    let mut components = Vec::new();
    for start in 1..=n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut cell = Vec::new();
        while let Some(v) = stack.pop() {
            cell.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        cell.sort_unstable();
        components.push(cell);
    }
    components
}

/// Component `C_{i,H}` of node `i` in the union graph of the collection.
pub fn node_component(i: usize, c: &GraphCollection) -> Result<Vec<usize>> {
    let union = union_graph(c)?;
    if i < 1 || i > union.n {
        return Err(Error::VertexOutOfRange { vertex: i, n: union.n });
    }
    Ok(connected_components(&union)
        .into_iter()
        .find(|cell| cell.contains(&i))
        .expect("components partition the vertex set"))
}

/// Probability that a single draw lands in the collection: `p_H = sum over
/// members of p_member`.
pub fn collection_probability(c: &GraphCollection, d: &GraphDistribution) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::EmptyCollection);
    }
    match d {
        GraphDistribution::Explicit(support) => {
            let mut total = 0.0;
            for g in c.iter() {
                let p = support
                    .iter()
                    .find(|(h, _)| h == g)
                    .map(|(_, p)| *p)
                    .ok_or(Error::MemberOutsideSupport)?;
                total += p;
            }
            Ok(total)
        }
        GraphDistribution::IidFailures { base, fail_prob } => {
            let present = 1.0 - fail_prob;
            let mut total = 0.0;
            for g in c.iter() {
                if !g.is_subgraph_of(base) {
                    return Err(Error::MemberOutsideSupport);
                }
                let k = g.edge_count() as i32;
                let missing = (base.edge_count() - g.edge_count()) as i32;
                total += present.powi(k) * fail_prob.powi(missing);
            }
            Ok(total)
        }
    }
}

/// Probability that a single draw has no edge crossing the cut.
pub fn cut_isolation_probability(cut: &CutSpec, d: &GraphDistribution) -> Result<f64> {
    cut.validate(d.vertex_count())?;
    match d {
        GraphDistribution::Explicit(support) => Ok(support
            .iter()
            .filter(|(g, _)| !g.edges().any(|(a, b)| cut.crosses(a, b)))
            .map(|(_, p)| p)
            .sum()),
        GraphDistribution::IidFailures { base, fail_prob } => {
            let crossing = base.edges().filter(|&(a, b)| cut.crosses(a, b)).count();
            Ok(fail_prob.powi(crossing as i32))
        }
    }
}

/// Probability that node `i` has no online neighbor in a single draw.
pub fn isolation_probability(i: usize, d: &GraphDistribution) -> Result<f64> {
    let n = d.vertex_count();
    if i < 1 || i > n {
        return Err(Error::VertexOutOfRange { vertex: i, n });
    }
    cut_isolation_probability(&CutSpec::new([i])?, d)
}

/// Exact minimum edge cut (Stoer-Wagner with unit weights).
///
/// Returns 0 for disconnected graphs and for graphs with fewer than 2
/// vertices.
pub fn min_cut(g: &Graph) -> usize {
    min_cut_with_side(g).0
}

/// Minimum edge cut together with one side realizing it.
pub fn min_cut_with_side(g: &Graph) -> (usize, Vec<usize>) {
    let n = g.n;
    if n < 2 {
        return (0, Vec::new());
    }
    let components = connected_components(g);
    if components.len() > 1 {
        return (0, components[0].clone());
    }

    // Stoer-Wagner: repeat a maximum-adjacency phase, record the
    // cut-of-the-phase, merge the last two vertices.
    let mut w = vec![vec![0u64; n]; n];
    for (a, b) in g.edges() {
        w[a - 1][b - 1] += 1;
        w[b - 1][a - 1] += 1;
    }
    // groups[v] = original vertices currently merged into v
    let mut groups: Vec<Vec<usize>> = (1..=n).map(|v| vec![v]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    let mut best_side = Vec::new();

    while active.len() > 1 {
        let m = active.len();
        let mut in_a = vec![false; m];
        let mut key: Vec<u64> = active.iter().map(|&v| w[active[0]][v]).collect();
        in_a[0] = true;
        key[0] = 0;
        let mut prev = 0usize;
        let mut last = 0usize;
        for _ in 1..m {
            let mut pick = usize::MAX;
            for j in 0..m {
                if !in_a[j] && (pick == usize::MAX || key[j] > key[pick]) {
                    pick = j;
                }
            }
            prev = last;
            last = pick;
            in_a[pick] = true;
            let cut_of_phase = key[pick];
            key[pick] = 0;
            for j in 0..m {
                if !in_a[j] {
                    key[j] += w[active[pick]][active[j]];
                }
            }
            if in_a.iter().all(|&x| x) && cut_of_phase < best {
                best = cut_of_phase;
                best_side = groups[active[last]].clone();
            }
        }
        // merge `last` into `prev`
        let (s, t) = (active[prev], active[last]);
        let moved = std::mem::take(&mut groups[t]);
        groups[s].extend(moved);
        for j in 0..n {
            w[s][j] += w[t][j];
            w[j][s] += w[j][t];
        }
        active.remove(last);
    }
    best_side.sort_unstable();
    (best as usize, best_side)
}

/// Result of the rate-of-consensus computation.
#[derive(Debug, Clone)]
pub struct ConsensusRate {
    /// `J = |log p*|`; `f64::INFINITY` when every realization stays connected.
    pub rate: f64,
    /// Probability of the maximizing cut staying edge-free in one draw.
    pub isolation_prob: f64,
    /// Side of the maximizing cut (contains vertex 1); `None` when infinite.
    pub best_side: Option<BTreeSet<usize>>,
    /// Min-cut size of the base graph, for the i.i.d.-failures fast path.
    pub min_cut_edges: Option<usize>,
}

/// Rate of consensus `J`.
///
/// Explicit distributions go through exhaustive cut enumeration (capped at
/// [`CUT_ENUMERATION_CAP`] vertices); i.i.d. link failures use the min-cut
/// fast path `J = mincut * |log fail_prob|`, valid for any size.
pub fn rate_of_consensus(d: &GraphDistribution) -> Result<ConsensusRate> {
    match d {
        GraphDistribution::Explicit(_) => rate_of_consensus_enumerated(d),
        GraphDistribution::IidFailures { base, fail_prob } => {
            let (k, side) = min_cut_with_side(base);
            let rate = if k == 0 {
                0.0
            } else if *fail_prob == 0.0 {
                f64::INFINITY
            } else {
                k as f64 * fail_prob.ln().abs()
            };
            let isolation_prob = if rate.is_infinite() { 0.0 } else { (-rate).exp() };
            let best_side = if rate.is_infinite() {
                None
            } else if k == 0 {
                Some(side.into_iter().collect())
            } else {
                // normalize to the representation containing vertex 1
                let side: BTreeSet<usize> = side.into_iter().collect();
                Some(if side.contains(&1) {
                    side
                } else {
                    (1..=base.n).filter(|v| !side.contains(v)).collect()
                })
            };
            Ok(ConsensusRate {
                rate,
                isolation_prob,
                best_side,
                min_cut_edges: Some(k),
            })
        }
    }
}

/// Rate of consensus by exhaustive enumeration of all vertex cuts.
///
/// Works for both distribution kinds; requires `n <= 24`. Probabilities are
/// compared in the log domain and ties broken by the lexicographically
/// smallest side (sides are canonicalized to contain vertex 1).
pub fn rate_of_consensus_enumerated(d: &GraphDistribution) -> Result<ConsensusRate> {
    let n = d.vertex_count();
    if n > CUT_ENUMERATION_CAP {
        return Err(Error::TooManyVertices { n, cap: CUT_ENUMERATION_CAP });
    }
    if n < 2 {
        return Ok(ConsensusRate {
            rate: f64::INFINITY,
            isolation_prob: 0.0,
            best_side: None,
            min_cut_edges: None,
        });
    }

    // Edges annotated per support graph; bitmask bit v-1 set <=> vertex v in side.
    let crossing = |mask: u32, a: usize, b: usize| -> bool {
        ((mask >> (a - 1)) & 1) != ((mask >> (b - 1)) & 1)
    };
    let log_p_of = |mask: u32| -> f64 {
        match d {
            GraphDistribution::Explicit(support) => {
                let p: f64 = support
                    .iter()
                    .filter(|(g, _)| !g.edges().any(|(a, b)| crossing(mask, a, b)))
                    .map(|(_, p)| p)
                    .sum();
                if p > 0.0 {
                    p.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            GraphDistribution::IidFailures { base, fail_prob } => {
                let k = base.edges().filter(|&(a, b)| crossing(mask, a, b)).count();
                if k == 0 {
                    0.0
                } else if *fail_prob == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    k as f64 * fail_prob.ln()
                }
            }
        }
    };

    let side_of = |mask: u32| -> BTreeSet<usize> {
        (1..=n).filter(|v| (mask >> (v - 1)) & 1 == 1).collect()
    };

    let mut best_log_p = f64::NEG_INFINITY;
    let mut best_mask = None;
    // Sides containing vertex 1: masks 1 | (rest << 1), excluding the full set.
    for rest in 0..(1u32 << (n - 1)) - 1 {
        let mask = 1 | (rest << 1);
        let log_p = log_p_of(mask);
        if log_p == f64::NEG_INFINITY {
            continue;
        }
        let better = match best_mask {
            None => true,
            Some(prev) => {
                log_p > best_log_p
                    || (log_p == best_log_p && side_of(mask) < side_of(prev))
            }
        };
        if better {
            best_log_p = log_p;
            best_mask = Some(mask);
        }
    }

    let min_cut_edges = match d {
        GraphDistribution::IidFailures { base, .. } => Some(min_cut(base)),
        GraphDistribution::Explicit(_) => None,
    };
    match best_mask {
        None => Ok(ConsensusRate {
            rate: f64::INFINITY,
            isolation_prob: 0.0,
            best_side: None,
            min_cut_edges,
        }),
        Some(mask) => Ok(ConsensusRate {
            rate: -best_log_p,
            isolation_prob: best_log_p.exp(),
            best_side: Some(side_of(mask)),
            min_cut_edges,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(n, edges.iter().copied()).unwrap()
    }

    fn alternating_links() -> GraphDistribution {
        GraphDistribution::explicit(vec![
            (g(3, &[(1, 2)]), 0.8),
            (g(3, &[(2, 3)]), 0.2),
        ])
        .unwrap()
    }

    #[test]
    fn graph_rejects_self_loops_and_bad_vertices() {
        assert!(matches!(Graph::new(3, [(1, 1)]), Err(Error::SelfLoop(1, 1))));
        assert!(matches!(
            Graph::new(3, [(0, 2)]),
            Err(Error::VertexOutOfRange { vertex: 0, n: 3 })
        ));
        assert!(matches!(
            Graph::new(3, [(2, 4)]),
            Err(Error::VertexOutOfRange { vertex: 4, n: 3 })
        ));
    }

    #[test]
    fn graph_normalizes_and_dedups_edges() {
        let a = Graph::new(3, [(2, 1), (1, 2)]).unwrap();
        assert_eq!(a.edge_count(), 1);
        assert!(a.has_edge(1, 2));
        assert!(a.has_edge(2, 1));
    }

    #[test]
    fn union_of_two_singletons() {
        let c = GraphCollection::new([g(3, &[(1, 2)]), g(3, &[(2, 3)])]).unwrap();
        let u = union_graph(&c).unwrap();
        assert_eq!(u, g(3, &[(1, 2), (2, 3)]));
    }

    #[test]
    fn union_of_singleton_is_identity() {
        let member = g(4, &[(1, 3), (2, 4)]);
        let c = GraphCollection::new([member.clone()]).unwrap();
        assert_eq!(union_graph(&c).unwrap(), member);
    }

    #[test]
    fn union_of_empty_graphs_is_empty_graph() {
        let c = GraphCollection::new([Graph::empty(3)]).unwrap();
        assert_eq!(union_graph(&c).unwrap(), Graph::empty(3));
    }

    #[test]
    fn union_of_empty_collection_errors() {
        let c = GraphCollection::new([]).unwrap();
        assert!(matches!(union_graph(&c), Err(Error::EmptyCollection)));
    }

    #[test]
    fn components_of_chain() {
        assert_eq!(connected_components(&Graph::chain(3)), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn components_of_edgeless_graph() {
        assert_eq!(
            connected_components(&Graph::empty(3)),
            vec![vec![1], vec![2], vec![3]]
        );
    }

    #[test]
    fn components_of_single_edge_on_four() {
        assert_eq!(
            connected_components(&g(4, &[(1, 2)])),
            vec![vec![1, 2], vec![3], vec![4]]
        );
    }

    #[test]
    fn node_component_isolated_node() {
        let c = GraphCollection::new([g(3, &[(1, 2)])]).unwrap();
        assert_eq!(node_component(3, &c).unwrap(), vec![3]);
        assert_eq!(node_component(2, &c).unwrap(), vec![1, 2]);
    }

    #[test]
    fn node_component_connected_union() {
        let c = GraphCollection::new([g(3, &[(1, 2)]), g(3, &[(2, 3)])]).unwrap();
        assert_eq!(node_component(1, &c).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn node_component_checks_vertex_range() {
        let c = GraphCollection::new([g(3, &[(1, 2)])]).unwrap();
        assert!(node_component(4, &c).is_err());
    }

    #[test]
    fn collection_probability_explicit() {
        let d = alternating_links();
        let only_b = GraphCollection::new([g(3, &[(2, 3)])]).unwrap();
        assert!((collection_probability(&only_b, &d).unwrap() - 0.2).abs() < 1e-15);

        let full = GraphCollection::new([g(3, &[(1, 2)]), g(3, &[(2, 3)])]).unwrap();
        assert!((collection_probability(&full, &d).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collection_probability_iid_empty_graph() {
        let q = 0.37;
        let d = GraphDistribution::iid_failures(Graph::chain(3), q).unwrap();
        let c = GraphCollection::new([Graph::empty(3)]).unwrap();
        assert!((collection_probability(&c, &d).unwrap() - q * q).abs() < 1e-15);
    }

    #[test]
    fn collection_probability_rejects_outsiders() {
        let d = alternating_links();
        let c = GraphCollection::new([g(3, &[(1, 3)])]).unwrap();
        assert!(matches!(
            collection_probability(&c, &d),
            Err(Error::MemberOutsideSupport)
        ));
    }

    #[test]
    fn collection_probability_additive_over_disjoint_collections() {
        let q = 0.25;
        let d = GraphDistribution::iid_failures(Graph::chain(3), q).unwrap();
        let a = GraphCollection::new([Graph::empty(3), g(3, &[(1, 2)])]).unwrap();
        let b = GraphCollection::new([g(3, &[(2, 3)]), Graph::chain(3)]).unwrap();
        let all = GraphCollection::new([
            Graph::empty(3),
            g(3, &[(1, 2)]),
            g(3, &[(2, 3)]),
            Graph::chain(3),
        ])
        .unwrap();
        let pa = collection_probability(&a, &d).unwrap();
        let pb = collection_probability(&b, &d).unwrap();
        let pall = collection_probability(&all, &d).unwrap();
        assert!((pa + pb - pall).abs() < 1e-15);
        assert!((pall - 1.0).abs() < 1e-12, "chain support sums to 1");
    }

    #[test]
    fn min_cut_of_chain_is_one() {
        assert_eq!(min_cut(&Graph::chain(3)), 1);
        assert_eq!(min_cut(&Graph::chain(7)), 1);
    }

    #[test]
    fn min_cut_of_circulant_is_degree() {
        for (n, d) in [(5, 2), (7, 4), (9, 6)] {
            assert_eq!(min_cut(&Graph::circulant(n, d).unwrap()), d);
        }
    }

    #[test]
    fn min_cut_of_disconnected_graph_is_zero() {
        assert_eq!(min_cut(&g(4, &[(1, 2)])), 0);
    }

    #[test]
    fn min_cut_of_complete_graph() {
        assert_eq!(min_cut(&Graph::complete(5)), 4);
    }

    /// Brute-force oracle: smallest crossing-edge count over all cuts.
    fn min_cut_exhaustive(g: &Graph) -> usize {
        let n = g.vertex_count();
        let mut best = usize::MAX;
        for rest in 0..(1u32 << (n - 1)) - 1 {
            let mask = 1 | (rest << 1);
            let k = g
                .edges()
                .filter(|&(a, b)| ((mask >> (a - 1)) & 1) != ((mask >> (b - 1)) & 1))
                .count();
            best = best.min(k);
        }
        best
    }

    #[test]
    fn stoer_wagner_matches_exhaustive_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(2..=9);
            let mut edges = Vec::new();
            for a in 1..=n {
                for b in (a + 1)..=n {
                    if rng.gen_bool(0.5) {
                        edges.push((a, b));
                    }
                }
            }
            let graph = Graph::new(n, edges).unwrap();
            assert_eq!(
                min_cut(&graph),
                min_cut_exhaustive(&graph),
                "mismatch on {graph:?}"
            );
        }
    }

    #[test]
    fn min_cut_side_realizes_the_cut_value() {
        let graph = Graph::circulant(8, 2).unwrap();
        let (k, side) = min_cut_with_side(&graph);
        let side: BTreeSet<usize> = side.into_iter().collect();
        let crossing = graph
            .edges()
            .filter(|&(a, b)| side.contains(&a) != side.contains(&b))
            .count();
        assert_eq!(crossing, k);
    }

    #[test]
    fn cut_isolation_probability_explicit() {
        let d = alternating_links();
        let side3 = CutSpec::new([3]).unwrap();
        assert!((cut_isolation_probability(&side3, &d).unwrap() - 0.8).abs() < 1e-15);
        let side2 = CutSpec::new([2]).unwrap();
        assert_eq!(cut_isolation_probability(&side2, &d).unwrap(), 0.0);
    }

    #[test]
    fn cut_isolation_probability_iid_single_crossing_edge() {
        let q = (-5.0f64).exp();
        let d = GraphDistribution::iid_failures(Graph::chain(3), q).unwrap();
        let side1 = CutSpec::new([1]).unwrap();
        assert!((cut_isolation_probability(&side1, &d).unwrap() - q).abs() < 1e-18);
    }

    #[test]
    fn cut_spec_validation() {
        assert!(CutSpec::new([]).is_err());
        let d = alternating_links();
        let all = CutSpec::new([1, 2, 3]).unwrap();
        assert!(matches!(
            cut_isolation_probability(&all, &d),
            Err(Error::InvalidCut)
        ));
    }

    #[test]
    fn rate_of_consensus_chain_fast_and_enumerated() {
        let d = GraphDistribution::iid_failures(Graph::chain(3), (-5.0f64).exp()).unwrap();
        let fast = rate_of_consensus(&d).unwrap();
        let enumerated = rate_of_consensus_enumerated(&d).unwrap();
        assert!((fast.rate - 5.0).abs() < 1e-12);
        assert!((enumerated.rate - 5.0).abs() < 1e-12);
        assert_eq!(fast.min_cut_edges, Some(1));
        assert_eq!(enumerated.best_side, Some([1].into_iter().collect()));
    }

    #[test]
    fn rate_of_consensus_explicit_alternating_links() {
        let d = alternating_links();
        let r = rate_of_consensus(&d).unwrap();
        assert!((r.rate - 0.8f64.ln().abs()).abs() < 1e-15);
        assert!((r.isolation_prob - 0.8).abs() < 1e-15);
        // side {3} canonicalized as the side containing vertex 1
        assert_eq!(r.best_side, Some([1, 2].into_iter().collect()));
    }

    #[test]
    fn rate_of_consensus_always_connected_is_infinite() {
        let d = GraphDistribution::explicit(vec![(Graph::chain(3), 1.0)]).unwrap();
        let r = rate_of_consensus(&d).unwrap();
        assert!(r.rate.is_infinite());
        assert_eq!(r.isolation_prob, 0.0);
        assert!(r.best_side.is_none());

        let never_fail = GraphDistribution::iid_failures(Graph::chain(4), 0.0).unwrap();
        assert!(rate_of_consensus(&never_fail).unwrap().rate.is_infinite());
    }

    #[test]
    fn rate_of_consensus_disconnected_base_is_zero() {
        let d = GraphDistribution::iid_failures(g(4, &[(1, 2)]), 0.3).unwrap();
        assert_eq!(rate_of_consensus(&d).unwrap().rate, 0.0);
        assert_eq!(rate_of_consensus_enumerated(&d).unwrap().rate, 0.0);
    }

    #[test]
    fn rate_of_consensus_enumeration_cap() {
        let d = GraphDistribution::explicit(vec![(Graph::chain(25), 1.0)]).unwrap();
        assert!(matches!(
            rate_of_consensus_enumerated(&d),
            Err(Error::TooManyVertices { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn fast_path_agrees_with_enumeration_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..30 {
            let n = rng.gen_range(2..=8);
            let mut edges = Vec::new();
            for a in 1..=n {
                for b in (a + 1)..=n {
                    if rng.gen_bool(0.6) {
                        edges.push((a, b));
                    }
                }
            }
            let base = Graph::new(n, edges).unwrap();
            let q = rng.gen_range(0.05..0.95);
            let d = GraphDistribution::iid_failures(base, q).unwrap();
            let fast = rate_of_consensus(&d).unwrap().rate;
            let enumerated = rate_of_consensus_enumerated(&d).unwrap().rate;
            assert!(
                (fast - enumerated).abs() < 1e-12,
                "trial {trial}: fast {fast} vs enumerated {enumerated}"
            );
        }
    }

    #[test]
    fn isolation_probability_pendant_and_circulant() {
        let q = 0.3;
        let star = Graph::star(4, 1).unwrap();
        let d = GraphDistribution::iid_failures(star, q).unwrap();
        assert!((isolation_probability(2, &d).unwrap() - q).abs() < 1e-15);

        let circ = Graph::circulant(6, 4).unwrap();
        let d = GraphDistribution::iid_failures(circ, q).unwrap();
        assert!((isolation_probability(1, &d).unwrap() - q.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn isolation_probability_never_failing_edge_is_zero() {
        let d = GraphDistribution::iid_failures(Graph::chain(3), 0.0).unwrap();
        assert_eq!(isolation_probability(1, &d).unwrap(), 0.0);
    }

    #[test]
    fn rate_bounded_by_any_isolation_cut() {
        let d = alternating_links();
        let j = rate_of_consensus(&d).unwrap().rate;
        for i in 1..=3 {
            let p = isolation_probability(i, &d).unwrap();
            if p > 0.0 {
                assert!(j <= p.ln().abs() + 1e-12, "node {i}: J = {j}, |log p| = {}", p.ln().abs());
            }
        }
    }

    #[test]
    fn union_graph_is_monotone_in_the_collection() {
        let small = GraphCollection::new([g(4, &[(1, 2)])]).unwrap();
        let large = GraphCollection::new([g(4, &[(1, 2)]), g(4, &[(3, 4)])]).unwrap();
        let u_small = union_graph(&small).unwrap();
        let u_large = union_graph(&large).unwrap();
        assert!(u_small.is_subgraph_of(&u_large));
    }
}
