//! Ego networks and Chinese Whispers label propagation.
//!
//! Sense induction looks at one target word at a time: take its nearest
//! neighbors, connect the neighbors that are close to *each other*, and let
//! Chinese Whispers carve the graph into sense clusters. The target itself
//! stays out of its own graph — it would bridge every sense.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::embeddings::{EmbedError, EmbeddingTable, Space};

use super::{canonical_labels, ClusterAlgo, ClusterAssignment};

/// An undirected similarity graph: no self-loops, weights finite and
/// non-negative.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<BTreeMap<usize, f64>>,
}

impl SimilarityGraph {
    /// Creates a graph over the given (distinct) node names. Nodes are
    /// sorted internally so construction order never matters.
    pub fn new(nodes: impl IntoIterator<Item = String>) -> Self {
        let mut nodes: Vec<String> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let adj = vec![BTreeMap::new(); nodes.len()];
        SimilarityGraph { nodes, index, adj }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn weight(&self, u: &str, v: &str) -> Option<f64> {
        let (iu, iv) = (*self.index.get(u)?, *self.index.get(v)?);
        self.adj[iu].get(&iv).copied()
    }

    /// Adds the undirected edge `u—v`. Both nodes must exist; self-loops
    /// and bad weights are contract violations. Re-adding an edge keeps the
    /// heavier weight.
    pub fn add_edge(&mut self, u: &str, v: &str, w: f64) {
        assert!(w.is_finite() && w >= 0.0, "edge weight must be finite and non-negative");
        let iu = self.index[u];
        let iv = self.index[v];
        assert_ne!(iu, iv, "self-loops are not allowed");
        let cur = self.adj[iu].get(&iv).copied().unwrap_or(f64::NEG_INFINITY);
        if w > cur {
            self.adj[iu].insert(iv, w);
            self.adj[iv].insert(iu, w);
        }
    }
}

/// Builds the ego network of `w`: nodes are its `graph_size` nearest
/// neighbors (the word itself excluded); an edge connects neighbors `u`,`v`
/// when one is among the other's `granularity` nearest *within the node
/// set* and their cosine is positive. Edge weight is the cosine.
pub fn build_ego_graph(
    t: &EmbeddingTable,
    w: &str,
    graph_size: usize,
    granularity: usize,
) -> Result<SimilarityGraph, EmbedError> {
    let neighbors = t.nearest_neighbors(w, graph_size, Space::Word)?;
    let names: Vec<String> = neighbors.into_iter().map(|(n, _)| n).collect();
    let mut graph = SimilarityGraph::new(names.clone());
    // cosine among nodes, densest first per node
    let mut sims: Vec<Vec<(usize, f64)>> = Vec::with_capacity(names.len());
    for u in &names {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(names.len() - 1);
        for (j, v) in names.iter().enumerate() {
            if u == v {
                continue;
            }
            row.push((j, t.cosine(u, v, Space::Word).expect("nodes are vocabulary words")));
        }
        row.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        row.truncate(granularity);
        sims.push(row);
    }
    for (i, row) in sims.iter().enumerate() {
        // `names` order is not graph order; translate through the name
        let u = &names[i];
        for &(j, cos) in row {
            if cos > 0.0 {
                graph.add_edge(u, &names[j], cos);
            }
        }
    }
    Ok(graph)
}

/// A Chinese Whispers run: the discovered partition plus whether one more
/// full pass would change nothing.
#[derive(Debug, Clone)]
pub struct CwFit {
    pub assignment: ClusterAssignment,
    pub converged: bool,
}

/// Chinese Whispers label propagation: every node starts in its own class;
/// for `iterations` passes, nodes (in seeded shuffled order) adopt the
/// label with the highest total edge weight among their neighbors, ties
/// going to the smallest label. Isolated nodes keep their own label, so a
/// cluster can never span disconnected components.
pub fn chinese_whispers(g: &SimilarityGraph, iterations: usize, seed: u64) -> CwFit {
    let n = g.len();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..iterations {
        order.shuffle(&mut rng);
        for &i in &order {
            if let Some(best) = dominant_label(g, &labels, i) {
                labels[i] = best;
            }
        }
    }
    // converged iff a fixed-order pass would change nothing
    let mut probe = labels.clone();
    let mut converged = true;
    for i in 0..n {
        if let Some(best) = dominant_label(g, &probe, i) {
            if best != probe[i] {
                converged = false;
            }
            probe[i] = best;
        }
    }
    let assignment = canonical_labels(g.nodes(), &labels, ClusterAlgo::Cw, None);
    CwFit {
        assignment,
        converged,
    }
}

/// The label with the largest neighbor weight sum, smallest label on ties;
/// `None` for isolated nodes.
fn dominant_label(g: &SimilarityGraph, labels: &[usize], i: usize) -> Option<usize> {
    let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
    for (&j, &w) in &g.adj[i] {
        *sums.entry(labels[j]).or_insert(0.0) += w;
    }
    let mut best: Option<(usize, f64)> = None;
    for (&label, &sum) in &sums {
        // BTreeMap iterates labels ascending, so strict > keeps the smallest
        if best.map_or(true, |(_, bs)| sum > bs) {
            best = Some((label, sum));
        }
    }
    best.map(|(l, _)| l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Scheme;

    fn clique(g: &mut SimilarityGraph, members: &[&str], w: f64) {
        for (i, u) in members.iter().enumerate() {
            for v in &members[i + 1..] {
                g.add_edge(u, v, w);
            }
        }
    }

    #[test]
    fn graph_is_undirected_and_rejects_self_loops() {
        let mut g = SimilarityGraph::new(["a".to_string(), "b".to_string()]);
        g.add_edge("a", "b", 0.5);
        assert_eq!(g.weight("a", "b"), Some(0.5));
        assert_eq!(g.weight("b", "a"), Some(0.5));
        assert_eq!(g.edge_count(), 1);
        // heavier re-add wins
        g.add_edge("b", "a", 0.7);
        assert_eq!(g.weight("a", "b"), Some(0.7));
        g.add_edge("b", "a", 0.1);
        assert_eq!(g.weight("a", "b"), Some(0.7));
        let result = std::panic::catch_unwind(move || {
            let mut g2 = SimilarityGraph::new(["a".to_string()]);
            g2.add_edge("a", "a", 1.0);
        });
        assert!(result.is_err());
    }

    #[test]
    fn two_cliques_with_a_weak_bridge_stay_apart() {
        let names: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let mut g = SimilarityGraph::new(names.clone());
        let left: Vec<&str> = names[..5].iter().map(String::as_str).collect();
        let right: Vec<&str> = names[5..].iter().map(String::as_str).collect();
        clique(&mut g, &left, 1.0);
        clique(&mut g, &right, 1.0);
        g.add_edge("n0", "n5", 0.05);
        let fit = chinese_whispers(&g, 20, 1);
        assert_eq!(fit.assignment.k, 2);
        assert!(fit.converged);
        let l0 = fit.assignment.labels["n0"];
        for n in &names[..5] {
            assert_eq!(fit.assignment.labels[n.as_str()], l0);
        }
        assert_ne!(fit.assignment.labels["n5"], l0);
    }

    #[test]
    fn uniform_complete_graph_collapses_to_one_cluster() {
        let names: Vec<String> = (0..8).map(|i| format!("n{i}")).collect();
        let mut g = SimilarityGraph::new(names.clone());
        let all: Vec<&str> = names.iter().map(String::as_str).collect();
        clique(&mut g, &all, 1.0);
        let fit = chinese_whispers(&g, 20, 3);
        assert_eq!(fit.assignment.k, 1);
    }

    #[test]
    fn clusters_never_span_components() {
        for seed in 0..20u64 {
            let names: Vec<String> = (0..12).map(|i| format!("n{i:02}")).collect();
            let mut g = SimilarityGraph::new(names.clone());
            // three components of four nodes, arbitrary internal edges
            for comp in 0..3 {
                let base = comp * 4;
                let members: Vec<&str> =
                    names[base..base + 4].iter().map(String::as_str).collect();
                clique(&mut g, &members, 0.5 + comp as f64 * 0.1);
            }
            let fit = chinese_whispers(&g, 10, seed);
            for (w, &l) in &fit.assignment.labels {
                let comp = w[1..].parse::<usize>().unwrap() / 4;
                for (w2, &l2) in &fit.assignment.labels {
                    let comp2 = w2[1..].parse::<usize>().unwrap() / 4;
                    if l == l2 {
                        assert_eq!(comp, comp2, "{w} and {w2} share a label across components");
                    }
                }
            }
        }
    }

    #[test]
    fn isolated_nodes_keep_their_own_class() {
        let mut g = SimilarityGraph::new(["a".to_string(), "b".to_string(), "lone".to_string()]);
        g.add_edge("a", "b", 1.0);
        let fit = chinese_whispers(&g, 5, 1);
        assert_eq!(fit.assignment.k, 2);
        assert_eq!(fit.assignment.labels["a"], fit.assignment.labels["b"]);
        assert_ne!(fit.assignment.labels["lone"], fit.assignment.labels["a"]);
    }

    #[test]
    fn empty_graph_yields_empty_assignment() {
        let g = SimilarityGraph::new(Vec::<String>::new());
        let fit = chinese_whispers(&g, 5, 1);
        assert_eq!(fit.assignment.k, 0);
        assert!(fit.assignment.labels.is_empty());
        assert!(fit.converged);
    }

    fn table_two_groups() -> EmbeddingTable {
        // target w sits between two neighbor groups with disjoint support,
        // so cross-group cosines are exactly zero
        let mut entries = vec![("w".to_string(), vec![0.7, 0.0, 0.7, 0.0])];
        for i in 0..6 {
            let eps = i as f32 * 0.01;
            entries.push((format!("g1_{i}"), vec![1.0, eps, 0.0, 0.0]));
        }
        for i in 0..6 {
            let eps = i as f32 * 0.01;
            entries.push((format!("g2_{i}"), vec![0.0, 0.0, 1.0, eps]));
        }
        EmbeddingTable::from_vectors(entries, Scheme::None)
    }

    #[test]
    fn ego_graph_excludes_the_target_and_separates_groups() {
        let t = table_two_groups();
        let g = build_ego_graph(&t, "w", 12, 12).unwrap();
        assert_eq!(g.len(), 12);
        assert!(!g.nodes().contains(&"w".to_string()));
        // cross-group cosines are ~0 and never become edges
        for i in 0..6 {
            for j in 0..6 {
                let w = g.weight(&format!("g1_{i}"), &format!("g2_{j}"));
                assert!(w.is_none(), "unexpected cross edge g1_{i}-g2_{j}: {w:?}");
            }
        }
        // within-group edges exist with positive weight
        assert!(g.weight("g1_0", "g1_1").unwrap() > 0.9);
        let fit = chinese_whispers(&g, 15, 2);
        assert_eq!(fit.assignment.k, 2);
    }

    #[test]
    fn granularity_bounds_node_degree() {
        let t = table_two_groups();
        let g = build_ego_graph(&t, "w", 12, 2).unwrap();
        // each node nominated at most 2 partners; union semantics can raise
        // degree above 2 but the graph stays far from complete
        assert!(g.edge_count() <= 12 * 2);
        let unknown = build_ego_graph(&t, "missing", 5, 5);
        assert!(matches!(unknown, Err(EmbedError::UnknownWord(_))));
    }
}
