//! Labeled graphs with bitset adjacency, chordality via maximum cardinality
//! search, evaporation sequences, and gluing.

use crate::error::GraphError;
use crate::perm::Permutation;

/// A labeled graph: a sorted set of positive integer labels (not necessarily
/// contiguous) with symmetric adjacency stored as bitset rows over vertex
/// indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    verts: Vec<u32>,
    words: usize,
    adj: Vec<u64>, // row-major, verts.len() rows of `words` words
}

impl LabeledGraph {
    pub fn new(mut verts: Vec<u32>) -> Self {
        verts.sort_unstable();
        verts.dedup();
        debug_assert!(verts.iter().all(|&v| v >= 1));
        let m = verts.len();
        let words = m.div_ceil(64).max(1);
        LabeledGraph {
            verts,
            words,
            adj: vec![0u64; m * words],
        }
    }

    pub fn complete(verts: Vec<u32>) -> Self {
        let mut g = Self::new(verts);
        for i in 0..g.len() {
            for j in 0..i {
                g.set_edge_idx(i, j);
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts
    }

    pub fn index_of(&self, label: u32) -> Option<usize> {
        self.verts.binary_search(&label).ok()
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.adj[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    fn set_edge_idx(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.adj[i * self.words + j / 64] |= 1 << (j % 64);
        self.adj[j * self.words + i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn has_edge_idx(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn add_edge(&mut self, u: u32, v: u32) {
        assert_ne!(u, v, "no self-loops");
        let i = self.index_of(u).expect("unknown vertex");
        let j = self.index_of(v).expect("unknown vertex");
        self.set_edge_idx(i, j);
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(i), Some(j)) if i != j => self.has_edge_idx(i, j),
            _ => false,
        }
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for j in 1..self.len() {
            for i in 0..j {
                if self.has_edge_idx(i, j) {
                    out.push((self.verts[i], self.verts[j]));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len())
            .map(|i| self.row(i).iter().map(|w| w.count_ones() as usize).sum::<usize>())
            .sum::<usize>()
            / 2
    }

    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        let i = self.index_of(v).expect("unknown vertex");
        self.neighbors_idx(i).map(|j| self.verts[j]).collect()
    }

    fn neighbors_idx(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.row(i);
        (0..self.len()).filter(move |&j| row[j / 64] >> (j % 64) & 1 == 1)
    }

    pub fn degree(&self, v: u32) -> usize {
        let i = self.index_of(v).expect("unknown vertex");
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Do the given labels form a clique (every pair adjacent)?
    pub fn is_clique(&self, labels: &[u32]) -> bool {
        for (a, &u) in labels.iter().enumerate() {
            for &v in &labels[a + 1..] {
                if !self.has_edge(u, v) {
                    return false;
                }
            }
        }
        true
    }

    /// Induced subgraph on the given labels (labels absent from the graph are
    /// ignored).
    pub fn induced(&self, labels: &[u32]) -> LabeledGraph {
        let keep: Vec<u32> = labels
            .iter()
            .copied()
            .filter(|&v| self.index_of(v).is_some())
            .collect();
        let mut g = LabeledGraph::new(keep);
        for j in 1..g.len() {
            for i in 0..j {
                if self.has_edge(g.verts[i], g.verts[j]) {
                    g.set_edge_idx(i, j);
                }
            }
        }
        g
    }

    /// Remove the given labels.
    pub fn without(&self, labels: &[u32]) -> LabeledGraph {
        let keep: Vec<u32> = self
            .verts
            .iter()
            .copied()
            .filter(|v| !labels.contains(v))
            .collect();
        self.induced(&keep)
    }

    /// Union of vertex and edge sets.
    pub fn union(&self, other: &LabeledGraph) -> LabeledGraph {
        let mut verts = self.verts.clone();
        verts.extend_from_slice(&other.verts);
        let mut g = LabeledGraph::new(verts);
        for &(u, v) in &self.edges() {
            g.add_edge(u, v);
        }
        for &(u, v) in &other.edges() {
            g.add_edge(u, v);
        }
        g
    }

    /// Apply a label map built from `map(old) -> new`. The map must be
    /// injective on the vertex set; panics on collision (an internal bug).
    pub fn relabel(&self, map: impl Fn(u32) -> u32) -> LabeledGraph {
        let new_verts: Vec<u32> = self.verts.iter().map(|&v| map(v)).collect();
        {
            let mut sorted = new_verts.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), new_verts.len(), "relabel collision");
        }
        let mut g = LabeledGraph::new(new_verts);
        for (u, v) in self.edges() {
            g.add_edge(map(u), map(v));
        }
        g
    }

    /// Relabel by a permutation (labels beyond its n are fixed points).
    pub fn apply_perm(&self, p: &Permutation) -> LabeledGraph {
        self.relabel(|v| p.apply(v))
    }

    /// Connected components as sorted label sets, ordered by smallest label.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let m = self.len();
        let mut comp = vec![usize::MAX; m];
        let mut out: Vec<Vec<u32>> = Vec::new();
        for start in 0..m {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            comp[start] = id;
            let mut members = vec![self.verts[start]];
            while let Some(i) = stack.pop() {
                for j in self.neighbors_idx(i) {
                    if comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(self.verts[j]);
                        stack.push(j);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        !self.is_empty() && self.components().len() == 1
    }

    /// Is v simplicial (its neighborhood is a clique)?
    pub fn is_simplicial(&self, v: u32) -> bool {
        let nb = self.neighbors(v);
        self.is_clique(&nb)
    }

    /// Maximum cardinality search order (returned as a candidate perfect
    /// elimination ordering: first vertex eliminated first).
    pub fn mcs_order(&self) -> Vec<u32> {
        let m = self.len();
        let mut weight = vec![0usize; m];
        let mut picked = vec![false; m];
        let mut rev = Vec::with_capacity(m);
        for _ in 0..m {
            let mut best = usize::MAX;
            for i in 0..m {
                if !picked[i] && (best == usize::MAX || weight[i] > weight[best]) {
                    best = i;
                }
            }
            picked[best] = true;
            rev.push(self.verts[best]);
            for j in self.neighbors_idx(best) {
                if !picked[j] {
                    weight[j] += 1;
                }
            }
        }
        rev.reverse();
        rev
    }

    /// Chordality test: MCS order, then verify it is a perfect elimination
    /// ordering.
    pub fn is_chordal(&self) -> bool {
        let order = self.mcs_order();
        let mut pos = std::collections::HashMap::new();
        for (i, &v) in order.iter().enumerate() {
            pos.insert(v, i);
        }
        for (i, &v) in order.iter().enumerate() {
            let later: Vec<u32> = self
                .neighbors(v)
                .into_iter()
                .filter(|u| pos[u] > i)
                .collect();
            if !self.is_clique(&later) {
                return false;
            }
        }
        true
    }

    /// Maximal cliques along a PEO (for chordal graphs): the closed right
    /// neighborhoods N[v_i] ∩ {v_i, ...}, deduplicated by maximality.
    pub fn maximal_cliques(&self) -> Vec<Vec<u32>> {
        assert!(self.is_chordal());
        let order = self.mcs_order();
        let mut pos = std::collections::HashMap::new();
        for (i, &v) in order.iter().enumerate() {
            pos.insert(v, i);
        }
        let mut cliques: Vec<Vec<u32>> = Vec::new();
        for (i, &v) in order.iter().enumerate() {
            let mut c: Vec<u32> = self
                .neighbors(v)
                .into_iter()
                .filter(|u| pos[u] > i)
                .collect();
            c.push(v);
            c.sort_unstable();
            cliques.push(c);
        }
        // keep only maximal ones
        let mut out: Vec<Vec<u32>> = Vec::new();
        for c in &cliques {
            if !cliques
                .iter()
                .any(|d| d.len() > c.len() && c.iter().all(|v| d.contains(v)))
            {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        }
        out
    }
}

impl std::fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LabeledGraph(V={:?}, E={:?})", self.verts, self.edges())
    }
}

/// Glue two graphs whose vertex overlap is a clique in both.
pub fn glue(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<LabeledGraph, GraphError> {
    let overlap: Vec<u32> = g1
        .vertices()
        .iter()
        .copied()
        .filter(|v| g2.index_of(*v).is_some())
        .collect();
    if !g1.is_clique(&overlap) || !g2.is_clique(&overlap) {
        return Err(GraphError::OverlapNotClique);
    }
    Ok(g1.union(g2))
}

/// The order-preserving bijection between two equal-size sorted sets.
pub fn phi(a: &[u32], b: &[u32]) -> Result<Vec<(u32, u32)>, GraphError> {
    if a.len() != b.len() {
        return Err(GraphError::SizeMismatch(a.len(), b.len()));
    }
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(b.windows(2).all(|w| w[0] < w[1]));
    Ok(a.iter().copied().zip(b.iter().copied()).collect())
}

/// Evaporation sequence of a chordal graph with exception set X: repeatedly
/// remove all simplicial vertices outside X.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaporationSequence {
    pub layers: Vec<Vec<u32>>,
    pub exception: Vec<u32>,
}

impl EvaporationSequence {
    pub fn time(&self) -> usize {
        self.layers.len()
    }

    /// Last layer L_G(X), empty if the sequence is empty.
    pub fn last_layer(&self) -> &[u32] {
        self.layers.last().map(|l| l.as_slice()).unwrap_or(&[])
    }

    /// Evaporation time of a nonempty vertex subset: the largest layer index
    /// (1-based) meeting it; 0 if it meets no layer.
    pub fn subset_time(&self, s: &[u32]) -> usize {
        for (i, layer) in self.layers.iter().enumerate().rev() {
            if layer.iter().any(|v| s.contains(v)) {
                return i + 1;
            }
        }
        0
    }

    pub fn layer_of(&self, v: u32) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| l.contains(&v))
            .map(|i| i + 1)
    }
}

pub fn evaporation_sequence(
    g: &LabeledGraph,
    x: &[u32],
) -> Result<EvaporationSequence, GraphError> {
    if !g.is_clique(x) {
        return Err(GraphError::XNotClique);
    }
    let mut x_sorted = x.to_vec();
    x_sorted.sort_unstable();
    let mut current = g.clone();
    let mut layers = Vec::new();
    while current.len() > x_sorted.len() {
        let layer: Vec<u32> = current
            .vertices()
            .iter()
            .copied()
            .filter(|&v| !x_sorted.contains(&v) && current.is_simplicial(v))
            .collect();
        if layer.is_empty() {
            return Err(GraphError::NotChordal);
        }
        current = current.without(&layer);
        layers.push(layer);
    }
    Ok(EvaporationSequence {
        layers,
        exception: x_sorted,
    })
}

/// Is sigma (restricted to V(G)) an automorphism of G? Errors if sigma does
/// not map the vertex set to itself.
pub fn is_automorphism(g: &LabeledGraph, sigma: &Permutation) -> Result<bool, GraphError> {
    for &v in g.vertices() {
        if g.index_of(sigma.apply(v)).is_none() {
            return Err(GraphError::NotInvariant);
        }
    }
    for j in 1..g.len() {
        for i in 0..j {
            let (u, v) = (g.vertices()[i], g.vertices()[j]);
            if g.has_edge(u, v) != g.has_edge(sigma.apply(u), sigma.apply(v)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(labels: &[u32]) -> LabeledGraph {
        let mut g = LabeledGraph::new(labels.to_vec());
        for w in labels.windows(2) {
            g.add_edge(w[0], w[1]);
        }
        g
    }

    fn cycle(labels: &[u32]) -> LabeledGraph {
        let mut g = path(labels);
        g.add_edge(labels[0], *labels.last().unwrap());
        g
    }

    #[test]
    fn chordality_basics() {
        assert!(!cycle(&[1, 2, 3, 4]).is_chordal());
        assert!(LabeledGraph::complete(vec![1, 2, 3]).is_chordal());
        assert!(path(&[1, 2, 3, 4]).is_chordal());
        assert!(!cycle(&[1, 2, 3, 4, 5]).is_chordal());
        let mut c4_plus_chord = cycle(&[1, 2, 3, 4]);
        c4_plus_chord.add_edge(1, 3);
        assert!(c4_plus_chord.is_chordal());
    }

    #[test]
    fn evaporation_p4() {
        let g = path(&[1, 2, 3, 4]);
        let e = evaporation_sequence(&g, &[]).unwrap();
        assert_eq!(e.layers, vec![vec![1, 4], vec![2, 3]]);
        assert_eq!(e.time(), 2);

        let e = evaporation_sequence(&g, &[2]).unwrap();
        assert_eq!(e.layers, vec![vec![1, 4], vec![3]]);
        assert_eq!(e.last_layer(), &[3]);

        let k5 = LabeledGraph::complete(vec![1, 2, 3, 4, 5]);
        let e = evaporation_sequence(&k5, &[]).unwrap();
        assert_eq!(e.layers, vec![vec![1, 2, 3, 4, 5]]);

        // empty sequence iff V(G) = X
        let k2 = LabeledGraph::complete(vec![1, 2]);
        let e = evaporation_sequence(&k2, &[1, 2]).unwrap();
        assert_eq!(e.time(), 0);
        assert_eq!(e.last_layer(), &[] as &[u32]);
    }

    #[test]
    fn evaporation_errors() {
        let g = path(&[1, 2, 3, 4]);
        assert_eq!(
            evaporation_sequence(&g, &[1, 4]).unwrap_err(),
            GraphError::XNotClique
        );
        let c4 = cycle(&[1, 2, 3, 4]);
        assert_eq!(
            evaporation_sequence(&c4, &[]).unwrap_err(),
            GraphError::NotChordal
        );
    }

    #[test]
    fn glue_examples() {
        let mut t1 = LabeledGraph::complete(vec![1, 2, 3]);
        let t2 = LabeledGraph::complete(vec![2, 3, 4]);
        t1 = glue(&t1, &t2).unwrap();
        assert_eq!(t1.len(), 4);
        assert_eq!(t1.edge_count(), 5); // diamond: K4 minus one edge
        assert!(!t1.has_edge(1, 4));
        assert!(t1.is_chordal());

        let g1 = LabeledGraph::new(vec![1]);
        let g2 = LabeledGraph::new(vec![2]);
        let g = glue(&g1, &g2).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edge_count(), 0);

        // idempotence on a graph whose self-overlap is a clique
        let k3 = LabeledGraph::complete(vec![1, 2, 3]);
        assert_eq!(glue(&k3, &k3).unwrap(), k3);

        // overlap must be a clique
        let a = path(&[1, 2, 3]);
        let b = path(&[1, 3, 4]);
        assert_eq!(glue(&a, &b).unwrap_err(), GraphError::OverlapNotClique);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(
            phi(&[2, 5, 9], &[1, 3, 4]).unwrap(),
            vec![(2, 1), (5, 3), (9, 4)]
        );
        assert_eq!(phi(&[1, 2], &[1, 2]).unwrap(), vec![(1, 1), (2, 2)]);
        assert_eq!(phi(&[], &[]).unwrap(), vec![]);
        assert!(phi(&[1], &[]).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let k3 = LabeledGraph::complete(vec![1, 2, 3]);
        let rot = Permutation::parse("(1 2 3)", 3).unwrap();
        assert!(is_automorphism(&k3, &rot).unwrap());

        let p3 = path(&[1, 2, 3]);
        let swap_ends = Permutation::parse("(1 3)", 3).unwrap();
        assert!(is_automorphism(&p3, &swap_ends).unwrap());
        let swap12 = Permutation::parse("(1 2)", 3).unwrap();
        assert!(!is_automorphism(&p3, &swap12).unwrap());

        let g = LabeledGraph::new(vec![1, 2]);
        let bad = Permutation::parse("(2 3)", 3).unwrap();
        assert_eq!(is_automorphism(&g, &bad).unwrap_err(), GraphError::NotInvariant);
    }

    #[test]
    fn simplicial_pair_in_noncomplete_chordal() {
        // Lemma: every non-complete chordal graph has two non-adjacent
        // simplicial vertices.
        let g = path(&[1, 2, 3, 4]);
        let simp: Vec<u32> = g
            .vertices()
            .iter()
            .copied()
            .filter(|&v| g.is_simplicial(v))
            .collect();
        assert!(simp
            .iter()
            .any(|&u| simp.iter().any(|&v| u != v && !g.has_edge(u, v))));
    }

    #[test]
    fn maximal_clique_bound() {
        let g = path(&[1, 2, 3, 4]);
        assert!(g.maximal_cliques().len() <= 4);
        let k5 = LabeledGraph::complete(vec![1, 2, 3, 4, 5]);
        assert_eq!(k5.maximal_cliques().len(), 1);
    }
}
