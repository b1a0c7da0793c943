//! Static graphs, palettes and coloring instances.

mod clique;
pub mod generators;
pub mod io;
pub mod named;
mod overlap;
mod sparsity;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clique::{clique_number, clique_number_lb_check, CLIQUE_EXACT_LIMIT};
pub use generators::{generate, GenSpec};
pub use overlap::EdgeOverlap;
pub use sparsity::{all_sparsities, neighborhood_edge_count, sparsity, sparsity_from_edges};

pub type NodeId = u32;
pub type Color = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("endpoint {0} out of range for {1} nodes")]
    OutOfRange(NodeId, usize),
    #[error("instance too large for exact clique number ({0} nodes)")]
    InstanceTooLarge(usize),
    #[error("palette error: {0}")]
    Palette(String),
}

/// Undirected simple graph in compressed adjacency form. Neighbor lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    adj: Vec<NodeId>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph, rejecting self-loops and duplicate edges.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Graph, GraphError> {
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::OutOfRange(x, n));
                }
            }
        }
        let g = Self::build(n, edges.iter().copied());
        if g.adj.len() != 2 * edges.len() {
            // Locate one duplicate for the error message.
            let mut seen: Vec<(NodeId, NodeId)> =
                edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
            seen.sort_unstable();
            let dup = seen.windows(2).find(|w| w[0] == w[1]).map(|w| w[0]).unwrap();
            return Err(GraphError::DuplicateEdge(dup.0, dup.1));
        }
        Ok(g)
    }

    /// Builds a graph, silently dropping self-loops and duplicate edges.
    pub fn from_edges_dedup(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Graph {
        Self::build(n, edges.into_iter().filter(|&(u, v)| u != v && (u as usize) < n && (v as usize) < n))
    }

    fn build(n: usize, edges: impl Iterator<Item = (NodeId, NodeId)>) -> Graph {
        let mut lists: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        let mut max_degree = 0;
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            max_degree = max_degree.max(l.len());
            adj.extend_from_slice(&l);
            offsets.push(adj.len());
        }
        Graph { offsets, adj, max_degree }
    }

    pub fn empty(n: usize) -> Graph {
        Graph { offsets: vec![0; n + 1], adj: Vec::new(), max_degree: 0 }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Offset of `v`'s first slot in the flat adjacency array.
    pub fn slot_offset(&self, v: NodeId) -> usize {
        self.offsets[v as usize]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Position of `v` inside `u`'s neighbor list.
    pub fn neighbor_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.neighbors(u).binary_search(&v).ok()
    }

    /// Edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId)
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// m(S): number of edges with both endpoints in `set`. `set` must be sorted.
    pub fn induced_edge_count(&self, set: &[NodeId]) -> usize {
        let mut count = 0;
        for &u in set {
            count += self.neighbors(u).iter().filter(|&&v| v > u && set.binary_search(&v).is_ok()).count();
        }
        count
    }

    pub fn common_neighbor_count(&self, u: NodeId, v: NodeId) -> usize {
        sorted_intersection_len(self.neighbors(u), self.neighbors(v))
    }

    /// Induced subgraph on `nodes` (sorted); returned ids are positions in `nodes`.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Graph {
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in self.neighbors(u) {
                if v > u {
                    if let Ok(j) = nodes.binary_search(&v) {
                        edges.push((i as NodeId, j as NodeId));
                    }
                }
            }
        }
        Graph::build(nodes.len(), edges.into_iter())
    }

    /// Connected components of the subgraph induced by nodes with `mask[v]`.
    pub fn components_of(&self, mask: &[bool]) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if !mask[s] || seen[s] {
                continue;
            }
            let mut comp = Vec::new();
            seen[s] = true;
            stack.push(s as NodeId);
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in self.neighbors(u) {
                    if mask[v as usize] && !seen[v as usize] {
                        seen[v as usize] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

pub(crate) fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Ordered set of color ids available to a node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Palette {
    /// The contiguous block `start..start+len`.
    Range { start: Color, len: u64 },
    /// An explicit sorted list without duplicates.
    List(Arc<[Color]>),
}

impl Palette {
    pub fn range(len: u64) -> Palette {
        Palette::Range { start: 0, len }
    }

    /// Sorts the colors and rejects duplicates.
    pub fn from_colors(mut colors: Vec<Color>) -> Result<Palette, GraphError> {
        colors.sort_unstable();
        if colors.windows(2).any(|w| w[0] == w[1]) {
            return Err(GraphError::Palette("duplicate color".into()));
        }
        Ok(Palette::List(colors.into()))
    }

    pub fn len(&self) -> usize {
        match self {
            Palette::Range { len, .. } => *len as usize,
            Palette::List(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, c: Color) -> Option<usize> {
        match self {
            Palette::Range { start, len } => (c >= *start && c - start < *len).then(|| (c - start) as usize),
            Palette::List(cs) => cs.binary_search(&c).ok(),
        }
    }

    pub fn contains(&self, c: Color) -> bool {
        self.position(c).is_some()
    }

    pub fn color_at(&self, pos: usize) -> Color {
        match self {
            Palette::Range { start, .. } => start + pos as Color,
            Palette::List(cs) => cs[pos],
        }
    }

    pub fn max_color(&self) -> Option<Color> {
        (!self.is_empty()).then(|| self.color_at(self.len() - 1))
    }

    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        (0..self.len()).map(move |i| self.color_at(i))
    }

    pub fn to_vec(&self) -> Vec<Color> {
        self.iter().collect()
    }

    /// Number of colors of `self` missing from `other`.
    pub fn difference_len(&self, other: &Palette) -> usize {
        match (self, other) {
            (Palette::Range { start: a, len: la }, Palette::Range { start: b, len: lb }) => {
                let lo = (*a).max(*b);
                let hi = (a + la).min(b + lb);
                (*la as usize) - hi.saturating_sub(lo) as usize
            }
            (Palette::List(x), Palette::List(y)) => {
                let mut i = 0;
                let mut miss = 0;
                for &c in x.iter() {
                    while i < y.len() && y[i] < c {
                        i += 1;
                    }
                    if i >= y.len() || y[i] != c {
                        miss += 1;
                    }
                }
                miss
            }
            _ => self.iter().filter(|&c| !other.contains(c)).count(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    DeltaPlusOne,
    DeltaPlusOneList,
    DegPlusOneList,
    EdgeColoringLifted,
}

/// Facts a generator knows by construction.
#[derive(Clone, Debug, Default)]
pub struct InstanceMeta {
    pub description: String,
    /// Clique number when known by construction.
    pub clique_number: Option<usize>,
    /// Max degree of the base graph for line-graph lifts.
    pub base_max_degree: Option<usize>,
    /// Vertex partition for transversal instances.
    pub parts: Option<Vec<Vec<NodeId>>>,
}

#[derive(Clone, Debug)]
pub struct ColoringInstance {
    pub graph: Graph,
    pub palettes: Vec<Palette>,
    /// Size of the color space; every palette lies in `0..color_space`.
    pub color_space: u64,
    pub variant: Variant,
    pub meta: InstanceMeta,
}

impl ColoringInstance {
    /// Non-list instance with palettes `{0..Δ}`.
    pub fn delta_plus_one(graph: Graph) -> ColoringInstance {
        let k = graph.max_degree() as u64 + 1;
        ColoringInstance {
            palettes: vec![Palette::range(k); graph.node_count()],
            graph,
            color_space: k,
            variant: Variant::DeltaPlusOne,
            meta: InstanceMeta::default(),
        }
    }

    pub fn with_palettes(graph: Graph, palettes: Vec<Palette>, color_space: u64, variant: Variant) -> Result<Self, GraphError> {
        let inst = ColoringInstance { graph, palettes, color_space, variant, meta: InstanceMeta::default() };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.graph.node_count()
    }

    pub fn delta(&self) -> usize {
        self.graph.max_degree()
    }

    /// Checks palette ranges and the size constraint of the variant.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.palettes.len() != self.graph.node_count() {
            return Err(GraphError::Palette("one palette per node required".into()));
        }
        let delta = self.graph.max_degree();
        for (v, p) in self.palettes.iter().enumerate() {
            if let Some(mc) = p.max_color() {
                if mc >= self.color_space {
                    return Err(GraphError::Palette(format!("node {v}: color {mc} outside color space")));
                }
            }
            let need = match self.variant {
                Variant::DegPlusOneList => self.graph.degree(v as NodeId) + 1,
                _ => delta + 1,
            };
            if p.len() < need {
                return Err(GraphError::Palette(format!("node {v}: palette size {} < {need}", p.len())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert_eq!(Graph::from_edges(3, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Graph::from_edges(3, &[(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1)));
        assert!(matches!(Graph::from_edges(2, &[(0, 2)]), Err(GraphError::OutOfRange(2, 2))));
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = Graph::from_edges(4, &[(2, 0), (0, 1), (3, 0)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.max_degree(), 3);
        assert!(g.has_edge(1, 0) && !g.has_edge(1, 2));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn palette_difference_matches_set_difference() {
        let a = Palette::range(5);
        let b = Palette::Range { start: 3, len: 5 };
        assert_eq!(a.difference_len(&b), 3);
        let l = Palette::from_colors(vec![0, 2, 9]).unwrap();
        assert_eq!(l.difference_len(&a), 1);
        assert_eq!(a.difference_len(&l), 3);
        assert!(Palette::from_colors(vec![1, 1]).is_err());
    }

    #[test]
    fn components_respect_mask() {
        let g = named::path(5);
        let comps = g.components_of(&[true, true, false, true, true]);
        assert_eq!(comps, vec![vec![0, 1], vec![3, 4]]);
    }
}
