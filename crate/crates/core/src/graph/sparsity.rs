use num_rational::Ratio;

use super::{EdgeOverlap, Graph, NodeId};

/// m(N(v)), the number of edges among the neighbors of `v`.
pub fn neighborhood_edge_count(g: &Graph, v: NodeId) -> usize {
    let nb = g.neighbors(v);
    nb.iter().map(|&u| super::sorted_intersection_len(g.neighbors(u), nb)).sum::<usize>() / 2
}

/// ζ for a node with neighborhood edge count `m` in a graph of max degree `delta`.
pub fn sparsity_from_edges(delta: usize, m: usize) -> Ratio<i64> {
    if delta == 0 {
        return Ratio::from_integer(0);
    }
    let d = delta as i64;
    Ratio::new(d * (d - 1) / 2 - m as i64, d)
}

/// Exact local sparsity ζ_v = (C(Δ,2) − m(N(v))) / Δ.
pub fn sparsity(g: &Graph, v: NodeId) -> Ratio<i64> {
    sparsity_from_edges(g.max_degree(), neighborhood_edge_count(g, v))
}

/// ζ_v for every node, sharing one common-neighbor pass.
pub fn all_sparsities(g: &Graph, overlap: &EdgeOverlap) -> Vec<Ratio<i64>> {
    (0..g.node_count() as NodeId)
        .map(|v| {
            let m: u64 = overlap.row(g, v).iter().map(|&c| c as u64).sum();
            sparsity_from_edges(g.max_degree(), (m / 2) as usize)
        })
        .collect()
}
