use num_rational::Ratio;

use super::{sparsity, Graph, GraphError, NodeId};

/// Largest instance for which the exact clique number is computed.
pub const CLIQUE_EXACT_LIMIT: usize = 200;

/// Exact clique number by Bron–Kerbosch with pivoting.
pub fn clique_number(g: &Graph) -> Result<usize, GraphError> {
    let n = g.node_count();
    if n > CLIQUE_EXACT_LIMIT {
        return Err(GraphError::InstanceTooLarge(n));
    }
    if n == 0 {
        return Ok(0);
    }
    let words = n.div_ceil(64);
    let mut adj = vec![vec![0u64; words]; n];
    for (u, row) in adj.iter_mut().enumerate() {
        for &v in g.neighbors(u as NodeId) {
            row[v as usize / 64] |= 1 << (v % 64);
        }
    }
    let mut p = vec![0u64; words];
    for v in 0..n {
        p[v / 64] |= 1 << (v % 64);
    }
    let mut best = 0;
    expand(&adj, 0, p, vec![0u64; words], &mut best);
    Ok(best)
}

fn count(s: &[u64]) -> usize {
    s.iter().map(|w| w.count_ones() as usize).sum()
}

fn expand(adj: &[Vec<u64>], size: usize, p: Vec<u64>, x: Vec<u64>, best: &mut usize) {
    if count(&p) == 0 {
        if count(&x) == 0 {
            *best = (*best).max(size);
        }
        return;
    }
    if size + count(&p) <= *best {
        return;
    }
    // Pivot: the vertex of P ∪ X with most neighbors in P.
    let mut pivot = 0;
    let mut pivot_deg = usize::MAX;
    for (wi, (&pw, &xw)) in p.iter().zip(&x).enumerate() {
        let mut bits = pw | xw;
        while bits != 0 {
            let u = wi * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let d: usize = p.iter().zip(&adj[u]).map(|(a, b)| (a & b).count_ones() as usize).sum();
            if pivot_deg == usize::MAX || d > pivot_deg {
                pivot = u;
                pivot_deg = d;
            }
        }
    }
    let mut p = p;
    let mut x = x;
    let candidates: Vec<u64> = p.iter().zip(&adj[pivot]).map(|(a, b)| a & !b).collect();
    for (wi, &cw) in candidates.iter().enumerate() {
        let mut bits = cw;
        while bits != 0 {
            let v = wi * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let np: Vec<u64> = p.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
            let nx: Vec<u64> = x.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
            expand(adj, size + 1, np, nx, best);
            p[v / 64] &= !(1 << (v % 64));
            x[v / 64] |= 1 << (v % 64);
        }
    }
}

/// Checks ζ_v ≥ Δ/ω − 1 for every node, with ω computed exactly.
pub fn clique_number_lb_check(g: &Graph) -> Result<bool, GraphError> {
    let omega = clique_number(g)?;
    if omega == 0 {
        return Ok(true);
    }
    let bound = Ratio::new(g.max_degree() as i64, omega as i64) - 1;
    Ok((0..g.node_count() as NodeId).all(|v| sparsity(g, v) >= bound))
}
