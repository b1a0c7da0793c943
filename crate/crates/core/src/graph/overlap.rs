use super::{Graph, NodeId};

/// Common-neighbor counts |N(u) ∩ N(v)| for every edge, indexed by adjacency slot.
#[derive(Clone, Debug)]
pub struct EdgeOverlap {
    counts: Vec<u32>,
}

const BITSET_NODE_LIMIT: usize = 16_384;

impl EdgeOverlap {
    pub fn compute(g: &Graph) -> EdgeOverlap {
        let n = g.node_count();
        let avg = if n == 0 { 0 } else { 2 * g.edge_count() / n };
        let counts = if n <= BITSET_NODE_LIMIT && avg * 64 >= n && n > 0 {
            Self::with_bitsets(g)
        } else {
            Self::with_marks(g)
        };
        EdgeOverlap { counts }
    }

    fn with_marks(g: &Graph) -> Vec<u32> {
        let n = g.node_count();
        let mut counts = vec![0u32; 2 * g.edge_count()];
        let mut mark = vec![u32::MAX; n];
        for u in 0..n as NodeId {
            for &x in g.neighbors(u) {
                mark[x as usize] = u;
            }
            let off_u = g.slot_offset(u);
            for (i, &v) in g.neighbors(u).iter().enumerate() {
                if v < u {
                    continue;
                }
                let c = g.neighbors(v).iter().filter(|&&x| mark[x as usize] == u).count() as u32;
                counts[off_u + i] = c;
                let j = g.neighbor_index(v, u).unwrap();
                counts[g.slot_offset(v) + j] = c;
            }
        }
        counts
    }

    fn with_bitsets(g: &Graph) -> Vec<u32> {
        let n = g.node_count();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for u in 0..n {
            for &v in g.neighbors(u as NodeId) {
                bits[u * words + v as usize / 64] |= 1 << (v % 64);
            }
        }
        let mut counts = vec![0u32; 2 * g.edge_count()];
        for u in 0..n as NodeId {
            let bu = &bits[u as usize * words..(u as usize + 1) * words];
            let off_u = g.slot_offset(u);
            for (i, &v) in g.neighbors(u).iter().enumerate() {
                if v < u {
                    continue;
                }
                let bv = &bits[v as usize * words..(v as usize + 1) * words];
                let c: u32 = bu.iter().zip(bv).map(|(a, b)| (a & b).count_ones()).sum();
                counts[off_u + i] = c;
                let j = g.neighbor_index(v, u).unwrap();
                counts[g.slot_offset(v) + j] = c;
            }
        }
        counts
    }

    /// |N(u) ∩ N(v)| where `v` is the `i`-th neighbor of `u`.
    pub fn at(&self, g: &Graph, u: NodeId, i: usize) -> u32 {
        self.counts[g.slot_offset(u) + i]
    }

    /// Common-neighbor counts for all neighbors of `u`, aligned with `g.neighbors(u)`.
    pub fn row<'a>(&'a self, g: &Graph, u: NodeId) -> &'a [u32] {
        let off = g.slot_offset(u);
        &self.counts[off..off + g.degree(u)]
    }
}
