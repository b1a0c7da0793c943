use crate::graph::{Graph, NodeId};

/// H: the nodes of the given parts, with only the edges of `g` that join different parts.
/// Node ids are kept; nodes outside every part are isolated.
pub fn derived_graph(g: &Graph, parts: &[Vec<NodeId>]) -> Graph {
    let mut owner = vec![usize::MAX; g.node_count()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            owner[v as usize] = i;
        }
    }
    let edges = g.edges().filter(|&(u, v)| {
        let (a, b) = (owner[u as usize], owner[v as usize]);
        a != usize::MAX && b != usize::MAX && a != b
    });
    Graph::from_edges_dedup(g.node_count(), edges)
}

/// LowDegreeSample(P, q, B): sample each member with probability 1/(2q), keep the sampled
/// nodes with fewer than B/q sampled H-neighbors. `coin(v, p)` is v's own coin.
pub fn low_degree_sample(h: &Graph, p: &[bool], q: f64, b: f64, coin: &mut impl FnMut(NodeId, f64) -> bool) -> Vec<bool> {
    let p_s = (1.0 / (2.0 * q)).min(1.0);
    let s: Vec<bool> = (0..h.node_count() as NodeId).map(|v| p[v as usize] && coin(v, p_s)).collect();
    (0..h.node_count() as NodeId)
        .map(|v| s[v as usize] && (h.neighbors(v).iter().filter(|&&u| s[u as usize]).count() as f64) < b / q)
        .collect()
}

/// Every intermediate set of a Transversal run.
#[derive(Clone, Debug)]
pub struct TransversalRun {
    pub q: f64,
    /// P_0 = V_H, then P_1 .. P_{m+1}.
    pub sets: Vec<Vec<bool>>,
}

impl TransversalRun {
    pub fn output(&self) -> &[bool] {
        self.sets.last().unwrap()
    }

    /// |P_j ∩ part| for every j.
    pub fn counts(&self, part: &[NodeId]) -> Vec<usize> {
        self.sets.iter().map(|s| part.iter().filter(|&&v| s[v as usize]).count()).collect()
    }
}

/// Transversal(δ = 1/m) on H restricted to `members`: m + 1 rounds of LowDegreeSample with
/// q = Δ_H^{1/(m+1)} and B_j = B_{j−1}/q, so the last round keeps only isolated samples.
pub fn transversal(h: &Graph, members: &[bool], m: u32, coin: &mut impl FnMut(NodeId, f64) -> bool) -> TransversalRun {
    let delta_h = (0..h.node_count() as NodeId).filter(|&v| members[v as usize]).map(|v| h.degree(v)).max().unwrap_or(0);
    let d = delta_h.max(1) as f64;
    let q = d.powf(1.0 / (m as f64 + 1.0));
    let mut sets = vec![members.to_vec()];
    let mut b = d;
    for j in 1..=m + 1 {
        // Pin the last threshold to exactly 1 against rounding.
        let bq = if j == m + 1 { q } else { b };
        let next = low_degree_sample(h, sets.last().unwrap(), q, bq, coin);
        sets.push(next);
        b /= q;
    }
    TransversalRun { q, sets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, named};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coin(seed: u64) -> impl FnMut(NodeId, f64) -> bool {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        move |_, p| r.gen_bool(p)
    }

    fn independent(h: &Graph, s: &[bool]) -> bool {
        h.edges().all(|(u, v)| !(s[u as usize] && s[v as usize]))
    }

    #[test]
    fn edgeless_keeps_every_sample() {
        let h = Graph::empty(50);
        let p = vec![true; 50];
        let mut c = coin(1);
        let out = low_degree_sample(&h, &p, 1.0, 1.0, &mut c);
        // With q = 1 the sampling rate is 1/2; compare against a replay of the same coins.
        let mut replay = coin(1);
        let expect: Vec<bool> = (0..50).map(|v| replay(v, 0.5)).collect();
        assert_eq!(out, expect);
    }

    #[test]
    fn final_shape_keeps_only_isolated_samples() {
        let h = generate("gnp:n=300,p=0.05", 2).unwrap().graph;
        for seed in 0..20 {
            let out = low_degree_sample(&h, &[true; 300], 2.0, 2.0, &mut coin(seed));
            assert!(independent(&h, &out));
        }
    }

    #[test]
    fn edgeless_single_part_two_rounds() {
        // Δ_H = 0 ⇒ q = 1, two rounds at rate 1/2: |P| ~ Bin(100, 1/4).
        let h = Graph::empty(100);
        let mut sizes = Vec::new();
        for seed in 0..400 {
            let run = transversal(&h, &[true; 100], 1, &mut coin(seed));
            sizes.push(run.output().iter().filter(|&&b| b).count() as f64);
        }
        let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
        // Oracle: 100·(1/2)², standard error 4.33/√400.
        assert!((mean - 25.0).abs() < 1.0, "{mean}");
    }

    #[test]
    fn output_is_always_independent() {
        for seed in 0..30 {
            let g = generate("planted-acd:n=800,delta=40,zeta=8,sparse=0", seed).unwrap().graph;
            let acd = crate::acd::compute_acd(&g, num_rational::Ratio::new(1, 5)).unwrap();
            let h = derived_graph(&g, &acd.cliques);
            let mut members = vec![false; g.node_count()];
            for c in &acd.cliques {
                for &v in c {
                    members[v as usize] = true;
                }
            }
            for m in 1..=3 {
                let run = transversal(&h, &members, m, &mut coin(seed * 7 + m as u64));
                assert_eq!(run.sets.len(), m as usize + 2);
                assert!(independent(&h, run.output()));
            }
        }
    }

    #[test]
    fn derived_graph_drops_internal_edges() {
        let g = named::cliques_with_matching(6);
        let h = derived_graph(&g, &[(0..6).collect(), (6..12).collect()]);
        assert_eq!(h.edge_count(), 6);
        assert!(h.edges().all(|(u, v)| (u < 6) != (v < 6)));
    }
}
