use num_rational::Ratio;
use serde_json::json;

use super::AcdPartition;
use crate::graph::{Graph, NodeId};

/// Rounds charged for electing the leader (interim min-id leader, then a depth-2 aggregation).
pub const LEADER_ROUNDS: u32 = 4;
/// Rounds charged for aggregating m̂ and spreading ζ'_C.
pub const ESTIMATE_ROUNDS: u32 = 2;
/// Extra rounds of the list variant: the chromatic-slack leader and the set X.
pub const LIST_ROUNDS: u32 = 2;

#[derive(Clone, Copy, Debug)]
pub enum LeaderRule<'a> {
    MinAntiDegree,
    /// Chromatic slack per node id.
    MinChromaticSlack(&'a [usize]),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueMeta {
    pub clique: usize,
    /// Minimum anti-degree node; ζ_C is its sparsity.
    pub anchor: NodeId,
    /// The node that hands out colors (equal to `anchor` outside the list variant).
    pub leader: NodeId,
    pub zeta: Ratio<i64>,
    pub zeta_estimate: Ratio<i64>,
    pub outliers: Vec<NodeId>,
    pub core: Vec<NodeId>,
}

fn in_clique(acd: &AcdPartition, c: usize, v: NodeId) -> bool {
    acd.clique_of(v) == Some(c)
}

/// a_v = |C \ N[v]| for each member, aligned with `acd.cliques[c]`.
pub fn anti_degrees(g: &Graph, acd: &AcdPartition, c: usize) -> Vec<usize> {
    let members = &acd.cliques[c];
    members
        .iter()
        .map(|&v| members.len() - 1 - g.neighbors(v).iter().filter(|&&u| in_clique(acd, c, u)).count())
        .collect()
}

/// e_v = |N(v) \ C| for each member, aligned with `acd.cliques[c]`.
pub fn external_degrees(g: &Graph, acd: &AcdPartition, c: usize) -> Vec<usize> {
    acd.cliques[c].iter().map(|&v| g.neighbors(v).iter().filter(|&&u| !in_clique(acd, c, u)).count()).collect()
}

/// Member of smallest anti-degree, ties to the smallest id.
pub fn elect_leader(g: &Graph, acd: &AcdPartition, c: usize) -> NodeId {
    let a = anti_degrees(g, acd, c);
    let members = &acd.cliques[c];
    (0..members.len()).min_by_key(|&k| (a[k], members[k])).map(|k| members[k]).unwrap()
}

/// Core node of smallest chromatic slack, ties to the smallest id.
pub fn elect_list_leader(core: &[NodeId], cs: &[usize]) -> NodeId {
    *core.iter().min_by_key(|&&v| (cs[v as usize], v)).unwrap()
}

/// O_C = A_w ∪ {u ∈ N_C(w) : |N[u] ∩ N[w]| < Δ − 5ζ}, sorted.
pub fn compute_outliers(g: &Graph, acd: &AcdPartition, c: usize, w: NodeId, zeta: Ratio<i64>) -> Vec<NodeId> {
    let threshold = Ratio::from_integer(acd.delta as i64) - zeta * 5;
    let mut out: Vec<NodeId> = acd.cliques[c]
        .iter()
        .copied()
        .filter(|&u| {
            if u == w {
                return false;
            }
            if !g.has_edge(u, w) {
                return true;
            }
            let closed = g.common_neighbor_count(u, w) as i64 + 2;
            Ratio::from_integer(closed) < threshold
        })
        .collect();
    out.sort_unstable();
    out
}

/// ζ'_C = (C(Δ,2) − m̂)/Δ with m̂ the number of edges inside N_C(w).
pub fn estimate_zeta(g: &Graph, acd: &AcdPartition, c: usize, w: NodeId) -> Ratio<i64> {
    let nc: Vec<NodeId> = g.neighbors(w).iter().copied().filter(|&u| in_clique(acd, c, u)).collect();
    let m_hat = g.induced_edge_count(&nc) as i64;
    let d = acd.delta as i64;
    if d == 0 {
        return Ratio::from_integer(0);
    }
    Ratio::new(d * (d - 1) / 2 - m_hat, d)
}

/// List variant: adds A_leader and the ⌊εΔ⌋ members of largest chromatic slack (never the leader).
pub fn list_outliers(
    g: &Graph,
    acd: &AcdPartition,
    c: usize,
    outliers: &[NodeId],
    leader: NodeId,
    cs: &[usize],
) -> Vec<NodeId> {
    let members = &acd.cliques[c];
    let x_len = (acd.epsilon * Ratio::from_integer(acd.delta as i64)).to_integer().max(0) as usize;
    let mut by_cs: Vec<NodeId> = members.iter().copied().filter(|&v| v != leader).collect();
    by_cs.sort_unstable_by_key(|&v| (std::cmp::Reverse(cs[v as usize]), v));
    let mut out: Vec<NodeId> = outliers.to_vec();
    out.extend(members.iter().copied().filter(|&u| u != leader && !g.has_edge(u, leader)));
    out.extend(by_cs.into_iter().take(x_len));
    out.sort_unstable();
    out.dedup();
    out
}

/// Leaders, ζ_C, ζ'_C and outliers for every clique. Outliers use ζ'_C, the value the
/// clique actually learns.
pub fn clique_metas(g: &Graph, acd: &AcdPartition, rule: LeaderRule) -> Vec<CliqueMeta> {
    (0..acd.cliques.len())
        .map(|c| {
            let anchor = elect_leader(g, acd, c);
            let zeta = crate::graph::sparsity(g, anchor);
            let zeta_estimate = estimate_zeta(g, acd, c, anchor);
            let mut outliers = compute_outliers(g, acd, c, anchor, zeta_estimate);
            let mut leader = anchor;
            if let LeaderRule::MinChromaticSlack(cs) = rule {
                let core: Vec<NodeId> = acd.cliques[c].iter().copied().filter(|v| outliers.binary_search(v).is_err()).collect();
                leader = elect_list_leader(&core, cs);
                outliers = list_outliers(g, acd, c, &outliers, leader, cs);
            }
            let core = acd.cliques[c].iter().copied().filter(|v| outliers.binary_search(v).is_err()).collect();
            CliqueMeta { clique: c, anchor, leader, zeta, zeta_estimate, outliers, core }
        })
        .collect()
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `{sparse: [...], cliques: [{leader, zeta, outliers, members}]}`.
pub fn partition_json(acd: &AcdPartition, metas: &[CliqueMeta]) -> serde_json::Value {
    json!({
        "sparse": acd.sparse,
        "cliques": metas.iter().map(|m| json!({
            "leader": m.leader,
            "zeta": ratio_f64(m.zeta),
            "zeta_estimate": ratio_f64(m.zeta_estimate),
            "outliers": m.outliers,
            "members": acd.cliques[m.clique],
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acd::compute_acd;
    use crate::graph::{generate, named, sparsity};
    use proptest::prelude::*;

    fn whole(g: &Graph) -> AcdPartition {
        AcdPartition::from_parts(g, vec![(0..g.node_count() as NodeId).collect()], Ratio::new(1, 10)).unwrap()
    }

    /// Anti-degrees by scanning every pair.
    fn brute_anti(g: &Graph, members: &[NodeId]) -> Vec<usize> {
        members.iter().map(|&v| members.iter().filter(|&&u| u != v && !g.has_edge(u, v)).count()).collect()
    }

    #[test]
    fn leader_of_complete_graph_is_smallest_id() {
        let g = named::complete(5);
        let a = whole(&g);
        assert_eq!(anti_degrees(&g, &a, 0), vec![0; 5]);
        assert_eq!(elect_leader(&g, &a, 0), 0);
    }

    #[test]
    fn leader_avoids_missing_edge() {
        let g = named::complete_minus_edge(5, 3, 4);
        let a = whole(&g);
        assert_eq!(anti_degrees(&g, &a, 0), brute_anti(&g, &a.cliques[0]));
        assert_eq!(brute_anti(&g, &a.cliques[0]), vec![0, 0, 0, 1, 1]);
        assert_eq!(elect_leader(&g, &a, 0), 0);
    }

    #[test]
    fn complete_graph_has_no_outliers() {
        let g = named::complete(31);
        let a = whole(&g);
        assert!(compute_outliers(&g, &a, 0, 0, sparsity(&g, 0)).is_empty());
        assert_eq!(estimate_zeta(&g, &a, 0, 0), Ratio::from_integer(0));
    }

    #[test]
    fn matching_removed_outliers_are_bounded() {
        let g = named::complete_minus_matching(20);
        let a = whole(&g);
        let w = elect_leader(&g, &a, 0);
        let z = sparsity(&g, w);
        let o = compute_outliers(&g, &a, 0, w, z);
        // Exhaustive recount of |N[u] ∩ N[w]| for every member.
        let closed = |x: NodeId| -> Vec<NodeId> { (0..20).filter(|&y| y == x || g.has_edge(x, y)).collect() };
        let nw = closed(w);
        let d = Ratio::from_integer(g.max_degree() as i64);
        let expected: Vec<NodeId> = (0..20)
            .filter(|&u| u != w)
            .filter(|&u| {
                let inter = closed(u).iter().filter(|x| nw.contains(x)).count() as i64;
                !g.has_edge(u, w) || Ratio::from_integer(inter) < d - z * 5
            })
            .collect();
        assert_eq!(o, expected);
        assert!(Ratio::from_integer(o.len() as i64) <= (Ratio::new(2, 5) + Ratio::new(1, 10)) * d);
    }

    #[test]
    fn node_like_the_leader_is_not_an_outlier() {
        // u = 1 has the leader's anti-degree and a full common neighborhood.
        let g = named::complete_minus_edge(12, 5, 6);
        let a = whole(&g);
        let o = compute_outliers(&g, &a, 0, 0, sparsity(&g, 0));
        assert!(!o.contains(&1));
    }

    #[test]
    fn estimate_with_one_missing_edge() {
        let g = named::complete_minus_edge(20, 0, 1);
        let a = whole(&g);
        let w = elect_leader(&g, &a, 0);
        assert_eq!(w, 2);
        assert_eq!(estimate_zeta(&g, &a, 0, w), Ratio::new(1, 19));
        // e_w = 0, so the sandwich collapses.
        assert_eq!(estimate_zeta(&g, &a, 0, w), sparsity(&g, w));
    }

    #[test]
    fn list_leader_with_equal_slack_is_min_core_id() {
        let g = named::complete(10);
        let a = whole(&g);
        let cs = vec![0; 10];
        let m = clique_metas(&g, &a, LeaderRule::MinChromaticSlack(&cs));
        assert_eq!(m[0].leader, 0);
        assert!(!m[0].outliers.contains(&0));
        // ⌊εΔ⌋ = 0 for Δ = 9.
        assert!(m[0].outliers.is_empty());
    }

    #[test]
    fn list_variant_removes_highest_slack_nodes() {
        let g = named::complete(41);
        let a = whole(&g);
        let cs: Vec<usize> = (0..41).map(|v| if v >= 37 { 9 } else { 1 }).collect();
        let m = clique_metas(&g, &a, LeaderRule::MinChromaticSlack(&cs));
        assert_eq!(m[0].leader, 0);
        assert_eq!(m[0].outliers, vec![37, 38, 39, 40]);
    }

    #[test]
    fn json_dump_shape() {
        let g = named::disjoint_cliques(2, 12);
        let a = compute_acd(&g, Ratio::new(1, 10)).unwrap();
        let m = clique_metas(&g, &a, LeaderRule::MinAntiDegree);
        let j = partition_json(&a, &m);
        assert_eq!(j["cliques"].as_array().unwrap().len(), 2);
        assert_eq!(j["cliques"][1]["leader"], 12);
        assert_eq!(j["sparse"].as_array().unwrap().len(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn structural_bounds_on_planted_instances(seed in 0u64..1_000_000, zeta in 0u32..6, anti in prop::sample::select(vec![0.0, 0.02, 0.05])) {
            let spec = format!("planted-acd:n=900,delta=48,zeta={zeta},anti={anti}");
            let inst = generate(&spec, seed).unwrap();
            let g = &inst.graph;
            let eps = Ratio::new(1, 10);
            let a = compute_acd(g, eps).unwrap();
            a.verify(g).unwrap();
            let metas = clique_metas(g, &a, LeaderRule::MinAntiDegree);
            let z: Vec<Ratio<i64>> = (0..g.node_count() as NodeId).map(|v| sparsity(g, v)).collect();
            let one = Ratio::from_integer(1);
            let e_bound = Ratio::from_integer(4) / (a.c_sp * eps * eps);
            let a_bound = Ratio::from_integer(2) / (one - eps * 3);
            let low = one / (e_bound + (Ratio::from_integer(3) - eps * 3) / (one - eps * 3));
            for m in &metas {
                let members = &a.cliques[m.clique];
                let ext = external_degrees(g, &a, m.clique);
                let anti_d = anti_degrees(g, &a, m.clique);
                for (k, &v) in members.iter().enumerate() {
                    let zv = z[v as usize];
                    prop_assert!(Ratio::from_integer(ext[k] as i64) <= e_bound * zv);
                    prop_assert!(Ratio::from_integer(anti_d[k] as i64) <= a_bound * zv);
                    prop_assert!(low * m.zeta <= zv);
                }
                let w_pos = members.iter().position(|&v| v == m.anchor).unwrap();
                prop_assert!(m.zeta <= m.zeta_estimate);
                prop_assert!(m.zeta_estimate <= m.zeta + Ratio::from_integer(ext[w_pos] as i64));
                for &v in &m.core {
                    prop_assert!(v == m.anchor || g.has_edge(v, m.anchor));
                    // Closed neighborhoods and ζ'_C in the outlier rule shift the bound to 6ζ'_C + 2.
                    prop_assert!(z[v as usize] <= m.zeta_estimate * 6 + 2);
                }
            }
        }
    }
}
