use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{all_sparsities, EdgeOverlap, Graph, NodeId};

/// Rounds charged for building the decomposition.
pub const ACD_ROUNDS: u32 = 2;

const SPARSE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AcdError {
    #[error("ε = {0} is outside (0, 1/3)")]
    EpsilonOutOfRange(Ratio<i64>),
    #[error("node {node} ends up sparse with ζ = 0, so no c_sp > 0 exists")]
    Infeasible { node: NodeId },
}

/// The first clause of the definition that a partition breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AcdViolation {
    NotAPartition { node: NodeId },
    SparseTooDense { node: NodeId },
    CliqueTooLarge { clique: usize, size: usize },
    LowInternalDegree { node: NodeId, internal: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcdPartition {
    pub sparse: Vec<NodeId>,
    pub cliques: Vec<Vec<NodeId>>,
    pub epsilon: Ratio<i64>,
    /// Largest constant (capped at 1) with ζ_u ≥ c_sp·ε²·Δ for every sparse u.
    pub c_sp: Ratio<i64>,
    pub delta: usize,
    clique_of: Vec<u32>,
}

impl AcdPartition {
    /// Builds a partition from explicit parts, computing c_sp. Used for hand-made decompositions.
    pub fn from_parts(g: &Graph, cliques: Vec<Vec<NodeId>>, epsilon: Ratio<i64>) -> Result<AcdPartition, AcdError> {
        let n = g.node_count();
        let mut clique_of = vec![SPARSE; n];
        let mut cliques = cliques;
        for (i, c) in cliques.iter_mut().enumerate() {
            c.sort_unstable();
            for &v in c.iter() {
                clique_of[v as usize] = i as u32;
            }
        }
        let sparse: Vec<NodeId> = (0..n as NodeId).filter(|&v| clique_of[v as usize] == SPARSE).collect();
        let delta = g.max_degree();
        let c_sp = if delta == 0 || sparse.is_empty() {
            Ratio::from_integer(1)
        } else {
            let z = all_sparsities(g, &EdgeOverlap::compute(g));
            let unit = epsilon * epsilon * Ratio::from_integer(delta as i64);
            let (node, min) = sparse.iter().map(|&u| (u, z[u as usize] / unit)).min_by(|a, b| a.1.cmp(&b.1)).unwrap();
            if min <= Ratio::from_integer(0) {
                return Err(AcdError::Infeasible { node });
            }
            min.min(Ratio::from_integer(1))
        };
        Ok(AcdPartition { sparse, cliques, epsilon, c_sp, delta, clique_of })
    }

    pub fn clique_of(&self, v: NodeId) -> Option<usize> {
        let c = self.clique_of[v as usize];
        (c != SPARSE).then_some(c as usize)
    }

    pub fn is_sparse(&self, v: NodeId) -> bool {
        self.clique_of[v as usize] == SPARSE
    }

    /// Exact check of every clause, including ε < 1/3 via the constructor.
    pub fn verify(&self, g: &Graph) -> Result<(), AcdViolation> {
        let n = g.node_count();
        let mut seen = vec![0u8; n];
        for &v in self.sparse.iter().chain(self.cliques.iter().flatten()) {
            seen[v as usize] += 1;
        }
        if let Some(v) = seen.iter().position(|&k| k != 1) {
            return Err(AcdViolation::NotAPartition { node: v as NodeId });
        }
        let d = Ratio::from_integer(self.delta as i64);
        let z = all_sparsities(g, &EdgeOverlap::compute(g));
        for &u in &self.sparse {
            if z[u as usize] < self.c_sp * self.epsilon * self.epsilon * d {
                return Err(AcdViolation::SparseTooDense { node: u });
            }
        }
        let one = Ratio::from_integer(1);
        for (i, c) in self.cliques.iter().enumerate() {
            if Ratio::from_integer(c.len() as i64) > (one + self.epsilon) * d {
                return Err(AcdViolation::CliqueTooLarge { clique: i, size: c.len() });
            }
            for &v in c {
                let internal = g.neighbors(v).iter().filter(|&&u| self.clique_of[u as usize] == i as u32).count();
                if Ratio::from_integer(internal as i64) < (one - self.epsilon) * d {
                    return Err(AcdViolation::LowInternalDegree { node: v, internal });
                }
            }
        }
        Ok(())
    }
}

/// Friend-graph construction: u, v are friends iff adjacent with |N[u] ∩ N[v]| ≥ (1 − ε/2)Δ;
/// dense nodes have at least (1 − ε/2)Δ friends; cliques are friend-components of dense
/// nodes, pruned until every clause holds.
pub fn compute_acd(g: &Graph, epsilon: Ratio<i64>) -> Result<AcdPartition, AcdError> {
    if epsilon <= Ratio::from_integer(0) || epsilon >= Ratio::new(1, 3) {
        return Err(AcdError::EpsilonOutOfRange(epsilon));
    }
    let n = g.node_count();
    let delta = g.max_degree();
    if delta == 0 {
        return AcdPartition::from_parts(g, Vec::new(), epsilon);
    }
    let d = Ratio::from_integer(delta as i64);
    let one = Ratio::from_integer(1);
    let friend_min = (one - epsilon / 2) * d;
    let overlap = EdgeOverlap::compute(g);
    // Closed neighborhoods, so that K_{Δ+1} is recognized for every Δ.
    let is_friend = |u: NodeId, i: usize| Ratio::from_integer(overlap.at(g, u, i) as i64 + 2) >= friend_min;
    let dense: Vec<bool> = (0..n as NodeId)
        .map(|u| {
            let f = (0..g.degree(u)).filter(|&i| is_friend(u, i)).count();
            Ratio::from_integer(f as i64) >= friend_min
        })
        .collect();

    // Components of the friend graph on dense nodes.
    let mut comp = vec![SPARSE; n];
    let mut cliques: Vec<Vec<NodeId>> = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n as NodeId {
        if !dense[s as usize] || comp[s as usize] != SPARSE {
            continue;
        }
        let id = cliques.len() as u32;
        comp[s as usize] = id;
        stack.push(s);
        let mut members = Vec::new();
        while let Some(u) = stack.pop() {
            members.push(u);
            for (i, &v) in g.neighbors(u).iter().enumerate() {
                if dense[v as usize] && comp[v as usize] == SPARSE && is_friend(u, i) {
                    comp[v as usize] = id;
                    stack.push(v);
                }
            }
        }
        cliques.push(members);
    }

    let max_size = (one + epsilon) * d;
    let min_internal = (one - epsilon) * d;
    for (i, members) in cliques.iter_mut().enumerate() {
        let id = i as u32;
        loop {
            let internal: Vec<usize> = members
                .iter()
                .map(|&v| g.neighbors(v).iter().filter(|&&u| comp[u as usize] == id).count())
                .collect();
            let low: Vec<usize> =
                (0..members.len()).filter(|&k| Ratio::from_integer(internal[k] as i64) < min_internal).collect();
            let drop: Vec<usize> = if !low.is_empty() {
                low
            } else if Ratio::from_integer(members.len() as i64) > max_size {
                let k = (0..members.len()).min_by_key(|&k| (internal[k], std::cmp::Reverse(members[k]))).unwrap();
                vec![k]
            } else {
                break;
            };
            for &k in drop.iter().rev() {
                comp[members[k] as usize] = SPARSE;
                members.swap_remove(k);
            }
        }
    }
    cliques.retain(|c| !c.is_empty());
    AcdPartition::from_parts(g, cliques, epsilon)
}
