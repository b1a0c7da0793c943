//! Small named graphs used by tests and examples.

use super::{Graph, NodeId};

pub fn complete(k: usize) -> Graph {
    let mut e = Vec::new();
    for u in 0..k as NodeId {
        for v in u + 1..k as NodeId {
            e.push((u, v));
        }
    }
    Graph::from_edges(k, &e).unwrap()
}

pub fn cycle(k: usize) -> Graph {
    let e: Vec<_> = (0..k as NodeId).map(|i| (i, (i + 1) % k as NodeId)).collect();
    Graph::from_edges(k, &e).unwrap()
}

pub fn path(k: usize) -> Graph {
    let e: Vec<_> = (1..k as NodeId).map(|i| (i - 1, i)).collect();
    Graph::from_edges(k, &e).unwrap()
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    let e: Vec<_> = (1..=leaves as NodeId).map(|i| (0, i)).collect();
    Graph::from_edges(leaves + 1, &e).unwrap()
}

pub fn petersen() -> Graph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edges(10, &e).unwrap()
}

/// K_k with the edges {0,1}, {2,3}, ... removed.
pub fn complete_minus_matching(k: usize) -> Graph {
    let mut e = Vec::new();
    for u in 0..k as NodeId {
        for v in u + 1..k as NodeId {
            if !(u % 2 == 0 && v == u + 1) {
                e.push((u, v));
            }
        }
    }
    Graph::from_edges(k, &e).unwrap()
}

/// K_k with one edge removed.
pub fn complete_minus_edge(k: usize, a: NodeId, b: NodeId) -> Graph {
    let mut e = Vec::new();
    for u in 0..k as NodeId {
        for v in u + 1..k as NodeId {
            if (u, v) != (a.min(b), a.max(b)) {
                e.push((u, v));
            }
        }
    }
    Graph::from_edges(k, &e).unwrap()
}

/// Disjoint copies of K_k; copy `i` holds nodes `i*k..(i+1)*k`.
pub fn disjoint_cliques(copies: usize, k: usize) -> Graph {
    let mut e = Vec::new();
    for c in 0..copies {
        let base = (c * k) as NodeId;
        for u in 0..k as NodeId {
            for v in u + 1..k as NodeId {
                e.push((base + u, base + v));
            }
        }
    }
    Graph::from_edges(copies * k, &e).unwrap()
}

/// Two copies of K_k joined by the perfect matching `i <-> k+i`.
pub fn cliques_with_matching(k: usize) -> Graph {
    let mut e = Vec::new();
    for c in 0..2 {
        let base = (c * k) as NodeId;
        for u in 0..k as NodeId {
            for v in u + 1..k as NodeId {
                e.push((base + u, base + v));
            }
        }
    }
    for i in 0..k as NodeId {
        e.push((i, k as NodeId + i));
    }
    Graph::from_edges(2 * k, &e).unwrap()
}
