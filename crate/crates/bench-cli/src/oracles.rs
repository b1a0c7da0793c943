//! Independent definitional oracles, kept apart from the optimized code they check.

use dcolor::graph::{all_sparsities, sparsity, EdgeOverlap, Graph, NodeId};
use dcolor::multitrial::{hit_set, hit_set_brute, FamilyConfig, HashFamily};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Colors of `a` whose hash lands in 1..=samp on a value no other color of `b` takes,
/// computed from an explicit value-to-colors table.
pub fn hit_set_oracle(a: &[u64], h: &dyn Fn(u64) -> u64, b: &[u64], samp: u64) -> Vec<u64> {
    let mut table: std::collections::BTreeMap<u64, std::collections::BTreeSet<u64>> = Default::default();
    for &d in b {
        table.entry(h(d)).or_default().insert(d);
    }
    let mut out = Vec::new();
    for &c in a {
        let x = h(c);
        if x == 0 || x > samp {
            continue;
        }
        let others = table.get(&x).map_or(0, |s| s.len() - usize::from(s.contains(&c)));
        if others == 0 {
            out.push(c);
        }
    }
    out
}

type HashFn = Box<dyn Fn(u64) -> u64>;

fn subset(mask: u32, colors: &[u64]) -> Vec<u64> {
    colors.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleTally {
    pub cases: u64,
    pub mismatches: u64,
}

impl OracleTally {
    fn record(&mut self, ok: bool) {
        self.cases += 1;
        self.mismatches += u64::from(!ok);
    }
}

/// Compares `hit_set` (and the core brute-force helper) with the table oracle.
///
/// For every color set C = {c_0..c_{k-1}} with k ≤ 16: when k ≤ `exhaustive_k` every pair
/// (A, B) of subsets is checked, otherwise every A with B ∈ {∅, A, C, C∖A}. Hashes are
/// random tables into [ω] plus members of a real family.
pub fn check_hit_set(max_k: usize, exhaustive_k: usize, seed: u64) -> OracleTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = OracleTally::default();
    let family = HashFamily::build(48, 1 << 20, 1 << 10, &FamilyConfig::calibrated(60), seed).expect("small family");
    for k in 0..=max_k {
        // Colors spread over a wide range so that table lookups are not positional.
        let colors: Vec<u64> = (0..k as u64).map(|i| i * 7919 + (seed % 13)).collect();
        let mut hashes: Vec<(HashFn, u64)> = Vec::new();
        for omega in [2u64, 4, k.max(1) as u64 * 2] {
            let table: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=omega)).collect();
            let cs = colors.clone();
            let samp = rng.gen_range(1..=omega);
            hashes.push((Box::new(move |c| cs.iter().position(|&x| x == c).map_or(0, |i| table[i])), samp));
        }
        for i in 0..2 {
            let member_index = rng.gen_range(0..family.fam_size);
            let samp = if i == 0 { family.samp as u64 } else { family.omega };
            let fam = family.clone();
            hashes.push((Box::new(move |c| fam.eval(member_index, c)), samp));
        }
        let full = (1u32 << k) - 1;
        for (h, samp) in &hashes {
            let mut check = |a: &[u64], b: &[u64]| {
                let want = hit_set_oracle(a, h.as_ref(), b, *samp);
                let fast = hit_set(a, h.as_ref(), b, *samp);
                let brute = hit_set_brute(a, h.as_ref(), b, *samp);
                tally.record(fast == want && brute == want);
            };
            for am in 0..=full {
                let a = subset(am, &colors);
                if k <= exhaustive_k {
                    for bm in 0..=full {
                        check(&a, &subset(bm, &colors));
                    }
                } else {
                    for bm in [0, am, full, full & !am] {
                        check(&a, &subset(bm, &colors));
                    }
                }
            }
        }
    }
    tally
}

/// ζ_v = (1/Δ)·(C(Δ,2) − m(N(v))) from an adjacency matrix.
pub fn sparsity_oracle(n: usize, edges: &[(NodeId, NodeId)], v: usize) -> Ratio<i64> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a as usize][b as usize] = true;
        adj[b as usize][a as usize] = true;
    }
    let delta = (0..n).map(|u| adj[u].iter().filter(|&&x| x).count()).max().unwrap_or(0) as i64;
    if delta == 0 {
        return Ratio::from_integer(0);
    }
    let nbrs: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
    let mut m = 0i64;
    for (i, &x) in nbrs.iter().enumerate() {
        for &y in &nbrs[i + 1..] {
            m += i64::from(adj[x][y]);
        }
    }
    Ratio::new(delta * (delta - 1) / 2 - m, delta)
}

/// Random G(n, p) graphs with n ≤ 50; compares both sparsity routines with the oracle.
pub fn check_sparsity(graphs: usize, seed: u64) -> OracleTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = OracleTally::default();
    for _ in 0..graphs {
        let n = rng.gen_range(1..=50usize);
        let p: f64 = rng.gen_range(0.0..1.0);
        let mut edges = Vec::new();
        for u in 0..n as NodeId {
            for v in u + 1..n as NodeId {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).expect("simple graph");
        let all = all_sparsities(&g, &EdgeOverlap::compute(&g));
        let ok = (0..n).all(|v| {
            let want = sparsity_oracle(n, &edges, v);
            all[v] == want && sparsity(&g, v as NodeId) == want
        });
        tally.record(ok);
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_set_oracle_on_a_hand_example() {
        // h: 1→1, 2→1, 3→2, 4→5; samp 3.
        let h = |c: u64| [0, 1, 1, 2, 5][c as usize];
        assert_eq!(hit_set_oracle(&[1, 3, 4], &h, &[1, 2, 3], 3), vec![3]);
        assert_eq!(hit_set_oracle(&[1, 3, 4], &h, &[1], 3), vec![1, 3]);
        assert_eq!(hit_set_oracle(&[], &h, &[1], 3), Vec::<u64>::new());
    }

    #[test]
    fn sparsity_oracle_on_named_graphs() {
        // Star K_{1,3}: Δ = 3, no edges among the leaves, so ζ_center = 3/3 = 1.
        let star = [(0, 1), (0, 2), (0, 3)];
        assert_eq!(sparsity_oracle(4, &star, 0), Ratio::from_integer(1));
        // K4: every neighborhood is a triangle, ζ = 0.
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(sparsity_oracle(4, &k4, 2), Ratio::from_integer(0));
    }

    #[test]
    fn small_sweeps_agree() {
        let t = check_hit_set(6, 5, 3);
        assert!(t.cases > 1000);
        assert_eq!(t.mismatches, 0);
        let s = check_sparsity(50, 4);
        assert_eq!((s.cases, s.mismatches), (50, 0));
    }
}
