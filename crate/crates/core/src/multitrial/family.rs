//! Seeded stand-in for representative hash families.
//!
//! Member i of the family for range ω is h_i(c) = 1 + ⌊mix(key(seed, ω, i) ⊕ c) · ω / 2^64⌋,
//! so every node derives the same functions from the shared seed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::bits_for;
use crate::graph::Color;

pub const ALPHA: f64 = 1.0 / 12.0;
pub const BETA: f64 = 1.0 / 3.0;
/// The regime constant 2^17 of the existence argument.
pub const REGIME: f64 = 131_072.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMode {
    /// ν_ω and B̂ exactly as in the existence argument; refuses ω below the regime.
    Strict,
    /// ν_ω = max(n^{-c}, exp(−ω/nu_scale)), B̂ = samp_factor·ln(1/ν) rounded up to bytes.
    Calibrated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub mode: FamilyMode,
    /// Exponent c in the floor n^{-c} of ν.
    pub nu_exponent: f64,
    pub nu_scale: f64,
    pub samp_factor: f64,
    /// Upper bound on B̂ (the bandwidth, rounded down to bytes).
    pub max_samp: u32,
    pub max_index_bits: u32,
}

impl FamilyConfig {
    pub fn calibrated(bandwidth_bits: u32) -> FamilyConfig {
        FamilyConfig {
            mode: FamilyMode::Calibrated,
            nu_exponent: 4.0,
            nu_scale: 8.0,
            samp_factor: 2.0,
            max_samp: (bandwidth_bits / 8 * 8).max(8),
            max_index_bits: 24,
        }
    }

    pub fn strict(bandwidth_bits: u32) -> FamilyConfig {
        FamilyConfig { mode: FamilyMode::Strict, ..FamilyConfig::calibrated(bandwidth_bits) }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("ω = {omega} is outside the asserted regime (ω·α·β²·ln(1/ν) = {value:.1} < 2^17)")]
    ParameterRegime { omega: u64, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashFamily {
    pub omega: u64,
    pub fam_size: u64,
    /// B̂, the sampling cutoff.
    pub samp: u32,
    pub nu: f64,
    pub family_seed: u64,
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn roundup8(x: f64) -> u32 {
    ((x.max(1.0) / 8.0).ceil() * 8.0) as u32
}

impl HashFamily {
    pub fn build(omega: u64, color_space: u64, n: usize, cfg: &FamilyConfig, family_seed: u64) -> Result<HashFamily, FamilyError> {
        assert!(omega >= 1);
        let floor = (n.max(2) as f64).powf(-cfg.nu_exponent);
        let (nu, samp) = match cfg.mode {
            FamilyMode::Strict => {
                let nu = floor.max((-ALPHA * BETA * BETA * omega as f64 / REGIME).exp());
                let value = omega as f64 * ALPHA * BETA * BETA * (1.0 / nu).ln();
                if value < REGIME {
                    return Err(FamilyError::ParameterRegime { omega, value });
                }
                (nu, roundup8((1.0 / nu).ln() / (BETA * BETA * ALPHA)))
            }
            FamilyMode::Calibrated => {
                let nu = floor.max((-(omega as f64) / cfg.nu_scale).exp());
                (nu, roundup8(cfg.samp_factor * (1.0 / nu).ln()).min(cfg.max_samp))
            }
        };
        let samp = samp.min(omega.min(u32::MAX as u64) as u32).max(1);
        let t = 24.0 * BETA * omega as f64 * (color_space.max(2) as f64).ln() / nu;
        let fam_size = (t.ceil() as u64).clamp(1, 1u64 << cfg.max_index_bits);
        Ok(HashFamily { omega, fam_size, samp, nu, family_seed })
    }

    pub fn index_bits(&self) -> u32 {
        bits_for(self.fam_size as u128)
    }

    fn key(&self, i: u64) -> u64 {
        mix64(self.family_seed ^ mix64(self.omega ^ mix64(i.wrapping_mul(0xd1b5_4a32_d192_ed03))))
    }

    /// Member `i` evaluated at `c`, in 1..=ω.
    pub fn eval(&self, i: u64, c: Color) -> u64 {
        let key = self.key(i);
        1 + ((mix64(key ^ c) as u128 * self.omega as u128) >> 64) as u64
    }

    pub fn member(&self, i: u64) -> Member<'_> {
        Member { family: self, key: self.key(i) }
    }
}

/// A member with its key precomputed.
#[derive(Clone, Copy)]
pub struct Member<'a> {
    family: &'a HashFamily,
    key: u64,
}

impl Member<'_> {
    pub fn eval(&self, c: Color) -> u64 {
        1 + ((mix64(self.key ^ c) as u128 * self.family.omega as u128) >> 64) as u64
    }

    pub fn samp(&self) -> u32 {
        self.family.samp
    }
}

/// H^{≤B̂}(A|h|B): colors of A hashing into [B̂] with no other color of B on the same value.
pub fn hit_set(a: &[Color], h: impl Fn(Color) -> u64, b: &[Color], samp: u64) -> Vec<Color> {
    let mut counts = vec![0u32; samp as usize + 1];
    let mut b_sorted: Vec<Color> = b.to_vec();
    b_sorted.sort_unstable();
    b_sorted.dedup();
    for &c in &b_sorted {
        let x = h(c);
        if x <= samp {
            counts[x as usize] += 1;
        }
    }
    a.iter()
        .copied()
        .filter(|&c| {
            let x = h(c);
            if x == 0 || x > samp {
                return false;
            }
            let own = b_sorted.binary_search(&c).is_ok() as u32;
            counts[x as usize] - own == 0
        })
        .collect()
}

/// Definitional version of `hit_set` (test oracle).
pub fn hit_set_brute(a: &[Color], h: impl Fn(Color) -> u64, b: &[Color], samp: u64) -> Vec<Color> {
    a.iter()
        .copied()
        .filter(|&c| {
            let x = h(c);
            (1..=samp).contains(&x) && b.iter().all(|&d| d == c || h(d) != x)
        })
        .collect()
}

/// Whether |H(T|h|P)| ∈ (B̂|T|/ω)·[1−2β, 1+β].
pub fn is_good(member: &Member, t: &[Color], p: &[Color]) -> bool {
    let hits = hit_set(t, |c| member.eval(c), p, member.samp() as u64).len() as f64;
    let mean = member.samp() as f64 * t.len() as f64 / member.family.omega as f64;
    hits >= (1.0 - 2.0 * BETA) * mean && hits <= (1.0 + BETA) * mean
}

/// Family parameters for every ω = 6k, k = 1..=max_palette (reproducibility dump).
pub fn family_table(max_palette: usize, color_space: u64, n: usize, cfg: &FamilyConfig, seed: u64) -> Vec<HashFamily> {
    (1..=max_palette as u64).filter_map(|k| HashFamily::build(6 * k, color_space, n, cfg, seed).ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hit_set_examples() {
        let h = |_: Color| 1;
        assert!(hit_set(&[], h, &[], 4).is_empty());
        assert_eq!(hit_set(&[7], h, &[7], 4), vec![7]);
        assert!(hit_set(&[7, 8], h, &[7, 8], 4).is_empty());
        assert!(hit_set_brute(&[7, 8], h, &[7, 8], 4).is_empty());
    }

    #[test]
    fn hit_set_matches_definition_exhaustively() {
        // Every pair of subsets of a 6-color space, under several functions into [4] with cutoff 3.
        let space: Vec<Color> = (0..6).collect();
        let funcs: Vec<Vec<u64>> = vec![vec![1, 2, 3, 4, 1, 2], vec![1, 1, 1, 1, 1, 1], vec![4, 3, 2, 1, 4, 2], vec![2, 2, 3, 3, 4, 4]];
        for f in &funcs {
            let h = |c: Color| f[c as usize];
            for ma in 0u32..64 {
                let a: Vec<Color> = space.iter().copied().filter(|&c| ma >> c & 1 == 1).collect();
                for mb in 0u32..64 {
                    let b: Vec<Color> = space.iter().copied().filter(|&c| mb >> c & 1 == 1).collect();
                    assert_eq!(hit_set(&a, h, &b, 3), hit_set_brute(&a, h, &b, 3));
                }
            }
        }
    }

    #[test]
    fn members_are_shared_and_in_range() {
        let cfg = FamilyConfig::calibrated(100);
        let f1 = HashFamily::build(66, 1000, 1000, &cfg, 77).unwrap();
        let f2 = HashFamily::build(66, 1000, 1000, &cfg, 77).unwrap();
        for i in [0u64, 5, 12345] {
            for c in 0..200 {
                assert_eq!(f1.eval(i, c), f2.eval(i, c));
                assert_eq!(f1.member(i).eval(c), f1.eval(i, c));
            }
        }
        for probe in 0..100_000u64 {
            let x = f1.eval(probe % f1.fam_size, probe.wrapping_mul(0x9e37_79b9));
            assert!((1..=66).contains(&x));
        }
    }

    #[test]
    fn calibrated_cutoff_fits_the_bandwidth() {
        for (n, cap) in [(1000usize, 60u32), (10_000, 80), (100_000, 100)] {
            let cfg = FamilyConfig::calibrated(cap);
            for omega in (6..=6 * 400).step_by(6) {
                let f = HashFamily::build(omega, 401, n, &cfg, 1).unwrap();
                assert!(f.samp as u64 <= omega && f.samp <= cap);
            }
        }
    }

    #[test]
    fn strict_mode_refuses_desk_scale() {
        let cfg = FamilyConfig::strict(100);
        assert!(matches!(HashFamily::build(600, 601, 100_000, &cfg, 0), Err(FamilyError::ParameterRegime { .. })));
        // Below the n^{-4} floor, ln(1/ν) = αβ²ω/2^17, so the regime starts near ω = 2^17/(αβ²) ≈ 1.42·10^7.
        assert!(HashFamily::build(14_000_000, 1 << 30, 100_000, &cfg, 0).is_err());
        assert!(HashFamily::build(15_000_000, 1 << 30, 100_000, &cfg, 0).is_ok());
    }

    proptest! {
        #[test]
        fn hit_set_agrees_with_brute_force(
            a in proptest::collection::vec(0u64..16, 0..16),
            b in proptest::collection::vec(0u64..16, 0..16),
            seed in any::<u64>(),
            samp in 1u64..8,
        ) {
            let h = |c: Color| 1 + mix64(seed ^ c) % 8;
            let mut a = a;
            a.sort_unstable();
            a.dedup();
            prop_assert_eq!(hit_set(&a, h, &b, samp), hit_set_brute(&a, h, &b, samp));
        }
    }
}
