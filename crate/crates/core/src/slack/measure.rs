use num_rational::Ratio;

use crate::graph::{NodeId, Palette};

/// η_v = Σ_{w∈C} |Ψ_v \ Ψ_w| / |C| for every v in `clique`, in clique order.
pub fn discrepancy(palettes: &[Palette], clique: &[NodeId]) -> Vec<Ratio<i64>> {
    let k = clique.len() as i64;
    clique
        .iter()
        .map(|&v| {
            let sum: usize = clique.iter().map(|&w| palettes[v as usize].difference_len(&palettes[w as usize])).sum();
            Ratio::new(sum as i64, k.max(1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_palettes_have_no_discrepancy() {
        let p = vec![Palette::range(4); 3];
        assert!(discrepancy(&p, &[0, 1, 2]).iter().all(|&x| x == Ratio::from_integer(0)));
    }

    #[test]
    fn two_node_example() {
        let p = vec![Palette::from_colors(vec![0, 1]).unwrap(), Palette::from_colors(vec![0, 2]).unwrap()];
        assert_eq!(discrepancy(&p, &[0, 1]), vec![Ratio::new(1, 2), Ratio::new(1, 2)]);
    }

    proptest! {
        #[test]
        fn average_is_at_most_twice_the_minimum(
            sets in proptest::collection::vec(proptest::collection::btree_set(0u64..30, 8), 1..12)
        ) {
            let p: Vec<Palette> = sets.into_iter().map(|s| Palette::from_colors(s.into_iter().collect()).unwrap()).collect();
            let c: Vec<NodeId> = (0..p.len() as NodeId).collect();
            let eta = discrepancy(&p, &c);
            let min = *eta.iter().min().unwrap();
            let sum: Ratio<i64> = eta.iter().copied().sum();
            prop_assert!(sum / Ratio::from_integer(eta.len() as i64) <= min * 2);
        }
    }
}
