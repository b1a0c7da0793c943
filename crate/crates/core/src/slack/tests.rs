use super::*;
use crate::engine::{EngineConfig, Network, Policy, DEFAULT_C_BW};
use crate::graph::{named, ColoringInstance, Graph, Palette};
use crate::multitrial::ColorCodec;

fn loop_until_colored(inst: &ColoringInstance, seed: u64, max: u32) -> (Vec<NodeState>, u32) {
    let codec = ColorCodec::raw(inst.color_space);
    let mut states = initial_states(inst);
    let mut net = Network::new(&inst.graph, EngineConfig::congest(inst.n(), DEFAULT_C_BW, seed));
    let mut progs: Vec<TryColor> = states.iter_mut().map(|s| TryColor::new(s, &codec, None, true)).collect();
    let r = net.run_phase(&mut progs, Policy::UntilTerminal { max }).unwrap();
    drop(progs);
    (states, r)
}

fn assert_proper(g: &Graph, states: &[NodeState]) {
    for (u, v) in g.edges() {
        let (a, b) = (states[u as usize].color, states[v as usize].color);
        assert!(a.is_none() || a != b, "edge {u}-{v} shares color {a:?}");
    }
    for s in states {
        if let Some(c) = s.color {
            assert!(s.initial.contains(c));
        }
    }
}

#[test]
fn isolated_node_colors_in_round_one() {
    let inst = ColoringInstance::delta_plus_one(Graph::empty(1));
    let codec = ColorCodec::raw(1);
    let mut states = initial_states(&inst);
    let mut net = Network::new(&inst.graph, EngineConfig::congest(1, DEFAULT_C_BW, 3));
    let mut progs: Vec<TryColor> = states.iter_mut().map(|s| TryColor::new(s, &codec, None, true)).collect();
    net.run_phase(&mut progs, Policy::Fixed(1)).unwrap();
    drop(progs);
    assert_eq!(states[0].color, Some(0));
    assert_eq!(net.metrics().colored_count_timeline, vec![1]);
}

#[test]
fn edge_both_colored_with_probability_one_half() {
    // Oracle: enumerate the four equally likely proposal pairs.
    let both = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).filter(|(a, b)| a != b).count();
    let p_exact = both as f64 / 4.0;
    let inst = ColoringInstance::delta_plus_one(named::path(2));
    let codec = ColorCodec::raw(2);
    let seeds = 10_000;
    let mut hits = 0;
    for seed in 0..seeds {
        let mut states = initial_states(&inst);
        let mut net = Network::new(&inst.graph, EngineConfig::congest(2, DEFAULT_C_BW, seed));
        let mut progs: Vec<TryColor> = states.iter_mut().map(|s| TryColor::new(s, &codec, Some(1), true)).collect();
        net.run_phase(&mut progs, Policy::Fixed(1)).unwrap();
        drop(progs);
        if states.iter().all(|s| s.is_colored()) {
            hits += 1;
        }
    }
    let rate = hits as f64 / seeds as f64;
    assert!((rate - p_exact).abs() <= 0.05, "rate {rate}");
}

#[test]
fn triangle_is_always_properly_colored() {
    let inst = ColoringInstance::delta_plus_one(named::complete(3));
    for seed in 0..1000 {
        let (states, rounds) = loop_until_colored(&inst, seed, 100);
        assert!(rounds <= 100);
        assert!(states.iter().all(|s| s.is_colored()));
        assert_proper(&inst.graph, &states);
    }
}

#[test]
fn random_graphs_never_conflict() {
    for seed in 0..30 {
        let inst = crate::graph::generate("gnp:n=80,p=0.15,list=2", seed).unwrap();
        let (states, _) = loop_until_colored(&inst, seed, 2000);
        assert!(states.iter().all(|s| s.is_colored()));
        assert_proper(&inst.graph, &states);
    }
}

#[test]
fn slack_generation_on_empty_graph_changes_nothing() {
    let inst = ColoringInstance::delta_plus_one(Graph::empty(0));
    let mut states = initial_states(&inst);
    let mut net = Network::new(&inst.graph, EngineConfig::local(0));
    assert_eq!(slack_generation(&mut net, &mut states, &ColorCodec::raw(1), DEFAULT_P_G, None).unwrap(), 0);
    assert_eq!(net.rounds(), 2);
}

#[test]
fn slack_generation_colors_a_small_fraction_of_a_clique() {
    let delta = 60usize;
    // A node keeps its color iff it is sampled and no other sampled node picks the same color.
    let expected = DEFAULT_P_G * (1.0 - DEFAULT_P_G / (delta + 1) as f64).powi(delta as i32);
    let inst = ColoringInstance::delta_plus_one(named::complete(delta + 1));
    let codec = ColorCodec::raw(inst.color_space);
    let seeds = 1000;
    let mut colored = 0usize;
    for seed in 0..seeds {
        let mut states = initial_states(&inst);
        let mut net = Network::new(&inst.graph, EngineConfig::congest(inst.n(), DEFAULT_C_BW, seed));
        slack_generation(&mut net, &mut states, &codec, DEFAULT_P_G, None).unwrap();
        assert_proper(&inst.graph, &states);
        colored += states.iter().filter(|s| s.is_colored()).count();
    }
    let frac = colored as f64 / (seeds as f64 * (delta + 1) as f64);
    assert!((0.02..=0.05).contains(&frac), "fraction {frac}");
    assert!((frac - expected).abs() < 0.004, "fraction {frac} vs {expected}");
}

#[test]
fn permanent_slack_never_decreases() {
    for seed in 0..20 {
        let inst = crate::graph::generate("gnp:n=60,p=0.2,list=2", seed).unwrap();
        let codec = ColorCodec::raw(inst.color_space);
        let g = &inst.graph;
        let mut states = initial_states(&inst);
        let mut net = Network::new(g, EngineConfig::congest(inst.n(), DEFAULT_C_BW, seed));
        let mut prev: Vec<i64> = states.iter().map(|s| s.permanent_slack(g.degree(s.id))).collect();
        for _ in 0..15 {
            let mut progs: Vec<TryColor> = states.iter_mut().map(|s| TryColor::new(s, &codec, Some(1), true)).collect();
            net.run_phase(&mut progs, Policy::Fixed(2)).unwrap();
            drop(progs);
            for s in &states {
                let now = s.permanent_slack(g.degree(s.id));
                if !s.is_colored() {
                    assert!(now >= prev[s.id as usize]);
                }
                prev[s.id as usize] = now;
            }
            assert_proper(g, &states);
        }
    }
}

#[test]
fn chromatic_slack_counts_outside_colors() {
    // Node 1's palette {5,6} lies outside node 0's palette {0,1}; identical palettes give 0.
    let g = named::path(2);
    let pal = vec![Palette::from_colors(vec![0, 1]).unwrap(), Palette::from_colors(vec![5, 6]).unwrap()];
    let inst = ColoringInstance::with_palettes(g.clone(), pal, 7, crate::graph::Variant::DeltaPlusOneList).unwrap();
    let codec = ColorCodec::raw(7);
    let mut states = initial_states(&inst);
    let mut net = Network::new(&inst.graph, EngineConfig::congest(2, DEFAULT_C_BW, 1));
    let mut progs: Vec<TryColor> =
        states.iter_mut().enumerate().map(|(v, s)| TryColor::new(s, &codec, None, v == 1)).collect();
    net.run_phase(&mut progs, Policy::UntilTerminal { max: 10 }).unwrap();
    drop(progs);
    assert!(states[1].is_colored() && !states[0].is_colored());
    assert_eq!(states[0].chromatic_slack(), 1);
    assert_eq!(states[0].live.len(), 2);
    let same = ColoringInstance::delta_plus_one(named::complete(5));
    for seed in 0..20 {
        let (states, _) = loop_until_colored(&same, seed, 200);
        assert!(states.iter().all(|s| s.chromatic_slack() == 0));
    }
}
