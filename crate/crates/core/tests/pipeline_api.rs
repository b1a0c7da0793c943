//! End-to-end checks through the public API only.

use dcolor::engine::{EngineConfig, Network, DEFAULT_C_BW};
use dcolor::graph::{generate, named, ColoringInstance, Graph, NodeId, Palette, Variant};
use dcolor::pipeline::{color_graph, Mode, PipelineConfig, RunRecord};
use dcolor::slack::{initial_states, slack_generation, DEFAULT_P_G};
use dcolor::multitrial::ColorCodec;
use proptest::prelude::*;

/// Independent check of a finished coloring: every node colored from its own list and no
/// monochromatic edge, read straight off the edge list.
fn check_coloring(inst: &ColoringInstance, coloring: &[Option<u64>]) -> Result<(), String> {
    for (v, c) in coloring.iter().enumerate() {
        let c = c.ok_or(format!("node {v} uncolored"))?;
        if !inst.palettes[v].iter().any(|x| x == c) {
            return Err(format!("node {v} took {c} outside its list"));
        }
    }
    for (u, v) in inst.graph.edges() {
        if coloring[u as usize] == coloring[v as usize] {
            return Err(format!("edge {u}-{v} monochromatic"));
        }
    }
    Ok(())
}

#[test]
fn single_node_is_colored_in_round_one() {
    let inst = ColoringInstance::delta_plus_one(Graph::empty(1));
    let out = color_graph(&inst, &PipelineConfig::default(), 0).unwrap();
    assert_eq!(out.coloring, vec![Some(0)]);
    assert!(out.metrics.rounds_used <= 1);
}

#[test]
fn clique_of_101_in_high_degree_mode_meets_the_budget() {
    let inst = ColoringInstance::delta_plus_one(named::complete(101));
    let cfg = PipelineConfig { mode: Mode::HighDegree, ..PipelineConfig::default() };
    for seed in 0..3 {
        let out = color_graph(&inst, &cfg, seed).unwrap();
        check_coloring(&inst, &out.coloring).unwrap();
        assert!(out.bad.nodes.is_empty());
        let budget = cfg.budget(inst.n(), inst.delta(), inst.color_space).total();
        assert!(out.metrics.rounds_used <= budget);
        let mut colors: Vec<u64> = out.coloring.iter().map(|c| c.unwrap()).collect();
        colors.sort_unstable();
        assert_eq!(colors, (0..=100).collect::<Vec<u64>>());
    }
}

#[test]
fn dense_gnp_is_colored_without_bad_nodes() {
    // n = 20000 with p = 0.03 gives Δ ≈ 700; two seeds here, the CLI runs the full hundred.
    for seed in 0..2 {
        let inst = generate("gnp:n=20000,p=0.03", seed).unwrap();
        let out = color_graph(&inst, &PipelineConfig::default(), seed).unwrap();
        check_coloring(&inst, &out.coloring).unwrap();
        assert!(out.bad.nodes.is_empty(), "seed {seed}: {} Bad nodes", out.bad.nodes.len());
        assert_eq!(out.metrics.bandwidth_violations, 0);
    }
}

#[test]
fn runs_are_reproducible_from_the_seed() {
    let inst = generate("planted-acd:n=600,delta=40,list=3", 9).unwrap();
    let cfg = PipelineConfig::for_instance(&inst);
    let a = color_graph(&inst, &cfg, 4).unwrap();
    let b = color_graph(&inst, &cfg, 4).unwrap();
    assert_eq!(a.coloring, b.coloring);
    assert_eq!(RunRecord::new(&inst, cfg.mode, 4, &a), RunRecord::new(&inst, cfg.mode, 4, &b));
}

#[test]
fn record_serializes_with_schema_and_delta() {
    let inst = generate("gnp:n=50,p=0.2", 1).unwrap();
    let out = color_graph(&inst, &PipelineConfig::default(), 1).unwrap();
    let rec = RunRecord::new(&inst, Mode::ShatteringAuto, 1, &out);
    let v = serde_json::to_value(&rec).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["delta"], inst.delta());
    assert_eq!(v["proper"], true);
}

#[test]
fn slack_generation_only_uses_own_lists() {
    let g = named::complete(12);
    let palettes = (0..12u64).map(|v| Palette::from_colors((v..v + 12).collect()).unwrap()).collect();
    let inst = ColoringInstance::with_palettes(g, palettes, 24, Variant::DeltaPlusOneList).unwrap();
    let mut states = initial_states(&inst);
    let mut net = Network::new(&inst.graph, EngineConfig::congest(12, DEFAULT_C_BW, 3));
    slack_generation(&mut net, &mut states, &ColorCodec::raw(24), DEFAULT_P_G, None).unwrap();
    let coloring: Vec<Option<u64>> = states.iter().map(|s| s.color).collect();
    for (v, c) in coloring.iter().enumerate() {
        if let Some(c) = c {
            assert!(inst.palettes[v].contains(*c));
        }
    }
    for (u, v) in inst.graph.edges() {
        assert!(coloring[u as usize].is_none() || coloring[u as usize] != coloring[v as usize]);
    }
}

fn family() -> impl Strategy<Value = String> {
    prop_oneof![
        (10usize..200, 0.01f64..0.3).prop_map(|(n, p)| format!("gnp:n={n},p={p:.3}")),
        (10usize..150, 2u64..5).prop_map(|(n, f)| format!("gnp:n={n},p=0.15,list={f}")),
        (3usize..25, 1usize..6).prop_map(|(s, k)| format!("clique-union:size={s},k={k},p=0.05,space=wide")),
        (100usize..400, 10usize..30).prop_map(|(n, d)| format!("planted-acd:n={n},delta={d},zeta=2")),
        (10usize..50).prop_map(|n| format!("line-graph:gnp:n={n},p=0.2,list=2")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_generated_instance_is_colored_legally(spec in family(), seed in 0u64..10_000) {
        let inst = generate(&spec, seed).unwrap();
        let cfg = PipelineConfig::for_instance(&inst);
        let out = color_graph(&inst, &cfg, seed).unwrap();
        prop_assert!(check_coloring(&inst, &out.coloring).is_ok(), "{}", check_coloring(&inst, &out.coloring).unwrap_err());
        prop_assert_eq!(out.metrics.bandwidth_violations, 0);
        let bad: Vec<NodeId> = out.bad.nodes.clone();
        let comp_total: usize = out.bad.components.iter().map(|c| c.len()).sum();
        prop_assert_eq!(comp_total, bad.len());
    }
}
