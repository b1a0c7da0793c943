use proptest::prelude::*;

use super::*;
use crate::engine::EngineConfig;
use crate::graph::{generate, named, ColoringInstance, Graph, NodeId};

fn high() -> PipelineConfig {
    PipelineConfig { mode: Mode::HighDegree, ..PipelineConfig::default() }
}

fn assert_valid(inst: &ColoringInstance, out: &PipelineOutcome) {
    let r = &out.report;
    assert!(r.complete && r.proper && r.palette_legal, "{r:?}");
    for (u, v) in inst.graph.edges() {
        assert_ne!(out.coloring[u as usize], out.coloring[v as usize]);
    }
    for (v, c) in out.coloring.iter().enumerate() {
        assert!(inst.palettes[v].contains(c.unwrap()));
    }
    assert_eq!(out.metrics.bandwidth_violations, 0);
}

/// Components of G[Bad] are connected and no edge joins two of them.
fn components_exact(g: &Graph, bad: &BadSet) {
    let mut comp = vec![usize::MAX; g.node_count()];
    for (i, c) in bad.components.iter().enumerate() {
        for &v in c {
            comp[v as usize] = i;
        }
    }
    let total: usize = bad.components.iter().map(|c| c.len()).sum();
    assert_eq!(total, bad.nodes.len());
    for (u, v) in g.edges() {
        let (a, b) = (comp[u as usize], comp[v as usize]);
        if a != usize::MAX && b != usize::MAX {
            assert_eq!(a, b);
        }
    }
    for c in &bad.components {
        let sub = g.induced_subgraph(c);
        assert_eq!(sub.components_of(&vec![true; c.len()]).len(), 1);
    }
}

fn putaside_disjoint(g: &Graph, sets: &[Vec<NodeId>]) {
    let mut owner = vec![usize::MAX; g.node_count()];
    for (i, s) in sets.iter().enumerate() {
        for &v in s {
            owner[v as usize] = i;
        }
    }
    for (u, v) in g.edges() {
        let (a, b) = (owner[u as usize], owner[v as usize]);
        assert!(a == usize::MAX || b == usize::MAX || a == b, "put-aside sets {a} and {b} are adjacent");
    }
}

#[test]
fn clique_of_101_within_frozen_budget() {
    let inst = ColoringInstance::delta_plus_one(named::complete(101));
    for seed in 0..5 {
        let out = color_graph(&inst, &PipelineConfig::default(), seed).unwrap();
        assert_valid(&inst, &out);
        assert!(out.bad.is_empty());
        assert!(out.metrics.rounds_used <= 487);
        let out = color_graph(&inst, &high(), seed).unwrap();
        assert!(out.bad.is_empty() && out.report.accepted);
        assert_eq!(out.metrics.rounds_used, 487);
    }
}

#[test]
fn frozen_budget_matches_its_parts() {
    // Δ = 100: s_min = 13 with δ = 1 gives ρ = 3, log*ρ = 2, so 12 Try and 3·12 + 16 + 1 Multi
    // iterations; s_min = 5 with δ = 1/3 gives ρ = 3 and 3·12 + 3·16 + 1 Multi iterations.
    let sparse = 2 * 12 + 3 * (3 * 12 + 16 + 1);
    let dense = 2 * 12 + 3 * (3 * 12 + 3 * 16 + 1);
    assert_eq!(high().budget(102, 100, 101).total(), 2 + 2 + 6 + sparse + 3 + 5 + dense + 7);
    assert_eq!(high().budget(102, 100, 101).total(), 487);
}

#[test]
fn single_node_is_colored_in_round_one() {
    let inst = ColoringInstance::delta_plus_one(Graph::empty(1));
    for cfg in [PipelineConfig::default(), high()] {
        let out = color_graph(&inst, &cfg, 0).unwrap();
        assert_eq!(out.coloring, vec![Some(0)]);
        assert_eq!(out.metrics.rounds_used, 1);
        assert_eq!(out.metrics.colored_count_timeline, vec![1]);
    }
}

#[test]
fn high_degree_steps_follow_the_budget_table() {
    let inst = generate("planted-acd:n=2000,delta=120", 4).unwrap();
    let cfg = high();
    let budget = cfg.budget(inst.n(), inst.delta(), inst.color_space);
    for seed in 0..3 {
        let out = color_graph(&inst, &cfg, seed).unwrap();
        assert_valid(&inst, &out);
        assert!(out.bad.is_empty(), "{:?}", out.report.triggers);
        assert_eq!(out.report.steps, budget.steps);
        assert_eq!(out.metrics.rounds_used, budget.total());
        putaside_disjoint(&inst.graph, &out.putaside);
        assert!(out.report.putaside_nodes > 0);
    }
}

#[test]
fn list_instances() {
    for spec in ["gnp:n=400,p=0.1,list=2", "planted-acd:n=600,delta=50,list=3", "clique-union:size=40,k=8,p=0.02,list=2"] {
        let inst = generate(spec, 2).unwrap();
        let cfg = PipelineConfig::for_instance(&inst);
        assert!(cfg.list_variant);
        for seed in 0..3 {
            let out = color_graph(&inst, &cfg, seed).unwrap();
            assert_valid(&inst, &out);
            assert_eq!(out.report.step_rounds(Step::CliqueMeta), crate::acd::LEADER_ROUNDS + crate::acd::ESTIMATE_ROUNDS + crate::acd::LIST_ROUNDS);
        }
    }
}

#[test]
fn wide_color_space_exchanges_keys_first() {
    let inst = generate("planted-acd:n=300,delta=40,space=wide", 1).unwrap();
    let cfg = PipelineConfig::for_instance(&inst);
    let out = color_graph(&inst, &cfg, 3).unwrap();
    assert_valid(&inst, &out);
    assert_eq!(out.report.steps[0].0, Step::KeyExchange);
    assert!(out.metrics.max_bits() <= cfg.bandwidth(inst.n()));
}

#[test]
fn transversal_variant() {
    let inst = generate("planted-acd:n=3000,delta=100", 5).unwrap();
    let cfg = PipelineConfig { putaside: PutAsideVariant::Transversal { m: 2 }, ..PipelineConfig::default() };
    for seed in 0..3 {
        let out = color_graph(&inst, &cfg, seed).unwrap();
        assert_valid(&inst, &out);
        putaside_disjoint(&inst.graph, &out.putaside);
        assert_eq!(out.report.step_rounds(Step::PutAside), transversal_rounds(2));
    }
}

#[test]
fn extra_colors_skip_putaside() {
    let inst = generate("gnp:n=2000,p=0.025,extra=150", 1).unwrap();
    let cfg = PipelineConfig { refinement: Refinement::ExtraColors { kappa: 4.0, delta: 0.1 }, ..high() };
    let out = color_graph(&inst, &cfg, 1).unwrap();
    assert_valid(&inst, &out);
    assert_eq!(out.report.step_rounds(Step::PutAside) + out.report.step_rounds(Step::PutAsideColor), 0);
    assert!(out.report.steps.iter().all(|s| !matches!(s.0, Step::PutAside | Step::PutAsideColor)));
    let plain = generate("gnp:n=2000,p=0.025", 1).unwrap();
    assert!(color_graph(&plain, &cfg, 1).is_err());
}

#[test]
fn clique_reduced_on_triangle_free() {
    let inst = generate("planted-acd:n=600,delta=60,sparse=1,sdeg=1,bipartite=1", 2).unwrap();
    let delta = inst.delta() as u64;
    let cfg = PipelineConfig { refinement: Refinement::CliqueReduced { f: delta as f64 / 2.0 }, ..PipelineConfig::default() };
    for seed in 0..3 {
        let out = color_graph(&inst, &cfg, seed).unwrap();
        assert_valid(&inst, &out);
        assert!(out.report.max_color.unwrap() < delta, "{:?}", out.report.max_color);
    }
    let k = ColoringInstance::delta_plus_one(named::complete(30));
    assert!(color_graph(&k, &cfg, 0).is_err());
}

#[test]
fn runs_are_deterministic() {
    let inst = generate("low-degree:n=3000,delta=24", 3).unwrap();
    let a = color_graph(&inst, &PipelineConfig::default(), 9).unwrap();
    let b = color_graph(&inst, &PipelineConfig::default(), 9).unwrap();
    assert_eq!(a.coloring, b.coloring);
    assert_eq!(a.bad, b.bad);
    assert_eq!(a.metrics.rounds_used, b.metrics.rounds_used);
}

#[test]
fn bad_membership_ignores_other_components() {
    // Two copies of the same instance side by side; reseeding a node of the first copy
    // must leave the Bad set and the colors of the second copy untouched.
    let base = generate("low-degree:n=1500,delta=24", 1).unwrap().graph;
    let n = base.node_count() as NodeId;
    let edges: Vec<(NodeId, NodeId)> = base.edges().flat_map(|(u, v)| [(u, v), (u + n, v + n)]).collect();
    let g = Graph::from_edges(2 * n as usize, &edges).unwrap();
    let inst = ColoringInstance::delta_plus_one(g);
    let cfg = PipelineConfig::default();
    let ecfg = |o: Option<(NodeId, u64)>| EngineConfig { seed_override: o, ..EngineConfig::congest(inst.n(), cfg.c_bw, 5) };
    let a = color_graph_with(&inst, &cfg, ecfg(None)).unwrap();
    for (v, s) in [(0, 77), (n / 2, 78), (n - 1, 79)] {
        let b = color_graph_with(&inst, &cfg, ecfg(Some((v, s)))).unwrap();
        let second = |o: &PipelineOutcome| -> (Vec<_>, Vec<_>) {
            (o.bad.nodes.iter().copied().filter(|&u| u >= n).collect(), o.coloring[n as usize..].to_vec())
        };
        assert_eq!(second(&a), second(&b));
    }
}

#[test]
fn acd_failure_sends_everything_to_the_fallback() {
    // K_10 cannot be decomposed at ε = 1/5.
    let inst = ColoringInstance::delta_plus_one(named::disjoint_cliques(3, 4));
    let out = color_graph(&inst, &PipelineConfig::default(), 0).unwrap();
    assert!(out.report.triggers.acd_failed);
    assert_eq!(out.bad.nodes.len(), 12);
    assert_eq!(out.bad.components.len(), 3);
    assert_valid(&inst, &out);
    let out = color_graph(&inst, &high(), 0).unwrap();
    assert!(!out.report.accepted && out.report.proper);
}

#[test]
fn record_serializes_with_schema() {
    let inst = generate("gnp:n=200,p=0.05", 1).unwrap();
    let out = color_graph(&inst, &PipelineConfig::default(), 1).unwrap();
    let rec = RunRecord::new(&inst, Mode::ShatteringAuto, 1, &out);
    let line = serde_json::to_string(&rec).unwrap();
    for key in ["\"schema\":1", "\"seed\":1", "\"n\":200", "\"delta\"", "\"rounds\"", "\"max_bits\"", "\"bad_size\"", "\"components\"", "\"colors_used\"", "\"proper\":true"] {
        assert!(line.contains(key), "{key} missing from {line}");
    }
    assert_eq!(serde_json::from_str::<RunRecord>(&line).unwrap(), rec);
}

fn small_instance() -> impl Strategy<Value = String> {
    prop_oneof![
        (20usize..120, 5u32..30).prop_map(|(n, p)| format!("gnp:n={n},p=0.{p:02}")),
        (10usize..30, 2usize..6).prop_map(|(s, k)| format!("clique-union:size={s},k={k},p=0.02")),
        (12usize..40, 0usize..3).prop_map(|(d, z)| format!("planted-acd:k=5,delta={d},zeta={z},anti=0.02")),
        (30usize..80).prop_map(|n| format!("line-graph:gnp:n={n},p=0.1")),
        (20usize..120).prop_map(|n| format!("gnp:n={n},p=0.1,list=2")),
        (20usize..80).prop_map(|n| format!("gnp:n={n},p=0.1,deg=1")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_run_ends_proper(spec in small_instance(), seed in 0u64..1000, fixed in any::<bool>(), transversal in any::<bool>()) {
        let inst = generate(&spec, seed).unwrap();
        let cfg = PipelineConfig {
            mode: if fixed { Mode::HighDegree } else { Mode::ShatteringAuto },
            putaside: if transversal { PutAsideVariant::Transversal { m: 1 } } else { PutAsideVariant::DisjointSample },
            ..PipelineConfig::for_instance(&inst)
        };
        let out = color_graph(&inst, &cfg, seed).unwrap();
        assert_valid(&inst, &out);
        components_exact(&inst.graph, &out.bad);
        putaside_disjoint(&inst.graph, &out.putaside);
        prop_assert_eq!(out.report.triggers.stray, 0);
        prop_assert_eq!(out.report.trials.conflicts, 0);
        prop_assert!(out.report.fallback.deg_plus_one_violations.is_empty());
        if fixed && inst.delta() > 0 && !out.report.triggers.acd_failed {
            let budget = cfg.budget(inst.n(), inst.delta(), inst.color_space);
            prop_assert_eq!(out.report.pipeline_rounds(), budget.total());
        }
    }
}
