use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{transversal_rounds, ConfigError, Mode, PipelineConfig, PutAsideVariant, Refinement, Step};
use super::fallback::{shatter_and_finish, BadSet, FallbackReport};
use crate::acd::{clique_metas, compute_acd, CliqueMeta, LeaderRule, ACD_ROUNDS, ESTIMATE_ROUNDS, LEADER_ROUNDS, LIST_ROUNDS};
use crate::dense::{
    color_putaside, derived_graph, disjoint_sample, putaside_cap, synch_color_trial, transversal, PutAsideTask, SynchClique,
    DISJOINT_SAMPLE_ROUNDS,
};
use crate::engine::{EngineConfig, EngineError, Mode as Model, Network, Policy, RunMetrics};
use crate::graph::{Color, ColoringInstance, NodeId};
use crate::multitrial::{hashed_bits, slack_color, ColorCodec, FamilyConfig, KeyExchange, SlackColorParams, TrialEnv, TrialStats};
use crate::slack::{initial_states, slack_generation, NodeState, Role};

/// How many nodes or cliques each Bad-set trigger caught.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Triggers {
    pub acd_failed: bool,
    /// Core nodes of cliques with ζ'_C > Δ^{1/3} whose slack fell short.
    pub slack_shortfall: u32,
    pub sparse_survivors: u32,
    /// Cliques whose put-aside set came out too small.
    pub putaside_small: u32,
    /// Cliques whose synchronized trial decolored too many members.
    pub overflow: u32,
    /// Cliques whose leader ran out of colors to hand out.
    pub palette_short: u32,
    pub dense_survivors: u32,
    /// Put-aside nodes the leader could not color.
    pub putaside_failed: u32,
    /// Uncolored nodes that no trigger claimed (should stay 0).
    pub stray: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// Measured rounds per executed step, in order.
    pub steps: Vec<(Step, u32)>,
    pub triggers: Triggers,
    pub sparse: usize,
    pub cliques: usize,
    pub putaside_nodes: usize,
    pub trials: TrialStats,
    pub fallback: FallbackReport,
    pub complete: bool,
    pub proper: bool,
    pub palette_legal: bool,
    pub colors_used: usize,
    pub max_color: Option<Color>,
    /// Proper and complete; in high-degree mode the Bad set must also be empty.
    pub accepted: bool,
}

impl PipelineReport {
    /// Rounds spent before the fallback.
    pub fn pipeline_rounds(&self) -> u32 {
        self.steps.iter().filter(|s| s.0 != Step::Fallback).map(|s| s.1).sum()
    }

    pub fn step_rounds(&self, step: Step) -> u32 {
        self.steps.iter().filter(|s| s.0 == step).map(|s| s.1).sum()
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub coloring: Vec<Option<Color>>,
    pub metrics: RunMetrics,
    pub bad: BadSet,
    /// Put-aside set of every clique (empty where none was built or the clique went to Bad).
    pub putaside: Vec<Vec<NodeId>>,
    pub report: PipelineReport,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

struct Run<'g, 'c> {
    net: Network<'g>,
    states: Vec<NodeState>,
    bad: Vec<bool>,
    report: PipelineReport,
    putaside: Vec<Vec<NodeId>>,
    cfg: &'c PipelineConfig,
}

impl Run<'_, '_> {
    fn step<T>(&mut self, step: Step, f: impl FnOnce(&mut Self) -> Result<T, EngineError>) -> Result<T, EngineError> {
        let before = self.net.rounds();
        let out = f(self)?;
        let used = self.net.rounds() - before;
        self.report.steps.push((step, used));
        Ok(out)
    }

    fn colored(&self) -> u32 {
        self.states.iter().filter(|s| s.is_colored()).count() as u32
    }

    fn charge(&mut self, rounds: u32) -> Result<(), EngineError> {
        let c = self.colored();
        self.net.charge(rounds, c)
    }

    fn mark_bad(&mut self, v: NodeId) -> bool {
        let st = &mut self.states[v as usize];
        if st.is_colored() || self.bad[v as usize] {
            return false;
        }
        st.role = Role::Bad;
        self.bad[v as usize] = true;
        true
    }

    /// Sends every uncolored member of the clique to Bad; returns how many moved.
    fn clique_to_bad(&mut self, members: &[NodeId]) -> u32 {
        members.iter().map(|&v| u32::from(self.mark_bad(v))).sum()
    }

    fn fixed(&self) -> bool {
        self.cfg.mode == Mode::HighDegree
    }

    fn slack_color_on(&mut self, active: &[bool], params: &SlackColorParams, env: &TrialEnv) -> Result<Vec<NodeId>, EngineError> {
        let fixed = self.fixed();
        let r = slack_color(&mut self.net, &mut self.states, active, params, env, fixed)?;
        add_stats(&mut self.report.trials, &r.stats);
        // Participants still uncolored at the end failed, whether the test stopped them or not.
        Ok((0..active.len() as NodeId).filter(|&v| active[v as usize] && !self.states[v as usize].is_colored()).collect())
    }
}

fn add_stats(a: &mut TrialStats, b: &TrialStats) {
    a.try_attempts += b.try_attempts;
    a.try_success += b.try_success;
    a.multi_attempts += b.multi_attempts;
    a.multi_success += b.multi_success;
    a.hit_set_empty += b.hit_set_empty;
    a.conflicts += b.conflicts;
}

/// The part of a clique core the leader can reach directly: the leader and its core neighbors.
fn reachable_core(g: &crate::graph::Graph, m: &CliqueMeta) -> Vec<NodeId> {
    m.core.iter().copied().filter(|&v| v == m.leader || g.has_edge(v, m.leader)).collect()
}

/// Runs the whole pipeline on `inst` with the engine seeded by `seed`.
pub fn color_graph(inst: &ColoringInstance, cfg: &PipelineConfig, seed: u64) -> Result<PipelineOutcome, PipelineError> {
    let n = inst.n();
    let mut ecfg = match cfg.model {
        Model::Congest => EngineConfig::congest(n, cfg.c_bw, seed),
        Model::Local => EngineConfig::local(seed),
    };
    ecfg.max_rounds = cfg.max_rounds;
    color_graph_with(inst, cfg, ecfg)
}

/// As [`color_graph`], with explicit engine settings (for transcripts and seed overrides).
pub fn color_graph_with(inst: &ColoringInstance, cfg: &PipelineConfig, ecfg: EngineConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.check(inst)?;
    let g = &inst.graph;
    let n = g.node_count();
    let delta = g.max_degree();
    let mut run = Run { net: Network::new(g, ecfg), states: initial_states(inst), bad: vec![false; n], report: PipelineReport::default(), putaside: Vec::new(), cfg };

    if delta == 0 {
        run.step(Step::Trivial, |r| {
            for st in &mut r.states {
                let first = st.live.iter().next();
                if let Some(c) = first {
                    st.adopt(c);
                }
            }
            r.charge(1)
        })?;
        return Ok(finish(inst, run));
    }

    let codec = match hashed_bits(n, inst.color_space, cfg.codec_d) {
        None => ColorCodec::raw(inst.color_space),
        Some(m) => {
            let chunk = run.net.config().bandwidth_bits.min(63);
            let keys = run.step(Step::KeyExchange, |r| {
                let mut progs: Vec<KeyExchange> = (0..n as NodeId).map(|v| KeyExchange::new(chunk, g.degree(v))).collect();
                r.net.run_phase(&mut progs, Policy::Fixed(KeyExchange::rounds(chunk)))?;
                Ok(progs.iter().map(|p| p.key).collect::<Vec<u64>>())
            })?;
            ColorCodec::Hashed { keys: keys.into(), m }
        }
    };

    // Step 1: almost-clique decomposition.
    let acd = run.step(Step::Acd, |r| {
        r.charge(ACD_ROUNDS)?;
        Ok(compute_acd(g, cfg.epsilon()))
    })?;
    let acd = match acd {
        Ok(a) => a,
        Err(_) => {
            run.report.triggers.acd_failed = true;
            for v in 0..n as NodeId {
                run.mark_bad(v);
            }
            return fallback_and_finish(inst, run, &codec);
        }
    };
    run.report.sparse = acd.sparse.len();
    run.report.cliques = acd.cliques.len();
    for &v in &acd.sparse {
        run.states[v as usize].role = Role::Sparse;
    }

    // Step 2: slack generation (on the lower half of the palette when reducing colors).
    let reduced = matches!(cfg.refinement, Refinement::CliqueReduced { .. });
    run.step(Step::SlackGeneration, |r| {
        let (p_g, below) = if reduced { (cfg.p_g / 2.0, Some((delta / 2) as Color)) } else { (cfg.p_g, None) };
        slack_generation(&mut r.net, &mut r.states, &codec, p_g, below).map(|_| ())
    })?;
    if reduced {
        for v in 0..n as NodeId {
            let st = &mut run.states[v as usize];
            if st.is_colored() {
                continue;
            }
            let s = st.permanent_slack(g.degree(v)).max(0) as u64;
            let top = delta as u64 - s / 2;
            let drop: Vec<Color> = st.live.iter().filter(|&c| c >= top).collect();
            for c in drop {
                st.live.remove(c);
            }
        }
    }

    // Step 3: leaders, outliers and ζ'_C.
    let metas = run.step(Step::CliqueMeta, |r| {
        let mut rounds = LEADER_ROUNDS + ESTIMATE_ROUNDS;
        let metas = if cfg.list_variant {
            rounds += LIST_ROUNDS;
            let cs: Vec<usize> = r.states.iter().map(|s| s.chromatic_slack()).collect();
            clique_metas(g, &acd, LeaderRule::MinChromaticSlack(&cs))
        } else {
            clique_metas(g, &acd, LeaderRule::MinAntiDegree)
        };
        r.charge(rounds)?;
        Ok(metas)
    })?;
    let b = (delta as f64).cbrt();
    for m in &metas {
        for &v in &m.outliers {
            run.states[v as usize].role = Role::Outlier;
        }
        for &v in &m.core {
            run.states[v as usize].role = Role::Core;
        }
        run.states[m.leader as usize].leader = true;
    }
    for m in &metas {
        let z = ratio_f64(m.zeta_estimate);
        if z > b {
            let need = cfg.thresholds.c_slk * z;
            for &v in &m.core {
                let st = &run.states[v as usize];
                if !st.is_colored() && (st.permanent_slack(g.degree(v)) as f64) < need && run.mark_bad(v) {
                    run.report.triggers.slack_shortfall += 1;
                }
            }
        }
    }

    let max_palette = inst.palettes.iter().map(|p| p.len()).max().unwrap_or(1);
    let fam = FamilyConfig { mode: cfg.family, ..FamilyConfig::calibrated(run.net.config().bandwidth_bits) };
    let env = TrialEnv::new(&codec, &fam, inst.color_space, n, max_palette, cfg.family_seed);

    // Step 4: SlackColor on sparse nodes and outliers.
    let active: Vec<bool> =
        run.states.iter().map(|s| !s.is_colored() && matches!(s.role, Role::Sparse | Role::Outlier)).collect();
    let failed = run.step(Step::SparseColor, |r| r.slack_color_on(&active, &cfg.sparse_params(delta), &env))?;
    for v in failed {
        if run.mark_bad(v) {
            run.report.triggers.sparse_survivors += 1;
        }
    }

    let has_cliques = !metas.is_empty();
    let run_dense = has_cliques || run.fixed();

    // Step 5: put-aside sets for cliques with ζ'_C ≤ Δ^{1/3}.
    let mut putaside: Vec<Vec<NodeId>> = vec![Vec::new(); metas.len()];
    if !cfg.skips_putaside() && run_dense {
        let eligible: Vec<usize> =
            (0..metas.len()).filter(|&i| ratio_f64(metas[i].zeta_estimate) <= b && !run.bad[metas[i].leader as usize]).collect();
        let cands: Vec<Vec<NodeId>> = eligible.iter().map(|&i| reachable_core(g, &metas[i])).collect();
        let p_s = 1.0 / (cfg.c_sample * b);
        let picked: Vec<Vec<NodeId>> = run.step(Step::PutAside, |r| match cfg.putaside {
            PutAsideVariant::DisjointSample => {
                let input: Vec<(NodeId, Vec<NodeId>)> = eligible.iter().zip(&cands).map(|(&i, c)| (metas[i].leader, c.clone())).collect();
                let sets = disjoint_sample(&mut r.net, &input, p_s);
                r.charge(DISJOINT_SAMPLE_ROUNDS)?;
                Ok(sets.into_iter().map(|s| s.selected).collect())
            }
            PutAsideVariant::Transversal { m } => {
                let parts: Vec<Vec<NodeId>> = eligible
                    .iter()
                    .zip(&cands)
                    .map(|(&i, c)| c.iter().copied().filter(|&v| v != metas[i].leader && !r.states[v as usize].is_colored()).collect())
                    .collect();
                let h = derived_graph(g, &parts);
                let mut members = vec![false; n];
                for p in &parts {
                    for &v in p {
                        members[v as usize] = true;
                    }
                }
                let net = &mut r.net;
                let tr = transversal(&h, &members, m, &mut |v, p| net.node_rng(v).gen_bool(p.clamp(0.0, 1.0)));
                let out = tr.output();
                let mut sets = Vec::new();
                for ((&i, c), p) in eligible.iter().zip(&cands).zip(&parts) {
                    let mut s: Vec<NodeId> = p.iter().copied().filter(|&v| out[v as usize]).collect();
                    s.shuffle(r.net.node_rng(metas[i].leader));
                    s.truncate(putaside_cap(c.len()));
                    s.sort_unstable();
                    sets.push(s);
                }
                r.charge(transversal_rounds(m))?;
                Ok(sets)
            }
        })?;
        let want = (cfg.thresholds.putaside_min * b * b / cfg.c_sample).ceil() as usize;
        for ((&i, c), sel) in eligible.iter().zip(&cands).zip(picked) {
            let sel: Vec<NodeId> = sel.into_iter().filter(|&v| !run.states[v as usize].is_colored() && !run.bad[v as usize]).collect();
            if sel.len() < want.min(putaside_cap(c.len())) {
                run.report.triggers.putaside_small += 1;
                let members = acd.cliques[metas[i].clique].clone();
                run.clique_to_bad(&members);
                continue;
            }
            for &v in &sel {
                run.states[v as usize].role = Role::PutAside;
            }
            run.report.putaside_nodes += sel.len();
            putaside[i] = sel;
        }
    }

    // Step 6: one synchronized color trial per clique.
    if run_dense {
        let synch: Vec<(usize, SynchClique)> = metas
            .iter()
            .enumerate()
            .filter(|(_, m)| !run.bad[m.leader as usize])
            .map(|(i, m)| {
                let members = reachable_core(g, m)
                    .into_iter()
                    .filter(|&v| {
                        let st = &run.states[v as usize];
                        !st.is_colored() && st.role == Role::Core
                    })
                    .collect();
                let z = ratio_f64(m.zeta_estimate).max(0.0);
                let max_decolored = (cfg.thresholds.kappa_dec * (z + b)).ceil() as u32;
                // In the list variant about η_w members get a color outside their palette; the
                // realized count stands in for η_w in the overflow bound.
                (i, SynchClique { leader: m.leader, members, max_decolored, excuse_off_palette: cfg.list_variant })
            })
            .collect();
        let cliques: Vec<SynchClique> = synch.iter().map(|s| s.1.clone()).collect();
        let outcomes = run.step(Step::Synch, |r| synch_color_trial(&mut r.net, &mut r.states, &cliques, &codec))?;
        for ((i, _), o) in synch.iter().zip(outcomes) {
            if o.overflow || o.palette_short {
                if o.overflow {
                    run.report.triggers.overflow += 1;
                } else {
                    run.report.triggers.palette_short += 1;
                }
                let members = acd.cliques[metas[*i].clique].clone();
                run.clique_to_bad(&members);
                putaside[*i].clear();
            }
        }
    }

    // Step 7: SlackColor on the uncolored dense nodes outside the put-aside sets.
    if run_dense {
        let active: Vec<bool> = run.states.iter().map(|s| !s.is_colored() && s.role == Role::Core).collect();
        let failed = run.step(Step::DenseColor, |r| r.slack_color_on(&active, &cfg.dense_params(delta), &env))?;
        for v in failed {
            if run.mark_bad(v) {
                run.report.triggers.dense_survivors += 1;
            }
        }
    }

    // Step 8: the leaders color their put-aside sets.
    if !cfg.skips_putaside() && run_dense {
        let tasks: Vec<PutAsideTask> = metas
            .iter()
            .zip(&putaside)
            .filter(|(_, p)| !p.is_empty())
            .map(|(m, p)| {
                let relays = reachable_core(g, m).into_iter().filter(|&v| v != m.leader && p.binary_search(&v).is_err()).collect();
                PutAsideTask { leader: m.leader, p: p.clone(), relays }
            })
            .collect();
        let outcomes = run.step(Step::PutAsideColor, |r| color_putaside(&mut r.net, &mut r.states, &tasks, &codec))?;
        for o in outcomes {
            for v in o.failed {
                if run.mark_bad(v) {
                    run.report.triggers.putaside_failed += 1;
                }
            }
        }
    }

    run.putaside = putaside;
    fallback_and_finish(inst, run, &codec)
}

fn ratio_f64(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn fallback_and_finish(inst: &ColoringInstance, mut run: Run, codec: &ColorCodec) -> Result<PipelineOutcome, PipelineError> {
    for v in 0..inst.n() as NodeId {
        if run.mark_bad(v) {
            run.report.triggers.stray += 1;
        }
    }
    let bad = BadSet::new(&inst.graph, &run.bad);
    let restore = matches!(run.cfg.refinement, Refinement::CliqueReduced { .. });
    if !bad.is_empty() {
        let fb = run.step(Step::Fallback, |r| shatter_and_finish(&mut r.net, &mut r.states, codec, restore))?;
        run.report.fallback = fb;
    }
    let high = run.fixed();
    let mut out = finish(inst, run);
    out.bad = bad;
    out.report.accepted &= out.report.fallback.deg_plus_one_violations.is_empty() || restore;
    if high {
        out.report.accepted &= out.bad.is_empty();
    }
    Ok(out)
}

fn finish(inst: &ColoringInstance, run: Run) -> PipelineOutcome {
    let Run { net, states, bad, mut report, putaside, .. } = run;
    let coloring: Vec<Option<Color>> = states.iter().map(|s| s.color).collect();
    let g = &inst.graph;
    report.complete = coloring.iter().all(|c| c.is_some());
    report.proper = g.edges().all(|(u, v)| coloring[u as usize].is_none() || coloring[u as usize] != coloring[v as usize]);
    report.palette_legal = coloring.iter().enumerate().all(|(v, c)| c.is_none_or(|c| inst.palettes[v].contains(c)));
    let used: BTreeSet<Color> = coloring.iter().flatten().copied().collect();
    report.colors_used = used.len();
    report.max_color = used.iter().next_back().copied();
    report.accepted = report.complete && report.proper && report.palette_legal;
    PipelineOutcome { coloring, metrics: net.into_metrics(), bad: BadSet::new(g, &bad), putaside, report }
}
