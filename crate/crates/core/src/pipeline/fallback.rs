use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, Envelope, Network, NodeCtx, NodeProgram, Outbox, Policy};
use crate::graph::{Color, Graph, NodeId};
use crate::multitrial::ColorCodec;
use crate::slack::{LivePalette, NodeState};

/// Nodes left for the deterministic finish, with the components of G[Bad].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BadSet {
    pub nodes: Vec<NodeId>,
    pub components: Vec<Vec<NodeId>>,
}

impl BadSet {
    pub fn new(g: &Graph, mask: &[bool]) -> BadSet {
        let nodes = (0..g.node_count() as NodeId).filter(|&v| mask[v as usize]).collect();
        BadSet { nodes, components: g.components_of(mask) }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_component(&self) -> usize {
        self.components.iter().map(|c| c.len()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FallbackReport {
    pub rounds: u32,
    /// Nodes whose live palette did not exceed their uncolored degree.
    pub deg_plus_one_violations: Vec<NodeId>,
    /// Violating nodes whose palette was rebuilt from Ψ_v and their neighbors' colors.
    pub restored: u32,
}

struct Greedy<'a, 'c> {
    st: &'a mut NodeState,
    codec: &'c ColorCodec,
    stuck: bool,
}

impl NodeProgram for Greedy<'_, '_> {
    fn emit(&mut self, _: u32, ctx: &mut NodeCtx, out: &mut Outbox) {
        if self.st.is_colored() {
            return;
        }
        let top = ctx.neighbors.iter().enumerate().all(|(i, &u)| self.st.nbr_colored(i) || u < ctx.id);
        if !top {
            return;
        }
        let first = self.st.live.iter().next();
        match first {
            Some(c) => {
                self.st.adopt(c);
                self.codec.send_to_all(ctx, out, c);
            }
            None => self.stuck = true,
        }
    }

    fn receive(&mut self, _: u32, _: &mut NodeCtx, inbox: &[Envelope]) {
        let width = self.codec.wire_bits();
        for e in inbox {
            self.st.on_neighbor_colored(e.from_pos as usize, e.msg.reader().get(width), self.codec);
        }
    }

    fn is_terminal(&self) -> bool {
        self.st.is_colored() || self.stuck
    }

    fn color(&self) -> Option<Color> {
        self.st.color
    }
}

/// Colors every uncolored node by id-priority greedy: each round, an uncolored node whose id
/// exceeds those of all its uncolored neighbors takes its smallest available color.
/// When `restore` is set, nodes without a spare color get Ψ_v minus their neighbors' colors back.
pub fn shatter_and_finish(
    net: &mut Network,
    states: &mut [NodeState],
    codec: &ColorCodec,
    restore: bool,
) -> Result<FallbackReport, EngineError> {
    let g = net.graph();
    let mut report = FallbackReport::default();
    for v in 0..g.node_count() as NodeId {
        let st = &states[v as usize];
        if st.is_colored() {
            continue;
        }
        let open = g.neighbors(v).iter().enumerate().filter(|&(i, _)| !st.nbr_colored(i)).count();
        if st.live.len() > open {
            continue;
        }
        report.deg_plus_one_violations.push(v);
        if restore {
            let mut live = LivePalette::new(st.initial.clone());
            for &u in g.neighbors(v) {
                if let Some(c) = states[u as usize].color {
                    live.remove(c);
                }
            }
            if live.len() > states[v as usize].live.len() {
                states[v as usize].live = live;
                report.restored += 1;
            }
        }
    }
    if states.iter().all(|s| s.is_colored()) {
        return Ok(report);
    }
    let mut progs: Vec<Greedy> = states.iter_mut().map(|st| Greedy { st, codec, stuck: false }).collect();
    report.rounds = net.run_phase(&mut progs, Policy::UntilTerminal { max: g.node_count() as u32 + 1 })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{EngineConfig, DEFAULT_C_BW};
    use crate::graph::{named, ColoringInstance};
    use crate::slack::initial_states;

    fn finish(g: &Graph) -> (Vec<NodeState>, FallbackReport) {
        let inst = ColoringInstance::delta_plus_one(g.clone());
        let mut states = initial_states(&inst);
        let mut net = Network::new(g, EngineConfig::congest(g.node_count(), DEFAULT_C_BW, 1));
        let codec = ColorCodec::raw(inst.color_space);
        let r = shatter_and_finish(&mut net, &mut states, &codec, false).unwrap();
        (states, r)
    }

    fn proper(g: &Graph, states: &[NodeState]) -> bool {
        states.iter().all(|s| s.is_colored()) && g.edges().all(|(u, v)| states[u as usize].color != states[v as usize].color)
    }

    /// Rounds of the priority rule simulated directly: a node's round is one more than the
    /// latest round among its higher-id neighbors.
    fn priority_rounds(g: &Graph) -> u32 {
        let n = g.node_count();
        let mut round = vec![0u32; n];
        for v in (0..n as NodeId).rev() {
            round[v as usize] = 1 + g.neighbors(v).iter().filter(|&&u| u > v).map(|&u| round[u as usize]).max().unwrap_or(0);
        }
        round.into_iter().max().unwrap_or(0)
    }

    #[test]
    fn single_node_takes_one_round() {
        let (states, r) = finish(&Graph::empty(1));
        assert_eq!(states[0].color, Some(0));
        assert_eq!(r.rounds, 1);
    }

    #[test]
    fn path_of_five() {
        let g = named::path(5);
        let (states, r) = finish(&g);
        assert!(proper(&g, &states));
        assert!(r.rounds <= 5);
        assert_eq!(r.rounds, priority_rounds(&g));
    }

    #[test]
    fn rounds_follow_priority_chains() {
        for seed in 0..20 {
            let g = crate::graph::generate("gnp:n=60,p=0.1", seed).unwrap().graph;
            let (states, r) = finish(&g);
            assert!(proper(&g, &states));
            assert_eq!(r.rounds, priority_rounds(&g));
            assert!(r.deg_plus_one_violations.is_empty());
        }
    }

    #[test]
    fn reports_and_restores_short_palettes() {
        let g = named::complete(3);
        let inst = ColoringInstance::delta_plus_one(g.clone());
        let mut states = initial_states(&inst);
        states[2].live.remove(0);
        states[2].live.remove(1);
        let codec = ColorCodec::raw(inst.color_space);
        let mut net = Network::new(&g, EngineConfig::local(1));
        let r = shatter_and_finish(&mut net, &mut states, &codec, true).unwrap();
        assert_eq!(r.deg_plus_one_violations, vec![2]);
        assert_eq!(r.restored, 1);
        assert!(proper(&g, &states));
    }

    #[test]
    fn bad_set_components() {
        let g = named::path(6);
        let b = BadSet::new(&g, &[true, true, false, true, false, true]);
        assert_eq!(b.nodes, vec![0, 1, 3, 5]);
        assert_eq!(b.components, vec![vec![0, 1], vec![3], vec![5]]);
        assert_eq!(b.max_component(), 2);
    }
}
