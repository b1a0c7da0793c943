use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::{bits_for, BitWriter, EngineError, Envelope, Network, NodeCtx, NodeProgram, Outbox, Policy};
use crate::graph::{Color, NodeId};
use crate::multitrial::ColorCodec;
use crate::slack::NodeState;

/// Exchange sample bits, report keepers to the leader, leader picks at most the cap.
pub const DISJOINT_SAMPLE_ROUNDS: u32 = 3;
/// Relay coloring of put-aside sets: assign relays, hello, colors out, colors in plus
/// topology out, topology in, answer, announce.
pub const PUTASIDE_ROUNDS: u32 = 7;

/// ⌊√|core| / 3⌋, the largest put-aside set the relay scheme can serve.
pub fn putaside_cap(core_len: usize) -> usize {
    ((core_len as f64).sqrt() / 3.0).floor() as usize
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PutAsideSet {
    /// S_C.
    pub sampled: Vec<NodeId>,
    /// Sampled nodes without a sampled external neighbor.
    pub kept: Vec<NodeId>,
    /// P_C after the leader's cap.
    pub selected: Vec<NodeId>,
}

/// DisjointSample for every clique `(leader, core)` at once, computed from the nodes' own
/// random streams. The leader never samples itself, so P_C ⊆ N(w_C).
pub fn disjoint_sample(net: &mut Network, cliques: &[(NodeId, Vec<NodeId>)], p_s: f64) -> Vec<PutAsideSet> {
    let g = net.graph();
    let n = g.node_count();
    let mut owner = vec![u32::MAX; n];
    let mut sampled = vec![false; n];
    let mut out: Vec<PutAsideSet> = vec![PutAsideSet::default(); cliques.len()];
    for (i, (leader, core)) in cliques.iter().enumerate() {
        for &v in core {
            owner[v as usize] = i as u32;
            if v != *leader && net.node_rng(v).gen_bool(p_s.clamp(0.0, 1.0)) {
                sampled[v as usize] = true;
                out[i].sampled.push(v);
            }
        }
    }
    for (i, (leader, core)) in cliques.iter().enumerate() {
        let set = &mut out[i];
        set.kept = set
            .sampled
            .iter()
            .copied()
            .filter(|&v| g.neighbors(v).iter().all(|&u| !sampled[u as usize] || owner[u as usize] == i as u32))
            .collect();
        let mut pick = set.kept.clone();
        pick.shuffle(net.node_rng(*leader));
        pick.truncate(putaside_cap(core.len()));
        pick.sort_unstable();
        set.selected = pick;
    }
    out
}

/// One clique's put-aside coloring job.
#[derive(Clone, Debug)]
pub struct PutAsideTask {
    pub leader: NodeId,
    pub p: Vec<NodeId>,
    /// Core nodes outside P_C and other than the leader, in the leader's enumeration order.
    pub relays: Vec<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PutAsideOutcome {
    pub colored: u32,
    /// P_C nodes left uncolored (too few relays, or the leader found no free color).
    pub failed: Vec<NodeId>,
    /// |relays| < |P|(2|P| + 1): intervals cannot be disjoint.
    pub infeasible: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Idle,
    Leader(usize),
    Member(usize),
    Relay,
}

#[derive(Default)]
struct LeaderState {
    /// For each P index: (slot, value) pairs received.
    colors: Vec<Vec<(u32, u64)>>,
    adj: Vec<Vec<NodeId>>,
    answer: Vec<Option<u32>>,
}

struct PutAsideNode<'a, 'c> {
    st: &'a mut NodeState,
    codec: &'c ColorCodec,
    part: Part,
    n_bits: u32,
    slot_bits: u32,
    leader: NodeId,
    // Leader.
    task: Option<&'c PutAsideTask>,
    lead: LeaderState,
    // Relay.
    serve: Option<(NodeId, u32)>,
    carry_value: Option<u64>,
    carry_nbr: Option<u64>,
    // Member.
    p_nbrs: Vec<NodeId>,
    my_relays: Vec<(u32, usize)>,
    sent: Vec<(u32, Color)>,
    failed: bool,
}

impl PutAsideNode<'_, '_> {
    fn leader_pos(&self, ctx: &NodeCtx) -> usize {
        ctx.neighbors.binary_search(&self.leader).expect("leader adjacent")
    }

    fn solve(&mut self) {
        let task = self.task.unwrap();
        let k = task.p.len();
        let index = |v: NodeId| task.p.iter().position(|&x| x == v);
        let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); k];
        for i in 0..k {
            for &u in &self.lead.adj[i] {
                if let Some(j) = index(u) {
                    nbrs[i].push(j);
                    nbrs[j].push(i);
                }
            }
        }
        let mut chosen: Vec<Option<u64>> = vec![None; k];
        self.lead.answer = vec![None; k];
        for i in 0..k {
            let taken: Vec<u64> = nbrs[i].iter().filter_map(|&j| chosen[j]).collect();
            if let Some(&(slot, value)) = self.lead.colors[i].iter().find(|(_, val)| !taken.contains(val)) {
                chosen[i] = Some(value);
                self.lead.answer[i] = Some(slot);
            }
        }
    }
}

impl NodeProgram for PutAsideNode<'_, '_> {
    fn emit(&mut self, round: u32, ctx: &mut NodeCtx, out: &mut Outbox) {
        match (round, self.part) {
            (1, Part::Leader(_)) => {
                let task = self.task.unwrap();
                let width = 2 * task.p.len() + 1;
                for (i, &v) in task.p.iter().enumerate() {
                    for (j, &r) in task.relays[i * width..(i + 1) * width].iter().enumerate() {
                        let mut w = BitWriter::new();
                        w.put(v as u64, self.n_bits).unwrap();
                        w.put(j as u64, self.slot_bits).unwrap();
                        out.send(ctx.neighbors.binary_search(&r).expect("relay adjacent to leader"), w.finish());
                    }
                }
            }
            (1, Part::Member(_)) => {
                let mut w = BitWriter::new();
                w.put_bool(true);
                out.broadcast(w.finish());
            }
            (2, Part::Relay) => {
                if let Some((v, slot)) = self.serve {
                    if let Ok(pos) = ctx.neighbors.binary_search(&v) {
                        let mut w = BitWriter::new();
                        w.put(slot as u64, self.slot_bits).unwrap();
                        out.send(pos, w.finish());
                    }
                }
            }
            (3, Part::Member(_)) => {
                let need = self.p_nbrs.len() + 1;
                if self.my_relays.len() < need || self.st.live.len() < need {
                    self.failed = true;
                    return;
                }
                self.my_relays.sort_unstable();
                let mut colors: Vec<Color> = self.st.live.iter().collect();
                colors.shuffle(ctx.rng);
                for (t, &(slot, pos)) in self.my_relays.iter().take(need).enumerate() {
                    let mut w = BitWriter::new();
                    self.codec.put(&mut w, self.leader, colors[t]);
                    out.send(pos, w.finish());
                    self.sent.push((slot, colors[t]));
                }
            }
            (4, Part::Relay) => {
                if let Some(v) = self.carry_value.take() {
                    let mut w = BitWriter::new();
                    w.put(v, self.codec.wire_bits()).unwrap();
                    out.send(self.leader_pos(ctx), w.finish());
                }
            }
            (4, Part::Member(_)) if !self.failed => {
                for (t, &u) in self.p_nbrs.iter().enumerate() {
                    let mut w = BitWriter::new();
                    w.put(u as u64, self.n_bits).unwrap();
                    out.send(self.my_relays[t].1, w.finish());
                }
            }
            (5, Part::Relay) => {
                if let Some(u) = self.carry_nbr.take() {
                    let mut w = BitWriter::new();
                    w.put(u, self.n_bits).unwrap();
                    out.send(self.leader_pos(ctx), w.finish());
                }
            }
            (6, Part::Leader(_)) => {
                let task = self.task.unwrap();
                for (i, &v) in task.p.iter().enumerate() {
                    if let Some(slot) = self.lead.answer[i] {
                        let mut w = BitWriter::new();
                        w.put(slot as u64, self.slot_bits).unwrap();
                        out.send(ctx.neighbors.binary_search(&v).unwrap(), w.finish());
                    }
                }
            }
            (7, Part::Member(_)) => {
                if let Some(c) = self.st.color {
                    self.codec.send_to_all(ctx, out, c);
                }
            }
            _ => {}
        }
    }

    fn receive(&mut self, round: u32, ctx: &mut NodeCtx, inbox: &[Envelope]) {
        match (round, self.part) {
            (1, Part::Relay) => {
                if let Some(e) = inbox.iter().find(|e| ctx.neighbors[e.from_pos as usize] == self.leader) {
                    let mut r = e.msg.reader();
                    let v = r.get(self.n_bits) as NodeId;
                    self.serve = Some((v, r.get(self.slot_bits) as u32));
                }
            }
            (1, Part::Member(_)) => {
                self.p_nbrs = inbox.iter().map(|e| ctx.neighbors[e.from_pos as usize]).collect();
            }
            (2, Part::Member(_)) => {
                self.my_relays = inbox.iter().map(|e| (e.msg.reader().get(self.slot_bits) as u32, e.from_pos as usize)).collect();
            }
            (3, Part::Relay) => {
                let width = self.codec.wire_bits();
                self.carry_value = inbox.first().map(|e| e.msg.reader().get(width));
            }
            (4, Part::Relay) => self.carry_nbr = inbox.first().map(|e| e.msg.reader().get(self.n_bits)),
            (4, Part::Leader(_)) | (5, Part::Leader(_)) => {
                let task = self.task.unwrap();
                for e in inbox {
                    let from = ctx.neighbors[e.from_pos as usize];
                    let Some(k) = task.relays.iter().position(|&r| r == from) else { continue };
                    let width = 2 * task.p.len() + 1;
                    let i = k / width;
                    if i >= task.p.len() {
                        continue;
                    }
                    if round == 4 {
                        let value = e.msg.reader().get(self.codec.wire_bits());
                        self.lead.colors[i].push(((k % width) as u32, value));
                    } else {
                        self.lead.adj[i].push(e.msg.reader().get(self.n_bits) as NodeId);
                    }
                }
                if round == 5 {
                    for c in &mut self.lead.colors {
                        c.sort_unstable();
                    }
                    self.solve();
                }
            }
            (6, Part::Member(_)) => {
                if let Some(e) = inbox.iter().find(|e| ctx.neighbors[e.from_pos as usize] == self.leader) {
                    let slot = e.msg.reader().get(self.slot_bits) as u32;
                    if let Some(&(_, c)) = self.sent.iter().find(|(s, _)| *s == slot) {
                        self.st.adopt(c);
                    }
                }
            }
            (7, _) => {
                let width = self.codec.wire_bits();
                for e in inbox {
                    self.st.on_neighbor_colored(e.from_pos as usize, e.msg.reader().get(width), self.codec);
                }
            }
            _ => {}
        }
    }

    fn is_terminal(&self) -> bool {
        self.part == Part::Idle && self.st.is_colored()
    }

    fn listens(&self) -> bool {
        self.part != Part::Idle || !self.st.is_colored()
    }

    fn color(&self) -> Option<Color> {
        self.st.color
    }
}

/// Colors every put-aside set through its leader. Tasks that cannot allocate disjoint relay
/// intervals are skipped and reported infeasible.
pub fn color_putaside(
    net: &mut Network,
    states: &mut [NodeState],
    tasks: &[PutAsideTask],
    codec: &ColorCodec,
) -> Result<Vec<PutAsideOutcome>, EngineError> {
    let g = net.graph();
    let n = g.node_count();
    let mut part = vec![Part::Idle; n];
    let mut leader_of = vec![0 as NodeId; n];
    let mut outcomes = vec![PutAsideOutcome::default(); tasks.len()];
    let mut max_p = 0;
    for (i, t) in tasks.iter().enumerate() {
        let p = t.p.len();
        if t.relays.len() < p * (2 * p + 1) {
            outcomes[i].infeasible = true;
            outcomes[i].failed = t.p.clone();
            continue;
        }
        max_p = max_p.max(p);
        part[t.leader as usize] = Part::Leader(i);
        for &v in &t.p {
            part[v as usize] = Part::Member(i);
            leader_of[v as usize] = t.leader;
        }
        for &r in &t.relays[..p * (2 * p + 1)] {
            part[r as usize] = Part::Relay;
            leader_of[r as usize] = t.leader;
        }
    }
    let n_bits = bits_for(n as u128).max(1);
    let slot_bits = bits_for((2 * max_p + 1) as u128).max(1);
    let mut progs: Vec<PutAsideNode> = states
        .iter_mut()
        .map(|st| {
            let v = st.id as usize;
            let (task, lead) = match part[v] {
                Part::Leader(i) => {
                    let k = tasks[i].p.len();
                    (Some(&tasks[i]), LeaderState { colors: vec![Vec::new(); k], adj: vec![Vec::new(); k], answer: vec![None; k] })
                }
                _ => (None, LeaderState::default()),
            };
            PutAsideNode {
                leader: leader_of[v],
                st,
                codec,
                part: part[v],
                n_bits,
                slot_bits,
                task,
                lead,
                serve: None,
                carry_value: None,
                carry_nbr: None,
                p_nbrs: Vec::new(),
                my_relays: Vec::new(),
                sent: Vec::new(),
                failed: false,
            }
        })
        .collect();
    net.run_phase(&mut progs, Policy::Fixed(PUTASIDE_ROUNDS))?;
    drop(progs);
    for (i, t) in tasks.iter().enumerate() {
        if outcomes[i].infeasible {
            continue;
        }
        for &v in &t.p {
            if states[v as usize].is_colored() {
                outcomes[i].colored += 1;
            } else {
                outcomes[i].failed.push(v);
            }
        }
    }
    Ok(outcomes)
}
