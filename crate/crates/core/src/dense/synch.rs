use rand::seq::SliceRandom;

use crate::engine::{BitWriter, EngineError, Envelope, Network, NodeCtx, NodeProgram, Outbox, Policy};
use crate::graph::{Color, NodeId};
use crate::multitrial::ColorCodec;
use crate::slack::NodeState;

/// Hand out, try, announce, report decolored, return the verdict.
pub const SYNCH_ROUNDS: u32 = 5;

/// One clique's part in a synchronized trial.
#[derive(Clone, Debug)]
pub struct SynchClique {
    pub leader: NodeId,
    /// Uncolored core nodes that take part (the leader included if it is one of them).
    pub members: Vec<NodeId>,
    /// More decolored members than this sends the whole clique to the bad set.
    pub max_decolored: u32,
    /// Leave members whose candidate was off their palette out of the count (list variant).
    pub excuse_off_palette: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynchOutcome {
    /// Members that did not keep a color.
    pub decolored: u32,
    /// Members whose candidate was not in their palette.
    pub off_palette: u32,
    pub overflow: bool,
    /// The leader's palette could not serve every member.
    pub palette_short: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Idle,
    Member,
    Leader,
}

struct SynchNode<'a, 'c> {
    st: &'a mut NodeState,
    codec: &'c ColorCodec,
    part: Part,
    member_too: bool,
    leader_pos: Option<usize>,
    /// Neighbor positions of the members, for the leader.
    targets: Vec<usize>,
    max_decolored: u32,
    excuse_off_palette: bool,
    off_reports: u32,
    candidate: Option<Color>,
    got_candidate: bool,
    proposed: bool,
    decolored_reports: u32,
    short: bool,
    overflow: bool,
}

impl SynchNode<'_, '_> {
    fn is_member(&self) -> bool {
        self.part == Part::Member || self.member_too
    }
}

impl NodeProgram for SynchNode<'_, '_> {
    fn emit(&mut self, round: u32, ctx: &mut NodeCtx, out: &mut Outbox) {
        match round {
            1 if self.part == Part::Leader => {
                let own = self.st.color;
                let mut colors: Vec<Color> = self.st.live.iter().filter(|&c| Some(c) != own).collect();
                colors.shuffle(ctx.rng);
                let mut it = colors.into_iter();
                if self.member_too {
                    self.candidate = it.next();
                    self.got_candidate = true;
                }
                for &pos in &self.targets {
                    match it.next() {
                        Some(c) => self.codec.send_to(ctx, out, pos, c),
                        None => self.short = true,
                    }
                }
                if self.member_too && self.candidate.is_none() {
                    self.short = true;
                }
            }
            2 => {
                if let Some(c) = self.candidate {
                    self.proposed = true;
                    self.codec.send_to_all(ctx, out, c);
                }
            }
            3 => {
                if self.proposed && self.st.is_colored() {
                    self.codec.send_to_all(ctx, out, self.st.color.unwrap());
                }
            }
            4 if self.part == Part::Member && !self.st.is_colored() => {
                let mut w = BitWriter::new();
                w.put_bool(self.got_candidate && self.candidate.is_none());
                out.send(self.leader_pos.unwrap(), w.finish());
            }
            5 if self.part == Part::Leader => {
                let own = u32::from(self.member_too && !self.st.is_colored());
                self.decolored_reports += own;
                let excused = if self.excuse_off_palette { self.off_reports } else { 0 };
                if self.decolored_reports - excused > self.max_decolored {
                    self.overflow = true;
                    for &pos in &self.targets {
                        let mut w = BitWriter::new();
                        w.put_bool(true);
                        out.send(pos, w.finish());
                    }
                }
            }
            _ => {}
        }
    }

    fn receive(&mut self, round: u32, _: &mut NodeCtx, inbox: &[Envelope]) {
        let width = self.codec.wire_bits();
        match round {
            1 if self.part == Part::Member => {
                if let Some(e) = inbox.iter().find(|e| Some(e.from_pos as usize) == self.leader_pos) {
                    self.got_candidate = true;
                    self.candidate = self.st.decode_live(e.msg.reader().get(width), self.codec);
                }
            }
            2 => {
                if let Some(c) = self.candidate {
                    let mine = self.codec.value(self.st.id, c);
                    if inbox.iter().all(|e| e.msg.reader().get(width) != mine) {
                        self.st.adopt(c);
                    }
                }
            }
            3 => {
                for e in inbox {
                    self.st.on_neighbor_colored(e.from_pos as usize, e.msg.reader().get(width), self.codec);
                }
            }
            4 if self.part == Part::Leader => {
                self.decolored_reports += inbox.len() as u32;
                self.off_reports += inbox.iter().filter(|e| e.msg.reader().get_bool()).count() as u32;
            }
            5 if self.part == Part::Member => {
                self.overflow = inbox.iter().any(|e| Some(e.from_pos as usize) == self.leader_pos);
            }
            _ => {}
        }
    }

    fn is_terminal(&self) -> bool {
        self.part == Part::Idle && self.st.is_colored()
    }

    fn listens(&self) -> bool {
        match self.part {
            Part::Idle => !self.st.is_colored(),
            _ => true,
        }
    }

    fn color(&self) -> Option<Color> {
        self.st.color
    }
}

/// Runs one synchronized color trial in every listed clique at once.
pub fn synch_color_trial(
    net: &mut Network,
    states: &mut [NodeState],
    cliques: &[SynchClique],
    codec: &ColorCodec,
) -> Result<Vec<SynchOutcome>, EngineError> {
    let g = net.graph();
    let n = g.node_count();
    let mut part = vec![Part::Idle; n];
    let mut owner = vec![usize::MAX; n];
    let mut member_too = vec![false; n];
    for (i, c) in cliques.iter().enumerate() {
        part[c.leader as usize] = Part::Leader;
        owner[c.leader as usize] = i;
        for &v in &c.members {
            if v == c.leader {
                member_too[v as usize] = true;
            } else {
                part[v as usize] = Part::Member;
                owner[v as usize] = i;
            }
        }
    }
    let mut progs: Vec<SynchNode> = states
        .iter_mut()
        .map(|st| {
            let v = st.id as usize;
            let (leader_pos, targets, max_decolored, excuse) = match part[v] {
                Part::Idle => (None, Vec::new(), 0, false),
                Part::Member => (g.neighbor_index(st.id, cliques[owner[v]].leader), Vec::new(), 0, false),
                Part::Leader => {
                    let c = &cliques[owner[v]];
                    let t = c.members.iter().filter(|&&u| u != c.leader).map(|&u| g.neighbor_index(st.id, u).expect("core member outside N(w)")).collect();
                    (None, t, c.max_decolored, c.excuse_off_palette)
                }
            };
            SynchNode {
                st,
                codec,
                part: part[v],
                member_too: member_too[v],
                leader_pos,
                targets,
                max_decolored,
                excuse_off_palette: excuse,
                off_reports: 0,
                candidate: None,
                got_candidate: false,
                proposed: false,
                decolored_reports: 0,
                short: false,
                overflow: false,
            }
        })
        .collect();
    net.run_phase(&mut progs, Policy::Fixed(SYNCH_ROUNDS))?;
    let mut out = vec![SynchOutcome::default(); cliques.len()];
    for p in &progs {
        let v = p.st.id as usize;
        if owner[v] == usize::MAX {
            continue;
        }
        let o = &mut out[owner[v]];
        if p.part == Part::Leader {
            o.overflow = p.overflow;
            o.palette_short = p.short;
            o.decolored = p.decolored_reports;
        }
        if p.is_member() && p.got_candidate && p.candidate.is_none() {
            o.off_palette += 1;
        }
    }
    Ok(out)
}
