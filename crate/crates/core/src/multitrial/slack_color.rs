//! SlackColor: TryRandomColor warm-up, then MultiTrial loops with growing trial sizes.
//!
//! Engine rounds: TryRandomColor takes 2 (propose, announce); MultiTrial takes 3
//! (M1: (ω,i) or a termination notice, M2: per-neighbor B̂-bit vectors, M3: adopted color).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{hit_set, ColorCodec, FamilyConfig, HashFamily};
use crate::engine::{bits_for, BitWriter, EngineError, Envelope, Network, NodeCtx, NodeProgram, Outbox, Policy};
use crate::graph::{Color, NodeId};
use crate::slack::NodeState;

/// Default ratio ι in the precondition s_v ≥ d_v/ι.
pub const DEFAULT_IOTA: f64 = 4.0;

/// log* with base 2: 0 for x ≤ 1.
pub fn log_star(x: f64) -> u32 {
    let mut x = x;
    let mut k = 0;
    while x > 1.0 {
        x = x.log2();
        k += 1;
    }
    k
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Iteration {
    Try,
    Multi { x: u64 },
}

impl Iteration {
    fn rounds(self) -> u32 {
        match self {
            Iteration::Try => 2,
            Iteration::Multi { .. } => 3,
        }
    }
}

/// A schedule of iterations, each optionally followed by a termination test
/// "terminate if s_v < r·d_v".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<(Iteration, Option<f64>)>,
}

impl Plan {
    pub fn iterations(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn rounds(&self) -> u32 {
        self.steps.iter().map(|s| s.0.rounds()).sum()
    }

    /// (step index, sub-round) for each phase-local round.
    fn table(&self) -> Vec<(u32, u8)> {
        let mut t = Vec::with_capacity(self.rounds() as usize);
        for (i, (it, _)) in self.steps.iter().enumerate() {
            for sub in 0..it.rounds() {
                t.push((i as u32, sub as u8));
            }
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackColorParams {
    /// Globally known lower bound on the slack of participants.
    pub s_min: u64,
    pub delta: f64,
    pub iota: f64,
}

fn tetration(i: u32) -> u64 {
    let mut x: u64 = 1;
    for _ in 0..i {
        x = if x >= 64 { u64::MAX } else { 1u64 << x };
    }
    x
}

impl SlackColorParams {
    pub fn rho(&self) -> u64 {
        ((self.s_min as f64).powf(1.0 / (1.0 + self.delta)).floor() as u64).max(1)
    }

    /// Warm-up length ⌈ι ln(4ι)⌉.
    pub fn warmup(&self) -> u32 {
        (self.iota * (4.0 * self.iota).ln()).ceil() as u32
    }

    pub fn finish_loops(&self) -> u32 {
        (1.0 / self.delta - 1e-9).ceil() as u32
    }

    pub fn tower_loops(&self) -> u32 {
        log_star(self.rho() as f64) + 1
    }

    /// R = T1 + 12(log*ρ + 1) + 16⌈1/δ⌉ + 1 iterations.
    pub fn iterations(&self) -> u32 {
        self.warmup() + 12 * self.tower_loops() + 16 * self.finish_loops() + 1
    }

    /// Engine rounds: 2·T1 + 3·(12(log*ρ + 1) + 16⌈1/δ⌉ + 1).
    pub fn rounds(&self) -> u32 {
        2 * self.warmup() + 3 * (12 * self.tower_loops() + 16 * self.finish_loops() + 1)
    }

    pub fn plan(&self) -> Plan {
        let rho = self.rho() as f64;
        let d = self.delta;
        let mut steps = Vec::new();
        for k in 0..self.warmup() {
            steps.push((Iteration::Try, (k + 1 == self.warmup()).then_some(2.0)));
        }
        for i in 0..self.tower_loops() {
            let x = tetration(i);
            let r = (2f64.powf(x as f64)).min(rho.powf(d));
            for k in 0..12 {
                steps.push((Iteration::Multi { x }, (k == 11).then_some(r)));
            }
        }
        for i in 1..=self.finish_loops() {
            let x = (rho.powf(i as f64 * d).floor() as u64).max(1);
            let r = rho.powf((i + 1) as f64 * d).min(rho);
            for k in 0..16 {
                steps.push((Iteration::Multi { x }, (k == 15).then_some(r)));
            }
        }
        steps.push((Iteration::Multi { x: self.rho() }, None));
        Plan { steps }
    }
}

/// Shared, read-only knowledge of a SlackColor run.
pub struct TrialEnv<'a> {
    pub codec: &'a ColorCodec,
    /// Families for ω = 6k, indexed by k − 1.
    families: Vec<HashFamily>,
    omega_bits: u32,
}

impl<'a> TrialEnv<'a> {
    pub fn new(codec: &'a ColorCodec, cfg: &FamilyConfig, color_space: u64, n: usize, max_palette: usize, seed: u64) -> TrialEnv<'a> {
        let families = (1..=max_palette.max(1) as u64)
            .map(|k| HashFamily::build(6 * k, color_space, n, cfg, seed).expect("family parameters"))
            .collect();
        TrialEnv { codec, families, omega_bits: bits_for(6 * max_palette.max(1) as u128 + 1) }
    }

    fn family(&self, omega: u64) -> &HashFamily {
        &self.families[(omega / 6 - 1) as usize]
    }
}

/// Counters over all MultiTrial attempts of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialStats {
    pub try_attempts: u64,
    pub try_success: u64,
    pub multi_attempts: u64,
    pub multi_success: u64,
    pub hit_set_empty: u64,
    /// Simultaneous adoptions of one color by adjacent nodes (must stay 0).
    pub conflicts: u64,
}

impl TrialStats {
    fn add(&mut self, o: &TrialStats) {
        self.try_attempts += o.try_attempts;
        self.try_success += o.try_success;
        self.multi_attempts += o.multi_attempts;
        self.multi_success += o.multi_success;
        self.hit_set_empty += o.hit_set_empty;
        self.conflicts += o.conflicts;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Trying,
    Adopted,
    Quitting,
    Done,
}

struct SlackColorNode<'a, 'e> {
    st: &'a mut NodeState,
    env: &'e TrialEnv<'e>,
    plan: &'e Plan,
    table: &'e [(u32, u8)],
    status: Status,
    part: Vec<u64>,
    degree: u32,
    proposal: Option<Color>,
    omega: u64,
    index: u64,
    heard: Vec<(u32, u64, u64)>,
    tried: Vec<Color>,
    survivor: bool,
    stats: TrialStats,
}

impl SlackColorNode<'_, '_> {
    fn set_part(&mut self, pos: u32) {
        let (w, b) = (pos as usize / 64, pos % 64);
        if self.part[w] >> b & 1 == 0 {
            self.part[w] |= 1 << b;
            self.degree += 1;
        }
    }

    fn clear_part(&mut self, pos: u32) {
        let (w, b) = (pos as usize / 64, pos % 64);
        if self.part[w] >> b & 1 == 1 {
            self.part[w] &= !(1 << b);
            self.degree -= 1;
        }
    }

    fn slack(&self) -> i64 {
        self.st.live.len() as i64 - self.degree as i64
    }

    fn on_colors(&mut self, inbox: &[Envelope]) {
        let width = self.env.codec.wire_bits();
        for e in inbox {
            self.st.on_neighbor_colored(e.from_pos as usize, e.msg.reader().get(width), self.env.codec);
            self.clear_part(e.from_pos);
        }
    }

    fn finish_step(&mut self, step: usize) {
        if self.status == Status::Trying {
            if let Some(r) = self.plan.steps[step].1 {
                if (self.slack() as f64) < r * self.degree as f64 {
                    self.status = Status::Quitting;
                    self.survivor = true;
                }
            }
        }
        if step + 1 == self.plan.steps.len() && matches!(self.status, Status::Trying | Status::Quitting) {
            self.survivor = true;
            self.status = Status::Done;
        }
    }
}

impl NodeProgram for SlackColorNode<'_, '_> {
    fn emit(&mut self, round: u32, ctx: &mut NodeCtx, out: &mut Outbox) {
        let (step, sub) = self.table[round as usize - 1];
        let codec = self.env.codec;
        match (self.plan.steps[step as usize].0, sub) {
            (Iteration::Try, 0) => {
                self.proposal = None;
                if self.status == Status::Trying {
                    if let Some(c) = self.st.live.sample(ctx.rng) {
                        self.proposal = Some(c);
                        self.stats.try_attempts += 1;
                        codec.send_to_all(ctx, out, c);
                    }
                }
            }
            (Iteration::Try, _) | (Iteration::Multi { .. }, 2) => {
                if self.status == Status::Adopted {
                    codec.send_to_all(ctx, out, self.st.color.unwrap());
                    self.status = Status::Done;
                }
            }
            (Iteration::Multi { .. }, 0) => {
                self.heard.clear();
                match self.status {
                    Status::Quitting => {
                        let mut w = BitWriter::new();
                        w.put_bool(true);
                        out.broadcast(w.finish());
                        self.status = Status::Done;
                    }
                    Status::Trying if !self.st.live.is_empty() => {
                        self.omega = 6 * self.st.live.len() as u64;
                        let fam = self.env.family(self.omega);
                        self.index = ctx.rng.gen_range(0..fam.fam_size);
                        let mut w = BitWriter::new();
                        w.put_bool(false);
                        w.put(self.omega, self.env.omega_bits).unwrap();
                        w.put(self.index, fam.index_bits()).unwrap();
                        out.broadcast(w.finish());
                    }
                    _ => {}
                }
            }
            (Iteration::Multi { x }, _) => {
                self.tried.clear();
                if self.status != Status::Trying || self.st.live.is_empty() {
                    return;
                }
                self.stats.multi_attempts += 1;
                let own = self.env.family(self.omega);
                let h = own.member(self.index);
                let pal: Vec<Color> = self.st.live.iter().collect();
                let hits = hit_set(&pal, |c| h.eval(c), &pal, own.samp as u64);
                if hits.is_empty() {
                    self.stats.hit_set_empty += 1;
                    return;
                }
                if x as usize >= 8 * hits.len() {
                    self.tried = hits;
                } else {
                    for _ in 0..x {
                        let c = hits[ctx.rng.gen_range(0..hits.len())];
                        if !self.tried.contains(&c) {
                            self.tried.push(c);
                        }
                    }
                }
                for &(pos, omega_u, idx_u) in &self.heard {
                    let fam = self.env.family(omega_u);
                    let hu = fam.member(idx_u);
                    let mut bits = vec![0u64; (fam.samp as usize).div_ceil(64)];
                    for &c in &self.tried {
                        let j = hu.eval(c);
                        if j <= fam.samp as u64 {
                            bits[(j - 1) as usize / 64] |= 1 << ((j - 1) % 64);
                        }
                    }
                    let mut w = BitWriter::new();
                    w.put_bits(&bits, fam.samp);
                    out.send(pos as usize, w.finish());
                }
            }
        }
    }

    fn receive(&mut self, round: u32, _: &mut NodeCtx, inbox: &[Envelope]) {
        let (step, sub) = self.table[round as usize - 1];
        let it = self.plan.steps[step as usize].0;
        match (it, sub) {
            (Iteration::Try, 0) => {
                if round == 1 {
                    for e in inbox {
                        self.set_part(e.from_pos);
                    }
                }
                if let Some(c) = self.proposal {
                    let mine = self.env.codec.value(self.st.id, c);
                    let width = self.env.codec.wire_bits();
                    if inbox.iter().all(|e| e.msg.reader().get(width) != mine) {
                        self.st.adopt(c);
                        self.stats.try_success += 1;
                        self.status = Status::Adopted;
                    }
                }
            }
            (Iteration::Try, _) | (Iteration::Multi { .. }, 2) => self.on_colors(inbox),
            (Iteration::Multi { .. }, 0) => {
                for e in inbox {
                    let mut r = e.msg.reader();
                    if r.get_bool() {
                        self.clear_part(e.from_pos);
                    } else {
                        let omega = r.get(self.env.omega_bits);
                        let idx = r.get(self.env.family(omega).index_bits());
                        self.heard.push((e.from_pos, omega, idx));
                        if round == 1 {
                            self.set_part(e.from_pos);
                        }
                    }
                }
            }
            (Iteration::Multi { .. }, _) => {
                if self.tried.is_empty() || self.status != Status::Trying {
                    return;
                }
                let own = self.env.family(self.omega);
                let samp = own.samp;
                let mut union = vec![0u64; (samp as usize).div_ceil(64)];
                for e in inbox {
                    for (u, w) in union.iter_mut().zip(e.msg.reader().get_bits(samp)) {
                        *u |= w;
                    }
                }
                let h = own.member(self.index);
                let pick = self.tried.iter().copied().find(|&c| {
                    let j = h.eval(c) - 1;
                    union[j as usize / 64] >> (j % 64) & 1 == 0
                });
                if let Some(c) = pick {
                    self.st.adopt(c);
                    self.stats.multi_success += 1;
                    self.status = Status::Adopted;
                }
            }
        }
        if sub as u32 + 1 == it.rounds() {
            self.finish_step(step as usize);
        }
    }

    fn is_terminal(&self) -> bool {
        self.status == Status::Done
    }

    fn listens(&self) -> bool {
        !self.st.is_colored()
    }

    fn color(&self) -> Option<Color> {
        self.st.color
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SlackColorReport {
    pub rounds: u32,
    /// Participants left uncolored (terminated early or ran out of iterations).
    pub survivors: Vec<NodeId>,
    pub stats: TrialStats,
}

/// Runs `plan` on the participants in `active`. With `fixed` the full schedule always runs;
/// otherwise the phase ends once every participant is done.
pub fn run_plan(
    net: &mut Network,
    states: &mut [NodeState],
    active: &[bool],
    plan: &Plan,
    env: &TrialEnv,
    fixed: bool,
) -> Result<SlackColorReport, EngineError> {
    let table = plan.table();
    let mut progs: Vec<SlackColorNode> = states
        .iter_mut()
        .zip(active)
        .map(|(st, &a)| {
            let deg = net.graph().degree(st.id);
            let status = if a && !st.is_colored() && !plan.steps.is_empty() { Status::Trying } else { Status::Done };
            SlackColorNode {
                st,
                env,
                plan,
                table: &table,
                status,
                part: vec![0; deg.div_ceil(64)],
                degree: 0,
                proposal: None,
                omega: 6,
                index: 0,
                heard: Vec::new(),
                tried: Vec::new(),
                survivor: false,
                stats: TrialStats::default(),
            }
        })
        .collect();
    let policy = if fixed { Policy::Fixed(plan.rounds()) } else { Policy::UntilTerminal { max: plan.rounds() } };
    let rounds = net.run_phase(&mut progs, policy)?;
    let mut stats = TrialStats::default();
    let mut survivors = Vec::new();
    for p in &progs {
        stats.add(&p.stats);
        if p.survivor && !p.st.is_colored() {
            survivors.push(p.st.id);
        }
    }
    drop(progs);
    let g = net.graph();
    for (u, v) in g.edges() {
        if states[u as usize].color.is_some() && states[u as usize].color == states[v as usize].color {
            stats.conflicts += 1;
        }
    }
    Ok(SlackColorReport { rounds, survivors, stats })
}

pub fn slack_color(
    net: &mut Network,
    states: &mut [NodeState],
    active: &[bool],
    params: &SlackColorParams,
    env: &TrialEnv,
    fixed: bool,
) -> Result<SlackColorReport, EngineError> {
    run_plan(net, states, active, &params.plan(), env, fixed)
}

/// A single MultiTrial(x) among the participants.
pub fn multi_trial(net: &mut Network, states: &mut [NodeState], active: &[bool], x: u64, env: &TrialEnv) -> Result<SlackColorReport, EngineError> {
    run_plan(net, states, active, &Plan { steps: vec![(Iteration::Multi { x }, None)] }, env, true)
}
