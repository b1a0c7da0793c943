use rand::Rng;

use super::NodeState;
use crate::engine::{EngineError, Envelope, Network, NodeCtx, NodeProgram, Outbox, Policy};
use crate::graph::Color;
use crate::multitrial::ColorCodec;

/// Probability of joining slack generation.
pub const DEFAULT_P_G: f64 = 1.0 / 20.0;

/// Repeated TryRandomColor: odd rounds propose, even rounds announce kept colors.
///
/// A proposal survives iff no neighbor proposed the same color in that round.
pub struct TryColor<'a> {
    st: &'a mut NodeState,
    codec: &'a ColorCodec,
    /// Remaining iterations, or None to continue until colored.
    iterations: Option<u32>,
    /// Probability of trying in a given iteration.
    p_try: f64,
    /// Only colors below this bound are proposed.
    below: Option<Color>,
    proposal: Option<Color>,
    announce: bool,
    done: bool,
    /// The palette was empty when a proposal was due.
    pub starved: bool,
}

impl<'a> TryColor<'a> {
    pub fn new(st: &'a mut NodeState, codec: &'a ColorCodec, iterations: Option<u32>, participates: bool) -> TryColor<'a> {
        let done = !participates || st.is_colored() || iterations == Some(0);
        TryColor { st, codec, iterations, p_try: 1.0, below: None, proposal: None, announce: false, done, starved: false }
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.p_try = p;
        self
    }

    pub fn below(mut self, bound: Color) -> Self {
        self.below = Some(bound);
        self
    }

    fn draw(&self, rng: &mut impl Rng) -> Option<Color> {
        match self.below {
            None => self.st.live.sample(rng),
            Some(b) => {
                let eligible: Vec<Color> = self.st.live.iter().filter(|&c| c < b).collect();
                (!eligible.is_empty()).then(|| eligible[rng.gen_range(0..eligible.len())])
            }
        }
    }
}

impl NodeProgram for TryColor<'_> {
    fn emit(&mut self, round: u32, ctx: &mut NodeCtx, out: &mut Outbox) {
        if round % 2 == 1 {
            self.proposal = None;
            if self.st.is_colored() || !ctx.rng.gen_bool(self.p_try) {
                return;
            }
            match self.draw(ctx.rng) {
                Some(c) => {
                    self.proposal = Some(c);
                    self.codec.send_to_all(ctx, out, c);
                }
                None => self.starved = true,
            }
        } else if self.announce {
            self.codec.send_to_all(ctx, out, self.st.color.unwrap());
            self.announce = false;
            self.done = true;
        }
    }

    fn receive(&mut self, round: u32, _: &mut NodeCtx, inbox: &[Envelope]) {
        let width = self.codec.wire_bits();
        if round % 2 == 1 {
            if let Some(c) = self.proposal {
                let mine = self.codec.value(self.st.id, c);
                if inbox.iter().all(|e| e.msg.reader().get(width) != mine) {
                    self.st.adopt(c);
                    self.announce = true;
                }
            }
        } else {
            for e in inbox {
                self.st.on_neighbor_colored(e.from_pos as usize, e.msg.reader().get(width), self.codec);
            }
            if let Some(k) = self.iterations.as_mut() {
                *k -= 1;
            }
            if self.iterations == Some(0) || (self.iterations.is_none() && self.starved) {
                self.done = true;
            }
        }
    }

    fn is_terminal(&self) -> bool {
        self.done
    }

    /// Every uncolored node tracks its neighbors' colors, whether or not it takes part.
    fn listens(&self) -> bool {
        !self.st.is_colored()
    }

    fn color(&self) -> Option<Color> {
        self.st.color
    }
}

/// One TryRandomColor iteration in which each uncolored node joins with probability `p_g`.
/// Always two rounds (propose, announce). Returns how many nodes starved.
pub fn slack_generation(
    net: &mut Network,
    states: &mut [NodeState],
    codec: &ColorCodec,
    p_g: f64,
    below: Option<Color>,
) -> Result<usize, EngineError> {
    let mut progs: Vec<TryColor> = states
        .iter_mut()
        .map(|st| {
            let p = TryColor::new(st, codec, Some(1), true).with_probability(p_g);
            match below {
                Some(b) => p.below(b),
                None => p,
            }
        })
        .collect();
    net.run_phase(&mut progs, Policy::Fixed(2))?;
    Ok(progs.iter().filter(|p| p.starved).count())
}
