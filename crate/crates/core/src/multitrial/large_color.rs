//! Hashing of colors from very large spaces into d·log₂ n bits.
//!
//! Every node v owns a multiply-shift function h_v(x) = (a_v·x mod 2^64) >> (64 − m)
//! with odd a_v, which collides on two distinct inputs with probability at most 2/2^m.
//! A color sent to v travels as h_v(color). Small spaces bypass the scheme.

use std::sync::Arc;

use rand::Rng;

use crate::engine::{BitWriter, Envelope, NodeCtx, NodeProgram, Outbox};
use crate::graph::{Color, Graph, NodeId, Palette};

/// Default exponent d in M = 2^⌈d·log₂ n⌉.
pub const DEFAULT_CODEC_D: f64 = 6.0;

/// Bits m = ⌈d·log₂ n⌉ of a hashed color, or None when |C| ≤ n^d and raw ids are used.
pub fn hashed_bits(n: usize, color_space: u64, d: f64) -> Option<u32> {
    let m = (d * (n.max(2) as f64).log2()).ceil() as u32;
    if m >= 64 || (color_space as f64) <= (n.max(1) as f64).powf(d) {
        None
    } else {
        Some(m)
    }
}

/// How a color id is put on the wire towards a given receiver.
#[derive(Clone, Debug)]
pub enum ColorCodec {
    Raw { space: u64 },
    Hashed { keys: Arc<[u64]>, m: u32 },
}

#[inline]
pub fn multiply_shift(key: u64, m: u32, c: Color) -> u64 {
    key.wrapping_mul(c) >> (64 - m)
}

impl ColorCodec {
    pub fn raw(space: u64) -> ColorCodec {
        ColorCodec::Raw { space }
    }

    pub fn is_raw(&self) -> bool {
        matches!(self, ColorCodec::Raw { .. })
    }

    pub fn wire_bits(&self) -> u32 {
        match self {
            ColorCodec::Raw { space } => crate::engine::bits_for(*space as u128),
            ColorCodec::Hashed { m, .. } => *m,
        }
    }

    /// The value that represents `c` on a message to `receiver`.
    pub fn value(&self, receiver: NodeId, c: Color) -> u64 {
        match self {
            ColorCodec::Raw { .. } => c,
            ColorCodec::Hashed { keys, m } => multiply_shift(keys[receiver as usize], *m, c),
        }
    }

    /// Colors of `palette` that `receiver` matches against wire value `value`.
    pub fn matches(&self, receiver: NodeId, palette: &Palette, value: u64) -> Vec<Color> {
        match self {
            ColorCodec::Raw { .. } => palette.contains(value).then_some(value).into_iter().collect(),
            ColorCodec::Hashed { .. } => palette.iter().filter(|&c| self.value(receiver, c) == value).collect(),
        }
    }

    /// Appends `c` encoded for `receiver`.
    pub fn put(&self, w: &mut BitWriter, receiver: NodeId, c: Color) {
        w.put(self.value(receiver, c), self.wire_bits()).expect("color within codec range");
    }

    /// Sends `c` to every neighbor: one broadcast for raw ids, individual messages otherwise.
    pub fn send_to_all(&self, ctx: &NodeCtx, out: &mut Outbox, c: Color) {
        if self.is_raw() {
            let mut w = BitWriter::new();
            self.put(&mut w, 0, c);
            out.broadcast(w.finish());
        } else {
            for (i, &u) in ctx.neighbors.iter().enumerate() {
                let mut w = BitWriter::new();
                self.put(&mut w, u, c);
                out.send(i, w.finish());
            }
        }
    }

    /// Sends `c` to the neighbor at position `pos`.
    pub fn send_to(&self, ctx: &NodeCtx, out: &mut Outbox, pos: usize, c: Color) {
        let mut w = BitWriter::new();
        self.put(&mut w, ctx.neighbors[pos], c);
        out.send(pos, w.finish());
    }

    /// Whether some node's function collides on two distinct colors of the palettes in its closed
    /// neighborhood (test oracle).
    pub fn has_neighborhood_collision(&self, g: &Graph, palettes: &[Palette]) -> bool {
        if self.is_raw() {
            return false;
        }
        (0..g.node_count() as NodeId).any(|v| {
            let mut cols: Vec<Color> = palettes[v as usize].to_vec();
            for &u in g.neighbors(v) {
                cols.extend(palettes[u as usize].iter());
            }
            cols.sort_unstable();
            cols.dedup();
            let mut hs: Vec<u64> = cols.iter().map(|&c| self.value(v, c)).collect();
            hs.sort_unstable();
            hs.windows(2).any(|w| w[0] == w[1])
        })
    }
}

/// Key distribution: every node draws an odd multiplier and broadcasts its 63 free bits
/// in chunks of at most `chunk` bits.
pub struct KeyExchange {
    pub key: u64,
    pub chunk: u32,
    pub heard: Vec<u64>,
    round: u32,
}

impl KeyExchange {
    pub fn new(chunk: u32, degree: usize) -> KeyExchange {
        KeyExchange { key: 0, chunk: chunk.clamp(1, 63), heard: vec![0; degree], round: 0 }
    }

    pub fn rounds(chunk: u32) -> u32 {
        63u32.div_ceil(chunk.clamp(1, 63))
    }
}

impl NodeProgram for KeyExchange {
    fn emit(&mut self, round: u32, ctx: &mut NodeCtx, out: &mut Outbox) {
        if round == 1 {
            self.key = ctx.rng.gen::<u64>() | 1;
        }
        let lo = (round - 1) * self.chunk;
        let width = self.chunk.min(63 - lo);
        let bits = (self.key >> 1 >> lo) & ((1u64 << width) - 1);
        let mut w = BitWriter::new();
        w.put(bits, width).unwrap();
        out.broadcast(w.finish());
    }

    fn receive(&mut self, round: u32, _: &mut NodeCtx, inbox: &[Envelope]) {
        let lo = (round - 1) * self.chunk;
        for e in inbox {
            let width = e.msg.bit_len();
            self.heard[e.from_pos as usize] |= e.msg.reader().get(width) << lo;
        }
        self.round = round;
    }

    fn is_terminal(&self) -> bool {
        self.round >= Self::rounds(self.chunk)
    }
}

/// Reassembles the multiplier from its 63 transmitted bits.
pub fn key_from_bits(bits: u64) -> u64 {
    bits << 1 | 1
}
