//! Bit-exact message framing.

use smallvec::SmallVec;
use thiserror::Error;

/// A message payload together with its exact encoded length in bits.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Message {
    payload: SmallVec<[u8; 24]>,
    bit_len: u32,
}

impl Message {
    pub fn empty() -> Message {
        Message::default()
    }

    pub fn bit_len(&self) -> u32 {
        self.bit_len
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { msg: self, pos: 0 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("value {value} does not fit in {width} bits")]
    ValueOutOfRange { value: u128, width: u32 },
}

/// Number of bits needed to encode one of `count` values: ⌈log₂ count⌉.
pub fn bits_for(count: u128) -> u32 {
    if count <= 1 {
        0
    } else {
        128 - (count - 1).leading_zeros()
    }
}

#[derive(Default)]
pub struct BitWriter {
    msg: Message,
}

impl BitWriter {
    pub fn new() -> BitWriter {
        BitWriter::default()
    }

    fn push_bit(&mut self, b: bool) {
        let pos = self.msg.bit_len as usize;
        if pos.is_multiple_of(8) {
            self.msg.payload.push(0);
        }
        if b {
            self.msg.payload[pos / 8] |= 1 << (pos % 8);
        }
        self.msg.bit_len += 1;
    }

    /// Appends the low `width` bits of `value`; errors if `value` needs more.
    pub fn put(&mut self, value: u64, width: u32) -> Result<&mut Self, CodecError> {
        self.put_wide(value as u128, width)
    }

    pub fn put_wide(&mut self, value: u128, width: u32) -> Result<&mut Self, CodecError> {
        if width < 128 && value >> width != 0 {
            return Err(CodecError::ValueOutOfRange { value, width });
        }
        for i in 0..width {
            self.push_bit(value >> i & 1 == 1);
        }
        Ok(self)
    }

    pub fn put_bool(&mut self, b: bool) -> &mut Self {
        self.push_bit(b);
        self
    }

    /// Appends exactly `len` bits taken from the packed words `bits`.
    pub fn put_bits(&mut self, bits: &[u64], len: u32) -> &mut Self {
        for i in 0..len as usize {
            self.push_bit(bits[i / 64] >> (i % 64) & 1 == 1);
        }
        self
    }

    pub fn bit_len(&self) -> u32 {
        self.msg.bit_len
    }

    pub fn finish(self) -> Message {
        self.msg
    }
}

pub struct BitReader<'a> {
    msg: &'a Message,
    pos: u32,
}

impl BitReader<'_> {
    fn bit(&mut self) -> bool {
        assert!(self.pos < self.msg.bit_len, "read past end of message");
        let p = self.pos as usize;
        self.pos += 1;
        self.msg.payload[p / 8] >> (p % 8) & 1 == 1
    }

    pub fn get(&mut self, width: u32) -> u64 {
        self.get_wide(width) as u64
    }

    pub fn get_wide(&mut self, width: u32) -> u128 {
        (0..width).fold(0u128, |acc, i| acc | (self.bit() as u128) << i)
    }

    pub fn get_bool(&mut self) -> bool {
        self.bit()
    }

    pub fn get_bits(&mut self, len: u32) -> Vec<u64> {
        let mut out = vec![0u64; (len as usize).div_ceil(64)];
        for i in 0..len as usize {
            if self.bit() {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    pub fn remaining(&self) -> u32 {
        self.msg.bit_len - self.pos
    }
}

/// A color id over a space of `space` colors, in ⌈log₂|C|⌉ bits.
pub fn encode_color(c: u64, space: u64) -> Result<Message, CodecError> {
    if c >= space {
        return Err(CodecError::ValueOutOfRange { value: c as u128, width: bits_for(space as u128) });
    }
    let mut w = BitWriter::new();
    w.put(c, bits_for(space as u128))?;
    Ok(w.finish())
}

pub fn decode_color(m: &Message, space: u64) -> u64 {
    m.reader().get(bits_for(space as u128))
}

/// The pair (ω, i) with fixed field widths.
pub fn encode_hash_pair(omega: u64, index: u64, omega_bits: u32, index_bits: u32) -> Result<Message, CodecError> {
    let mut w = BitWriter::new();
    w.put(omega, omega_bits)?.put(index, index_bits)?;
    Ok(w.finish())
}

pub fn decode_hash_pair(m: &Message, omega_bits: u32, index_bits: u32) -> (u64, u64) {
    let mut r = m.reader();
    (r.get(omega_bits), r.get(index_bits))
}
