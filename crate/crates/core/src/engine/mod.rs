//! Round-synchronous message passing with per-edge bandwidth accounting.
//!
//! Each round every non-terminal node emits (a broadcast and/or individual messages to
//! neighbors); messages are delivered at the end of the round to every listening
//! neighbor. Per-node randomness comes from an independent ChaCha stream keyed by
//! `(global_seed, node id)`.

mod codec;
mod network;

pub use codec::{
    bits_for, decode_color, decode_hash_pair, encode_color, encode_hash_pair, BitReader, BitWriter, CodecError, Message,
};
pub use network::{
    run, EngineConfig, EngineError, Envelope, Mode, Network, NodeCtx, NodeProgram, Outbox, Policy, RunMetrics, RunOutcome,
    TranscriptRecord, DEFAULT_C_BW,
};
