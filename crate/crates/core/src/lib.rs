//! Distributed (Δ+1)-coloring in the CONGEST model, simulated round by round.

pub mod graph;
pub mod acd;
pub mod dense;
pub mod engine;
pub mod multitrial;
pub mod pipeline;
pub mod slack;
