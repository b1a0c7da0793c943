//! Representative hash families, MultiTrial, the SlackColor schedule and large-color hashing.

mod family;
mod large_color;
mod slack_color;

pub use family::{
    family_table, hit_set, hit_set_brute, is_good, mix64, FamilyConfig, FamilyError, FamilyMode, HashFamily, Member, ALPHA, BETA,
};
pub use large_color::{hashed_bits, key_from_bits, multiply_shift, ColorCodec, KeyExchange, DEFAULT_CODEC_D};
pub use slack_color::{
    log_star, multi_trial, run_plan, slack_color, Iteration, Plan, SlackColorParams, SlackColorReport, TrialEnv, TrialStats,
    DEFAULT_IOTA,
};
