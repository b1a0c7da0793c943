//! ε-almost-clique decomposition, per-clique leaders, outliers and the ζ_C estimate.
//!
//! The decomposition is computed centrally from exact common-neighbor counts and then
//! verified clause by clause; pipelines charge it a fixed number of rounds.

mod decomposition;
mod meta;

pub use decomposition::{compute_acd, AcdError, AcdPartition, AcdViolation, ACD_ROUNDS};
pub use meta::{
    anti_degrees, clique_metas, compute_outliers, elect_leader, elect_list_leader, estimate_zeta, external_degrees,
    list_outliers, partition_json, CliqueMeta, LeaderRule, ESTIMATE_ROUNDS, LEADER_ROUNDS, LIST_ROUNDS,
};
