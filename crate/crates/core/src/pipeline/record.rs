use serde::{Deserialize, Serialize};

use super::{Mode, PipelineOutcome};
use crate::graph::ColoringInstance;

/// Version tag written into every JSONL record.
pub const RECORD_SCHEMA: u32 = 1;

/// One line of the per-run JSONL output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub instance: String,
    pub seed: u64,
    pub n: usize,
    pub delta: usize,
    pub mode: Mode,
    pub rounds: u32,
    /// Rounds before the fallback.
    pub pipeline_rounds: u32,
    pub fallback_rounds: u32,
    pub max_bits: u32,
    pub bandwidth_violations: u64,
    pub bad_size: usize,
    pub components: usize,
    pub max_component: usize,
    pub colors_used: usize,
    pub max_color: Option<u64>,
    pub conflicts: u64,
    pub proper: bool,
    pub accepted: bool,
}

impl RunRecord {
    pub fn new(inst: &ColoringInstance, mode: Mode, seed: u64, out: &PipelineOutcome) -> RunRecord {
        let r = &out.report;
        RunRecord {
            schema: RECORD_SCHEMA,
            instance: inst.meta.description.clone(),
            seed,
            n: inst.n(),
            delta: inst.delta(),
            mode,
            rounds: out.metrics.rounds_used,
            pipeline_rounds: r.pipeline_rounds(),
            fallback_rounds: r.fallback.rounds,
            max_bits: out.metrics.max_bits(),
            bandwidth_violations: out.metrics.bandwidth_violations,
            bad_size: out.bad.nodes.len(),
            components: out.bad.components.len(),
            max_component: out.bad.max_component(),
            colors_used: r.colors_used,
            max_color: r.max_color,
            conflicts: r.trials.conflicts,
            proper: r.proper && r.complete && r.palette_legal,
            accepted: r.accepted,
        }
    }
}
