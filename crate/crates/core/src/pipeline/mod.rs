//! The end-to-end coloring algorithm: decomposition, slack generation, sparse and dense
//! coloring, put-aside sets, the Bad set and its deterministic finish.

mod config;
mod fallback;
mod record;
mod run;

pub use config::{is_list, transversal_rounds, Budget, ConfigError, Mode, PipelineConfig, PutAsideVariant, Refinement, Step, Thresholds};
pub use fallback::{shatter_and_finish, BadSet, FallbackReport};
pub use record::{RunRecord, RECORD_SCHEMA};
pub use run::{color_graph, color_graph_with, PipelineError, PipelineOutcome, PipelineReport, Triggers};

#[cfg(test)]
mod tests;
