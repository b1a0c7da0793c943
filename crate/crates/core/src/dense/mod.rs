//! Dense-clique machinery: the synchronized color trial, put-aside sets and their final coloring.

mod putaside;
mod synch;
mod transversal;

pub use putaside::{
    color_putaside, disjoint_sample, putaside_cap, PutAsideOutcome, PutAsideSet, PutAsideTask, DISJOINT_SAMPLE_ROUNDS, PUTASIDE_ROUNDS};
pub use synch::{synch_color_trial, SynchClique, SynchOutcome, SYNCH_ROUNDS};
pub use transversal::{derived_graph, low_degree_sample, transversal, TransversalRun};
