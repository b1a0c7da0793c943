//! Node state, single color trials, slack generation and the list-coloring measurements.

mod measure;
mod palette;
mod state;
mod trial;

pub use measure::discrepancy;
pub use palette::LivePalette;
pub use state::{initial_states, NodeState, Role};
pub use trial::{slack_generation, TryColor, DEFAULT_P_G};

#[cfg(test)]
mod tests;
