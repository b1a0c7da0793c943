//! Experiment grids, lemma validators, threshold calibration and the acceptance suite for
//! the `dcolor` pipeline.

pub mod acceptance;
pub mod calibrate;
pub mod grid;
pub mod oracles;
pub mod stats;
pub mod thresholds;
pub mod validators;
