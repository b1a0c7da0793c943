use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acd::{ACD_ROUNDS, ESTIMATE_ROUNDS, LEADER_ROUNDS, LIST_ROUNDS};
use crate::dense::{DISJOINT_SAMPLE_ROUNDS, PUTASIDE_ROUNDS, SYNCH_ROUNDS};
use crate::engine::{Mode as Model, DEFAULT_C_BW};
use crate::graph::{ColoringInstance, Variant};
use crate::multitrial::{hashed_bits, FamilyMode, KeyExchange, SlackColorParams, DEFAULT_CODEC_D, DEFAULT_IOTA};
use crate::slack::DEFAULT_P_G;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Fixed schedules; a nonempty Bad set marks the run as failed.
    HighDegree,
    /// Phases end early once their participants are done; Bad nodes go to the fallback.
    ShatteringAuto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PutAsideVariant {
    DisjointSample,
    /// Transversal with δ = 1/m.
    Transversal { m: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Refinement {
    None,
    /// Palettes carry at least ⌈κ·log₂^{1+δ} n⌉ colors beyond Δ; no put-aside sets.
    ExtraColors { kappa: f64, delta: f64 },
    /// Every node ends up with palette {0..Δ−⌊s_v/2⌋−1}; needs f ≤ Δ/ω with f > 1.
    CliqueReduced { f: f64 },
}

/// Calibrated constants behind the Bad-set triggers and the SlackColor call sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Dense cliques with ζ'_C > Δ^{1/3} need permanent slack ≥ c_slk·ζ'_C at every core node.
    pub c_slk: f64,
    /// A synchronized trial overflows above ⌈kappa_dec·(ζ'_C + Δ^{1/3})⌉ decolored members.
    pub kappa_dec: f64,
    /// |P_C| must reach ⌈putaside_min·B²/c⌉ (capped by the relay limit).
    pub putaside_min: f64,
    /// s_min of the sparse SlackColor call is ⌈sparse_slack·Δ⌉.
    pub sparse_slack: f64,
    /// s_min of the dense SlackColor call is ⌈dense_slack·Δ^{1/3}⌉.
    pub dense_slack: f64,
    /// T(n) = t_scale·(log₂ n)^t_exp; high-degree mode expects Δ ≥ T(n).
    pub t_scale: f64,
    pub t_exp: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds { c_slk: 0.0, kappa_dec: 4.0, putaside_min: 0.0625, sparse_slack: 0.125, dense_slack: 1.0, t_scale: 1.0, t_exp: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub putaside: PutAsideVariant,
    pub refinement: Refinement,
    pub list_variant: bool,
    pub model: Model,
    pub c_bw: f64,
    /// ε as [numerator, denominator].
    pub epsilon: [i64; 2],
    pub p_g: f64,
    /// c in p_s = 1/(c·B).
    pub c_sample: f64,
    pub iota: f64,
    /// δ of the sparse SlackColor call; the dense call uses δ/3.
    pub slack_delta: f64,
    pub codec_d: f64,
    pub family: FamilyMode,
    pub family_seed: u64,
    pub max_rounds: u32,
    pub thresholds: Thresholds,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            mode: Mode::ShatteringAuto,
            putaside: PutAsideVariant::DisjointSample,
            refinement: Refinement::None,
            list_variant: false,
            model: Model::Congest,
            c_bw: DEFAULT_C_BW,
            epsilon: [1, 5],
            p_g: DEFAULT_P_G,
            c_sample: 4.0,
            iota: DEFAULT_IOTA,
            slack_delta: 1.0,
            codec_d: DEFAULT_CODEC_D,
            family: FamilyMode::Calibrated,
            family_seed: 0x5eed_fa31,
            max_rounds: 1_000_000,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("list instance needs the list variant")]
    ListMismatch,
    #[error("ε = {0}/{1} must lie in (0, 1/3)")]
    Epsilon(i64, i64),
    #[error("extra-colors needs palettes of at least {need} colors, smallest is {have}")]
    TooFewExtraColors { need: usize, have: usize },
    #[error("clique-reduced needs a known clique number")]
    UnknownCliqueNumber,
    #[error("clique-reduced needs 1 < f ≤ Δ/ω (f = {f}, Δ/ω = {bound})")]
    CliqueBound { f: f64, bound: f64 },
    #[error("clique-reduced applies to {{0..Δ}} palettes only")]
    NotRangePalettes,
}

/// Pipeline steps in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Trivial,
    KeyExchange,
    Acd,
    SlackGeneration,
    CliqueMeta,
    SparseColor,
    PutAside,
    Synch,
    DenseColor,
    PutAsideColor,
    Fallback,
}

/// Rounds of every step under fixed schedules, in execution order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub steps: Vec<(Step, u32)>,
}

impl Budget {
    pub fn total(&self) -> u32 {
        self.steps.iter().map(|s| s.1).sum()
    }

    pub fn get(&self, step: Step) -> u32 {
        self.steps.iter().filter(|s| s.0 == step).map(|s| s.1).sum()
    }
}

impl PipelineConfig {
    /// Defaults with the list flag matching the instance.
    pub fn for_instance(inst: &ColoringInstance) -> PipelineConfig {
        PipelineConfig { list_variant: is_list(inst), ..PipelineConfig::default() }
    }

    pub fn epsilon(&self) -> Ratio<i64> {
        Ratio::new(self.epsilon[0], self.epsilon[1])
    }

    pub fn bandwidth(&self, n: usize) -> u32 {
        match self.model {
            Model::Congest => (self.c_bw * (n.max(1) as f64).log2()).ceil().max(1.0) as u32,
            Model::Local => u32::MAX,
        }
    }

    /// T(n) of the high-degree regime.
    pub fn degree_threshold(&self, n: usize) -> f64 {
        self.thresholds.t_scale * (n.max(2) as f64).log2().powf(self.thresholds.t_exp)
    }

    pub fn sparse_params(&self, delta: usize) -> SlackColorParams {
        let s_min = (self.thresholds.sparse_slack * delta as f64).ceil().max(1.0) as u64;
        SlackColorParams { s_min, delta: self.slack_delta, iota: self.iota }
    }

    pub fn dense_params(&self, delta: usize) -> SlackColorParams {
        let s_min = (self.thresholds.dense_slack * (delta as f64).cbrt()).ceil().max(1.0) as u64;
        SlackColorParams { s_min, delta: self.slack_delta / 3.0, iota: self.iota }
    }

    pub fn skips_putaside(&self) -> bool {
        matches!(self.refinement, Refinement::ExtraColors { .. })
    }

    /// Colors beyond Δ that extra-colors mode requires.
    pub fn extra_colors(&self, n: usize) -> Option<usize> {
        match self.refinement {
            Refinement::ExtraColors { kappa, delta } => Some((kappa * (n.max(2) as f64).log2().powf(1.0 + delta)).ceil() as usize),
            _ => None,
        }
    }

    /// Checks the config against the instance, including refinement preconditions.
    pub fn check(&self, inst: &ColoringInstance) -> Result<(), ConfigError> {
        let eps = self.epsilon();
        if eps <= Ratio::from_integer(0) || eps >= Ratio::new(1, 3) {
            return Err(ConfigError::Epsilon(self.epsilon[0], self.epsilon[1]));
        }
        if is_list(inst) && !self.list_variant {
            return Err(ConfigError::ListMismatch);
        }
        let delta = inst.delta();
        if let Some(extra) = self.extra_colors(inst.n()) {
            let have = inst.palettes.iter().map(|p| p.len()).min().unwrap_or(0);
            if have < delta + extra {
                return Err(ConfigError::TooFewExtraColors { need: delta + extra, have });
            }
        }
        if let Refinement::CliqueReduced { f } = self.refinement {
            let omega = inst.meta.clique_number.ok_or(ConfigError::UnknownCliqueNumber)?;
            let bound = delta as f64 / omega.max(1) as f64;
            if f <= 1.0 || f > bound {
                return Err(ConfigError::CliqueBound { f, bound });
            }
            if is_list(inst) || inst.palettes.iter().any(|p| p.len() != delta + 1 || p.max_color() != Some(delta as u64)) {
                return Err(ConfigError::NotRangePalettes);
            }
        }
        Ok(())
    }

    /// Closed-form round budget of fixed schedules on a graph with `n` nodes and max degree
    /// `delta`, whose colors come from a space of size `color_space`. The fallback is not included.
    pub fn budget(&self, n: usize, delta: usize, color_space: u64) -> Budget {
        if delta == 0 {
            return Budget { steps: vec![(Step::Trivial, 1)] };
        }
        let mut steps = Vec::new();
        if hashed_bits(n, color_space, self.codec_d).is_some() {
            steps.push((Step::KeyExchange, KeyExchange::rounds(self.bandwidth(n).min(63))));
        }
        steps.push((Step::Acd, ACD_ROUNDS));
        steps.push((Step::SlackGeneration, 2));
        let meta = LEADER_ROUNDS + ESTIMATE_ROUNDS + if self.list_variant { LIST_ROUNDS } else { 0 };
        steps.push((Step::CliqueMeta, meta));
        steps.push((Step::SparseColor, self.sparse_params(delta).rounds()));
        if !self.skips_putaside() {
            let r = match self.putaside {
                PutAsideVariant::DisjointSample => DISJOINT_SAMPLE_ROUNDS,
                PutAsideVariant::Transversal { m } => transversal_rounds(m),
            };
            steps.push((Step::PutAside, r));
        }
        steps.push((Step::Synch, SYNCH_ROUNDS));
        steps.push((Step::DenseColor, self.dense_params(delta).rounds()));
        if !self.skips_putaside() {
            steps.push((Step::PutAsideColor, PUTASIDE_ROUNDS));
        }
        Budget { steps }
    }
}

/// One sampling round per LowDegreeSample call, plus one round for the leaders' caps.
pub fn transversal_rounds(m: u32) -> u32 {
    m + 2
}

pub fn is_list(inst: &ColoringInstance) -> bool {
    !matches!(inst.variant, Variant::DeltaPlusOne)
}
