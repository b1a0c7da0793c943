//! The seven acceptance criteria. Each returns one pass/fail line plus detail lines.
//!
//! Two profiles: `Full` uses the seed counts of the criteria (100 per cell), `Quick` keeps
//! every check but trims seed counts so the suite fits in a test run on one core.

use std::fmt;
use std::sync::OnceLock;

use anyhow::{bail, Context, Result};
use dcolor::graph::generate;
use dcolor::pipeline::{color_graph, Mode, PipelineConfig, Refinement, Step};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{clique_reduced_run, shatter_instance, CLIQUE_REDUCED_INSTANCE, SHATTER_DELTAS, SHATTER_N};
use crate::grid::{run_grid, run_one, ExperimentSpec, GridResult, SeedRange};
use crate::oracles::{check_hit_set, check_sparsity};
use crate::stats::Rate;
use crate::thresholds::ThresholdsFile;
use crate::validators::Lemma;

/// Environment variable selecting the profile of the test-suite entry point.
pub const PROFILE_ENV: &str = "DCOLOR_ACCEPTANCE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    /// `full` in `DCOLOR_ACCEPTANCE` selects the full profile; anything else is quick.
    pub fn from_env() -> Profile {
        match std::env::var(PROFILE_ENV).as_deref() {
            Ok("full") => Profile::Full,
            _ => Profile::Quick,
        }
    }

    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Profile::Quick => quick,
            Profile::Full => full,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.pick("quick", "full"))
    }
}

/// The twelve correctness families; `{n}` templates expand per size.
pub const GRID_FAMILIES: [&str; 12] = [
    "gnp:n={n},p={50/n}",
    "gnp:n={n},p={50/n},list=4",
    "gnp:n={n},p={50/n},deg=1",
    "gnp:n={n},p={50/n},space=wide",
    "clique-union:size=40,k={n/40},p={2/n}",
    "clique-union:size=40,k={n/40},p={2/n},list=3",
    "planted-acd:n={n},delta=60",
    "planted-acd:n={n},delta=60,list=4",
    "planted-acd:n={n},delta=60,space=wide",
    "line-graph:gnp:n={n/5},p={50/n}",
    "line-graph:gnp:n={n/5},p={50/n},list=3",
    "low-degree:n={n},delta=32",
];

pub const GRID_SIZES: [usize; 3] = [1_000, 10_000, 100_000];

/// Criterion 3 instance: Δ = 300 ≥ (log₂ 10⁵)² in high-degree mode.
pub const FLAT_TEMPLATE: &str = "planted-acd:n={n},delta=300";

/// Criterion 7 instances.
pub const EXTRA_COLORS_TEMPLATE: &str = "planted-acd:n=10000,delta=50";
pub const EXTRA_KAPPA: f64 = 4.0;
pub const EXTRA_DELTA: f64 = 0.1;
pub const LINE_GRAPH_INSTANCES: [&str; 2] = ["line-graph:gnp:n=400,p=0.05", "line-graph:gnp:n=400,p=0.05,list=3"];

/// (n, seed, measured rounds, budget, accepted).
type FlatRun = (usize, u64, u32, u32, bool);

/// "≥ 99 of 100" scaled to the seed count: at least ⌈0.99·seeds⌉ successes.
pub fn required_successes(seeds: u64) -> u64 {
    (seeds * 99).div_ceil(100)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub number: u8,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "criterion {}: {} [{}] {}", self.number, if self.passed { "PASS" } else { "FAIL" }, self.title, self.summary)
    }
}

/// Runs criteria against the frozen thresholds; the correctness grid is shared by 1, 2 and 6.
pub struct Acceptance {
    pub profile: Profile,
    thresholds: ThresholdsFile,
    grid: OnceLock<GridResult>,
}

impl Acceptance {
    pub fn new(profile: Profile, thresholds: ThresholdsFile) -> Acceptance {
        Acceptance { profile, thresholds, grid: OnceLock::new() }
    }

    pub fn run(&self, criterion: u8) -> Result<CriterionResult> {
        match criterion {
            1 => self.correctness(),
            2 => self.bandwidth(),
            3 => self.flat_rounds(),
            4 => self.shattering(),
            5 => self.lemma_suite(),
            6 => self.oracle_equivalence(),
            7 => self.refinements(),
            _ => bail!("no criterion {criterion} (expected 1..=7)"),
        }
    }

    pub fn run_all(&self) -> Result<Vec<CriterionResult>> {
        (1..=7).map(|c| self.run(c)).collect()
    }

    fn grid(&self) -> Result<&GridResult> {
        if let Some(g) = self.grid.get() {
            return Ok(g);
        }
        let mut results = Vec::new();
        let small = SeedRange::first(1, self.profile.pick(10, 100));
        let large = SeedRange::first(1, self.profile.pick(1, 100));
        for (sizes, seeds) in [(&GRID_SIZES[..2], small), (&GRID_SIZES[2..], large)] {
            let spec = ExperimentSpec::new(GRID_FAMILIES.iter().map(|s| s.to_string()).collect(), sizes.to_vec(), seeds);
            results.push(run_grid(&spec, None)?);
        }
        let mut merged = results.remove(0);
        let offset = merged.summaries.len();
        let rest = results.remove(0);
        merged.records.extend(rest.records.into_iter().map(|(i, r)| (i + offset, r)));
        merged.cells.extend(rest.cells);
        merged.summaries.extend(rest.summaries);
        merged.errors.extend(rest.errors);
        merged.elapsed += rest.elapsed;
        Ok(self.grid.get_or_init(|| merged))
    }

    fn correctness(&self) -> Result<CriterionResult> {
        let g = self.grid()?;
        let runs = g.records.len() as u64;
        let proper = g.records.iter().filter(|(_, r)| r.proper).count() as u64;
        let mut details: Vec<String> = g
            .summaries
            .iter()
            .map(|s| {
                format!(
                    "{}: {}/{} proper, rounds {}..{}, mean |Bad| {:.1}, max component {}",
                    s.instance, s.proper, s.runs, s.rounds_min, s.rounds_max, s.bad_mean, s.max_component
                )
            })
            .collect();
        details.extend(g.errors.iter().cloned());
        let families = GRID_FAMILIES.len();
        let passed = g.errors.is_empty() && proper == runs && runs > 0;
        Ok(CriterionResult {
            number: 1,
            title: "correctness grid".into(),
            passed,
            summary: format!(
                "{proper}/{runs} runs proper over {families} families x {} sizes, {} errors, {:.0}s",
                GRID_SIZES.len(),
                g.errors.len(),
                g.elapsed.as_secs_f64()
            ),
            details,
        })
    }

    fn bandwidth(&self) -> Result<CriterionResult> {
        let g = self.grid()?;
        let c_bw = PipelineConfig::default().c_bw;
        let mut violations = 0u64;
        let mut over_cap = Vec::new();
        let mut worst = 0.0f64;
        for (_, r) in &g.records {
            violations += r.bandwidth_violations;
            let cap = (c_bw * (r.n.max(2) as f64).log2()).ceil();
            worst = worst.max(r.max_bits as f64 / cap);
            if r.max_bits as f64 > cap {
                over_cap.push(format!("{} seed {}: {} bits > {cap}", r.instance, r.seed, r.max_bits));
            }
        }
        Ok(CriterionResult {
            number: 2,
            title: "CONGEST bandwidth".into(),
            passed: violations == 0 && over_cap.is_empty() && !g.records.is_empty(),
            summary: format!(
                "{violations} violations in {} runs; largest message {:.0}% of ceil(c_bw log2 n), c_bw = {c_bw}",
                g.records.len(),
                worst * 100.0
            ),
            details: over_cap,
        })
    }

    fn flat_rounds(&self) -> Result<CriterionResult> {
        let seeds = self.profile.pick(2, 10);
        let mut jobs = Vec::new();
        for n in GRID_SIZES {
            let count = if n == 100_000 { self.profile.pick(1, seeds) } else { seeds };
            for s in SeedRange::first(1, count).iter() {
                jobs.push((n, s));
            }
        }
        let cfg = PipelineConfig { mode: Mode::HighDegree, ..PipelineConfig::default() };
        let outcomes: Vec<Result<FlatRun>> = jobs
            .par_iter()
            .map(|&(n, s)| {
                let spec = FLAT_TEMPLATE.replace("{n}", &n.to_string());
                let inst = generate(&spec, s)?;
                let budget = cfg.budget(inst.n(), inst.delta(), inst.color_space).total();
                let out = color_graph(&inst, &cfg, s)?;
                Ok((n, s, out.metrics.rounds_used, budget, out.report.accepted))
            })
            .collect();
        let mut details = Vec::new();
        let mut budgets = std::collections::BTreeSet::new();
        let mut all_equal = true;
        for o in outcomes {
            let (n, s, rounds, budget, accepted) = o?;
            budgets.insert(budget);
            all_equal &= rounds == budget && accepted;
            details.push(format!("n={n} seed {s}: rounds {rounds}, budget {budget}, accepted {accepted}"));
        }
        let flat = budgets.len() == 1;
        Ok(CriterionResult {
            number: 3,
            title: "flat round budget".into(),
            passed: all_equal && flat,
            summary: format!(
                "{} runs of {FLAT_TEMPLATE} in high-degree mode; rounds == budget in every run: {all_equal}; budgets seen {budgets:?}",
                jobs.len()
            ),
            details,
        })
    }

    fn shattering(&self) -> Result<CriterionResult> {
        let s_max = self.thresholds.get("shattering.s_max")?;
        let p_bad = self.thresholds.get("shattering.p_bad")?;
        let seeds = SeedRange::first(1, self.profile.pick(5, 100));
        let base = PipelineConfig::default();
        let mut passed = true;
        let mut details = Vec::new();
        let mut worst_comp = 0usize;
        let mut worst_hi = 0.0f64;
        for delta in SHATTER_DELTAS {
            let spec = shatter_instance(SHATTER_N, delta);
            let recs: Vec<_> = seeds.par_iter().map(|s| run_one(&spec, &base, s)).collect();
            let (mut bad, mut comp, mut proper) = (0u64, 0usize, 0u64);
            for r in recs {
                let r = r.map_err(anyhow::Error::msg)?;
                bad += r.bad_size as u64;
                comp = comp.max(r.max_component);
                proper += u64::from(r.proper);
            }
            let rate = Rate::new(bad, seeds.len() * SHATTER_N as u64);
            let ok = comp as f64 <= s_max && rate.interval.hi <= p_bad && proper == seeds.len();
            passed &= ok;
            worst_comp = worst_comp.max(comp);
            worst_hi = worst_hi.max(rate.interval.hi);
            details.push(format!(
                "Δ={delta}: max component {comp}, Bad rate {:.5} (99% CI [{:.5}, {:.5}]), proper {proper}/{}",
                rate.estimate,
                rate.interval.lo,
                rate.interval.hi,
                seeds.len()
            ));
        }
        Ok(CriterionResult {
            number: 4,
            title: "shattering".into(),
            passed,
            summary: format!(
                "n={SHATTER_N}, Δ in {SHATTER_DELTAS:?}, {} seeds each: max component {worst_comp} vs s_max {s_max}, Bad upper bound {worst_hi:.5} vs p_bad {p_bad:.5}",
                seeds.len()
            ),
            details,
        })
    }

    /// Seeds of one validator under this profile.
    pub fn validator_seeds(&self, lemma: Lemma) -> SeedRange {
        let full = lemma.default_seeds();
        match self.profile {
            Profile::Full => full,
            Profile::Quick => SeedRange::first(full.start, (full.len() / 4).max(25)),
        }
    }

    fn lemma_suite(&self) -> Result<CriterionResult> {
        let mut details = Vec::new();
        let mut failed = Vec::new();
        for lemma in Lemma::ALL {
            let report = lemma.validate(self.validator_seeds(lemma), &self.thresholds)?;
            if !report.passed {
                failed.push(report.lemma.clone());
            }
            details.extend(report.render().lines().map(str::to_string));
        }
        Ok(CriterionResult {
            number: 5,
            title: "lemma validators".into(),
            passed: failed.is_empty(),
            summary: if failed.is_empty() {
                format!("all {} validators pass", Lemma::ALL.len())
            } else {
                format!("failing: {}", failed.join(", "))
            },
            details,
        })
    }

    fn oracle_equivalence(&self) -> Result<CriterionResult> {
        let hit = check_hit_set(16, 8, 0x6869_7473);
        let sp = check_sparsity(1000, 0x7370_6172);
        let g = self.grid()?;
        let conflicts: u64 = g.records.iter().map(|(_, r)| r.conflicts).sum();
        Ok(CriterionResult {
            number: 6,
            title: "oracle equivalence".into(),
            passed: hit.mismatches == 0 && sp.mismatches == 0 && conflicts == 0 && hit.cases > 0,
            summary: format!(
                "hit_set {}/{} match, sparsity {}/{} graphs match, {conflicts} MultiTrial conflicts over {} grid runs",
                hit.cases - hit.mismatches,
                hit.cases,
                sp.cases - sp.mismatches,
                sp.cases,
                g.records.len()
            ),
            details: Vec::new(),
        })
    }

    fn refinements(&self) -> Result<CriterionResult> {
        let seeds = SeedRange::first(1, self.profile.pick(20, 100));
        let need = required_successes(seeds.len());

        // (a) extra colors: no put-aside rounds, no Bad nodes.
        let cfg = PipelineConfig {
            refinement: Refinement::ExtraColors { kappa: EXTRA_KAPPA, delta: EXTRA_DELTA },
            ..PipelineConfig::default()
        };
        let extra = cfg.extra_colors(10_000).context("extra-colors refinement")?;
        let spec_a = format!("{EXTRA_COLORS_TEMPLATE},extra={extra}");
        let a: Vec<Result<bool>> = seeds
            .par_iter()
            .map(|s| {
                let inst = generate(&spec_a, s)?;
                let out = color_graph(&inst, &cfg, s)?;
                let r = &out.report;
                let putaside = r.step_rounds(Step::PutAside) + r.step_rounds(Step::PutAsideColor);
                Ok(r.proper && r.complete && r.palette_legal && putaside == 0 && out.bad.nodes.is_empty())
            })
            .collect();
        let a_ok = a.into_iter().collect::<Result<Vec<_>>>()?.into_iter().filter(|&x| x).count() as u64;

        // (b) clique-reduced palettes on a triangle-free instance.
        let c_f = self.thresholds.get("clique-reduced.c_f")?;
        let b: Vec<Result<(usize, f64, u64, bool)>> = seeds.par_iter().map(|s| clique_reduced_run(CLIQUE_REDUCED_INSTANCE, s)).collect();
        let mut b_ok = 0u64;
        let mut b_worst = f64::INFINITY;
        for r in b {
            let (delta, f, max_color, proper) = r?;
            let bound = delta as f64 - c_f * f;
            b_worst = b_worst.min(bound - max_color as f64);
            b_ok += u64::from(proper && max_color as f64 <= bound);
        }

        // (c) line graphs with 2Δ−1 lists.
        let mut c_ok = 0u64;
        let mut c_runs = 0u64;
        for spec in LINE_GRAPH_INSTANCES {
            for r in seeds.par_iter().map(|s| run_one(spec, &PipelineConfig::default(), s)).collect::<Vec<_>>() {
                c_runs += 1;
                c_ok += u64::from(r.map_err(anyhow::Error::msg)?.proper);
            }
        }

        let parts = [a_ok >= need, b_ok >= need, c_ok == c_runs];
        let n = seeds.len();
        Ok(CriterionResult {
            number: 7,
            title: "refinements".into(),
            passed: parts.iter().all(|&x| x),
            summary: format!("(a) {a_ok}/{n} (b) {b_ok}/{n} (need {need} each) (c) {c_ok}/{c_runs} proper"),
            details: vec![
                format!("(a) {spec_a} with extra-colors kappa={EXTRA_KAPPA} delta={EXTRA_DELTA}: proper, zero put-aside rounds, empty Bad in {a_ok}/{n}"),
                format!("(b) {CLIQUE_REDUCED_INSTANCE}, f = floor(Δ/2), c_f = {c_f:.4}: max color <= Δ - c_f·f in {b_ok}/{n}; smallest margin {b_worst:.2}"),
                format!("(c) {}: {c_ok}/{c_runs} proper", LINE_GRAPH_INSTANCES.join(" and ")),
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn required_successes_rounds_up() {
        assert_eq!(required_successes(100), 99);
        assert_eq!(required_successes(20), 20);
        assert_eq!(required_successes(200), 198);
        assert_eq!(required_successes(1), 1);
    }

    #[test]
    fn grid_templates_expand_for_every_size() {
        let spec = ExperimentSpec::new(GRID_FAMILIES.iter().map(|s| s.to_string()).collect(), GRID_SIZES.to_vec(), SeedRange::new(0, 1));
        let cells = spec.cells().unwrap();
        assert_eq!(cells.len(), 36);
        for c in &cells {
            dcolor::graph::GenSpec::parse(c).unwrap_or_else(|e| panic!("{c}: {e}"));
        }
    }

    #[test]
    fn unknown_criterion_is_an_error() {
        let acc = Acceptance::new(Profile::Quick, ThresholdsFile::new(Vec::new()));
        assert!(acc.run(8).is_err());
        assert!(acc.run(0).is_err());
    }
}
