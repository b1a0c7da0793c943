//! Produces the frozen thresholds file from seeds disjoint from every validation range.

use anyhow::{bail, Result};
use dcolor::graph::generate;
use dcolor::pipeline::{color_graph, Mode, PipelineConfig, Refinement};
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::grid::{run_one, SeedRange};
use crate::stats::{quantile, Rate};
use crate::thresholds::{Entry, ThresholdsFile};
use crate::validators::{self, PUTASIDE_DELTA};

/// Calibration seeds start here; validation and acceptance seeds stay below.
pub const CALIBRATION_SEED_BASE: u64 = 1_000_000;

/// A quantile at level q needs at least this many samples times 1/q; an extreme (q = 0 or 1)
/// needs `MIN_EXTREME_SAMPLES`.
const MIN_TAIL_SAMPLES: f64 = 10.0;
const MIN_EXTREME_SAMPLES: usize = 100;

/// Acceptance rates the validators test against; fixed by design rather than measured.
pub const RATE_TARGETS: [(&str, &str, f64); 7] = [
    ("sparse-gets-slack.rate", "sparse-gets-slack", 0.99),
    ("putaside-size.rate", "putaside-size", 0.99),
    ("degred.rate", "degred", 0.99),
    ("chromatic-slack.rate", "chromatic-slack", 0.98),
    ("low-degree.rate", "low-degree", 0.99),
    ("transversal.rate", "transversal", 0.99),
    ("clique-reduced.rate", "clique-reduced", 0.99),
];

/// Shattering instances of the acceptance suite: low-degree, n = 10⁵.
pub const SHATTER_N: usize = 100_000;
pub const SHATTER_DELTAS: [usize; 3] = [16, 32, 64];

pub fn shatter_instance(n: usize, delta: usize) -> String {
    format!("low-degree:n={n},delta={delta}")
}

/// The triangle-free instance of the clique-reduced check; f = ⌊Δ/2⌋ of each sample.
pub const CLIQUE_REDUCED_INSTANCE: &str = "planted-acd:n=6000,delta=460,sparse=1,sdeg=1,bipartite=1";

/// Seed budgets of one calibration run.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationPlan {
    pub slack_seeds: u64,
    pub degred_seeds: u64,
    pub family_seeds: u64,
    pub family_draws: usize,
    pub shatter_seeds: u64,
    /// n of the low-degree shattering instances.
    pub shatter_n: usize,
    pub clique_reduced_seeds: u64,
    pub clique_reduced_instance: String,
}

impl Default for CalibrationPlan {
    fn default() -> CalibrationPlan {
        CalibrationPlan {
            slack_seeds: 100,
            degred_seeds: 2000,
            family_seeds: 200,
            family_draws: 500,
            shatter_seeds: 30,
            shatter_n: SHATTER_N,
            clique_reduced_seeds: 200,
            clique_reduced_instance: CLIQUE_REDUCED_INSTANCE.into(),
        }
    }
}

fn seeds(offset: u64, count: u64) -> SeedRange {
    SeedRange::first(CALIBRATION_SEED_BASE + offset, count)
}

fn require(what: &str, samples: usize, q: f64) -> Result<()> {
    let tail = q.min(1.0 - q);
    let need = if tail > 0.0 { (MIN_TAIL_SAMPLES / tail).ceil() as usize } else { MIN_EXTREME_SAMPLES };
    if samples < need {
        bail!("insufficient samples for {what}: {samples} < {need}");
    }
    Ok(())
}

fn quantile_entry(key: &str, lemma: &str, param: &str, data: &[f64], q: f64, range: SeedRange, source: &str) -> Result<Entry> {
    require(key, data.len(), q)?;
    Ok(Entry {
        key: key.into(),
        lemma: lemma.into(),
        param: param.into(),
        value: quantile(data, q),
        quantile: Some(q),
        seeds: Some(range.to_string()),
        samples: data.len() as u64,
        source: source.into(),
    })
}

/// Smallest k with P[Bin(Δ, p_s) ≤ k] ≥ q.
pub fn binomial_quantile(trials: u64, p: f64, q: f64) -> u64 {
    let bin = Binomial::new(p, trials).expect("valid binomial");
    (0..=trials).find(|&k| bin.cdf(k) >= q).unwrap_or(trials)
}

/// Measures every calibrated quantity. Identical plans give identical files.
pub fn calibrate(plan: &CalibrationPlan) -> Result<ThresholdsFile> {
    let mut entries = Vec::new();
    for (key, lemma, value) in RATE_TARGETS {
        entries.push(Entry {
            key: key.into(),
            lemma: lemma.into(),
            param: "rate".into(),
            value,
            quantile: None,
            seeds: None,
            samples: 0,
            source: "design target".into(),
        });
    }

    let r = seeds(0, plan.slack_seeds);
    let ratios: Vec<f64> = validators::slack_samples(r).iter().map(|(s, z)| s / z).collect();
    entries.push(quantile_entry(
        "sparse-gets-slack.c_slk",
        "sparse-gets-slack",
        "c_slk",
        &ratios,
        0.01,
        r,
        &format!("slack/zeta on {} (instance seed {}), zeta >= {}", validators::SLACK_INSTANCE, validators::SLACK_INSTANCE_SEED, validators::SLACK_MIN_ZETA),
    )?);

    let p_s = validators::putaside_p_s();
    entries.push(Entry {
        key: "putaside-size.min_size".into(),
        lemma: "putaside-size".into(),
        param: "min_size".into(),
        value: binomial_quantile(PUTASIDE_DELTA as u64, p_s, 0.01) as f64,
        quantile: Some(0.01),
        seeds: None,
        samples: 0,
        source: format!("exact Binomial({PUTASIDE_DELTA}, {p_s:.6}) quantile"),
    });

    for (offset, list, key, lemma) in [(100_000, false, "degred.max_decolored", "degred"), (200_000, true, "degred-list.max_decolored", "degred")] {
        let r = seeds(offset, plan.degred_seeds);
        let d = validators::degred_samples(list, r);
        let family = if list { "random 22-of-44 lists" } else { "(Δ+1) palettes" };
        entries.push(quantile_entry(key, lemma, "max_decolored", &d, 0.99, r, &format!("two K21 joined by a matching, {family}"))?);
    }

    let r = seeds(300_000, plan.family_seeds);
    let bad = validators::family_bad_rate(r, plan.family_draws);
    entries.push(Entry {
        key: "multi-trial.nu".into(),
        lemma: "multi-trial".into(),
        param: "nu".into(),
        value: bad.interval.hi,
        quantile: None,
        seeds: Some(r.to_string()),
        samples: bad.trials,
        source: format!("99% Wilson upper bound of the non-good member fraction ({} of {})", bad.successes, bad.trials),
    });

    entries.extend(calibrate_shattering(plan.shatter_n, seeds(400_000, plan.shatter_seeds))?);
    entries.push(calibrate_clique_reduced(&plan.clique_reduced_instance, seeds(500_000, plan.clique_reduced_seeds))?);
    Ok(ThresholdsFile::new(entries))
}

/// s_max = max(2·largest component, ⌈log₂ n⌉); p_bad = 1.5 × the largest per-Δ Wilson upper
/// bound of the per-node Bad frequency.
fn calibrate_shattering(n: usize, r: SeedRange) -> Result<Vec<Entry>> {
    let base = PipelineConfig::default();
    let mut max_comp = 0usize;
    let mut p_hi = 0.0f64;
    let mut samples = 0u64;
    for delta in SHATTER_DELTAS {
        let spec = shatter_instance(n, delta);
        let recs: Vec<_> = r.par_iter().map(|s| run_one(&spec, &base, s)).collect();
        let mut bad = 0u64;
        for rec in recs {
            let rec = rec.map_err(anyhow::Error::msg)?;
            if !rec.proper {
                bail!("{spec} seed {} improper during calibration", rec.seed);
            }
            max_comp = max_comp.max(rec.max_component);
            bad += rec.bad_size as u64;
            samples += 1;
        }
        p_hi = p_hi.max(Rate::new(bad, r.len() * n as u64).interval.hi);
    }
    let log_n = (n as f64).log2().ceil() as usize;
    let source = format!("low-degree n={n}, delta in {SHATTER_DELTAS:?}");
    Ok(vec![
        Entry {
            key: "shattering.s_max".into(),
            lemma: "shattering".into(),
            param: "s_max".into(),
            value: (2 * max_comp).max(log_n) as f64,
            quantile: Some(1.0),
            seeds: Some(r.to_string()),
            samples,
            source: format!("{source}; max(2 x largest component {max_comp}, ceil(log2 n))"),
        },
        Entry {
            key: "shattering.p_bad".into(),
            lemma: "shattering".into(),
            param: "p_bad".into(),
            value: 1.5 * p_hi,
            quantile: None,
            seeds: Some(r.to_string()),
            samples,
            source: format!("{source}; 1.5 x largest 99% Wilson upper bound"),
        },
    ])
}

/// One clique-reduced run with f = ⌊Δ/2⌋: (Δ, f, max color, proper).
pub fn clique_reduced_run(spec: &str, seed: u64) -> Result<(usize, f64, u64, bool)> {
    let inst = generate(spec, seed)?;
    let delta = inst.delta();
    let f = (delta / 2) as f64;
    let cfg = PipelineConfig { refinement: Refinement::CliqueReduced { f }, mode: Mode::ShatteringAuto, ..PipelineConfig::default() };
    let out = color_graph(&inst, &cfg, seed)?;
    let r = &out.report;
    Ok((delta, f, r.max_color.unwrap_or(0), r.proper && r.complete && r.palette_legal))
}

fn calibrate_clique_reduced(spec: &str, r: SeedRange) -> Result<Entry> {
    let runs: Vec<Result<_>> = r.par_iter().map(|s| clique_reduced_run(spec, s)).collect();
    let mut cf = Vec::new();
    for run in runs {
        let (delta, f, max_color, proper) = run?;
        if !proper {
            bail!("clique-reduced calibration run improper");
        }
        cf.push((delta as f64 - max_color as f64) / f);
    }
    quantile_entry("clique-reduced.c_f", "clique-reduced", "c_f", &cf, 0.0, r, &format!("(Δ - max color)/f on {spec}, f = floor(Δ/2)"))
}
