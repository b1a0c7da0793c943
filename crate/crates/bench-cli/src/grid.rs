//! Experiment grids: instance templates × sizes × seeds, fanned out over the rayon pool,
//! with one collector thread that owns the JSONL sink.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use dcolor::graph::{generate, GenSpec};
use dcolor::pipeline::{color_graph, is_list, PipelineConfig, RunRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::validators::Lemma;

/// Env var naming the default output directory.
pub const OUT_DIR_ENV: &str = "DCOLOR_OUT_DIR";

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"))
}

/// Half-open seed range written `a..b`; `a..=b` is accepted too.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn new(start: u64, end: u64) -> SeedRange {
        SeedRange { start, end: end.max(start) }
    }

    /// `count` seeds starting at `start`.
    pub fn first(start: u64, count: u64) -> SeedRange {
        SeedRange::new(start, start + count)
    }

    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> std::ops::Range<u64> {
        self.start..self.end
    }

    pub fn par_iter(&self) -> rayon::range::Iter<u64> {
        (self.start..self.end).into_par_iter()
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<SeedRange, String> {
        let bad = || format!("expected a seed range like 1..100, got '{s}'");
        if let Some((a, b)) = s.split_once("..=") {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            return if b >= a { Ok(SeedRange::new(a, b + 1)) } else { Err(bad()) };
        }
        if let Some((a, b)) = s.split_once("..") {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            return if b >= a { Ok(SeedRange::new(a, b)) } else { Err(bad()) };
        }
        let a: u64 = s.trim().parse().map_err(|_| bad())?;
        Ok(SeedRange::new(a, a + 1))
    }
}

impl TryFrom<String> for SeedRange {
    type Error = String;

    fn try_from(s: String) -> Result<SeedRange, String> {
        s.parse()
    }
}

impl From<SeedRange> for String {
    fn from(r: SeedRange) -> String {
        r.to_string()
    }
}

/// A grid of runs. Generator templates may use `{n}`, `{n/K}` (integer division) and
/// `{K/n}` (a probability), which are filled in for every entry of `sizes`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub generators: Vec<String>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Overrides on top of the default pipeline config.
    #[serde(default)]
    pub config: serde_json::Value,
    pub seeds: SeedRange,
    #[serde(default)]
    pub validators: Vec<Lemma>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_max_runs")]
    pub max_runs: u64,
}

fn default_max_runs() -> u64 {
    100_000
}

impl ExperimentSpec {
    pub fn new(generators: Vec<String>, sizes: Vec<usize>, seeds: SeedRange) -> ExperimentSpec {
        ExperimentSpec { generators, sizes, config: serde_json::Value::Null, seeds, validators: Vec::new(), out: None, max_runs: default_max_runs() }
    }

    /// Every concrete generator string of the grid, in order.
    pub fn cells(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for t in &self.generators {
            if t.contains('{') {
                if self.sizes.is_empty() {
                    bail!("template '{t}' needs sizes");
                }
                for &n in &self.sizes {
                    out.push(fill_template(t, n)?);
                }
            } else {
                out.push(t.clone());
            }
        }
        Ok(out)
    }

    pub fn total_runs(&self) -> Result<u64> {
        Ok(self.cells()?.len() as u64 * self.seeds.len())
    }

    pub fn base_config(&self) -> Result<PipelineConfig> {
        config_with_overrides(&self.config)
    }
}

/// The default pipeline config with the fields of `overrides` (a JSON object) replaced.
pub fn config_with_overrides(overrides: &serde_json::Value) -> Result<PipelineConfig> {
    let mut base = serde_json::to_value(PipelineConfig::default())?;
    match overrides {
        serde_json::Value::Null => {}
        serde_json::Value::Object(m) => {
            for (k, v) in m {
                if base.get(k).is_none() {
                    bail!("unknown config field '{k}'");
                }
                if let (Some(serde_json::Value::Object(dst)), serde_json::Value::Object(src)) = (base.get_mut(k), v) {
                    if k == "thresholds" {
                        for (kk, vv) in src {
                            dst.insert(kk.clone(), vv.clone());
                        }
                        continue;
                    }
                }
                base[k] = v.clone();
            }
        }
        _ => bail!("config overrides must be a JSON object"),
    }
    serde_json::from_value(base).context("invalid pipeline config")
}

fn fill_template(t: &str, n: usize) -> Result<String> {
    let mut out = String::new();
    let mut rest = t;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let j = rest[i..].find('}').with_context(|| format!("unclosed '{{' in '{t}'"))? + i;
        let expr = rest[i + 1..j].trim();
        let value = if expr == "n" {
            n.to_string()
        } else if let Some(k) = expr.strip_prefix("n/") {
            let k: usize = k.trim().parse().with_context(|| format!("bad divisor in '{{{expr}}}'"))?;
            (n / k.max(1)).to_string()
        } else if let Some(k) = expr.strip_suffix("/n") {
            let k: f64 = k.trim().parse().with_context(|| format!("bad numerator in '{{{expr}}}'"))?;
            format!("{}", (k / n as f64).min(1.0))
        } else {
            bail!("unknown placeholder '{{{expr}}}' in '{t}'");
        };
        out.push_str(&value);
        rest = &rest[j + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Aggregates of one grid cell, one CSV row.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub instance: String,
    pub runs: u64,
    pub n_max: usize,
    pub delta_max: usize,
    pub proper: u64,
    pub accepted: u64,
    pub rounds_min: u32,
    pub rounds_max: u32,
    pub pipeline_rounds_max: u32,
    pub bad_mean: f64,
    pub max_component: usize,
    pub max_bits: u32,
    pub bandwidth_violations: u64,
    pub conflicts: u64,
}

impl CellSummary {
    fn of(instance: &str, recs: &[&RunRecord]) -> CellSummary {
        let mut s = CellSummary { instance: instance.to_string(), rounds_min: u32::MAX, ..CellSummary::default() };
        for r in recs {
            s.runs += 1;
            s.n_max = s.n_max.max(r.n);
            s.delta_max = s.delta_max.max(r.delta);
            s.proper += u64::from(r.proper);
            s.accepted += u64::from(r.accepted);
            s.rounds_min = s.rounds_min.min(r.rounds);
            s.rounds_max = s.rounds_max.max(r.rounds);
            s.pipeline_rounds_max = s.pipeline_rounds_max.max(r.pipeline_rounds);
            s.bad_mean += r.bad_size as f64;
            s.max_component = s.max_component.max(r.max_component);
            s.max_bits = s.max_bits.max(r.max_bits);
            s.bandwidth_violations += r.bandwidth_violations;
            s.conflicts += r.conflicts;
        }
        if s.runs > 0 {
            s.bad_mean /= s.runs as f64;
        } else {
            s.rounds_min = 0;
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct GridResult {
    pub cells: Vec<String>,
    /// Sorted by (cell, seed).
    pub records: Vec<(usize, RunRecord)>,
    pub summaries: Vec<CellSummary>,
    pub errors: Vec<String>,
    pub elapsed: Duration,
}

impl GridResult {
    pub fn all_proper(&self) -> bool {
        self.errors.is_empty() && self.records.iter().all(|(_, r)| r.proper)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        for s in &self.summaries {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every (cell, seed) pair of `spec`. Records are appended to `jsonl` as they finish.
pub fn run_grid(spec: &ExperimentSpec, jsonl: Option<&Path>) -> Result<GridResult> {
    let cells = spec.cells()?;
    let total = cells.len() as u64 * spec.seeds.len();
    if total > spec.max_runs {
        bail!("grid has {total} runs, above the cap of {}", spec.max_runs);
    }
    for c in &cells {
        GenSpec::parse(c).with_context(|| format!("generator '{c}'"))?;
    }
    let base = spec.base_config()?;
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| spec.seeds.iter().map(move |s| (c, s))).collect();
    let sink = match jsonl {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Some(BufWriter::new(OpenOptions::new().create(true).append(true).open(p).with_context(|| format!("opening {}", p.display()))?))
        }
        None => None,
    };
    let start = Instant::now();
    let (tx, rx) = mpsc::channel::<Result<(usize, RunRecord), String>>();
    let collector = std::thread::spawn(move || collect(rx, sink));
    jobs.par_iter().for_each_with(tx, |tx, &(c, seed)| {
        let _ = tx.send(run_one(&cells[c], &base, seed).map(|r| (c, r)));
    });
    let (mut records, errors) = collector.join().expect("collector thread")?;
    records.sort_by_key(|a| (a.0, a.1.seed));
    let summaries = cells
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let recs: Vec<&RunRecord> = records.iter().filter(|(c, _)| *c == i).map(|(_, r)| r).collect();
            CellSummary::of(name, &recs)
        })
        .collect();
    Ok(GridResult { cells, records, summaries, errors, elapsed: start.elapsed() })
}

type Collected = (Vec<(usize, RunRecord)>, Vec<String>);

fn collect(rx: mpsc::Receiver<Result<(usize, RunRecord), String>>, mut sink: Option<BufWriter<File>>) -> Result<Collected> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for item in rx {
        match item {
            Ok((c, r)) => {
                if let Some(w) = sink.as_mut() {
                    serde_json::to_writer(&mut *w, &r)?;
                    w.write_all(b"\n")?;
                }
                records.push((c, r));
            }
            Err(e) => errors.push(e),
        }
    }
    if let Some(mut w) = sink {
        w.flush()?;
    }
    Ok((records, errors))
}

/// One pipeline run; the list variant is switched on for list instances.
pub fn run_one(generator: &str, base: &PipelineConfig, seed: u64) -> Result<RunRecord, String> {
    let inst = generate(generator, seed).map_err(|e| format!("{generator}: {e}"))?;
    let mut cfg = base.clone();
    cfg.list_variant |= is_list(&inst);
    let out = color_graph(&inst, &cfg, seed).map_err(|e| format!("{generator} seed {seed}: {e}"))?;
    Ok(RunRecord::new(&inst, cfg.mode, seed, &out))
}
