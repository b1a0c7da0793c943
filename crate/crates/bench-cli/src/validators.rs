//! Lemma-level statistical validators. Each one measures a quantity over a seed range and
//! compares it with thresholds from the frozen calibration file.

use anyhow::{bail, Result};
use dcolor::acd::{anti_degrees, compute_acd};
use dcolor::dense::{disjoint_sample, low_degree_sample, synch_color_trial, transversal, SynchClique};
use dcolor::engine::{EngineConfig, Network, DEFAULT_C_BW};
use dcolor::graph::{all_sparsities, generate, named, ColoringInstance, EdgeOverlap, Graph, NodeId, Palette, Variant};
use dcolor::multitrial::{is_good, multi_trial, ColorCodec, FamilyConfig, HashFamily, TrialEnv, ALPHA, BETA};
use dcolor::pipeline::PipelineConfig;
use dcolor::slack::{discrepancy, initial_states, slack_generation, DEFAULT_P_G};
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::SeedRange;
use crate::stats::{quantile, quantile_summary, Rate};
use crate::thresholds::{Entry, ThresholdsFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// Sparse nodes get slack proportional to their sparsity.
    SparseGetsSlack,
    /// Put-aside samples in an isolated clique are large.
    PutasideSize,
    /// Few nodes lose the synchronized trial (non-list and list).
    Degred,
    /// Average discrepancy is at most twice the minimum.
    MinAvg,
    /// Chromatic slack is sandwiched by the discrepancy.
    ChromaticSlack,
    /// Per-trial failure of MultiTrial(x) and monotonicity in x.
    MultiTrial,
    /// LowDegreeSample keeps a 1/(8q) share of every part.
    LowDegree,
    /// Transversal output is independent and meets every part.
    Transversal,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::SparseGetsSlack,
        Lemma::PutasideSize,
        Lemma::Degred,
        Lemma::MinAvg,
        Lemma::ChromaticSlack,
        Lemma::MultiTrial,
        Lemma::LowDegree,
        Lemma::Transversal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::SparseGetsSlack => "sparse-gets-slack",
            Lemma::PutasideSize => "putaside-size",
            Lemma::Degred => "degred",
            Lemma::MinAvg => "min-avg",
            Lemma::ChromaticSlack => "chromatic-slack",
            Lemma::MultiTrial => "multi-trial",
            Lemma::LowDegree => "low-degree",
            Lemma::Transversal => "transversal",
        }
    }

    /// Validation seeds; calibration draws from a disjoint range.
    pub fn default_seeds(&self) -> SeedRange {
        let count = match self {
            Lemma::SparseGetsSlack | Lemma::ChromaticSlack => 200,
            Lemma::MinAvg => 100,
            Lemma::MultiTrial => 200,
            Lemma::LowDegree | Lemma::Transversal => 300,
            Lemma::PutasideSize | Lemma::Degred => 1000,
        };
        SeedRange::first(1, count)
    }

    pub fn validate(&self, seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
        if seeds.is_empty() {
            bail!("{}: empty seed range", self.name());
        }
        match self {
            Lemma::SparseGetsSlack => validate_sparse_gets_slack(seeds, thr),
            Lemma::PutasideSize => validate_putaside_size(seeds, thr),
            Lemma::Degred => validate_degred(seeds, thr),
            Lemma::MinAvg => validate_min_avg(seeds),
            Lemma::ChromaticSlack => validate_chromatic_slack(seeds, thr),
            Lemma::MultiTrial => validate_multi_trial(seeds, thr),
            Lemma::LowDegree => validate_low_degree(seeds, thr),
            Lemma::Transversal => validate_transversal(seeds, thr),
        }
    }
}

/// One pass/fail check of a validator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<Rate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// (quantile, value) pairs of the measured quantity.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub quantiles: Vec<(f64, f64)>,
    pub detail: String,
}

impl Check {
    /// Passes unless the 99% Wilson interval lies wholly below `target`.
    fn at_least(name: &str, rate: Rate, target: f64) -> Check {
        let passed = rate.consistent_with_at_least(target);
        let detail = format!(
            "{}/{} = {:.4}, 99% CI [{:.4}, {:.4}] vs target {target}",
            rate.successes, rate.trials, rate.estimate, rate.interval.lo, rate.interval.hi
        );
        Check { name: name.into(), passed, rate: Some(rate), target: Some(target), quantiles: Vec::new(), detail }
    }

    /// Passes unless the 99% Wilson interval lies wholly above `bound`.
    fn at_most(name: &str, rate: Rate, bound: f64) -> Check {
        let passed = rate.consistent_with_at_most(bound);
        let detail = format!(
            "{}/{} = {:.4}, 99% CI [{:.4}, {:.4}] vs bound {bound:.4}",
            rate.successes, rate.trials, rate.estimate, rate.interval.lo, rate.interval.hi
        );
        Check { name: name.into(), passed, rate: Some(rate), target: Some(bound), quantiles: Vec::new(), detail }
    }

    fn exact(name: &str, violations: u64, cases: u64) -> Check {
        Check {
            name: name.into(),
            passed: violations == 0 && cases > 0,
            rate: Some(Rate::new(cases - violations, cases)),
            target: Some(1.0),
            quantiles: Vec::new(),
            detail: format!("{violations} violations in {cases} cases"),
        }
    }

    fn with_quantiles(mut self, data: &[f64]) -> Check {
        if !data.is_empty() {
            self.quantiles = quantile_summary(data);
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidatorReport {
    pub lemma: String,
    pub seeds: SeedRange,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// The frozen thresholds this report used.
    pub thresholds: Vec<Entry>,
}

impl ValidatorReport {
    fn new(lemma: Lemma, seeds: SeedRange, checks: Vec<Check>, used: &[&str], thr: Option<&ThresholdsFile>) -> Result<ValidatorReport> {
        let thresholds = match thr {
            Some(t) => used.iter().map(|k| t.entry(k).cloned()).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(ValidatorReport { lemma: lemma.name().into(), seeds, passed: checks.iter().all(|c| c.passed), checks, thresholds })
    }

    /// `lemma: PASS|FAIL` followed by one line per check.
    pub fn render(&self) -> String {
        let mut s = format!("{}: {} (seeds {})\n", self.lemma, if self.passed { "PASS" } else { "FAIL" }, self.seeds);
        for c in &self.checks {
            s.push_str(&format!("  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail));
            if !c.quantiles.is_empty() {
                let q: Vec<String> = c.quantiles.iter().map(|(q, v)| format!("q{}={v:.4}", (q * 100.0).round())).collect();
                s.push_str(&format!(" ({})", q.join(" ")));
            }
            s.push('\n');
        }
        s
    }
}

fn par_seeds<T: Send>(seeds: SeedRange, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    seeds.par_iter().map(f).collect()
}

// ---------------------------------------------------------------------------------------
// Sparse nodes get slack.

pub const SLACK_INSTANCE: &str = "gnp:n=3000,p=0.15";
pub const SLACK_INSTANCE_SEED: u64 = 7;
pub const SLACK_MIN_ZETA: f64 = 200.0;

/// (slack, ζ_v) after one SlackGeneration, for every node with ζ_v ≥ 200, per seed.
pub fn slack_samples(seeds: SeedRange) -> Vec<(f64, f64)> {
    let inst = generate(SLACK_INSTANCE, SLACK_INSTANCE_SEED).expect("slack instance");
    let g = &inst.graph;
    let zeta = all_sparsities(g, &EdgeOverlap::compute(g));
    let nodes: Vec<(NodeId, f64)> =
        (0..g.node_count() as NodeId).map(|v| (v, ratio_f64(zeta[v as usize]))).filter(|&(_, z)| z >= SLACK_MIN_ZETA).collect();
    let codec = ColorCodec::raw(inst.color_space);
    par_seeds(seeds, |s| {
        let mut states = initial_states(&inst);
        let mut net = Network::new(g, EngineConfig::congest(g.node_count(), DEFAULT_C_BW, s));
        slack_generation(&mut net, &mut states, &codec, DEFAULT_P_G, None).expect("slack generation");
        nodes.iter().map(|&(v, z)| (states[v as usize].permanent_slack(g.degree(v)) as f64, z)).collect::<Vec<_>>()
    })
    .concat()
}

fn validate_sparse_gets_slack(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let c_slk = thr.get("sparse-gets-slack.c_slk")?;
    let target = thr.get("sparse-gets-slack.rate")?;
    let samples = slack_samples(seeds);
    let ratios: Vec<f64> = samples.iter().map(|(s, z)| s / z).collect();
    let rate = Rate::count(samples.iter().map(|&(s, z)| s >= c_slk * z));
    let check = Check::at_least(&format!("slack >= {c_slk:.4}·zeta"), rate, target).with_quantiles(&ratios);
    ValidatorReport::new(Lemma::SparseGetsSlack, seeds, vec![check], &["sparse-gets-slack.c_slk", "sparse-gets-slack.rate"], Some(thr))
}

// ---------------------------------------------------------------------------------------
// Put-aside sample size.

pub const PUTASIDE_DELTA: usize = 1000;

/// p_s = 1/(c·Δ^{1/3}) with the pipeline's default c.
pub fn putaside_p_s() -> f64 {
    1.0 / (PipelineConfig::default().c_sample * (PUTASIDE_DELTA as f64).cbrt())
}

/// |S_C| of DisjointSample on an isolated K_{Δ+1}, one per seed. The leader never samples
/// itself, so the count is Binomial(Δ, p_s).
pub fn putaside_samples(seeds: SeedRange) -> Vec<f64> {
    let g = named::complete(PUTASIDE_DELTA + 1);
    let core: Vec<NodeId> = (0..=PUTASIDE_DELTA as NodeId).collect();
    let p_s = putaside_p_s();
    par_seeds(seeds, |s| {
        let mut net = Network::new(&g, EngineConfig::local(s));
        let sets = disjoint_sample(&mut net, &[(0, core.clone())], p_s);
        sets[0].kept.len() as f64
    })
}

fn validate_putaside_size(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let min_size = thr.get("putaside-size.min_size")?;
    let target = thr.get("putaside-size.rate")?;
    let sizes = putaside_samples(seeds);
    let half = PUTASIDE_DELTA as f64 * putaside_p_s() / 2.0;
    let checks = vec![
        Check::at_least(&format!("|P_C| >= {min_size} (binomial 1% point)"), Rate::count(sizes.iter().map(|&x| x >= min_size)), target)
            .with_quantiles(&sizes),
        Check::at_least(&format!("|P_C| >= Delta·p_s/2 = {half:.2}"), Rate::count(sizes.iter().map(|&x| x >= half)), target),
    ];
    ValidatorReport::new(Lemma::PutasideSize, seeds, checks, &["putaside-size.min_size", "putaside-size.rate"], Some(thr))
}

// ---------------------------------------------------------------------------------------
// Decolored nodes of the synchronized trial.

pub const DEGRED_K: usize = 21;

/// Two K_21 joined by a perfect matching. With `list`, every node draws a random
/// 22-subset of [44] as its palette.
fn degred_instance(list: bool, seed: u64) -> ColoringInstance {
    let g = named::cliques_with_matching(DEGRED_K);
    if !list {
        return ColoringInstance::delta_plus_one(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1157_0000);
    let space = 2 * (DEGRED_K as u64 + 1);
    let palettes = (0..g.node_count())
        .map(|_| {
            let colors: Vec<u64> = sample(&mut rng, space as usize, DEGRED_K + 1).into_iter().map(|c| c as u64).collect();
            Palette::from_colors(colors).expect("distinct colors")
        })
        .collect();
    ColoringInstance::with_palettes(g, palettes, space, Variant::DeltaPlusOneList).expect("valid list instance")
}

/// Decolored count per clique (two per seed).
pub fn degred_samples(list: bool, seeds: SeedRange) -> Vec<f64> {
    par_seeds(seeds, |s| {
        let inst = degred_instance(list, s);
        let codec = ColorCodec::raw(inst.color_space);
        let mut states = initial_states(&inst);
        let mut net = Network::new(&inst.graph, EngineConfig::congest(inst.n(), DEFAULT_C_BW, s));
        let k = DEGRED_K as NodeId;
        let cliques = [
            SynchClique { leader: 0, members: (0..k).collect(), max_decolored: u32::MAX, excuse_off_palette: false },
            SynchClique { leader: k, members: (k..2 * k).collect(), max_decolored: u32::MAX, excuse_off_palette: false },
        ];
        let out = synch_color_trial(&mut net, &mut states, &cliques, &codec).expect("synch trial");
        out.iter().map(|o| o.decolored as f64).collect::<Vec<_>>()
    })
    .concat()
}

fn validate_degred(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let target = thr.get("degred.rate")?;
    let mut checks = Vec::new();
    for (list, key) in [(false, "degred.max_decolored"), (true, "degred-list.max_decolored")] {
        let t = thr.get(key)?;
        let d = degred_samples(list, seeds);
        let name = format!("{} decolored <= {t}", if list { "list" } else { "non-list" });
        checks.push(Check::at_least(&name, Rate::count(d.iter().map(|&x| x <= t)), target).with_quantiles(&d));
    }
    ValidatorReport::new(Lemma::Degred, seeds, checks, &["degred.max_decolored", "degred-list.max_decolored", "degred.rate"], Some(thr))
}

// ---------------------------------------------------------------------------------------
// Average discrepancy versus the minimum.

const MIN_AVG_INSTANCES: [&str; 3] =
    ["planted-acd:n=400,delta=30,zeta=3,list=2", "planted-acd:n=400,delta=30,zeta=2,anti=0.05,list=4", "clique-union:size=24,k=12,p=0.005,list=3"];

/// (cliques checked, cliques where the average exceeds twice the minimum).
pub fn min_avg_counts(seeds: SeedRange) -> (u64, u64) {
    let per_seed = par_seeds(seeds, |s| {
        let (mut cases, mut bad) = (0u64, 0u64);
        for spec in MIN_AVG_INSTANCES {
            let inst = generate(spec, s).expect("min-avg instance");
            let Ok(acd) = compute_acd(&inst.graph, Ratio::new(1, 5)) else { continue };
            for c in &acd.cliques {
                let eta = discrepancy(&inst.palettes, c);
                let min = *eta.iter().min().expect("nonempty clique");
                let sum: Ratio<i64> = eta.iter().sum();
                cases += 1;
                bad += u64::from(sum > min * Ratio::from_integer(2 * c.len() as i64));
            }
        }
        (cases, bad)
    });
    per_seed.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn validate_min_avg(seeds: SeedRange) -> Result<ValidatorReport> {
    let (cases, bad) = min_avg_counts(seeds);
    ValidatorReport::new(Lemma::MinAvg, seeds, vec![Check::exact("avg eta <= 2·min eta (exact rationals)", bad, cases)], &[], None)
}

// ---------------------------------------------------------------------------------------
// Chromatic slack sandwich.

pub const CHROMATIC_INSTANCE: &str = "planted-acd:n=2000,delta=420,zeta=8,anti=0.01,space=wide";
pub const CHROMATIC_INSTANCE_SEED: u64 = 11;

/// For every clique node and seed: (cs_v, η_v, a_v).
pub fn chromatic_samples(seeds: SeedRange) -> Vec<(f64, f64, f64)> {
    let inst = generate(CHROMATIC_INSTANCE, CHROMATIC_INSTANCE_SEED).expect("chromatic instance");
    let g = &inst.graph;
    let acd = compute_acd(g, Ratio::new(1, 5)).expect("chromatic instance decomposes");
    let mut nodes: Vec<(NodeId, f64, f64)> = Vec::new();
    for (c, members) in acd.cliques.iter().enumerate() {
        let eta = discrepancy(&inst.palettes, members);
        let anti = anti_degrees(g, &acd, c);
        for (k, &v) in members.iter().enumerate() {
            nodes.push((v, ratio_f64(eta[k]), anti[k] as f64));
        }
    }
    let codec = ColorCodec::raw(inst.color_space);
    par_seeds(seeds, |s| {
        let mut states = initial_states(&inst);
        let mut net = Network::new(g, EngineConfig::local(s));
        slack_generation(&mut net, &mut states, &codec, DEFAULT_P_G, None).expect("slack generation");
        nodes.iter().map(|&(v, eta, a)| (states[v as usize].chromatic_slack() as f64, eta, a)).collect::<Vec<_>>()
    })
    .concat()
}

fn validate_chromatic_slack(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let target = thr.get("chromatic-slack.rate")?;
    let samples = chromatic_samples(seeds);
    let p = DEFAULT_P_G;
    let inside = Rate::count(samples.iter().map(|&(cs, eta, a)| p * eta / 9.0 - a <= cs && cs <= 2.0 * p * eta));
    let ratios: Vec<f64> = samples.iter().filter(|s| s.1 > 0.0).map(|&(cs, eta, _)| cs / (p * eta)).collect();
    let eta_min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let mut check = Check::at_least("p_g·eta/9 - a <= cs <= 2·p_g·eta", inside, target).with_quantiles(&ratios);
    check.detail.push_str(&format!("; min eta {eta_min:.1}; quantiles of cs/(p_g·eta)"));
    ValidatorReport::new(Lemma::ChromaticSlack, seeds, vec![check], &["chromatic-slack.rate"], Some(thr))
}

// ---------------------------------------------------------------------------------------
// MultiTrial success.

pub const MULTI_INSTANCE: &str = "gnp:n=2000,p=0.1";
pub const MULTI_INSTANCE_SEED: u64 = 5;
pub const MULTI_ACTIVE: f64 = 0.05;
pub const MULTI_XS: [u64; 4] = [1, 2, 4, 8];

/// Trial outcomes of MultiTrial(x) for each x in `MULTI_XS`, on the same active nodes per
/// seed. Only nodes meeting x ≤ |Ψ_v|/(2·d_active) for the largest x are counted.
/// Returns, per x, a vector of per-seed (failures, trials).
pub fn multi_trial_outcomes(seeds: SeedRange) -> Vec<Vec<(u64, u64)>> {
    let inst = generate(MULTI_INSTANCE, MULTI_INSTANCE_SEED).expect("multi-trial instance");
    let g = &inst.graph;
    let n = g.node_count();
    let codec = ColorCodec::raw(inst.color_space);
    let cfg = PipelineConfig::default();
    let fam = FamilyConfig::calibrated(cfg.bandwidth(n));
    let max_palette = inst.palettes.iter().map(|p| p.len()).max().unwrap_or(1);
    let env = TrialEnv::new(&codec, &fam, inst.color_space, n, max_palette, cfg.family_seed);
    let x_max = *MULTI_XS.last().unwrap();
    let per_seed = par_seeds(seeds, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x6d75_6c74);
        let active: Vec<bool> = (0..n).map(|_| rng.gen_bool(MULTI_ACTIVE)).collect();
        let measured: Vec<NodeId> = (0..n as NodeId)
            .filter(|&v| {
                let d = g.neighbors(v).iter().filter(|&&u| active[u as usize]).count().max(1) as u64;
                active[v as usize] && 2 * x_max * d <= inst.palettes[v as usize].len() as u64
            })
            .collect();
        MULTI_XS
            .iter()
            .map(|&x| {
                let mut states = initial_states(&inst);
                let mut net = Network::new(g, EngineConfig::congest(n, cfg.c_bw, s));
                multi_trial(&mut net, &mut states, &active, x, &env).expect("multi trial");
                let failed = measured.iter().filter(|&&v| !states[v as usize].is_colored()).count() as u64;
                (failed, measured.len() as u64)
            })
            .collect::<Vec<_>>()
    });
    (0..MULTI_XS.len()).map(|i| per_seed.iter().map(|row| row[i]).collect()).collect()
}

/// Fraction of family members that are not (T, P)-good for random T, P ⊆ [Δ+1] with sizes
/// in [αω, βω] ∩ [1, Δ+1], where ω = 6(Δ+1) for the MultiTrial instance.
pub fn family_bad_rate(seeds: SeedRange, draws_per_seed: usize) -> Rate {
    let inst = generate(MULTI_INSTANCE, MULTI_INSTANCE_SEED).expect("multi-trial instance");
    let n = inst.n();
    let pal = inst.palettes.iter().map(|p| p.len()).max().unwrap_or(1);
    let cfg = PipelineConfig::default();
    let family = HashFamily::build(6 * pal as u64, inst.color_space, n, &FamilyConfig::calibrated(cfg.bandwidth(n)), cfg.family_seed)
        .expect("calibrated family");
    let lo = ((ALPHA * family.omega as f64).ceil() as usize).max(1);
    let hi = ((BETA * family.omega as f64).floor() as usize).min(pal);
    let per_seed = par_seeds(seeds, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x6e75);
        (0..draws_per_seed)
            .filter(|_| {
                let member = family.member(rng.gen_range(0..family.fam_size));
                let (t_len, p_len) = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
                let t: Vec<u64> = sample(&mut rng, pal, t_len).into_iter().map(|c| c as u64).collect();
                let p: Vec<u64> = sample(&mut rng, pal, p_len).into_iter().map(|c| c as u64).collect();
                !is_good(&member, &t, &p)
            })
            .count() as u64
    });
    Rate::new(per_seed.iter().sum(), seeds.len() * draws_per_seed as u64)
}

fn validate_multi_trial(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let nu = thr.get("multi-trial.nu")?;
    let outcomes = multi_trial_outcomes(seeds);
    let mut checks = Vec::new();
    let mut success = Vec::new();
    for (i, &x) in MULTI_XS.iter().enumerate() {
        let (f, t) = outcomes[i].iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let per_seed: Vec<f64> = outcomes[i].iter().filter(|o| o.1 > 0).map(|&(f, t)| f as f64 / t as f64).collect();
        let bound = (7.0f64 / 8.0).powi(x as i32) + 2.0 * nu;
        checks.push(Check::at_most(&format!("x={x} failure <= (7/8)^x + 2nu"), Rate::new(f, t), bound).with_quantiles(&per_seed));
        success.push(1.0 - f as f64 / t.max(1) as f64);
    }
    let violations = success.windows(2).filter(|w| w[1] < w[0]).count() as u64;
    let mut mono = Check::exact("success at 2x >= success at x (paired seeds)", violations, (success.len() - 1) as u64);
    mono.detail = format!("success by x: {}", success.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>().join(", "));
    checks.push(mono);
    ValidatorReport::new(Lemma::MultiTrial, seeds, checks, &["multi-trial.nu"], Some(thr))
}

// ---------------------------------------------------------------------------------------
// LowDegreeSample and Transversal.

/// `parts` independent sets of `size` nodes; random edges between different parts, every
/// degree at most `max_deg`. Node ids of part i are `i*size..(i+1)*size`.
pub fn partitioned_graph(parts: usize, size: usize, max_deg: usize, rng: &mut ChaCha8Rng) -> (Graph, Vec<Vec<NodeId>>) {
    let n = parts * size;
    let mut deg = vec![0usize; n];
    let mut edges = std::collections::HashSet::new();
    for _ in 0..n * max_deg {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u / size == v / size || deg[u] >= max_deg || deg[v] >= max_deg {
            continue;
        }
        if edges.insert((u.min(v) as NodeId, u.max(v) as NodeId)) {
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    let mut list: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
    list.sort_unstable();
    let parts = (0..parts).map(|i| (i * size..(i + 1) * size).map(|v| v as NodeId).collect()).collect();
    (Graph::from_edges_dedup(n, list), parts)
}

pub const LOW_DEGREE_SHAPE: (usize, usize, usize) = (8, 1000, 16);
pub const LOW_DEGREE_Q: f64 = 4.0;

/// Per seed: the smallest |P'∩I_i| · 8q / |P∩I_i| over the parts, with P = V_H.
pub fn low_degree_ratios(seeds: SeedRange) -> Vec<f64> {
    let (t, size, b) = LOW_DEGREE_SHAPE;
    par_seeds(seeds, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x4c44_5300);
        let (h, parts) = partitioned_graph(t, size, b, &mut rng);
        let all = vec![true; h.node_count()];
        let kept = low_degree_sample(&h, &all, LOW_DEGREE_Q, b as f64, &mut |_, p| rng.gen_bool(p));
        parts
            .iter()
            .map(|part| part.iter().filter(|&&v| kept[v as usize]).count() as f64 * 8.0 * LOW_DEGREE_Q / part.len() as f64)
            .fold(f64::INFINITY, f64::min)
    })
}

fn validate_low_degree(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let target = thr.get("low-degree.rate")?;
    let r = low_degree_ratios(seeds);
    let check = Check::at_least("every part keeps |P∩I|/(8q)", Rate::count(r.iter().map(|&x| x >= 1.0)), target).with_quantiles(&r);
    ValidatorReport::new(Lemma::LowDegree, seeds, vec![check], &["low-degree.rate"], Some(thr))
}

pub const TRANSVERSAL_SHAPE: (usize, usize, usize) = (4, 2560, 16);
pub const TRANSVERSAL_M: u32 = 1;

/// Per seed: (output independent in H, smallest |P∩I_i|·(4q)^{m+1}/|I_i|).
pub fn transversal_outcomes(seeds: SeedRange) -> Vec<(bool, f64)> {
    let (t, size, b) = TRANSVERSAL_SHAPE;
    par_seeds(seeds, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5452_4e53);
        let (h, parts) = partitioned_graph(t, size, b, &mut rng);
        let all = vec![true; h.node_count()];
        let run = transversal(&h, &all, TRANSVERSAL_M, &mut |_, p| rng.gen_bool(p));
        let out = run.output();
        let independent = h.edges().all(|(u, v)| !(out[u as usize] && out[v as usize]));
        let scale = (4.0 * run.q).powi(TRANSVERSAL_M as i32 + 1);
        let ratio = parts
            .iter()
            .map(|part| part.iter().filter(|&&v| out[v as usize]).count() as f64 * scale / part.len() as f64)
            .fold(f64::INFINITY, f64::min);
        (independent, ratio)
    })
}

fn validate_transversal(seeds: SeedRange, thr: &ThresholdsFile) -> Result<ValidatorReport> {
    let target = thr.get("transversal.rate")?;
    let o = transversal_outcomes(seeds);
    let dependent = o.iter().filter(|x| !x.0).count() as u64;
    let ratios: Vec<f64> = o.iter().map(|x| x.1).collect();
    let checks = vec![
        Check::exact("output is independent in H", dependent, o.len() as u64),
        Check::at_least("every part keeps |I|/(4q)^(m+1)", Rate::count(ratios.iter().map(|&r| r >= 1.0)), target).with_quantiles(&ratios),
    ];
    ValidatorReport::new(Lemma::Transversal, seeds, checks, &["transversal.rate"], Some(thr))
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Lower `q`-quantile of `data`, for calibration.
pub fn lower_quantile(data: &[f64], q: f64) -> f64 {
    quantile(data, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_kebab_case() {
        let mut names: Vec<&str> = Lemma::ALL.iter().map(|l| l.name()).collect();
        for l in Lemma::ALL {
            assert_eq!(serde_json::to_value(l).unwrap(), serde_json::json!(l.name()));
        }
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Lemma::ALL.len());
    }

    #[test]
    fn partitioned_graph_respects_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (h, parts) = partitioned_graph(3, 50, 5, &mut rng);
        assert_eq!(h.node_count(), 150);
        assert!(h.max_degree() <= 5);
        assert!(h.edges().all(|(u, v)| u / 50 != v / 50));
        assert_eq!(parts[2], (100..150).collect::<Vec<NodeId>>());
        assert!(h.edge_count() > 150);
    }

    #[test]
    fn list_degred_instance_has_list_palettes() {
        let inst = degred_instance(true, 3);
        assert_eq!(inst.palettes.len(), 42);
        assert!(inst.palettes.iter().all(|p| p.len() == 22 && p.max_color().unwrap() < 44));
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn min_avg_holds_on_a_few_seeds() {
        let (cases, bad) = min_avg_counts(SeedRange::new(0, 3));
        assert!(cases > 10);
        assert_eq!(bad, 0);
    }

    #[test]
    fn seeded_measurements_repeat() {
        let s = SeedRange::new(0, 4);
        assert_eq!(degred_samples(false, s), degred_samples(false, s));
        assert_eq!(low_degree_ratios(s), low_degree_ratios(s));
    }
}
