use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dcolor::graph::{generate, io};
use dcolor::pipeline::Mode;
use dcolor_bench::acceptance::{Acceptance, Profile};
use dcolor_bench::calibrate::{calibrate, CalibrationPlan};
use dcolor_bench::grid::{default_out_dir, run_grid, ExperimentSpec, SeedRange};
use dcolor_bench::thresholds::{self, ThresholdsFile};
use dcolor_bench::validators::Lemma;

#[derive(Parser)]
#[command(name = "dcolor", version, about = "Run, validate and calibrate the distributed coloring pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Local,
    Congest,
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineMode {
    HighDegree,
    ShatteringAuto,
}

#[derive(Subcommand)]
enum Command {
    /// Color every (generator, seed) pair and write runs.jsonl plus summary.csv.
    Run {
        /// Generator spec, e.g. `gnp:n=1000,p=0.01`; repeatable. Templates use `{n}`.
        #[arg(long = "gen")]
        generators: Vec<String>,
        /// Experiment spec file (JSON); --gen/--sizes/--seeds are added on top.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Sizes substituted into `{n}` templates.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        seeds: Option<SeedRange>,
        #[arg(long, value_enum)]
        mode: Option<Model>,
        #[arg(long, value_enum)]
        pipeline_mode: Option<PipelineMode>,
        /// Pipeline config overrides as a JSON object.
        #[arg(long)]
        config: Option<String>,
        /// Output directory (default: $DCOLOR_OUT_DIR or ./results).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_runs: Option<u64>,
    },
    /// Run lemma validators against the frozen thresholds.
    Validate {
        /// Validator name, or `all`.
        #[arg(long, default_value = "all")]
        lemma: String,
        #[arg(long)]
        seeds: Option<SeedRange>,
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Also write the reports as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure every calibrated threshold and write the frozen file.
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the edge list of a generated instance.
    Gen {
        #[arg(long = "gen")]
        generator: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run acceptance criteria.
    Accept {
        /// Criterion 1..=7; all when omitted.
        #[arg(long)]
        criterion: Option<u8>,
        #[arg(long, value_enum, default_value_t = Profile::Quick)]
        profile: Profile,
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Print per-cell and per-check details.
        #[arg(long)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { generators, spec, sizes, seeds, mode, pipeline_mode, config, out, max_runs } => {
            let mut s = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str::<ExperimentSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => ExperimentSpec::new(Vec::new(), Vec::new(), SeedRange::new(0, 1)),
            };
            s.generators.extend(generators);
            s.sizes.extend(sizes);
            if s.generators.is_empty() {
                bail!("no generators given (use --gen or --spec)");
            }
            if let Some(r) = seeds {
                s.seeds = r;
            }
            if let Some(m) = max_runs {
                s.max_runs = m;
            }
            let mut overrides = match config {
                Some(c) => serde_json::from_str(&c).context("parsing --config")?,
                None => s.config.clone(),
            };
            if overrides.is_null() {
                overrides = serde_json::json!({});
            }
            let obj = overrides.as_object_mut().context("--config must be a JSON object")?;
            if let Some(m) = mode {
                obj.insert("model".into(), serde_json::json!(match m {
                    Model::Local => "local",
                    Model::Congest => "congest",
                }));
            }
            if let Some(m) = pipeline_mode {
                let m = match m {
                    PipelineMode::HighDegree => Mode::HighDegree,
                    PipelineMode::ShatteringAuto => Mode::ShatteringAuto,
                };
                obj.insert("mode".into(), serde_json::to_value(m)?);
            }
            s.config = overrides;
            let dir = out.or(s.out.clone()).unwrap_or_else(default_out_dir);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let result = run_grid(&s, Some(&dir.join("runs.jsonl")))?;
            result.write_csv(&dir.join("summary.csv"))?;
            for c in &result.summaries {
                println!(
                    "{}: {}/{} proper, rounds {}..{}, max bits {}, mean |Bad| {:.1}",
                    c.instance, c.proper, c.runs, c.rounds_min, c.rounds_max, c.max_bits, c.bad_mean
                );
            }
            for e in &result.errors {
                eprintln!("error: {e}");
            }
            println!("{} runs in {:.1}s, output in {}", result.records.len(), result.elapsed.as_secs_f64(), dir.display());
            let mut ok = result.all_proper();
            if !s.validators.is_empty() {
                let thr = ThresholdsFile::load_calibrated(&thresholds::default_path())?;
                for lemma in &s.validators {
                    let report = lemma.validate(lemma.default_seeds(), &thr)?;
                    print!("{}", report.render());
                    ok &= report.passed;
                }
            }
            Ok(ok)
        }
        Command::Validate { lemma, seeds, thresholds: path, out } => {
            let thr = ThresholdsFile::load_calibrated(&path.unwrap_or_else(thresholds::default_path))?;
            let lemmas: Vec<Lemma> = if lemma == "all" {
                Lemma::ALL.to_vec()
            } else {
                vec![Lemma::from_str(&lemma, true).map_err(|e| anyhow::anyhow!("unknown lemma '{lemma}': {e}"))?]
            };
            let mut ok = true;
            let mut reports = Vec::new();
            for l in lemmas {
                let report = l.validate(seeds.unwrap_or_else(|| l.default_seeds()), &thr)?;
                print!("{}", report.render());
                ok &= report.passed;
                reports.push(report);
            }
            if let Some(p) = out {
                std::fs::write(&p, serde_json::to_string_pretty(&reports)? + "\n").with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(ok)
        }
        Command::Calibrate { out } => {
            let path = out.unwrap_or_else(thresholds::default_path);
            let file = calibrate(&CalibrationPlan::default())?;
            std::fs::write(&path, file.to_json()).with_context(|| format!("writing {}", path.display()))?;
            for e in &file.entries {
                println!("{} = {} ({})", e.key, e.value, e.source);
            }
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Gen { generator, seed, out } => {
            let inst = generate(&generator, seed)?;
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    io::write_edge_list(&inst.graph, std::io::BufWriter::new(f))?;
                }
                None => io::write_edge_list(&inst.graph, std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Accept { criterion, profile, thresholds: path, verbose } => {
            let thr = ThresholdsFile::load_calibrated(&path.unwrap_or_else(thresholds::default_path))?;
            let acc = Acceptance::new(profile, thr);
            println!("acceptance profile: {profile}");
            let results = match criterion {
                Some(c) => vec![acc.run(c)?],
                None => acc.run_all()?,
            };
            for r in &results {
                println!("{r}");
                if verbose || !r.passed {
                    for d in &r.details {
                        println!("    {d}");
                    }
                }
            }
            Ok(results.iter().all(|r| r.passed))
        }
    }
}
