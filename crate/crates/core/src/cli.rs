//! Command-line front end. Every subcommand renders its outputs in memory
//! and writes them only after the whole stage succeeded.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::{synth_generate, write_csv, Schema, SynthParams};
use crate::error::{Error, Result, Stage};
use crate::evaluation::{
    assemble_report, evaluate_candidate, prefilter_stage, prepare, render_outputs, run_experiment,
    trace_stage, write_outputs, Metrics, OutputFile, Prepared,
};
use crate::features::FeatureSet;
use crate::selectors::{CorrelationReport, EliminationTrace, SelectorKind};
use crate::seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ensemble-fs", version, about = "Two-round ensemble feature selection")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the whole pipeline and write the report set.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic train/test pair and its schema.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        informative: usize,
        #[arg(long, default_value_t = 12)]
        noise: usize,
        #[arg(long, default_value_t = 2)]
        redundant: usize,
        #[arg(long, default_value_t = 0.05)]
        flip: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Round-one correlation pre-filter; writes a JSON artifact.
    Prefilter {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Elimination traces over a pre-filter artifact; one JSON per selector.
    Trace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        prefilter: PathBuf,
        /// Selectors to run (defaults to the configured roster).
        #[arg(long = "selector")]
        selectors: Vec<SelectorKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combine trace artifacts, evaluate candidates and write the report set.
    Combine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        prefilter: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train/test scores of one feature set for every configured learner.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated feature names (defaults to all numeric features).
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Output of the `prefilter` subcommand, consumed by `trace` and `combine`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefilterArtifact {
    pub master_seed: u64,
    pub train_provenance: String,
    pub feature_names: Vec<String>,
    pub report: CorrelationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EvaluateOutput {
    learner: String,
    features: Vec<String>,
    metrics: Option<Metrics>,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to `stderr`.
pub fn run_command<I, S>(argv: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            let _ = writeln!(stderr, "error: --jobs must be >= 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return EXIT_INTERNAL;
        }
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        pool.install(|| execute(cli.command))
    }));
    match outcome {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(_) => {
            let _ = writeln!(stderr, "error: internal failure");
            EXIT_INTERNAL
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn tag<T>(stage: Stage, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        tagged @ Error::Stage { .. } => tagged,
        other => Error::Stage {
            stage,
            source: Box::new(other),
        },
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn load_prefilter(path: &Path, config: &RunConfig, p: &Prepared) -> Result<CorrelationReport> {
    let art: PrefilterArtifact = serde_json::from_str(&read_text(path)?)?;
    let names: Vec<String> = p.train.columns().iter().map(|c| c.name.clone()).collect();
    if art.master_seed != config.seed || art.feature_names != names {
        return Err(Error::invalid(format!(
            "{} was produced from a different configuration or dataset",
            path.display()
        )));
    }
    Ok(art.report)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let mut rendered: Vec<(PathBuf, Vec<OutputFile>)> = Vec::new();
            for r in 0..cfg.repeats {
                let report = run_experiment(&cfg.for_repeat(r))?;
                let dir = if cfg.repeats == 1 {
                    out.clone()
                } else {
                    out.join(format!("repeat_{r}"))
                };
                rendered.push((dir, tag(Stage::Emit, render_outputs(&report))?));
            }
            for (dir, files) in &rendered {
                tag(Stage::Emit, write_outputs(dir, files))?;
            }
            Ok(())
        }
        Command::Synth {
            out,
            rows,
            informative,
            noise,
            redundant,
            flip,
            seed,
        } => {
            let params = SynthParams {
                n_rows: rows,
                n_informative: informative,
                n_noise: noise,
                n_redundant: redundant,
                flip_prob: flip,
                seed,
            };
            let (train, test) = synth_generate(&params)?;
            let schema = Schema::for_dataset(&train, "label").to_text();
            std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
            write_csv(&train, out.join("train.csv"), "label")?;
            write_csv(&test, out.join("test.csv"), "label")?;
            let schema_path = out.join("schema.txt");
            std::fs::write(&schema_path, schema)
                .map_err(|e| Error::io(schema_path.display().to_string(), e))
        }
        Command::Prefilter { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let p = prepare(&cfg)?;
            let report = prefilter_stage(&p, &cfg)?;
            let art = PrefilterArtifact {
                master_seed: cfg.seed,
                train_provenance: p.train.provenance().to_string(),
                feature_names: p.train.columns().iter().map(|c| c.name.clone()).collect(),
                report,
            };
            let text = serde_json::to_string_pretty(&art)?;
            write_file(&out, &text)
        }
        Command::Trace {
            config,
            prefilter,
            selectors,
            out,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let p = prepare(&cfg)?;
            let report = tag(Stage::Trace, load_prefilter(&prefilter, &cfg, &p))?;
            let roster = if selectors.is_empty() {
                cfg.selectors.clone()
            } else {
                selectors
            };
            let traces = roster
                .iter()
                .map(|&k| trace_stage(&p, &report.kept, k, &cfg))
                .collect::<Result<Vec<EliminationTrace>>>()?;
            let files = traces
                .iter()
                .map(|t| Ok((format!("trace_{}.json", t.selector), t.to_json()?)))
                .collect::<Result<Vec<_>>>()?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
            for (name, text) in files {
                write_file(&out.join(name), &text)?;
            }
            Ok(())
        }
        Command::Combine {
            config,
            prefilter,
            traces,
            out,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let p = prepare(&cfg)?;
            let report = tag(Stage::Combine, load_prefilter(&prefilter, &cfg, &p))?;
            let traces = tag(
                Stage::Combine,
                traces
                    .iter()
                    .map(|t| EliminationTrace::from_json(&read_text(t)?))
                    .collect::<Result<Vec<_>>>(),
            )?;
            let full = assemble_report(&cfg, &p, &report, traces)?;
            let files = tag(Stage::Emit, render_outputs(&full))?;
            tag(Stage::Emit, write_outputs(&out, &files))
        }
        Command::Evaluate {
            config,
            features,
            out,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let p = prepare(&cfg)?;
            let set: FeatureSet = if features.is_empty() {
                if cfg.onehot_augment {
                    p.selection.union(&p.onehot)
                } else {
                    p.selection.clone()
                }
            } else {
                features
                    .iter()
                    .map(|n| {
                        p.train
                            .id_of(n.trim())
                            .ok_or_else(|| Error::Config(format!("unknown feature `{n}`")))
                    })
                    .collect::<Result<_>>()?
            };
            let mut results = Vec::new();
            for &kind in &cfg.learners {
                let learner = cfg
                    .learner(kind)
                    .with_seed(seed::derive_str(cfg.seed, &format!("eval:{}", kind.as_str())));
                let metrics = tag(
                    Stage::Evaluate,
                    evaluate_candidate(&p.train, &p.test, &set, &learner),
                )?;
                results.push(EvaluateOutput {
                    learner: kind.as_str().to_string(),
                    features: p.train.names(&set),
                    metrics,
                });
            }
            write_file(&out, &serde_json::to_string_pretty(&results)?)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
