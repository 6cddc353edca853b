//! Command-line front end.
//!
//! Pipeline settings resolve as flag, then `--config` TOML file, then the
//! built-in default.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::alignment::{self, AlignMethod, AlignedSet};
use crate::classifier::cv::{cross_validate, CvConfig, Dataset, GrammarClassifier, PipelineConfig};
use crate::classifier::{Encoding, KernelKind, SvmParams};
use crate::data_io::{self, synth, Corpus, SynthKind, SynthSpec};
use crate::dcc::{self, ActionGrammar, Scope};
use crate::frame::{FrameConfig, FrameMode};
use crate::trajectory::Trajectory;
use crate::Error;

/// Default for `--in` when the flag is absent.
pub const DATA_DIR_ENV: &str = "ACTGRAM_DATA_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "actgram",
    version,
    about = "Action-grammar encoding and classification of 3D trajectories"
)]
pub struct Cli {
    /// TOML file supplying defaults for pipeline and protocol flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Write one grammar file per trial (or per behavior).
    Encode(CorpusArgs),
    /// Encode and length-align a corpus, writing the aligned grammars.
    Align(CorpusArgs),
    /// Render aligned grammars as a binary graymap.
    Colormap(CorpusArgs),
    /// Fit a classifier on a labeled corpus and save it as JSON.
    Train(CorpusArgs),
    /// Label trials with a saved classifier.
    Predict(PredictArgs),
    /// Repeated k-fold cross-validation; prints a summary and writes the report.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Trial CSV or directory of trial CSVs.
    #[arg(long = "in", env = DATA_DIR_ENV, value_name = "PATH")]
    pub input: PathBuf,
}

#[derive(Debug, Default, Args)]
pub struct PipelineArgs {
    /// Frame construction: ff or aff.
    #[arg(long)]
    pub mode: Option<FrameMode>,
    /// DCC base p (1..=4).
    #[arg(long)]
    pub base: Option<u8>,
    /// Length alignment: cut or resample.
    #[arg(long = "align")]
    pub alignment: Option<AlignMethod>,
    /// linear, linear_dual, polynomial or rbf.
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    /// integer or onehot.
    #[arg(long)]
    pub encoding: Option<Encoding>,
    /// task or behavior.
    #[arg(long)]
    pub scope: Option<Scope>,
    /// SVM soft-margin constant.
    #[arg(long = "c")]
    pub c: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct ProtocolArgs {
    /// Seed for fold assignment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Smallest fold count.
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Largest fold count; capped at the number of trials.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Shuffled repeats per fold count.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// smooth_approach, sharp_contact or controlled_failure.
    #[arg(long)]
    pub kind: SynthKind,
    /// Number of trials.
    #[arg(long = "n", default_value_t = 20)]
    pub n_trials: usize,
    /// Position noise standard deviation, in corpus units.
    #[arg(long, default_value_t = synth::DEFAULT_NOISE_SIGMA)]
    pub noise: f64,
    /// Generator seed; falls back to the config file, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[command(flatten)]
    pub input: InputArg,
    /// Output directory (encode, align) or file (colormap, train).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: InputArg,
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// task or behavior.
    #[arg(long)]
    pub scope: Option<Scope>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArg,
    /// Report file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<String>,
    pub base: Option<u8>,
    #[serde(alias = "alignment")]
    pub align: Option<String>,
    pub kernel: Option<String>,
    pub encoding: Option<String>,
    pub scope: Option<String>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    #[serde(alias = "k-min")]
    pub k_min: Option<usize>,
    #[serde(alias = "k-max")]
    pub k_max: Option<usize>,
    pub repeats: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: FrameMode,
    pub base_p: u8,
    pub alignment: AlignMethod,
    pub kernel: KernelKind,
    pub encoding: Encoding,
    pub scope: Scope,
    pub c: f64,
    pub seed: u64,
    pub k_min: usize,
    pub k_max: usize,
    pub repeats: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        let cv = CvConfig::default();
        RunConfig {
            mode: pipeline.mode,
            base_p: pipeline.base_p,
            alignment: pipeline.alignment,
            kernel: pipeline.svm.kernel,
            encoding: pipeline.encoding,
            scope: Scope::Task,
            c: pipeline.svm.c,
            seed: cv.seed,
            k_min: cv.k_min,
            k_max: cv.k_max,
            repeats: cv.repeats,
        }
    }
}

fn pick<T: FromStr<Err = String>>(
    flag: Option<T>,
    file: Option<&String>,
    default: T,
    key: &str,
) -> Result<T, Failure> {
    match (flag, file) {
        (Some(v), _) => Ok(v),
        (None, Some(raw)) => raw
            .parse()
            .map_err(|e| Failure::Usage(format!("config key {key}: {e}"))),
        (None, None) => Ok(default),
    }
}

impl RunConfig {
    pub fn resolve(
        pipeline: &PipelineArgs,
        protocol: &ProtocolArgs,
        file: &FileConfig,
    ) -> Result<Self, Failure> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            mode: pick(pipeline.mode, file.mode.as_ref(), d.mode, "mode")?,
            base_p: pipeline.base.or(file.base).unwrap_or(d.base_p),
            alignment: pick(
                pipeline.alignment,
                file.align.as_ref(),
                d.alignment,
                "align",
            )?,
            kernel: pick(pipeline.kernel, file.kernel.as_ref(), d.kernel, "kernel")?,
            encoding: pick(
                pipeline.encoding,
                file.encoding.as_ref(),
                d.encoding,
                "encoding",
            )?,
            scope: pick(pipeline.scope, file.scope.as_ref(), d.scope, "scope")?,
            c: pipeline.c.or(file.c).unwrap_or(d.c),
            seed: protocol.seed.or(file.seed).unwrap_or(d.seed),
            k_min: protocol.k_min.or(file.k_min).unwrap_or(d.k_min),
            k_max: protocol.k_max.or(file.k_max).unwrap_or(d.k_max),
            repeats: protocol.repeats.or(file.repeats).unwrap_or(d.repeats),
        };
        if !(1..=4).contains(&cfg.base_p) {
            return Err(Failure::Usage(format!(
                "--base must be in 1..=4, got {}",
                cfg.base_p
            )));
        }
        if !(cfg.c > 0.0 && cfg.c.is_finite()) {
            return Err(Failure::Usage(format!(
                "--c must be positive, got {}",
                cfg.c
            )));
        }
        if cfg.k_min < 2 || cfg.k_max < cfg.k_min || cfg.repeats == 0 {
            return Err(Failure::Usage(format!(
                "need 2 <= k-min <= k-max and repeats >= 1, got k {}..={} x {}",
                cfg.k_min, cfg.k_max, cfg.repeats
            )));
        }
        Ok(cfg)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            mode: self.mode,
            base_p: self.base_p,
            alignment: self.alignment,
            encoding: self.encoding,
            frame: FrameConfig::default(),
            svm: SvmParams {
                c: self.c,
                ..SvmParams::with_kernel(self.kernel)
            },
        }
    }

    pub fn protocol(&self) -> CvConfig {
        CvConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            repeats: self.repeats,
            seed: self.seed,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
}

impl Failure {
    /// 1 usage, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Run(e) => match e {
                Error::InvalidBase(_) | Error::InvalidSpec(_) => 1,
                Error::DimensionMismatch { .. } | Error::Incompatible(_) | Error::NonFinite(_) => 3,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let none = ProtocolArgs::default();
    match &cli.command {
        Command::Synth(a) => cmd_synth(a, &file),
        Command::Encode(a) => cmd_encode(a, &RunConfig::resolve(&a.pipeline, &none, &file)?),
        Command::Align(a) => cmd_align(a, &RunConfig::resolve(&a.pipeline, &none, &file)?),
        Command::Colormap(a) => cmd_colormap(a, &RunConfig::resolve(&a.pipeline, &none, &file)?),
        Command::Train(a) => cmd_train(a, &RunConfig::resolve(&a.pipeline, &none, &file)?),
        Command::Predict(a) => {
            let pipeline = PipelineArgs {
                scope: a.scope,
                ..PipelineArgs::default()
            };
            cmd_predict(a, &RunConfig::resolve(&pipeline, &none, &file)?)
        }
        Command::Evaluate(a) => {
            cmd_evaluate(a, &RunConfig::resolve(&a.pipeline, &a.protocol, &file)?)
        }
    }
}

fn dataset_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

fn load(input: &InputArg) -> Result<Corpus, Failure> {
    Ok(data_io::load_corpus(
        &input.input,
        &dataset_id(&input.input),
    )?)
}

fn grammar_stem(g: &ActionGrammar) -> String {
    match &g.behavior_label {
        Some(b) => format!("{}.{b}", g.source_trial),
        None => g.source_trial.clone(),
    }
}

fn write_grammars(grammars: &[ActionGrammar], dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for g in grammars {
        data_io::save_grammar(&g.symbols, &dir.join(format!("{}.txt", grammar_stem(g))))?;
    }
    Ok(())
}

fn encode_corpus(corpus: &Corpus, cfg: &RunConfig) -> Result<Vec<ActionGrammar>, Failure> {
    let mut out = Vec::new();
    for t in &corpus.trajectories {
        out.extend(dcc::segment_and_encode(
            t,
            cfg.mode,
            cfg.base_p,
            cfg.scope == Scope::Behavior,
            &FrameConfig::default(),
        )?);
    }
    Ok(out)
}

fn aligned_corpus(corpus: &Corpus, cfg: &RunConfig) -> Result<AlignedSet, Failure> {
    if cfg.alignment == AlignMethod::Cut {
        return Ok(alignment::align_cut(encode_corpus(corpus, cfg)?)?);
    }
    // resampling works on curves, so behavior windows become standalone curves
    let mut curves = Vec::new();
    let mut origin = Vec::new();
    for t in &corpus.trajectories {
        if cfg.scope == Scope::Task {
            curves.push(t.clone());
            origin.push((
                t.trial_id().to_owned(),
                None,
                t.task_label().map(str::to_owned),
            ));
            continue;
        }
        if t.behaviors().is_empty() {
            return Err(Error::MissingBoundaries(format!(
                "trial {} has no behavior boundaries",
                t.trial_id()
            ))
            .into());
        }
        for b in t.behaviors() {
            curves.push(Trajectory::from_points(
                format!("{}.{}", t.trial_id(), b.label),
                t.segment_points(b).to_vec(),
            )?);
            origin.push((
                t.trial_id().to_owned(),
                Some(b.label.clone()),
                t.task_label().map(str::to_owned),
            ));
        }
    }
    let mut set =
        alignment::align_resample(&curves, cfg.mode, cfg.base_p, &FrameConfig::default())?;
    for (g, (trial, behavior, task)) in set.grammars.iter_mut().zip(origin) {
        g.scope = cfg.scope;
        g.source_trial = trial;
        g.behavior_label = behavior;
        g.task_label = task;
    }
    Ok(set)
}

fn labeled_dataset(corpus: &Corpus, scope: Scope) -> Result<Dataset, Failure> {
    Ok(match scope {
        Scope::Task => Dataset::task_level(&corpus.dataset_id, &corpus.trajectories)?,
        Scope::Behavior => Dataset::behavior_level(&corpus.dataset_id, &corpus.trajectories)?,
    })
}

fn cmd_synth(a: &SynthArgs, file: &FileConfig) -> Result<(), Failure> {
    let seed = a.seed.or(file.seed).unwrap_or_default();
    let corpus = data_io::generate_synthetic(&SynthSpec::new(a.kind, a.n_trials, a.noise, seed))?;
    corpus.write_dir(&a.out)?;
    println!(
        "wrote {} {} trials to {}",
        corpus.len(),
        a.kind,
        a.out.display()
    );
    Ok(())
}

fn cmd_encode(a: &CorpusArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load(&a.input)?;
    let grammars = encode_corpus(&corpus, cfg)?;
    write_grammars(&grammars, &a.out)?;
    println!("wrote {} grammars to {}", grammars.len(), a.out.display());
    Ok(())
}

fn cmd_align(a: &CorpusArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load(&a.input)?;
    let set = aligned_corpus(&corpus, cfg)?;
    write_grammars(&set.grammars, &a.out)?;
    print!(
        "aligned {} grammars to length {} ({})",
        set.grammars.len(),
        set.length(),
        set.method
    );
    match set.unit_length {
        Some(u) => println!(", unit length {u}"),
        None => println!(),
    }
    Ok(())
}

fn cmd_colormap(a: &CorpusArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load(&a.input)?;
    let set = aligned_corpus(&corpus, cfg)?;
    let map = data_io::emit_colormap(&set, &a.out)?;
    println!(
        "wrote {}x{} graymap ({} levels) to {}",
        map.width,
        map.height,
        map.levels,
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: &CorpusArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load(&a.input)?;
    let dataset = labeled_dataset(&corpus, cfg.scope)?;
    let samples: Vec<_> = dataset.samples.iter().collect();
    let model = GrammarClassifier::fit(&samples, &cfg.pipeline())?;
    data_io::save_model(&model, &a.out)?;
    println!(
        "trained {} on {} samples (grammar length {}, classes {}) -> {}",
        cfg.kernel,
        samples.len(),
        model.grammar_length,
        model.model.classes.join("/"),
        a.out.display()
    );
    Ok(())
}

fn cmd_predict(a: &PredictArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let model = data_io::load_model(&a.model)?;
    let corpus = load(&a.input)?;
    let mut out = String::new();
    for t in &corpus.trajectories {
        if cfg.scope == Scope::Task {
            let p = model.predict(t.points())?;
            out.push_str(&format!(
                "{}\t{}\t{:.6}\n",
                t.trial_id(),
                p.label,
                p.decision
            ));
            continue;
        }
        for b in t.behaviors() {
            let p = model.predict(t.segment_points(b))?;
            out.push_str(&format!(
                "{}.{}\t{}\t{:.6}\n",
                t.trial_id(),
                b.label,
                p.label,
                p.decision
            ));
        }
    }
    // a reader that stops early (`| head`) is not an error
    match std::io::stdout().lock().write_all(out.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Error::io("<stdout>", e).into())
        }
        _ => Ok(()),
    }
}

fn cmd_evaluate(a: &EvaluateArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load(&a.input)?;
    let dataset = labeled_dataset(&corpus, cfg.scope)?;
    let report = cross_validate(&dataset, &cfg.pipeline(), &cfg.protocol())?;
    print!("{}", report.table());
    data_io::save_report(&report, &a.out)?;
    println!("report written to {}", a.out.display());
    Ok(())
}
