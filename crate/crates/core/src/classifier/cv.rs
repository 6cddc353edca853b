//! Repeated stratified k-fold evaluation of the full grammar pipeline.
//!
//! Each `(k, repeat)` cell shuffles with its own ChaCha stream derived from
//! `(seed, k, repeat)`, so cells can run in any order or in parallel and still
//! produce the same report.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict, train_svm, Encoding, FeatureVector, SvmModel, SvmParams};
use crate::alignment::{self, fit_length, AlignMethod};
use crate::dcc::{self, DirectionSet, Scope, Symbol};
use crate::error::{Error, Result};
use crate::frame::{FrameConfig, FrameMode};
use crate::trajectory::{Point3, Trajectory};

/// One labeled curve: a whole trial, or one behavior window of a trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub trial_id: String,
    pub label: String,
    pub points: Vec<Point3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub scope: Scope,
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// One sample per trial, labeled with the trial's task outcome.
    pub fn task_level(id: impl Into<String>, trajectories: &[Trajectory]) -> Result<Self> {
        let samples = trajectories
            .iter()
            .map(|t| {
                let label = t.task_label().ok_or_else(|| {
                    Error::InsufficientData(format!("trial {} has no task label", t.trial_id()))
                })?;
                Ok(Sample {
                    trial_id: t.trial_id().to_owned(),
                    label: label.to_owned(),
                    points: t.points().to_vec(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Dataset {
            id: id.into(),
            scope: Scope::Task,
            samples,
        })
    }

    /// One sample per behavior window, labeled with the behavior name.
    pub fn behavior_level(id: impl Into<String>, trajectories: &[Trajectory]) -> Result<Self> {
        let mut samples = Vec::new();
        for t in trajectories {
            if t.behaviors().is_empty() {
                return Err(Error::MissingBoundaries(format!(
                    "trial {} has no behavior boundaries",
                    t.trial_id()
                )));
            }
            for b in t.behaviors() {
                samples.push(Sample {
                    trial_id: format!("{}#{}", t.trial_id(), b.label),
                    label: b.label.clone(),
                    points: t.segment_points(b).to_vec(),
                });
            }
        }
        Ok(Dataset {
            id: id.into(),
            scope: Scope::Behavior,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.samples.iter().map(|s| s.label.as_str()).collect()
    }
}

/// Everything between raw points and the SVM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: FrameMode,
    pub base_p: u8,
    pub alignment: AlignMethod,
    pub encoding: Encoding,
    pub frame: FrameConfig,
    pub svm: SvmParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: FrameMode::Ff,
            base_p: 2,
            alignment: AlignMethod::Cut,
            encoding: Encoding::Integer,
            frame: FrameConfig::default(),
            svm: SvmParams::default(),
        }
    }
}

/// A trained pipeline: fixed grammar length, optional resampling step, model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrammarClassifier {
    pub pipeline: PipelineConfig,
    pub grammar_length: usize,
    pub model: SvmModel,
}

impl GrammarClassifier {
    pub fn fit(samples: &[&Sample], pipeline: &PipelineConfig) -> Result<Self> {
        let dirset = DirectionSet::get(pipeline.base_p)?;
        if samples.is_empty() {
            return Err(Error::InsufficientData("no training samples".into()));
        }
        let unit = match pipeline.alignment {
            AlignMethod::Cut => None,
            AlignMethod::Resample => Some(alignment::unit_length(
                samples.iter().map(|s| s.points.as_slice()),
            )?),
        };
        let grammars = samples
            .iter()
            .map(|s| encode_sample(s, pipeline, unit))
            .collect::<Result<Vec<_>>>()?;
        let grammar_length = grammars.iter().map(Vec::len).min().unwrap_or(0);
        let features: Vec<FeatureVector> = grammars
            .iter()
            .zip(samples)
            .map(|(g, s)| FeatureVector {
                values: pipeline
                    .encoding
                    .encode(&g[..grammar_length], dirset.alphabet_size()),
                label: Some(s.label.clone()),
            })
            .collect();
        let mut model = train_svm(&features, &pipeline.svm)?;
        model.unit_length = unit;
        Ok(GrammarClassifier {
            pipeline: pipeline.clone(),
            grammar_length,
            model,
        })
    }

    /// Encodes with the training unit length and fits to the training grammar
    /// length (null-padded when shorter).
    pub fn features_for(&self, points: &[Point3]) -> Result<Vec<f64>> {
        let dirset = DirectionSet::get(self.pipeline.base_p)?;
        let symbols = encode_points(points, &self.pipeline, self.model.unit_length)?;
        let fitted = fit_length(&symbols, self.grammar_length, dirset.null_symbol());
        Ok(self
            .pipeline
            .encoding
            .encode(&fitted, dirset.alphabet_size()))
    }

    pub fn predict(&self, points: &[Point3]) -> Result<super::Prediction> {
        predict(&self.model, &self.features_for(points)?)
    }
}

fn encode_points(
    points: &[Point3],
    pipeline: &PipelineConfig,
    unit: Option<f64>,
) -> Result<Vec<Symbol>> {
    match unit {
        None => dcc::encode_points(points, pipeline.mode, pipeline.base_p, &pipeline.frame),
        Some(u) => alignment::resample_and_encode(
            points,
            u,
            pipeline.mode,
            pipeline.base_p,
            &pipeline.frame,
        ),
    }
}

fn encode_sample(
    sample: &Sample,
    pipeline: &PipelineConfig,
    unit: Option<f64>,
) -> Result<Vec<Symbol>> {
    encode_points(&sample.points, pipeline, unit).map_err(|e| match e {
        Error::DegenerateInput(m) => Error::DegenerateInput(format!("{}: {m}", sample.trial_id)),
        other => other,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k_min: 2,
            k_max: 20,
            repeats: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub avg: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        Summary {
            avg: sum / n as f64,
            min,
            max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub k: usize,
    /// Folds actually used; smaller than `k` only when capped by the dataset size.
    pub folds: usize,
    pub repeat: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub k: usize,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub dataset_id: String,
    pub scope: Scope,
    pub samples: usize,
    pub kernel: String,
    pub alignment: AlignMethod,
    pub mode: FrameMode,
    pub base_p: u8,
    pub encoding: Encoding,
    pub seed: u64,
    pub repeats: usize,
    pub cells: Vec<CellResult>,
    pub per_k: Vec<KSummary>,
    pub overall: Summary,
    pub warnings: Vec<String>,
}

impl FoldReport {
    /// Avg/min/max rows in percent, one line each.
    pub fn table(&self) -> String {
        let pct = |v: f64| format!("{:>6.2}", v * 100.0);
        let mut out = format!(
            "dataset {} | {} | {} | {}-DCC{} | {}\n",
            self.dataset_id,
            self.scope,
            self.kernel,
            self.mode.to_string().to_uppercase(),
            DirectionSet::get(self.base_p).map_or(0, DirectionSet::alphabet_size),
            self.alignment
        );
        out.push_str(&format!("  avg {}\n", pct(self.overall.avg)));
        out.push_str(&format!("  min {}\n", pct(self.overall.min)));
        out.push_str(&format!("  max {}\n", pct(self.overall.max)));
        out
    }
}

/// The ChaCha stream for one `(k, repeat)` cell.
pub fn cell_rng(seed: u64, k: usize, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 32) | repeat as u64);
    rng
}

/// Stratified assignment of sample indices to `k` folds. Classes are shuffled
/// separately, then dealt round-robin in sorted label order, so fold sizes
/// differ by at most one.
pub fn stratified_folds(labels: &[&str], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(rng);
        for &i in members.iter() {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds
}

/// Encodes every sample once when the grammar does not depend on the fold.
fn precompute(dataset: &Dataset, pipeline: &PipelineConfig) -> Result<Option<Vec<Vec<Symbol>>>> {
    if pipeline.alignment != AlignMethod::Cut {
        return Ok(None);
    }
    dataset
        .samples
        .par_iter()
        .map(|s| encode_sample(s, pipeline, None))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn run_fold(
    dataset: &Dataset,
    pipeline: &PipelineConfig,
    cached: Option<&[Vec<Symbol>]>,
    train: &[usize],
    test: &[usize],
) -> Result<usize> {
    let dirset = DirectionSet::get(pipeline.base_p)?;
    let train_samples: Vec<&Sample> = train.iter().map(|&i| &dataset.samples[i]).collect();
    let classifier = match cached {
        None => GrammarClassifier::fit(&train_samples, pipeline)?,
        Some(grammars) => {
            let len = train.iter().map(|&i| grammars[i].len()).min().unwrap_or(0);
            let features: Vec<FeatureVector> = train
                .iter()
                .map(|&i| FeatureVector {
                    values: pipeline
                        .encoding
                        .encode(&grammars[i][..len], dirset.alphabet_size()),
                    label: Some(dataset.samples[i].label.clone()),
                })
                .collect();
            GrammarClassifier {
                pipeline: pipeline.clone(),
                grammar_length: len,
                model: train_svm(&features, &pipeline.svm)?,
            }
        }
    };
    let mut correct = 0;
    for &i in test {
        let values = match cached {
            Some(grammars) => {
                let fitted = fit_length(
                    &grammars[i],
                    classifier.grammar_length,
                    dirset.null_symbol(),
                );
                pipeline.encoding.encode(&fitted, dirset.alphabet_size())
            }
            None => classifier.features_for(&dataset.samples[i].points)?,
        };
        if predict(&classifier.model, &values)?.label == dataset.samples[i].label {
            correct += 1;
        }
    }
    Ok(correct)
}

pub fn cross_validate(
    dataset: &Dataset,
    pipeline: &PipelineConfig,
    cv: &CvConfig,
) -> Result<FoldReport> {
    let n = dataset.len();
    if cv.k_min < 2 || cv.k_max < cv.k_min || cv.repeats == 0 {
        return Err(Error::InsufficientData(format!(
            "invalid protocol k = {}..={}, {} repeats",
            cv.k_min, cv.k_max, cv.repeats
        )));
    }
    let labels = dataset.labels();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &labels {
        *counts.entry(l).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "dataset {} has {} class(es); need at least 2",
            dataset.id,
            counts.len()
        )));
    }
    if let Some((label, _)) = counts.iter().find(|(_, &c)| c < 2) {
        return Err(Error::InsufficientData(format!(
            "class {label:?} has a single sample; every training split needs it"
        )));
    }

    let mut warnings = Vec::new();
    if cv.k_max > n {
        let msg = format!(
            "k above the sample count ({n}) is capped at {n} for dataset {}",
            dataset.id
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let cached = precompute(dataset, pipeline)?;
    let cells: Vec<(usize, usize)> = (cv.k_min..=cv.k_max)
        .flat_map(|k| (0..cv.repeats).map(move |r| (k, r)))
        .collect();
    let results =
        cells
            .par_iter()
            .map(|&(k, repeat)| {
                let folds_used = k.min(n);
                let mut rng = cell_rng(cv.seed, k, repeat);
                let folds = stratified_folds(&labels, folds_used, &mut rng);
                let mut correct = 0;
                for (f, test) in folds.iter().enumerate() {
                    let train: Vec<usize> = folds
                        .iter()
                        .enumerate()
                        .filter(|&(g, _)| g != f)
                        .flat_map(|(_, idx)| idx.iter().copied())
                        .collect();
                    correct += run_fold(dataset, pipeline, cached.as_deref(), &train, test)
                        .map_err(|e| match e {
                            Error::SingleClass(c) => Error::InsufficientData(format!(
                                "k = {k}: a training split holds only class {c}"
                            )),
                            other => other,
                        })?;
                }
                Ok(CellResult {
                    k,
                    folds: folds_used,
                    repeat,
                    correct,
                    total: n,
                    accuracy: correct as f64 / n as f64,
                })
            })
            .collect::<Result<Vec<_>>>()?;

    let per_k = (cv.k_min..=cv.k_max)
        .map(|k| KSummary {
            k,
            summary: Summary::of(results.iter().filter(|c| c.k == k).map(|c| c.accuracy)),
        })
        .collect();
    let overall = Summary::of(results.iter().map(|c| c.accuracy));

    Ok(FoldReport {
        dataset_id: dataset.id.clone(),
        scope: dataset.scope,
        samples: n,
        kernel: pipeline.svm.kernel.to_string(),
        alignment: pipeline.alignment,
        mode: pipeline.mode,
        base_p: pipeline.base_p,
        encoding: pipeline.encoding,
        seed: cv.seed,
        repeats: cv.repeats,
        cells: results,
        per_k,
        overall,
        warnings,
    })
}
