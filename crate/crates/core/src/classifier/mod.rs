//! SVM training and evaluation on action-grammar feature vectors.

pub mod cv;
pub mod kernel;
pub mod primal;
pub mod smo;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alignment::AlignedSet;
use crate::dcc::Symbol;
use crate::error::{Error, Result};

pub use kernel::{Kernel, KernelKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// Symbol id as a number, one value per grammar position.
    #[default]
    Integer,
    /// One indicator block of alphabet size per position.
    OneHot,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Integer => "integer",
            Encoding::OneHot => "one_hot",
        })
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "integer" | "int" => Ok(Encoding::Integer),
            "one_hot" | "onehot" => Ok(Encoding::OneHot),
            other => Err(format!(
                "unknown encoding {other:?} (expected integer or one_hot)"
            )),
        }
    }
}

impl Encoding {
    pub fn encode(&self, symbols: &[Symbol], alphabet_size: usize) -> Vec<f64> {
        match self {
            Encoding::Integer => symbols.iter().map(|&s| f64::from(s)).collect(),
            Encoding::OneHot => {
                let mut v = vec![0.0; symbols.len() * alphabet_size];
                for (i, &s) in symbols.iter().enumerate() {
                    v[i * alphabet_size + usize::from(s)] = 1.0;
                }
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Option<String>,
}

/// Feature vectors for an aligned set, labeled by each grammar's scope label.
pub fn featurize(aligned: &AlignedSet, encoding: Encoding) -> Vec<FeatureVector> {
    let size = aligned.alphabet_size();
    aligned
        .grammars
        .iter()
        .map(|g| FeatureVector {
            values: encoding.encode(&g.symbols, size),
            label: g.label().map(str::to_owned),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelKind,
    pub c: f64,
    pub degree: u32,
    pub coef0: f64,
    /// RBF/polynomial gamma; `None` uses 1 / feature dimension.
    pub gamma: Option<f64>,
    /// Primal subgradient epochs.
    pub epochs: usize,
    /// SMO stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            kernel: KernelKind::Linear,
            c: 1.0,
            degree: 3,
            coef0: 1.0,
            gamma: None,
            epochs: 400,
            tolerance: smo::DEFAULT_TOLERANCE,
            max_iter: 100_000,
        }
    }
}

impl SvmParams {
    pub fn with_kernel(kernel: KernelKind) -> Self {
        SvmParams {
            kernel,
            ..SvmParams::default()
        }
    }

    fn kernel_fn(&self, dim: usize) -> Kernel {
        let gamma = self.gamma.unwrap_or(1.0 / dim.max(1) as f64);
        match self.kernel {
            KernelKind::Linear | KernelKind::LinearDual => Kernel::Linear,
            KernelKind::Polynomial => Kernel::Polynomial {
                degree: self.degree,
                gamma,
                coef0: self.coef0,
            },
            KernelKind::Rbf => Kernel::Rbf { gamma },
        }
    }
}

/// One binary decision function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Machine {
    /// Hyperplane `w.x + bias = 0`.
    Linear { weights: Vec<f64>, bias: f64 },
    /// `sum(coef_i K(sv_i, x)) + bias` with `coef_i = alpha_i y_i`.
    Kernel {
        kernel: Kernel,
        support_vectors: Vec<Vec<f64>>,
        alphas: Vec<f64>,
        coefs: Vec<f64>,
        bias: f64,
    },
}

impl Machine {
    pub fn decision(&self, x: &[f64]) -> f64 {
        match self {
            Machine::Linear { weights, bias } => kernel::dot(weights, x) + bias,
            Machine::Kernel {
                kernel,
                support_vectors,
                coefs,
                bias,
                ..
            } => {
                support_vectors
                    .iter()
                    .zip(coefs)
                    .map(|(sv, c)| c * kernel.eval(sv, x))
                    .sum::<f64>()
                    + bias
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub dim: usize,
    /// Sorted class labels. Binary models have one machine whose positive
    /// side is `classes[1]`; otherwise one machine per class (one-vs-rest).
    pub classes: Vec<String>,
    pub machines: Vec<Machine>,
    /// Resampling step of the training set, when resample alignment was used.
    pub unit_length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub decision: f64,
}

pub fn train_svm(features: &[FeatureVector], params: &SvmParams) -> Result<SvmModel> {
    let Some(first) = features.first() else {
        return Err(Error::InsufficientData("no training examples".into()));
    };
    let dim = first.values.len();
    let mut labels = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        if f.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.values.len(),
            });
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature vector {i}")));
        }
        labels.push(
            f.label.as_deref().ok_or_else(|| {
                Error::InsufficientData(format!("feature vector {i} is unlabeled"))
            })?,
        );
    }
    let classes: Vec<String> = labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.join(",")));
    }

    let xs: Vec<&[f64]> = features.iter().map(|f| f.values.as_slice()).collect();
    let positives: Vec<&str> = if classes.len() == 2 {
        vec![classes[1].as_str()]
    } else {
        classes.iter().map(String::as_str).collect()
    };
    let machines = positives
        .into_iter()
        .map(|pos| {
            let ys: Vec<f64> = labels
                .iter()
                .map(|&l| if l == pos { 1.0 } else { -1.0 })
                .collect();
            train_binary(&xs, &ys, params, dim)
        })
        .collect();

    Ok(SvmModel {
        params: params.clone(),
        dim,
        classes,
        machines,
        unit_length: None,
    })
}

fn train_binary(xs: &[&[f64]], ys: &[f64], params: &SvmParams, dim: usize) -> Machine {
    if params.kernel == KernelKind::Linear {
        let sol = primal::train(xs, ys, params.c, params.epochs);
        return Machine::Linear {
            weights: sol.weights,
            bias: sol.bias,
        };
    }
    let kernel = params.kernel_fn(dim);
    let sol = smo::train(xs, ys, &kernel, params.c, params.tolerance, params.max_iter);
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} iterations without converging",
            sol.iterations
        );
    }
    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    let mut coefs = Vec::new();
    for ((a, x), y) in sol.alphas.iter().zip(xs).zip(ys) {
        if *a > 0.0 {
            support_vectors.push(x.to_vec());
            alphas.push(*a);
            coefs.push(a * y);
        }
    }
    if params.kernel == KernelKind::LinearDual {
        // collapse to an explicit hyperplane
        let mut weights = vec![0.0; dim];
        for (sv, c) in support_vectors.iter().zip(&coefs) {
            for (w, x) in weights.iter_mut().zip(sv) {
                *w += c * x;
            }
        }
        return Machine::Linear {
            weights,
            bias: sol.bias,
        };
    }
    Machine::Kernel {
        kernel,
        support_vectors,
        alphas,
        coefs,
        bias: sol.bias,
    }
}

pub fn predict(model: &SvmModel, feature: &[f64]) -> Result<Prediction> {
    if feature.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: feature.len(),
        });
    }
    if model.machines.len() == 1 {
        let d = model.machines[0].decision(feature);
        let label = if d > 0.0 {
            &model.classes[1]
        } else {
            &model.classes[0]
        };
        return Ok(Prediction {
            label: label.clone(),
            decision: d,
        });
    }
    let (best, decision) = model
        .machines
        .iter()
        .map(|m| m.decision(feature))
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, d)| if d > acc.1 { (i, d) } else { acc },
        );
    Ok(Prediction {
        label: model.classes[best].clone(),
        decision,
    })
}

/// Fraction of examples whose predicted label matches their own.
pub fn accuracy(model: &SvmModel, features: &[FeatureVector]) -> Result<f64> {
    if features.is_empty() {
        return Err(Error::EmptyInput("no examples to score".into()));
    }
    let mut correct = 0usize;
    for f in features {
        if Some(predict(model, &f.values)?.label.as_str()) == f.label.as_deref() {
            correct += 1;
        }
    }
    Ok(correct as f64 / features.len() as f64)
}
