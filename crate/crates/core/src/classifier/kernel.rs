use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Kernel and solver choice.
///
/// `Linear` trains in the primal with subgradient descent; `LinearDual`
/// trains the same model family in the dual with SMO. Polynomial and RBF are
/// always dual.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Linear,
    LinearDual,
    Polynomial,
    Rbf,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Linear,
        KernelKind::LinearDual,
        KernelKind::Polynomial,
        KernelKind::Rbf,
    ];
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::LinearDual => "linear_dual",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" | "linear_svc" => Ok(KernelKind::Linear),
            "linear_dual" | "svc_linear" => Ok(KernelKind::LinearDual),
            "poly" | "polynomial" => Ok(KernelKind::Polynomial),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(format!(
                "unknown kernel {other:?} (expected linear, linear_dual, polynomial or rbf)"
            )),
        }
    }
}

/// A fully parameterized kernel function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Polynomial { degree: u32, gamma: f64, coef0: f64 },
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Polynomial {
                degree,
                gamma,
                coef0,
            } => (gamma * dot(a, b) + coef0).powi(degree as i32),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
