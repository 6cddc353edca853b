//! Desk-scale synthetic assembly trials.
//!
//! Every trial follows the same four-behavior layout (approach, alignment,
//! insertion, mating) with a fixed sample count per behavior, so boundary
//! instants are shared samples. Per-trial variation is a random rigid
//! translation of the whole trial plus isotropic Gaussian position noise;
//! controlled failures also draw where and to which side the approach slips.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};
use crate::trajectory::{BehaviorSegment, Point3, Trajectory};
use crate::Vec3;

pub const SAMPLE_PERIOD: f64 = 0.01;
pub const BEHAVIORS: [&str; 4] = ["approach", "alignment", "insertion", "mating"];
/// Chords per behavior.
pub const BEHAVIOR_STEPS: [usize; 4] = [60, 20, 20, 10];
pub const DEFAULT_NOISE_SIGMA: f64 = 1e-5;

/// Nominal chord length outside the approach.
const STEP: f64 = 0.002;
const PIVOT_SWEEP: f64 = 2.0 * PI / 3.0;
const CHATTER: f64 = 7.5e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Low-curvature descent followed by clean pivot, insertion and mating.
    SmoothApproach,
    /// Nominal motion with high-frequency lateral chatter while in contact.
    SharpContact,
    /// Nominal motion with a lateral slip during the approach; the snap never
    /// seats, so mating bounces back and forth.
    ControlledFailure,
}

impl SynthKind {
    pub fn task_label(&self) -> &'static str {
        match self {
            SynthKind::SmoothApproach | SynthKind::SharpContact => "success",
            SynthKind::ControlledFailure => "failure",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::SmoothApproach => "smooth_approach",
            SynthKind::SharpContact => "sharp_contact",
            SynthKind::ControlledFailure => "controlled_failure",
        })
    }
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "smooth_approach" | "smooth" => Ok(SynthKind::SmoothApproach),
            "sharp_contact" | "sharp" => Ok(SynthKind::SharpContact),
            "controlled_failure" | "failure" => Ok(SynthKind::ControlledFailure),
            other => Err(format!(
                "unknown synthetic kind {other:?} (expected smooth_approach, sharp_contact or controlled_failure)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n_trials: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, n_trials: usize, noise_sigma: f64, seed: u64) -> Self {
        SynthSpec {
            kind,
            n_trials,
            noise_sigma,
            seed,
        }
    }
}

struct Slip {
    onset: usize,
    lateral: f64,
}

fn nominal_path(kind: SynthKind, slip: Option<&Slip>) -> Vec<Vec3> {
    let mut path = Vec::with_capacity(BEHAVIOR_STEPS.iter().sum::<usize>() + 1);
    let chatter = |j: usize| {
        if j.is_multiple_of(2) {
            CHATTER
        } else {
            -CHATTER
        }
    };

    // approach: chord from start to docking point, bowed upward
    let start = Vec3::new(0.12, 0.0, 0.16);
    let dock = Vec3::new(0.0, 0.0, 0.04);
    let bow = 0.02;
    let n = BEHAVIOR_STEPS[0];
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let mut p = start + (dock - start) * s + Vec3::z() * (bow * (PI * s).sin());
        if let Some(slip) = slip {
            // two-step sideways slip that persists
            let shifted = match i {
                i if i <= slip.onset => 0.0,
                i if i == slip.onset + 1 => 0.5,
                _ => 1.0,
            };
            p.y += slip.lateral * shifted;
        }
        path.push(p);
    }

    // alignment: pivot arc, tangent to the end of the approach, in the
    // vertical plane of the approach so the turn plane is well defined
    let pivot_start = *path.last().unwrap();
    let heading = (dock - start - Vec3::z() * (bow * PI)).normalize();
    let mut inward = Vec3::new(-heading.z, 0.0, heading.x);
    if inward.z < 0.0 {
        inward = -inward;
    }
    let n = BEHAVIOR_STEPS[1];
    let step_turn = PIVOT_SWEEP / n as f64;
    let radius = 0.5 * STEP / (0.5 * step_turn).sin();
    let centre = pivot_start + inward * radius;
    for j in 1..=n {
        let theta = step_turn * j as f64;
        let mut p = centre - inward * (radius * theta.cos()) + heading * (radius * theta.sin());
        if kind == SynthKind::SharpContact && j < n {
            p.y += chatter(j);
        }
        path.push(p);
    }

    // insertion: straight toward the pivot centre, a right-angle turn in the same plane
    let plunge = (inward * PIVOT_SWEEP.cos() - heading * PIVOT_SWEEP.sin()).normalize();
    let insert_start = *path.last().unwrap();
    let n = BEHAVIOR_STEPS[2];
    for j in 1..=n {
        let mut p = insert_start + plunge * (STEP * j as f64);
        if kind == SynthKind::SharpContact && j < n {
            p.y += chatter(j);
        }
        path.push(p);
    }

    // mating: short push, or a bounce when the snap does not seat
    let mate_start = *path.last().unwrap();
    let n = BEHAVIOR_STEPS[3];
    for j in 1..=n {
        let depth = match kind {
            SynthKind::ControlledFailure => (j % 2) as f64 * STEP,
            _ => STEP * j as f64,
        };
        path.push(mate_start + plunge * depth);
    }
    path
}

fn boundaries() -> Vec<BehaviorSegment> {
    let mut out = Vec::with_capacity(BEHAVIORS.len());
    let mut first = 0usize;
    for (label, steps) in BEHAVIORS.iter().zip(BEHAVIOR_STEPS) {
        let last = first + steps;
        out.push(BehaviorSegment::new(
            *label,
            first as f64 * SAMPLE_PERIOD,
            last as f64 * SAMPLE_PERIOD,
        ));
        first = last;
    }
    out
}

/// Deterministic corpus for `(spec, seed)`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Corpus> {
    if spec.n_trials == 0 {
        return Err(Error::InvalidSpec("n_trials must be at least 1".into()));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "noise_sigma must be finite and non-negative, got {}",
            spec.noise_sigma
        )));
    }
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::InvalidSpec(format!("noise distribution: {e}")))?;

    let trajectories = (0..spec.n_trials)
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(trial as u64);
            let offset = Vec3::new(
                rng.random_range(-0.005..0.005),
                rng.random_range(-0.005..0.005),
                rng.random_range(-0.005..0.005),
            );
            let slip = (spec.kind == SynthKind::ControlledFailure).then(|| Slip {
                onset: rng.random_range(24..=27),
                lateral: if rng.random_bool(0.5) { 1.0 } else { -1.0 }
                    * rng.random_range(0.004..0.006),
            });
            let points = nominal_path(spec.kind, slip.as_ref())
                .into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let jitter = if spec.noise_sigma > 0.0 {
                        Vec3::new(
                            noise.sample(&mut rng),
                            noise.sample(&mut rng),
                            noise.sample(&mut rng),
                        )
                    } else {
                        Vec3::zeros()
                    };
                    Point3::at(i as f64 * SAMPLE_PERIOD, p + offset + jitter)
                })
                .collect();
            Trajectory::new(
                format!("{}_{trial:03}", spec.kind),
                points,
                Some(spec.kind.task_label().to_owned()),
                boundaries(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Corpus::new(
        format!("synthetic_{}", spec.kind),
        trajectories,
        format!(
            "synthetic {} x{} sigma={} seed={}",
            spec.kind, spec.n_trials, spec.noise_sigma, spec.seed
        ),
    )
}
