//! Direct curve coding: canonical direction sets and action-grammar encoding.
//!
//! Directions are stored in frame-local coordinates `(tangent, normal,
//! binormal)`, so every candidate rotates with the previous frame. Base 1 is
//! the six signed frame axes; each higher base adds the normalized sums of all
//! non-parallel pairs of the previous base, deduplicated at [`DEDUP_TOLERANCE`].
//! The null-motion symbol comes last.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, check_base, Frame, FrameConfig, FrameMode, FrameSequence};
use crate::trajectory::Trajectory;
use crate::Vec3;

pub type Symbol = u16;

pub const FORWARD: Symbol = 0;
pub const BACKWARD: Symbol = 1;
pub const UP: Symbol = 2;
pub const DOWN: Symbol = 3;
pub const LEFT: Symbol = 4;
pub const RIGHT: Symbol = 5;

pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// Names of the base-1 symbols, in id order.
pub const BASE_NAMES: [&str; 7] = ["forward", "backward", "up", "down", "left", "right", "null"];

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    base_p: u8,
    vectors: Vec<Vec3>,
    threshold: f64,
}

impl DirectionSet {
    /// Builds the set from scratch. Prefer [`DirectionSet::get`], which caches.
    pub fn build(base_p: u8) -> Result<Self> {
        let threshold = frame::aff_threshold(base_p)?;
        let mut vectors = vec![
            Vec3::x(),
            -Vec3::x(),
            Vec3::y(),
            -Vec3::y(),
            // binormal = tangent x normal points right of an upright traveller
            -Vec3::z(),
            Vec3::z(),
        ];
        for _ in 1..base_p {
            vectors = refine(&vectors);
        }
        Ok(DirectionSet {
            base_p,
            vectors,
            threshold,
        })
    }

    pub fn get(base_p: u8) -> Result<&'static DirectionSet> {
        static SETS: [OnceLock<DirectionSet>; 4] = [const { OnceLock::new() }; 4];
        check_base(base_p)?;
        Ok(SETS[usize::from(base_p - 1)]
            .get_or_init(|| DirectionSet::build(base_p).expect("base checked above")))
    }

    pub fn base_p(&self) -> u8 {
        self.base_p
    }

    /// Directional vectors in frame-local coordinates, indexed by symbol id.
    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn null_symbol(&self) -> Symbol {
        self.vectors.len() as Symbol
    }

    /// Directional vectors plus the null symbol.
    pub fn alphabet_size(&self) -> usize {
        self.vectors.len() + 1
    }

    /// AFF directional threshold for this base, in radians.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Id of the candidate with the largest dot product against a
    /// frame-local direction. Ties go to the lowest id.
    pub fn nearest(&self, local: &Vec3) -> Symbol {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, v) in self.vectors.iter().enumerate() {
            let d = v.dot(local);
            if d > best_dot {
                best = i;
                best_dot = d;
            }
        }
        best as Symbol
    }
}

fn refine(previous: &[Vec3]) -> Vec<Vec3> {
    let mut out = previous.to_vec();
    for (i, a) in previous.iter().enumerate() {
        for b in &previous[i + 1..] {
            if a.cross(b).norm() < DEDUP_TOLERANCE {
                continue;
            }
            let s = (a + b).normalize();
            if !out.iter().any(|v| (v - s).norm() < DEDUP_TOLERANCE) {
                out.push(s);
            }
        }
    }
    out
}

/// Quantizes one step. `None` is null motion.
pub fn encode_step(tangent: Option<&Vec3>, previous: &Frame, dirset: &DirectionSet) -> Symbol {
    match tangent {
        None => dirset.null_symbol(),
        Some(t) => dirset.nearest(&previous.to_local(t)),
    }
}

/// One symbol per frame transition: `frames.len() - 1` symbols.
pub fn encode_trajectory(frames: &FrameSequence, dirset: &DirectionSet) -> Result<Vec<Symbol>> {
    if frames.frames.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "{} frames, need at least 2 to encode a transition",
            frames.frames.len()
        )));
    }
    if frames.mode == FrameMode::Aff && frames.base_p != dirset.base_p {
        return Err(Error::Incompatible(format!(
            "AFF frames built for base {} cannot be coded with DCC base {}",
            frames.base_p, dirset.base_p
        )));
    }
    Ok(frames
        .frames
        .windows(2)
        .map(|w| {
            let current = (!w[1].null_motion).then_some(&w[1].tangent);
            encode_step(current, &w[0], dirset)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    #[default]
    Task,
    Behavior,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Task => "task",
            Scope::Behavior => "behavior",
        })
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "task" => Ok(Scope::Task),
            "behavior" | "behaviour" => Ok(Scope::Behavior),
            other => Err(format!(
                "unknown scope {other:?} (expected task or behavior)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionGrammar {
    pub symbols: Vec<Symbol>,
    pub base_p: u8,
    pub scope: Scope,
    pub source_trial: String,
    pub behavior_label: Option<String>,
    pub task_label: Option<String>,
}

impl ActionGrammar {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        DirectionSet::get(self.base_p)
            .map(DirectionSet::alphabet_size)
            .unwrap_or(0)
    }

    /// Classification label for this grammar's scope.
    pub fn label(&self) -> Option<&str> {
        match self.scope {
            Scope::Task => self.task_label.as_deref(),
            Scope::Behavior => self.behavior_label.as_deref(),
        }
    }

    pub fn is_valid(&self) -> bool {
        let size = self.alphabet_size();
        self.symbols.iter().all(|&s| usize::from(s) < size)
    }
}

/// Frames plus DCC over a raw point sequence.
pub fn encode_points(
    points: &[crate::trajectory::Point3],
    mode: FrameMode,
    base_p: u8,
    config: &FrameConfig,
) -> Result<Vec<Symbol>> {
    let dirset = DirectionSet::get(base_p)?;
    let frames = frame::compute_frames(points, mode, base_p, config)?;
    encode_trajectory(&frames, dirset)
}

/// Task grammar, or one grammar per behavior window when `use_boundaries`.
/// Each behavior window gets its own initial frame.
pub fn segment_and_encode(
    traj: &Trajectory,
    mode: FrameMode,
    base_p: u8,
    use_boundaries: bool,
    config: &FrameConfig,
) -> Result<Vec<ActionGrammar>> {
    let task_label = traj.task_label().map(str::to_owned);
    if !use_boundaries {
        return Ok(vec![ActionGrammar {
            symbols: encode_points(traj.points(), mode, base_p, config)?,
            base_p,
            scope: Scope::Task,
            source_trial: traj.trial_id().to_owned(),
            behavior_label: None,
            task_label,
        }]);
    }
    if traj.behaviors().is_empty() {
        return Err(Error::MissingBoundaries(format!(
            "trial {} has no behavior boundaries",
            traj.trial_id()
        )));
    }
    traj.behaviors()
        .iter()
        .map(|b| {
            let pts = traj.segment_points(b);
            if pts.len() < 3 {
                return Err(Error::MissingBoundaries(format!(
                    "trial {}: behavior {:?} [{}, {}] covers {} samples, need at least 3",
                    traj.trial_id(),
                    b.label,
                    b.start,
                    b.end,
                    pts.len()
                )));
            }
            Ok(ActionGrammar {
                symbols: encode_points(pts, mode, base_p, config)?,
                base_p,
                scope: Scope::Behavior,
                source_trial: traj.trial_id().to_owned(),
                behavior_label: Some(b.label.clone()),
                task_label: task_label.clone(),
            })
        })
        .collect()
}
