//! Discrete Frenet frames (FF) and accumulated Frenet frames (AFF).
//!
//! A trajectory with `N` samples has `N - 1` chords. Frame `k` is anchored at
//! sample `k` and describes chord `k`; frame 0 is the initial frame. Chords
//! shorter than the motion epsilon produce a held frame flagged as null motion.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Point3;
use crate::Vec3;

pub const DEFAULT_MOTION_EPSILON: f64 = 1e-6;

/// Cross products shorter than this are treated as collinear tangents.
const COLLINEAR_EPSILON: f64 = 1e-9;

pub const MIN_BASE: u8 = 1;
pub const MAX_BASE: u8 = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    #[default]
    Ff,
    Aff,
}

impl fmt::Display for FrameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameMode::Ff => "ff",
            FrameMode::Aff => "aff",
        })
    }
}

impl FromStr for FrameMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ff" => Ok(FrameMode::Ff),
            "aff" => Ok(FrameMode::Aff),
            other => Err(format!("unknown frame mode {other:?} (expected ff or aff)")),
        }
    }
}

/// How the initial frame's normal is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitConvention {
    /// Normal of the first turning chord pair of the curve itself. Falls back
    /// to [`InitConvention::LeastAlignedAxis`] on curves that never turn.
    #[default]
    CurveTurn,
    /// World axis least aligned with the tangent (ties x, y, z), with its
    /// tangential component removed.
    LeastAlignedAxis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub motion_epsilon: f64,
    pub init: InitConvention,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            motion_epsilon: DEFAULT_MOTION_EPSILON,
            init: InitConvention::default(),
        }
    }
}

/// Right-handed orthonormal triad anchored at a sample index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub anchor: usize,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
    pub null_motion: bool,
}

impl Frame {
    fn from_tangent_normal(anchor: usize, tangent: Vec3, normal: Vec3) -> Self {
        Frame {
            anchor,
            tangent,
            normal,
            binormal: tangent.cross(&normal),
            null_motion: false,
        }
    }

    fn held_at(&self, anchor: usize, null_motion: bool) -> Self {
        Frame {
            anchor,
            null_motion,
            ..*self
        }
    }

    /// Components of `v` along (tangent, normal, binormal).
    pub fn to_local(&self, v: &Vec3) -> Vec3 {
        Vec3::new(
            self.tangent.dot(v),
            self.normal.dot(v),
            self.binormal.dot(v),
        )
    }

    /// Largest deviation from an exact right-handed orthonormal triad.
    pub fn orthonormality_error(&self) -> f64 {
        let (t, n, b) = (&self.tangent, &self.normal, &self.binormal);
        [
            (t.norm() - 1.0).abs(),
            (n.norm() - 1.0).abs(),
            (b.norm() - 1.0).abs(),
            t.dot(n).abs(),
            t.dot(b).abs(),
            n.dot(b).abs(),
            (b - t.cross(n)).amax(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub mode: FrameMode,
    pub base_p: u8,
    /// Anchors where an AFF sequence re-aligned to the curve. Always empty for FF.
    pub realignments: Vec<usize>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Directional threshold for a DCC base: `pi / 2^(p + 1)`.
pub fn aff_threshold(base_p: u8) -> Result<f64> {
    check_base(base_p)?;
    Ok(PI / f64::from(1u32 << (base_p + 1)))
}

pub(crate) fn check_base(base_p: u8) -> Result<()> {
    if (MIN_BASE..=MAX_BASE).contains(&base_p) {
        Ok(())
    } else {
        Err(Error::InvalidBase(base_p))
    }
}

/// Unit chord directions; `None` marks null motion.
fn chord_tangents(points: &[Point3], motion_epsilon: f64) -> Vec<Option<Vec3>> {
    points
        .windows(2)
        .map(|w| {
            let d = w[1].position() - w[0].position();
            let len = d.norm();
            (len >= motion_epsilon).then(|| d / len)
        })
        .collect()
}

/// Unit vector along `v` with its component along unit `t` removed.
fn orthogonalize(v: &Vec3, t: &Vec3) -> Vec3 {
    (v - t * t.dot(v)).normalize()
}

fn least_aligned_axis_normal(tangent: &Vec3) -> Vec3 {
    let mut best = Vec3::x();
    let mut best_dot = tangent.x.abs();
    for axis in [Vec3::y(), Vec3::z()] {
        let d = tangent.dot(&axis).abs();
        if d < best_dot {
            best = axis;
            best_dot = d;
        }
    }
    orthogonalize(&best, tangent)
}

/// Normal after turning from `previous` to `current`, or `carried` re-projected
/// when the two tangents are collinear.
fn turn_normal(previous: &Vec3, current: &Vec3, carried: &Vec3) -> Vec3 {
    let c = previous.cross(current);
    if c.norm() < COLLINEAR_EPSILON {
        orthogonalize(carried, current)
    } else {
        orthogonalize(&c, current)
    }
}

fn initial_from_chords(chords: &[Option<Vec3>], convention: InitConvention) -> Result<Frame> {
    let tangent = chords.iter().flatten().next().copied().ok_or_else(|| {
        Error::DegenerateInput(
            "no two samples are separated by more than the motion epsilon".into(),
        )
    })?;
    let normal = match convention {
        InitConvention::LeastAlignedAxis => least_aligned_axis_normal(&tangent),
        InitConvention::CurveTurn => {
            // every tangent before the first turn is parallel to `tangent`
            let moving: Vec<&Vec3> = chords.iter().flatten().collect();
            moving
                .windows(2)
                .map(|w| w[0].cross(w[1]))
                .find(|c| c.norm() >= COLLINEAR_EPSILON)
                .map(|c| orthogonalize(&c, &tangent))
                .unwrap_or_else(|| least_aligned_axis_normal(&tangent))
        }
    };
    let mut frame = Frame::from_tangent_normal(0, tangent, normal);
    frame.null_motion = chords.first().is_some_and(Option::is_none);
    Ok(frame)
}

/// Initial frame at sample 0. Needs at least two distinct points.
pub fn initial_frame(points: &[Point3], config: &FrameConfig) -> Result<Frame> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "{} points, need at least 2",
            points.len()
        )));
    }
    initial_from_chords(&chord_tangents(points, config.motion_epsilon), config.init)
}

fn require_frames(points: &[Point3]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "{} points, need at least 3 for a frame transition",
            points.len()
        )));
    }
    Ok(())
}

/// Discrete Frenet frames: every moving chord sets the tangent.
pub fn compute_ff(points: &[Point3], config: &FrameConfig) -> Result<FrameSequence> {
    require_frames(points)?;
    let chords = chord_tangents(points, config.motion_epsilon);
    let mut frames = Vec::with_capacity(chords.len());
    frames.push(initial_from_chords(&chords, config.init)?);
    for (k, chord) in chords.iter().enumerate().skip(1) {
        let prev = frames[k - 1];
        let frame = match chord {
            None => prev.held_at(k, true),
            Some(t) => {
                let n = turn_normal(&prev.tangent, t, &prev.normal);
                Frame::from_tangent_normal(k, *t, n)
            }
        };
        frames.push(frame);
    }
    Ok(FrameSequence {
        frames,
        mode: FrameMode::Ff,
        base_p: MIN_BASE,
        realignments: Vec::new(),
    })
}

/// Accumulated Frenet frames: the held frame is kept until the chord tangent
/// deviates from its tangent by more than the base's directional threshold.
pub fn compute_aff(points: &[Point3], base_p: u8, config: &FrameConfig) -> Result<FrameSequence> {
    let threshold = aff_threshold(base_p)?;
    require_frames(points)?;
    let chords = chord_tangents(points, config.motion_epsilon);
    let mut frames = Vec::with_capacity(chords.len());
    let mut realignments = Vec::new();
    frames.push(initial_from_chords(&chords, config.init)?);
    for (k, chord) in chords.iter().enumerate().skip(1) {
        let held = frames[k - 1];
        let frame = match chord {
            None => held.held_at(k, true),
            Some(w) if angle_between(&held.tangent, w) > threshold => {
                realignments.push(k);
                let n = turn_normal(&held.tangent, w, &held.normal);
                Frame::from_tangent_normal(k, *w, n)
            }
            Some(_) => held.held_at(k, false),
        };
        frames.push(frame);
    }
    Ok(FrameSequence {
        frames,
        mode: FrameMode::Aff,
        base_p,
        realignments,
    })
}

/// Dispatch on mode. `base_p` only affects AFF thresholds.
pub fn compute_frames(
    points: &[Point3],
    mode: FrameMode,
    base_p: u8,
    config: &FrameConfig,
) -> Result<FrameSequence> {
    match mode {
        FrameMode::Ff => {
            check_base(base_p)?;
            let mut seq = compute_ff(points, config)?;
            seq.base_p = base_p;
            Ok(seq)
        }
        FrameMode::Aff => compute_aff(points, base_p, config),
    }
}

pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}
