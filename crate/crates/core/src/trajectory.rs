//! Timestamped 3D trajectories and their behavior segmentation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// A sampled end-effector position. Coordinates in meters, time in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Point3 { t, x, y, z }
    }

    pub fn at(t: f64, position: Vec3) -> Self {
        Point3::new(t, position.x, position.y, position.z)
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A controller-reported behavior window, inclusive on both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSegment {
    pub label: String,
    pub start: f64,
    pub end: f64,
}

impl BehaviorSegment {
    pub fn new(label: impl Into<String>, start: f64, end: f64) -> Self {
        BehaviorSegment {
            label: label.into(),
            start,
            end,
        }
    }
}

/// One trial: an ordered point sequence plus optional labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    trial_id: String,
    points: Vec<Point3>,
    task_label: Option<String>,
    behaviors: Vec<BehaviorSegment>,
}

pub const MIN_POINTS: usize = 3;

impl Trajectory {
    pub fn new(
        trial_id: impl Into<String>,
        points: Vec<Point3>,
        task_label: Option<String>,
        behaviors: Vec<BehaviorSegment>,
    ) -> Result<Self> {
        let trial_id = trial_id.into();
        if points.len() < MIN_POINTS {
            return Err(Error::InvalidTrajectory(format!(
                "trial {trial_id}: {} points, need at least {MIN_POINTS}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("trial {trial_id}, point {i}")));
        }
        if let Some(i) = points.windows(2).position(|w| w[1].t < w[0].t) {
            return Err(Error::InvalidTrajectory(format!(
                "trial {trial_id}: time decreases at point {}",
                i + 1
            )));
        }
        validate_boundaries(&behaviors, points[0].t, points[points.len() - 1].t)
            .map_err(|m| Error::InvalidTrajectory(format!("trial {trial_id}: {m}")))?;
        Ok(Trajectory {
            trial_id,
            points,
            task_label,
            behaviors,
        })
    }

    /// Unlabeled trajectory without behavior boundaries.
    pub fn from_points(trial_id: impl Into<String>, points: Vec<Point3>) -> Result<Self> {
        Trajectory::new(trial_id, points, None, Vec::new())
    }

    pub fn trial_id(&self) -> &str {
        &self.trial_id
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn task_label(&self) -> Option<&str> {
        self.task_label.as_deref()
    }

    pub fn behaviors(&self) -> &[BehaviorSegment] {
        &self.behaviors
    }

    pub fn with_task_label(mut self, label: Option<String>) -> Self {
        self.task_label = label;
        self
    }

    /// Sum of chord lengths between consecutive samples.
    pub fn chord_length(&self) -> f64 {
        chord_length(&self.points)
    }

    /// Points whose timestamps fall inside the segment window.
    pub fn segment_points(&self, segment: &BehaviorSegment) -> &[Point3] {
        let lo = self.points.partition_point(|p| p.t < segment.start);
        let hi = self.points.partition_point(|p| p.t <= segment.end);
        &self.points[lo..hi.max(lo)]
    }
}

pub fn chord_length(points: &[Point3]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].position() - w[0].position()).norm())
        .sum()
}

fn validate_boundaries(
    behaviors: &[BehaviorSegment],
    first: f64,
    last: f64,
) -> std::result::Result<(), String> {
    for b in behaviors {
        if !(b.start.is_finite() && b.end.is_finite()) || b.end < b.start {
            return Err(format!("behavior {:?} has an invalid window", b.label));
        }
        if b.start < first || b.end > last {
            return Err(format!(
                "behavior {:?} [{}, {}] lies outside [{first}, {last}]",
                b.label, b.start, b.end
            ));
        }
    }
    for w in behaviors.windows(2) {
        // adjacent windows may share their transition instant
        if w[1].start < w[0].end {
            return Err(format!(
                "behaviors {:?} and {:?} overlap or are out of order",
                w[0].label, w[1].label
            ));
        }
    }
    Ok(())
}
