//! Length alignment of action grammars: cut-off truncation and arc-length
//! resampling followed by re-encoding (sDCC).

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::dcc::{self, ActionGrammar, DirectionSet, Scope, Symbol};
use crate::error::{Error, Result};
use crate::frame::{FrameConfig, FrameMode};
use crate::trajectory::{chord_length, Point3, Trajectory};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignMethod {
    #[default]
    Cut,
    Resample,
}

impl fmt::Display for AlignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignMethod::Cut => "cut",
            AlignMethod::Resample => "resample",
        })
    }
}

impl FromStr for AlignMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cut" => Ok(AlignMethod::Cut),
            "resample" | "interp" => Ok(AlignMethod::Resample),
            other => Err(format!(
                "unknown alignment {other:?} (expected cut or resample)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedSet {
    pub grammars: Vec<ActionGrammar>,
    pub method: AlignMethod,
    pub unit_length: Option<f64>,
    /// Symbols dropped from each grammar, in input order.
    pub dropped: Vec<usize>,
}

impl AlignedSet {
    /// Common grammar length.
    pub fn length(&self) -> usize {
        self.grammars.first().map_or(0, ActionGrammar::len)
    }

    pub fn base_p(&self) -> u8 {
        self.grammars.first().map_or(0, |g| g.base_p)
    }

    pub fn alphabet_size(&self) -> usize {
        self.grammars
            .first()
            .map_or(0, ActionGrammar::alphabet_size)
    }
}

fn check_compatible(grammars: &[ActionGrammar]) -> Result<()> {
    let Some(first) = grammars.first() else {
        return Err(Error::EmptyInput("no grammars to align".into()));
    };
    if let Some(g) = grammars.iter().find(|g| g.is_empty()) {
        return Err(Error::EmptyInput(format!(
            "grammar of trial {} is empty",
            g.source_trial
        )));
    }
    if let Some(g) = grammars
        .iter()
        .find(|g| g.base_p != first.base_p || g.scope != first.scope)
    {
        return Err(Error::Incompatible(format!(
            "trial {} (base {}, {}) differs from trial {} (base {}, {})",
            g.source_trial, g.base_p, g.scope, first.source_trial, first.base_p, first.scope
        )));
    }
    Ok(())
}

/// Truncates every grammar to the shortest length in the set.
pub fn align_cut(grammars: Vec<ActionGrammar>) -> Result<AlignedSet> {
    check_compatible(&grammars)?;
    let min = grammars.iter().map(ActionGrammar::len).min().unwrap_or(0);
    let mut dropped = Vec::with_capacity(grammars.len());
    let grammars = grammars
        .into_iter()
        .map(|mut g| {
            let extra = g.len() - min;
            if extra > 0 {
                debug!(
                    "cut alignment dropped {extra} symbols from trial {}",
                    g.source_trial
                );
            }
            dropped.push(extra);
            g.symbols.truncate(min);
            g
        })
        .collect();
    let shortened = dropped.iter().filter(|&&d| d > 0).count();
    if shortened > 0 {
        warn!(
            "cut alignment shortened {shortened} of {} grammars to {min} symbols (up to {} dropped)",
            dropped.len(),
            dropped.iter().max().unwrap_or(&0)
        );
    }
    Ok(AlignedSet {
        grammars,
        method: AlignMethod::Cut,
        unit_length: None,
        dropped,
    })
}

/// Truncates or pads (with the null symbol) to exactly `len` symbols.
/// Used to bring test grammars to a trained model's length.
pub fn fit_length(symbols: &[Symbol], len: usize, null_symbol: Symbol) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = symbols.iter().take(len).copied().collect();
    out.resize(len, null_symbol);
    out
}

/// Resampling step for a set of point sequences: mean chord length divided by
/// the mean number of frame assignments (one per chord).
pub fn unit_length<'a, I>(curves: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a [Point3]>,
{
    let mut count = 0usize;
    let mut total_length = 0.0;
    let mut total_frames = 0usize;
    for pts in curves {
        let len = chord_length(pts);
        if len.is_nan() || len <= 0.0 {
            return Err(Error::DegenerateInput(
                "a curve in the set has zero length".into(),
            ));
        }
        count += 1;
        total_length += len;
        total_frames += pts.len().saturating_sub(1);
    }
    if count == 0 {
        return Err(Error::EmptyInput("no curves to resample".into()));
    }
    let mean_frames = total_frames as f64 / count as f64;
    Ok((total_length / count as f64) / mean_frames)
}

/// Re-segments a polyline at uniform arc-length steps of `unit`. A trailing
/// partial step shorter than half a unit is dropped.
pub fn resample_polyline(points: &[Point3], unit: f64) -> Result<Vec<Point3>> {
    if !(unit > 0.0 && unit.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "invalid unit length {unit}"
        )));
    }
    let total = chord_length(points);
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateInput("curve has zero length".into()));
    }
    let steps = (total / unit).floor() as usize;
    let mut targets: Vec<f64> = (0..=steps).map(|j| j as f64 * unit).collect();
    if total - steps as f64 * unit >= 0.5 * unit {
        targets.push(total);
    }

    let mut out = Vec::with_capacity(targets.len());
    let mut seg = 0;
    let mut seg_start = 0.0;
    let last_seg = points.len() - 2;
    for s in targets {
        let mut seg_len = (points[seg + 1].position() - points[seg].position()).norm();
        while seg < last_seg && s > seg_start + seg_len {
            seg_start += seg_len;
            seg += 1;
            seg_len = (points[seg + 1].position() - points[seg].position()).norm();
        }
        let (a, b) = (points[seg], points[seg + 1]);
        let f = if seg_len > 0.0 {
            ((s - seg_start) / seg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let pos = a.position() + (b.position() - a.position()) * f;
        out.push(Point3::at(a.t + (b.t - a.t) * f, pos));
    }
    Ok(out)
}

/// Resamples one curve at `unit` and encodes it.
pub fn resample_and_encode(
    points: &[Point3],
    unit: f64,
    mode: FrameMode,
    base_p: u8,
    config: &FrameConfig,
) -> Result<Vec<Symbol>> {
    let resampled = resample_polyline(points, unit)?;
    if resampled.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "curve of length {} yields {} samples at unit {unit}",
            chord_length(points),
            resampled.len()
        )));
    }
    dcc::encode_points(&resampled, mode, base_p, config)
}

/// Resamples a set at a unit length computed over that same set, re-encodes,
/// and closes residual length differences by truncation.
pub fn align_resample(
    trajectories: &[Trajectory],
    mode: FrameMode,
    base_p: u8,
    config: &FrameConfig,
) -> Result<AlignedSet> {
    let unit = unit_length(trajectories.iter().map(Trajectory::points))?;
    align_resample_with_unit(trajectories, unit, mode, base_p, config)
}

/// Like [`align_resample`] with a fixed unit length (e.g. a training set's).
pub fn align_resample_with_unit(
    trajectories: &[Trajectory],
    unit: f64,
    mode: FrameMode,
    base_p: u8,
    config: &FrameConfig,
) -> Result<AlignedSet> {
    if trajectories.is_empty() {
        return Err(Error::EmptyInput("no trajectories to resample".into()));
    }
    DirectionSet::get(base_p)?;
    let grammars = trajectories
        .iter()
        .map(|t| {
            Ok(ActionGrammar {
                symbols: resample_and_encode(t.points(), unit, mode, base_p, config)?,
                base_p,
                scope: Scope::Task,
                source_trial: t.trial_id().to_owned(),
                behavior_label: None,
                task_label: t.task_label().map(str::to_owned),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = align_cut(grammars)?;
    set.method = AlignMethod::Resample;
    set.unit_length = Some(unit);
    Ok(set)
}
