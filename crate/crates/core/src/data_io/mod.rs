//! Corpus loading, serialization, colormaps and synthetic data.
//!
//! On-disk trajectory layout: one `<trial>.csv` per trial with columns
//! `t,x,y,z` (header optional, extra columns ignored), and an optional sidecar
//! `<trial>.seg` holding `label,start,end` boundary lines plus an optional
//! `task,<label>` line. `#` starts a comment in the sidecar.

pub mod colormap;
pub mod persist;
pub mod synth;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{BehaviorSegment, Point3, Trajectory};

pub use colormap::{emit_colormap, ColorMap};
pub use persist::{load_grammar, load_model, load_report, save_grammar, save_model, save_report};
pub use synth::{generate_synthetic, SynthKind, SynthSpec};

pub const TRAJECTORY_EXT: &str = "csv";
pub const SIDECAR_EXT: &str = "seg";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub dataset_id: String,
    pub trajectories: Vec<Trajectory>,
    pub metadata: String,
}

impl Corpus {
    pub fn new(
        dataset_id: impl Into<String>,
        trajectories: Vec<Trajectory>,
        metadata: impl Into<String>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &trajectories {
            if !seen.insert(t.trial_id()) {
                return Err(Error::InvalidTrajectory(format!(
                    "duplicate trial id {}",
                    t.trial_id()
                )));
            }
        }
        Ok(Corpus {
            dataset_id: dataset_id.into(),
            trajectories,
            metadata: metadata.into(),
        })
    }

    /// Union of corpora; the id concatenates the parts (`A` + `B` = `AB`).
    pub fn combine(parts: &[Corpus]) -> Result<Self> {
        let id: String = parts.iter().map(|c| c.dataset_id.as_str()).collect();
        let trajectories = parts
            .iter()
            .flat_map(|c| c.trajectories.iter().cloned())
            .collect();
        let metadata = parts
            .iter()
            .map(|c| c.metadata.as_str())
            .filter(|m| !m.is_empty())
            .collect::<Vec<_>>()
            .join("; ");
        Corpus::new(id, trajectories, metadata)
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Writes one CSV (and sidecar, when there is anything to put in it) per trial.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for t in &self.trajectories {
            write_trajectory(t, dir)?;
        }
        Ok(())
    }
}

fn parse_field(path: &Path, line: usize, field: Option<&str>, what: &str) -> Result<f64> {
    let raw = field.ok_or_else(|| Error::Parse {
        path: path.to_owned(),
        line,
        message: format!("missing {what} column"),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        path: path.to_owned(),
        line,
        message: format!("{what} value {raw:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_owned(),
            line,
            message: format!("{what} value {raw:?} is not finite"),
        });
    }
    Ok(v)
}

/// Reads `t,x,y,z` rows. The first row is treated as a header when its first
/// field is not numeric.
pub fn read_points(path: &Path) -> Result<Vec<Point3>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut points: Vec<Point3> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if points.is_empty() && row == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err())
        {
            continue;
        }
        let t = parse_field(path, line, record.get(0), "time")?;
        let x = parse_field(path, line, record.get(1), "x")?;
        let y = parse_field(path, line, record.get(2), "y")?;
        let z = parse_field(path, line, record.get(3), "z")?;
        if points.last().is_some_and(|p| t < p.t) {
            return Err(Error::NonMonotoneTime {
                path: path.to_owned(),
                line,
            });
        }
        points.push(Point3::new(t, x, y, z));
    }
    Ok(points)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_owned(),
            line,
            message: format!("{other:?}"),
        },
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sidecar {
    pub behaviors: Vec<BehaviorSegment>,
    pub task_label: Option<String>,
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Sidecar::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        match fields.as_slice() {
            ["task", label] => {
                if label.is_empty() {
                    return Err(Error::MissingLabel {
                        path: path.to_owned(),
                        message: format!("line {line}: empty task label"),
                    });
                }
                out.task_label = Some((*label).to_owned());
            }
            [label, start, end] => {
                if label.is_empty() {
                    return Err(Error::MissingLabel {
                        path: path.to_owned(),
                        message: format!("line {line}: behavior without a label"),
                    });
                }
                let start = parse_field(path, line, Some(start), "start time")?;
                let end = parse_field(path, line, Some(end), "end time")?;
                out.behaviors.push(BehaviorSegment::new(*label, start, end));
            }
            _ => {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line,
                    message: "expected `label,start,end` or `task,<label>`".into(),
                })
            }
        }
    }
    Ok(out)
}

/// Loads one trial; the trial id is the file stem.
pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let points = read_points(path)?;
    let trial_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sidecar_path = path.with_extension(SIDECAR_EXT);
    let sidecar = if sidecar_path.exists() {
        read_sidecar(&sidecar_path)?
    } else {
        Sidecar::default()
    };
    Trajectory::new(trial_id, points, sidecar.task_label, sidecar.behaviors).map_err(|e| match e {
        Error::InvalidTrajectory(m) if m.contains("behavior") => Error::MissingLabel {
            path: sidecar_path.clone(),
            message: m,
        },
        Error::InvalidTrajectory(m) => Error::Parse {
            path: path.to_owned(),
            line: 0,
            message: m,
        },
        other => other,
    })
}

/// Loads a directory of trial CSVs (sorted by file name), or a single CSV.
pub fn load_corpus(path: &Path, dataset_id: &str) -> Result<Corpus> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == TRAJECTORY_EXT))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_owned()]
    };
    let trajectories = files
        .iter()
        .map(|f| load_trajectory(f))
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(
        dataset_id,
        trajectories,
        format!("loaded from {}", path.display()),
    )
}

/// Writes `<trial>.csv` and, when labeled, `<trial>.seg` into `dir`.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<()> {
    let csv_path = dir.join(format!("{}.{TRAJECTORY_EXT}", traj.trial_id()));
    let mut out = String::from("t,x,y,z\n");
    for p in traj.points() {
        out.push_str(&format!("{},{},{},{}\n", p.t, p.x, p.y, p.z));
    }
    fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;
    if traj.task_label().is_none() && traj.behaviors().is_empty() {
        return Ok(());
    }
    let seg_path = csv_path.with_extension(SIDECAR_EXT);
    let mut seg = String::new();
    if let Some(label) = traj.task_label() {
        seg.push_str(&format!("task,{label}\n"));
    }
    for b in traj.behaviors() {
        seg.push_str(&format!("{},{},{}\n", b.label, b.start, b.end));
    }
    fs::write(&seg_path, seg).map_err(|e| Error::io(&seg_path, e))
}
