//! Action grammars for 3D end-effector trajectories.
//!
//! Trajectories are segmented with discrete or accumulated Frenet frames,
//! quantized with direct curve coding into symbol strings, length-aligned, and
//! classified with linear or kernel SVMs under a repeated k-fold protocol.

pub mod alignment;
pub mod classifier;
pub mod cli;
pub mod data_io;
pub mod dcc;
pub mod error;
pub mod frame;
pub mod trajectory;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
