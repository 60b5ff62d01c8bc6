//! Viewpoints expressed in grasp frames, labeled view samples, and the five
//! kernel-smoothed map channels.
//!
//! Angles use the grasp's *view frame*: the grasp frame turned 180° about
//! `z`, so that a camera behind the hand looking along the approach axis
//! sits at azimuth 0, elevation 0. Azimuth grows toward `-y` of the grasp
//! frame and elevation toward `+z`.

mod grid;
mod io;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Pose, Vec3};
use crate::grasping::GraspHypothesis;

pub use grid::{smooth, Channel, MapMeta, SmoothingParams, ViewMapGrid};
pub use io::{load_map, read_map, save_map, write_map, FORMAT_VERSION, MAGIC};

#[derive(Debug, Error)]
pub enum ViewMapError {
    #[error("direction has zero length")]
    ZeroVector,
    #[error("cannot merge sample sets with thresholds {0} and {1}")]
    ThresholdMismatch(f64, f64),
    #[error("invalid smoothing parameters: {0}")]
    InvalidParams(String),
    #[error("maps have different grids or thresholds")]
    GridMismatch,
    #[error("nothing to average")]
    EmptyAverage,
    #[error("map file version {found}, expected {expected}")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt map file: {0}")]
    CorruptFile(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Expresses a viewpoint position in the grasp frame: `T(g)⁻¹ v`.
pub fn project_viewpoint(view_position: &Vec3, grasp_pose: &Pose) -> Vec3 {
    grasp_pose.inverse().transform_point(view_position)
}

/// Azimuth `atan2(v̂·y, v̂·x)` and elevation `asin(v̂·z)` of a direction.
/// At the poles the azimuth is 0.
pub fn direction_to_angles(v: &Vec3) -> Result<(f64, f64), ViewMapError> {
    let n = v.norm();
    if !(n > 1e-9) {
        return Err(ViewMapError::ZeroVector);
    }
    let u = v / n;
    let elevation = u.z.clamp(-1.0, 1.0).asin();
    let horizontal = u.x.hypot(u.y);
    let azimuth = if horizontal <= 1e-12 {
        0.0
    } else {
        crate::simcam::wrap_angle(u.y.atan2(u.x))
    };
    Ok((azimuth, elevation))
}

/// The frame in which map angles are measured: `grasp_pose ∘ Rz(π)`.
pub fn view_frame(grasp_pose: &Pose) -> Pose {
    let rz_pi = Pose::from_parts_unchecked(
        Matrix3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0)),
        Vec3::zeros(),
    );
    grasp_pose.compose(&rz_pi)
}

/// Map angles `(azimuth, elevation)` of a camera at `view_position` relative
/// to a grasp. Head-on (camera behind the hand on the approach axis) is `(0, 0)`.
pub fn view_angles(view_position: &Vec3, grasp_pose: &Pose) -> Result<(f64, f64), ViewMapError> {
    direction_to_angles(&project_viewpoint(view_position, &view_frame(grasp_pose)))
}

/// A view expressed in one grasp's frame, with that grasp's score and label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewSample {
    pub azimuth: f64,
    pub elevation: f64,
    pub score: f64,
    pub label: bool,
}

/// One sample per scored and labeled grasp detected from `view_position`.
/// Grasps without a label are skipped.
pub fn samples_for_view(view_position: &Vec3, grasps: &[GraspHypothesis]) -> Vec<ViewSample> {
    grasps
        .iter()
        .filter_map(|g| {
            let label = g.label?;
            let (azimuth, elevation) = view_angles(view_position, &g.pose).ok()?;
            Some(ViewSample {
                azimuth,
                elevation,
                score: g.score,
                label,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    TruePositive,
    FalsePositive,
    TrueNegative,
    FalseNegative,
}

impl ViewSample {
    pub fn outcome(&self, threshold: f64) -> Outcome {
        match (self.score >= threshold, self.label) {
            (true, true) => Outcome::TruePositive,
            (true, false) => Outcome::FalsePositive,
            (false, false) => Outcome::TrueNegative,
            (false, true) => Outcome::FalseNegative,
        }
    }
}

/// Labeled view samples together with the decision threshold that
/// classifies them.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSampleSet {
    pub threshold: f64,
    pub samples: Vec<ViewSample>,
}

impl RawSampleSet {
    pub fn empty(threshold: f64) -> Self {
        Self {
            threshold,
            samples: Vec::new(),
        }
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for s in &self.samples {
            match s.outcome(self.threshold) {
                Outcome::TruePositive => c.tp += 1,
                Outcome::FalsePositive => c.fp += 1,
                Outcome::TrueNegative => c.tn += 1,
                Outcome::FalseNegative => c.fn_ += 1,
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn accumulate(samples: Vec<ViewSample>, threshold: f64) -> RawSampleSet {
    RawSampleSet { threshold, samples }
}

pub fn merge(a: &RawSampleSet, b: &RawSampleSet) -> Result<RawSampleSet, ViewMapError> {
    if a.threshold.to_bits() != b.threshold.to_bits() {
        return Err(ViewMapError::ThresholdMismatch(a.threshold, b.threshold));
    }
    let mut samples = a.samples.clone();
    samples.extend_from_slice(&b.samples);
    Ok(RawSampleSet {
        threshold: a.threshold,
        samples,
    })
}
