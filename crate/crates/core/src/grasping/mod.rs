//! Parallel-jaw hand model, candidate generation, force-closure labels and
//! surrogate confidence scores.
//!
//! Grasp frame convention used throughout the crate: `x` is the approach
//! axis (from the hand toward the object), `y` the closing axis along which
//! the fingers translate, `z = x × y`. The origin is the center of the
//! closing region.

mod candidates;
mod closure;
mod hand;
mod scoring;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Pose, Vec3};

pub use candidates::{
    generate_candidates, generate_candidates_near, CandidateParams, Variant,
};
pub use closure::{contact_analysis, evaluate_force_closure, ContactReport, FingerContact};
pub use hand::{check_hand_collision, closing_region_points, HandGeometry, HandRegion};
pub use scoring::{geometric_features, score_candidate, GeometricFeatures, GeometricWeights, ScorerSpec};

/// Default friction coefficient for force-closure labels.
pub const DEFAULT_MU: f64 = 0.5;

/// A hypothesis is a predicted positive iff `score >= POSITIVE_THRESHOLD`.
pub const POSITIVE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum GraspError {
    #[error("invalid hand geometry: {0}")]
    InvalidHand(String),
    #[error("invalid candidate parameters: {0}")]
    InvalidParams(String),
    #[error("at least one finger touches nothing")]
    NoContact,
    #[error("the noisy-oracle scorer needs a ground-truth label")]
    MissingLabel,
    #[error("invalid scorer: {0}")]
    InvalidScorer(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("candidate dump: {0}")]
    Dump(String),
}

/// A 6-DOF grasp pose with a confidence score and an optional ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspHypothesis {
    pub pose: Pose,
    pub score: f64,
    pub label: Option<bool>,
}

impl GraspHypothesis {
    pub fn new(pose: Pose) -> Self {
        Self {
            pose,
            score: 0.0,
            label: None,
        }
    }

    pub fn position(&self) -> Vec3 {
        *self.pose.translation()
    }

    pub fn approach(&self) -> Vec3 {
        self.pose.axis(0)
    }

    pub fn closing(&self) -> Vec3 {
        self.pose.axis(1)
    }

    /// The same grasp with the fingers swapped: rotated 180° about the approach axis.
    pub fn flipped(&self) -> Self {
        let flip = Pose::from_parts_unchecked(
            nalgebra::Matrix3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)),
            Vec3::zeros(),
        );
        Self {
            pose: self.pose.compose(&flip),
            ..*self
        }
    }

    pub fn is_predicted_positive(&self, threshold: f64) -> bool {
        self.score >= threshold
    }
}

#[derive(Serialize, Deserialize)]
struct GraspRecord {
    pose: Vec<f64>,
    score: f64,
    label: Option<bool>,
}

/// Writes one JSON object per line: `{"pose": [12 floats], "score": s, "label": l}`.
/// The pose is the row-major rotation followed by the translation.
pub fn write_grasps_jsonl<W: Write>(mut w: W, grasps: &[GraspHypothesis]) -> Result<(), GraspError> {
    for g in grasps {
        let rec = GraspRecord {
            pose: g.pose.to_row_major().to_vec(),
            score: g.score,
            label: g.label,
        };
        let line = serde_json::to_string(&rec).map_err(|e| GraspError::Dump(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| GraspError::Dump(e.to_string()))?;
    }
    Ok(())
}

pub fn read_grasps_jsonl<R: BufRead>(r: R) -> Result<Vec<GraspHypothesis>, GraspError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| GraspError::Dump(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraspRecord = serde_json::from_str(&line)
            .map_err(|e| GraspError::Dump(format!("line {}: {e}", i + 1)))?;
        let pose: [f64; 12] = rec
            .pose
            .try_into()
            .map_err(|_| GraspError::Dump(format!("line {}: pose needs 12 values", i + 1)))?;
        out.push(GraspHypothesis {
            pose: Pose::from_row_major(&pose)?,
            score: rec.score,
            label: rec.label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_swaps_closing_and_keeps_approach() {
        let g = GraspHypothesis::new(
            Pose::from_axis_angle(&Vec3::new(0.2, 0.4, 1.0), 0.8).with_translation(Vec3::new(0.1, 0.0, 0.3)),
        );
        let f = g.flipped();
        assert_eq!(f.approach(), g.approach());
        assert_eq!(f.closing(), -g.closing());
        assert_eq!(f.position(), g.position());
        assert_eq!(f.flipped().pose, g.pose);
    }

    #[test]
    fn jsonl_round_trip() {
        let mut g = GraspHypothesis::new(Pose::rot_z(0.3).with_translation(Vec3::new(1.0, 2.0, 3.0)));
        g.score = 0.625;
        g.label = Some(true);
        let h = GraspHypothesis::new(Pose::identity());
        let mut buf = Vec::new();
        write_grasps_jsonl(&mut buf, &[g, h]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back = read_grasps_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, vec![g, h]);
    }
}
