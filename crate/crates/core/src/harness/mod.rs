//! Experiment pipelines: procedural corpus, map building, offline strategy
//! comparison, simulated view sequences, and CSV reports.

mod config;
mod corpus;
mod offline;
mod pipeline;
mod report;
mod sequence;

use std::path::Path;

use thiserror::Error;

use crate::geometry::{GeometryError, ShapeClass};
use crate::grasping::GraspError;
use crate::selection::SelectionError;
use crate::simcam::CameraError;
use crate::viewmap::ViewMapError;

pub use config::{CorpusSpec, ExperimentConfig, Interval, OfflineEvalSpec, SequenceSpec, ViewSphereSpec};
pub use corpus::{build_corpus, CorpusObject};
pub use pipeline::{
    build_map, build_map_detailed, detect, render_view, ClassMaps, MapBuild, ObjectScene,
};
pub use offline::{run_offline_eval, OfflineReport, ResultRow, ScoreHistogram, TrialRecord};
pub use report::{emit_report, emit_sequence_report, footer_line, ReportFiles};
pub use sequence::{run_sequence_eval, run_sequence_orders, SequenceOrder, SequenceResult, SequenceTrial, StageRecord};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("corpus has no {0} objects")]
    NoObjectsOfClass(ShapeClass),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("object {object}, view {view}: {message}")]
    AtView {
        object: usize,
        view: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grasp(#[from] GraspError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    ViewMap(#[from] ViewMapError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn at_view(object: usize, view: usize, e: impl std::fmt::Display) -> Self {
        HarnessError::AtView {
            object,
            view,
            message: e.to_string(),
        }
    }

    /// True for errors caused by the configuration rather than by running it.
    pub fn is_config_error(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::NoObjectsOfClass(_) | HarnessError::NoTrials)
    }
}

/// Seed-path tags separating the random streams of different pipelines.
pub(crate) mod tags {
    pub const MAP: u64 = 1;
    pub const OFFLINE: u64 = 2;
    pub const SEQUENCE: u64 = 3;
}
