use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::grasping::{CandidateParams, HandGeometry, ScorerSpec, DEFAULT_MU, POSITIVE_THRESHOLD};
use crate::selection::{NeighborhoodSpec, StrategyKind};
use crate::simcam::CameraModel;
use crate::viewmap::SmoothingParams;

/// Closed interval `[lo, hi]`.
pub type Interval = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_box: usize,
    pub n_cylinder: usize,
    /// Box edge lengths along x, y and z.
    pub box_dims: [Interval; 3],
    pub cylinder_radius: Interval,
    pub cylinder_height: Interval,
    pub cylinder_segments: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_box: 25,
            n_cylinder: 14,
            box_dims: [[0.04, 0.08], [0.06, 0.14], [0.08, 0.20]],
            cylinder_radius: [0.02, 0.04],
            cylinder_height: [0.08, 0.20],
            cylinder_segments: 32,
            seed: 7,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let check = |name: &str, iv: &Interval| {
            if iv[0].is_finite() && iv[1].is_finite() && iv[0] > 0.0 && iv[0] <= iv[1] {
                Ok(())
            } else {
                Err(HarnessError::Config(format!("corpus.{name} must be positive and ordered")))
            }
        };
        for (k, iv) in self.box_dims.iter().enumerate() {
            check(&format!("box_dims[{k}]"), iv)?;
        }
        check("cylinder_radius", &self.cylinder_radius)?;
        check("cylinder_height", &self.cylinder_height)?;
        if self.cylinder_segments < 3 {
            return Err(HarnessError::Config("corpus.cylinder_segments must be at least 3".into()));
        }
        Ok(())
    }
}

/// Where cameras may sit around an object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewSphereSpec {
    /// Camera distance from the object center (m).
    pub radius: f64,
    /// Elevation band (rad) above the object's horizontal midplane.
    pub elevation: Interval,
}

impl Default for ViewSphereSpec {
    fn default() -> Self {
        Self {
            radius: 0.4,
            elevation: [0.05, 1.40],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfflineEvalSpec {
    pub trials_per_class: usize,
    /// Candidate views available to every strategy in a trial.
    pub pool_size: usize,
    pub strategies: Vec<StrategyKind>,
    /// Random views tried per trial when looking for a force-closure target.
    pub target_attempts: usize,
}

impl Default for OfflineEvalSpec {
    fn default() -> Self {
        Self {
            trials_per_class: 50,
            pool_size: 600,
            strategies: vec![StrategyKind::Smart, StrategyKind::Random, StrategyKind::HeadOn],
            target_attempts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceSpec {
    pub trials: usize,
    /// Radius of the ball around the target used to re-detect (m).
    pub ball_radius: f64,
    /// Camera distance for the alignment view (m).
    pub alignment_distance: f64,
}

impl Default for SequenceSpec {
    fn default() -> Self {
        Self {
            trials: 500,
            ball_radius: 0.08,
            alignment_distance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub views_per_object: usize,
    pub n_values: Vec<usize>,
    pub threshold: f64,
    pub mu: f64,
    /// Build one map per shape class instead of using the box map everywhere.
    pub per_class_maps: bool,
    pub corpus: CorpusSpec,
    pub camera: CameraModel,
    pub view_sphere: ViewSphereSpec,
    pub hand: HandGeometry,
    pub candidate_params: CandidateParams,
    pub scorer: ScorerSpec,
    pub smoothing: SmoothingParams,
    pub neighborhood: NeighborhoodSpec,
    pub offline: OfflineEvalSpec,
    pub sequence: SequenceSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            views_per_object: 80,
            n_values: vec![1, 5, 10, 25, 50, 100],
            threshold: POSITIVE_THRESHOLD,
            mu: DEFAULT_MU,
            per_class_maps: false,
            corpus: CorpusSpec::default(),
            camera: CameraModel::default(),
            view_sphere: ViewSphereSpec::default(),
            hand: HandGeometry::default(),
            candidate_params: CandidateParams::default(),
            scorer: ScorerSpec::default(),
            smoothing: SmoothingParams::default(),
            neighborhood: NeighborhoodSpec::default(),
            offline: OfflineEvalSpec::default(),
            sequence: SequenceSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The config re-serialized with every field spelled out, in a fixed order.
    pub fn canonical_text(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of [`Self::canonical_text`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg = |e: String| HarnessError::Config(e);
        self.corpus.validate()?;
        self.camera.validate().map_err(|e| cfg(format!("camera: {e}")))?;
        self.hand.validate().map_err(|e| cfg(format!("hand: {e}")))?;
        self.candidate_params
            .validate()
            .map_err(|e| cfg(format!("candidate_params: {e}")))?;
        self.smoothing.validate().map_err(|e| cfg(format!("smoothing: {e}")))?;
        if let ScorerSpec::Geometric { weights } = &self.scorer {
            if !(weights.jaw_band > 0.0) {
                return Err(cfg("scorer.weights.jaw_band must be positive".into()));
            }
        }
        if self.views_per_object == 0 {
            return Err(cfg("views_per_object must be at least 1".into()));
        }
        if self.n_values.contains(&0) {
            return Err(cfg("n_values must be positive".into()));
        }
        if !(self.threshold >= 0.0 && self.threshold <= 1.0) {
            return Err(cfg("threshold must lie in [0, 1]".into()));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(cfg("mu must be positive".into()));
        }
        let n = &self.neighborhood;
        if !(n.max_translation > 0.0 && n.max_rotation > 0.0) {
            return Err(cfg("neighborhood bounds must be positive".into()));
        }
        let vs = &self.view_sphere;
        if !(vs.radius >= self.camera.min_depth && vs.radius <= self.camera.max_depth) {
            return Err(cfg("view_sphere.radius must lie within the camera depth range".into()));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(vs.elevation[0] <= vs.elevation[1] && vs.elevation[0] >= -half_pi && vs.elevation[1] <= half_pi) {
            return Err(cfg("view_sphere.elevation must be an ordered band within [-π/2, π/2]".into()));
        }
        if self.offline.pool_size == 0 || self.offline.target_attempts == 0 {
            return Err(cfg("offline.pool_size and offline.target_attempts must be positive".into()));
        }
        let s = &self.sequence;
        if !(s.ball_radius > 0.0 && s.alignment_distance >= self.camera.min_depth) {
            return Err(cfg(
                "sequence.ball_radius must be positive and alignment_distance at least the camera's min_depth".into(),
            ));
        }
        Ok(())
    }
}
