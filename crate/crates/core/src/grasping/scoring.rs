use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::hand::HandGeometry;
use super::{closing_region_points, GraspError, GraspHypothesis};
use crate::geometry::{PointCloud, Vec3};
use crate::seeds::rng_from_seed;

/// Surrogate confidence scorer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScorerSpec {
    /// Logistic model over cloud features inside the closing region.
    Geometric {
        #[serde(default)]
        weights: GeometricWeights,
    },
    /// Draws from Beta(8,2) for true labels and Beta(2,8) for false ones.
    NoisyOracle,
}

impl Default for ScorerSpec {
    fn default() -> Self {
        ScorerSpec::NoisyOracle
    }
}

impl ScorerSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ScorerSpec::Geometric { .. } => "geometric",
            ScorerSpec::NoisyOracle => "noisy_oracle",
        }
    }

    pub fn geometric() -> Self {
        ScorerSpec::Geometric {
            weights: GeometricWeights::default(),
        }
    }
}

/// Logistic weights, fitted offline against force-closure labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometricWeights {
    pub bias: f64,
    pub jaw_align_max: f64,
    pub jaw_align_min: f64,
    pub jaw_coverage: f64,
    pub closing_align: f64,
    pub normal_spread: f64,
    /// Depth of the band of points treated as touching a jaw, in meters.
    pub jaw_band: f64,
}

impl Default for GeometricWeights {
    fn default() -> Self {
        Self {
            bias: -6.32,
            jaw_align_max: 9.03,
            jaw_align_min: -1.23,
            jaw_coverage: 2.55,
            closing_align: -5.67,
            normal_spread: 6.52,
            jaw_band: 0.004,
        }
    }
}

/// Features of the cloud between the jaws. All zero when the closing region
/// is empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeometricFeatures {
    /// Larger of the two jaw alignments. A jaw's alignment is the mean
    /// `|n·y|` over the points within the jaw band of that side's extreme.
    pub jaw_align_max: f64,
    pub jaw_align_min: f64,
    /// Smaller of the two jaw coverages: the band's extent along approach
    /// and height, as a fraction of finger depth and hand height.
    pub jaw_coverage: f64,
    /// Mean `|n·y|` over the whole region.
    pub closing_align: f64,
    /// `1 - |mean normal|`; near zero on flat patches.
    pub normal_spread: f64,
}

struct Local {
    q: Vec3,
    n: Vec3,
}

fn extent(it: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

fn jaw(pts: &[Local], side: f64, band: f64, hand: &HandGeometry) -> (f64, f64) {
    let top = pts.iter().map(|p| side * p.q.y).fold(f64::NEG_INFINITY, f64::max);
    let sel: Vec<&Local> = pts.iter().filter(|p| side * p.q.y >= top - band).collect();
    let align = sel.iter().map(|p| p.n.y.abs()).sum::<f64>() / sel.len() as f64;
    let cover = 0.5
        * (extent(sel.iter().map(|p| p.q.x)) / hand.finger_depth
            + extent(sel.iter().map(|p| p.q.z)) / hand.hand_height);
    (align, cover)
}

pub fn geometric_features(
    g: &GraspHypothesis,
    cloud: &PointCloud,
    hand: &HandGeometry,
    jaw_band: f64,
) -> GeometricFeatures {
    let idx = closing_region_points(g, cloud, hand);
    let Some(normals) = &cloud.normals else {
        return GeometricFeatures::default();
    };
    if idx.is_empty() {
        return GeometricFeatures::default();
    }
    let pts: Vec<Local> = idx
        .iter()
        .map(|&i| Local {
            q: g.pose.inverse_transform_point(&cloud.points[i]),
            n: g.pose.rotation().tr_mul(&normals[i]),
        })
        .collect();
    let (a_pos, c_pos) = jaw(&pts, 1.0, jaw_band, hand);
    let (a_neg, c_neg) = jaw(&pts, -1.0, jaw_band, hand);
    let m = pts.len() as f64;
    let mean_n: Vec3 = pts.iter().map(|p| p.n).sum::<Vec3>() / m;
    GeometricFeatures {
        jaw_align_max: a_pos.max(a_neg),
        jaw_align_min: a_pos.min(a_neg),
        jaw_coverage: c_pos.min(c_neg),
        closing_align: pts.iter().map(|p| p.n.y.abs()).sum::<f64>() / m,
        normal_spread: 1.0 - mean_n.norm(),
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Confidence score in `[0, 1]`, deterministic under `seed`.
pub fn score_candidate(
    g: &GraspHypothesis,
    cloud: &PointCloud,
    hand: &HandGeometry,
    scorer: &ScorerSpec,
    seed: u64,
) -> Result<f64, GraspError> {
    match scorer {
        ScorerSpec::Geometric { weights: w } => {
            if !(w.jaw_band > 0.0) {
                return Err(GraspError::InvalidScorer("jaw_band must be positive".into()));
            }
            let f = geometric_features(g, cloud, hand, w.jaw_band);
            let z = w.bias
                + w.jaw_align_max * f.jaw_align_max
                + w.jaw_align_min * f.jaw_align_min
                + w.jaw_coverage * f.jaw_coverage
                + w.closing_align * f.closing_align
                + w.normal_spread * f.normal_spread;
            Ok(logistic(z))
        }
        ScorerSpec::NoisyOracle => {
            let label = g.label.ok_or(GraspError::MissingLabel)?;
            let (a, b) = if label { (8.0, 2.0) } else { (2.0, 8.0) };
            let beta = Beta::<f64>::new(a, b).expect("constant Beta parameters are valid");
            Ok(beta.sample(&mut rng_from_seed(seed)).clamp(0.0, 1.0))
        }
    }
}
