//! Viewpoint selection strategies, target-neighborhood pruning, top-n
//! accuracy, and snapping to the generated candidate closest to a target.

use std::cmp::Ordering;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{rotation_angle, PointCloud};
use crate::grasping::{generate_candidates_near, CandidateParams, GraspError, GraspHypothesis, HandGeometry};
use crate::seeds::rng_from_seed;
use crate::simcam::ViewpointSpec;
use crate::viewmap::{view_angles, Channel, ViewMapGrid};

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("no viewpoints to choose from")]
    EmptyAvailableSet,
    #[error("the smart strategy needs a map")]
    MissingMap,
    #[error("no candidates found near the target")]
    NoCandidatesFound,
    #[error("grasp {0} has no ground-truth label")]
    UnlabeledGrasp(usize),
    #[error(transparent)]
    Grasp(#[from] GraspError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeighborhoodSpec {
    /// Meters.
    pub max_translation: f64,
    /// Radians.
    pub max_rotation: f64,
    /// Treat a grasp and its finger-swapped twin as the same grasp.
    pub identify_flip: bool,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        Self {
            max_translation: 0.02,
            max_rotation: 20f64.to_radians(),
            identify_flip: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Smart,
    HeadOn,
    Random,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Smart => "smart",
            StrategyKind::HeadOn => "head_on",
            StrategyKind::Random => "random",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "smart" => Ok(StrategyKind::Smart),
            "head_on" | "head-on" => Ok(StrategyKind::HeadOn),
            "random" => Ok(StrategyKind::Random),
            other => Err(format!("unknown strategy `{other}`, expected smart, head_on or random")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StrategySpec<'a> {
    pub kind: StrategyKind,
    pub map: Option<&'a ViewMapGrid>,
    pub seed: u64,
}

impl<'a> StrategySpec<'a> {
    pub fn smart(map: &'a ViewMapGrid) -> Self {
        Self {
            kind: StrategyKind::Smart,
            map: Some(map),
            seed: 0,
        }
    }

    pub fn head_on() -> Self {
        Self {
            kind: StrategyKind::HeadOn,
            map: None,
            seed: 0,
        }
    }

    pub fn random(seed: u64) -> Self {
        Self {
            kind: StrategyKind::Random,
            map: None,
            seed,
        }
    }
}

/// Picks one of `available` for observing `target`; see [`select_viewpoint_index`].
pub fn select_viewpoint(
    strategy: &StrategySpec,
    target: &GraspHypothesis,
    available: &[ViewpointSpec],
) -> Result<ViewpointSpec, SelectionError> {
    select_viewpoint_index(strategy, target, available).map(|i| available[i])
}

/// Index of the chosen viewpoint.
///
/// * Smart: the largest `tp_minus_fp` at the view's map angles, bilinearly
///   interpolated; views outside the map window are never preferred over
///   views inside it. Ties go to the smallest |elevation|, then the smallest
///   |azimuth|, then the earliest view.
/// * HeadOn: the view whose direction from the grasp is closest to straight
///   behind the hand along the approach axis.
/// * Random: uniform, seeded.
pub fn select_viewpoint_index(
    strategy: &StrategySpec,
    target: &GraspHypothesis,
    available: &[ViewpointSpec],
) -> Result<usize, SelectionError> {
    if available.is_empty() {
        return Err(SelectionError::EmptyAvailableSet);
    }
    match strategy.kind {
        StrategyKind::Smart => {
            let map = strategy.map.ok_or(SelectionError::MissingMap)?;
            let keyed: Vec<(f64, f64, f64)> = available
                .iter()
                .map(|v| match view_angles(&v.position(), &target.pose) {
                    Ok((az, el)) => {
                        let val = map.interpolate(Channel::TpMinusFp, az, el).unwrap_or(f64::NEG_INFINITY);
                        (val, el.abs(), az.abs())
                    }
                    Err(_) => (f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY),
                })
                .collect();
            let better = |a: &(f64, f64, f64), b: &(f64, f64, f64)| -> bool {
                match a.0.total_cmp(&b.0) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => (a.1, a.2) < (b.1, b.2),
                }
            };
            let mut best = 0;
            for i in 1..keyed.len() {
                if better(&keyed[i], &keyed[best]) {
                    best = i;
                }
            }
            Ok(best)
        }
        StrategyKind::HeadOn => {
            let back = -target.approach();
            let p = target.position();
            let mut best = 0;
            let mut best_angle = f64::INFINITY;
            for (i, v) in available.iter().enumerate() {
                let d = v.position() - p;
                let angle = d.cross(&back).norm().atan2(d.dot(&back));
                if angle < best_angle {
                    best_angle = angle;
                    best = i;
                }
            }
            Ok(best)
        }
        StrategyKind::Random => Ok(rng_from_seed(strategy.seed).random_range(0..available.len())),
    }
}

/// Translation distance and geodesic rotation angle between two grasps.
pub fn grasp_distance(a: &GraspHypothesis, b: &GraspHypothesis) -> (f64, f64) {
    let t = (a.position() - b.position()).norm();
    let r = rotation_angle(&(a.pose.rotation().transpose() * b.pose.rotation()));
    (t, r)
}

/// Rotation angle between two grasps, optionally taking the smaller angle
/// over `b` and its finger-swapped twin.
pub fn rotation_distance(a: &GraspHypothesis, b: &GraspHypothesis, identify_flip: bool) -> f64 {
    let r = grasp_distance(a, b).1;
    if identify_flip {
        r.min(grasp_distance(a, &b.flipped()).1)
    } else {
        r
    }
}

pub fn in_neighborhood(g: &GraspHypothesis, target: &GraspHypothesis, spec: &NeighborhoodSpec) -> bool {
    let t = (g.position() - target.position()).norm();
    t <= spec.max_translation && rotation_distance(target, g, spec.identify_flip) <= spec.max_rotation
}

/// Grasps within the target's neighborhood, in input order.
pub fn prune_to_neighborhood(
    grasps: &[GraspHypothesis],
    target: &GraspHypothesis,
    spec: &NeighborhoodSpec,
) -> Vec<GraspHypothesis> {
    grasps.iter().filter(|g| in_neighborhood(g, target, spec)).copied().collect()
}

/// Sorts by descending score; equal scores are ordered by the bit patterns
/// of their row-major poses.
pub fn rank_by_score(grasps: &[GraspHypothesis]) -> Vec<GraspHypothesis> {
    let key = |g: &GraspHypothesis| g.pose.to_row_major().map(|v| v.to_bits());
    let mut out = grasps.to_vec();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| key(a).cmp(&key(b))));
    out
}

/// Fraction of true labels among the `n` highest-scoring grasps, or `None`
/// for an empty list.
pub fn top_n_accuracy(grasps: &[GraspHypothesis], n: usize) -> Result<Option<f64>, SelectionError> {
    if let Some(i) = grasps.iter().position(|g| g.label.is_none()) {
        return Err(SelectionError::UnlabeledGrasp(i));
    }
    if grasps.is_empty() || n == 0 {
        return Ok(None);
    }
    let ranked = rank_by_score(grasps);
    let k = n.min(ranked.len());
    let hits = ranked[..k].iter().filter(|g| g.label == Some(true)).count();
    Ok(Some(hits as f64 / k as f64))
}

/// Regenerates candidates from seed points within `radius` of the target
/// and returns the one with the smallest rotation distance to it, ties
/// broken by translation distance and then generation order. The finger
/// swap is identified when measuring rotation.
pub fn alignment_refine(
    cloud: &PointCloud,
    target: &GraspHypothesis,
    hand: &HandGeometry,
    params: &CandidateParams,
    radius: f64,
    seed: u64,
) -> Result<GraspHypothesis, SelectionError> {
    let cands = generate_candidates_near(cloud, hand, params, seed, &target.position(), radius)?;
    closest_aligned(&cands, target).ok_or(SelectionError::NoCandidatesFound)
}

/// The candidate best aligned with `target`: smallest flip-aware rotation
/// distance, rotations within 1e-9 rad counted as equal, then smallest
/// translation distance, then earliest.
pub fn closest_aligned(cands: &[GraspHypothesis], target: &GraspHypothesis) -> Option<GraspHypothesis> {
    let mut best: Option<(f64, f64, usize)> = None;
    for (i, g) in cands.iter().enumerate() {
        let r = rotation_distance(target, g, true);
        let t = (g.position() - target.position()).norm();
        let replace = match best {
            None => true,
            Some((br, bt, _)) => r < br - 1e-9 || ((r - br).abs() <= 1e-9 && t < bt),
        };
        if replace {
            best = Some((r, t, i));
        }
    }
    best.map(|(_, _, i)| cands[i])
}
