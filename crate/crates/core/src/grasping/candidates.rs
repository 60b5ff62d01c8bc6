use nalgebra::Matrix3;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hand::{closing_region_subset, collides_subset};
use super::{GraspError, GraspHypothesis, HandGeometry};
use crate::geometry::{
    axis_angle_matrix, estimate_local_frame_indexed, LocalFrame, PointCloud, PointIndex, Pose, Vec3,
    DEFAULT_FRAME_RADIUS,
};
use crate::seeds::rng_from_seed;

/// Number of hand placements tried along the approach axis per orientation.
const SLIDE_POSITIONS: usize = 16;

/// Axis that candidate orientations are rotated about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    CurvatureAxis,
    NormalAxis,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CurvatureAxis => "curvature_axis",
            Variant::NormalAxis => "normal_axis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateParams {
    pub n_samples: usize,
    pub orientation_steps: usize,
    pub variant: Variant,
    pub min_points_in_closing_region: usize,
    /// Neighborhood radius for the local surface frame at each seed point.
    pub frame_radius: f64,
}

impl Default for CandidateParams {
    fn default() -> Self {
        Self {
            n_samples: 60,
            orientation_steps: 8,
            variant: Variant::CurvatureAxis,
            min_points_in_closing_region: 10,
            frame_radius: DEFAULT_FRAME_RADIUS,
        }
    }
}

impl CandidateParams {
    pub fn validate(&self) -> Result<(), GraspError> {
        if self.n_samples == 0 || self.orientation_steps == 0 {
            return Err(GraspError::InvalidParams(
                "n_samples and orientation_steps must be at least 1".into(),
            ));
        }
        if !(self.frame_radius > 0.0 && self.frame_radius.is_finite()) {
            return Err(GraspError::InvalidParams("frame_radius must be positive".into()));
        }
        Ok(())
    }

    /// Rotation angles about the variant axis, evenly spaced in `[-π/2, π/2)`.
    pub fn orientation_angles(&self) -> Vec<f64> {
        let step = std::f64::consts::PI / self.orientation_steps as f64;
        (0..self.orientation_steps)
            .map(|k| -std::f64::consts::FRAC_PI_2 + k as f64 * step)
            .collect()
    }
}

/// Samples grasp candidates from a point cloud.
///
/// For each seed point the hand is oriented from the local surface frame
/// (approach against the normal), rotated about the variant's axis, and slid
/// along the approach axis from "fingertips at the seed" to "base at the
/// seed". Sliding stops at the first placement where the fingers or the base
/// hit a point; the deepest collision-free placement with enough points
/// between the jaws is emitted. Candidates are unscored and unlabeled.
pub fn generate_candidates(
    cloud: &PointCloud,
    hand: &HandGeometry,
    params: &CandidateParams,
    seed: u64,
) -> Result<Vec<GraspHypothesis>, GraspError> {
    generate_from(cloud, hand, params, seed, None)
}

/// Like [`generate_candidates`], but seed points are drawn only from cloud
/// points within `radius` of `center`.
pub fn generate_candidates_near(
    cloud: &PointCloud,
    hand: &HandGeometry,
    params: &CandidateParams,
    seed: u64,
    center: &Vec3,
    radius: f64,
) -> Result<Vec<GraspHypothesis>, GraspError> {
    generate_from(cloud, hand, params, seed, Some((*center, radius)))
}

fn generate_from(
    cloud: &PointCloud,
    hand: &HandGeometry,
    params: &CandidateParams,
    seed: u64,
    ball: Option<(Vec3, f64)>,
) -> Result<Vec<GraspHypothesis>, GraspError> {
    hand.validate()?;
    params.validate()?;
    if cloud.is_empty() {
        return Ok(Vec::new());
    }
    let reach = hand.bounding_radius() + 0.5 * hand.finger_depth + 0.01;
    let index = PointIndex::new(&cloud.points, reach.max(params.frame_radius));
    let eligible: Vec<usize> = match ball {
        Some((c, r)) => index.within(&cloud.points, &c, r),
        None => (0..cloud.len()).collect(),
    };
    if eligible.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = rng_from_seed(seed);
    let amount = params.n_samples.min(eligible.len());
    let mut picks = index::sample(&mut rng, eligible.len(), amount).into_vec();
    picks.sort_unstable();
    let seeds: Vec<usize> = picks.into_iter().map(|k| eligible[k]).collect();

    let per_seed: Vec<Vec<GraspHypothesis>> = seeds
        .par_iter()
        .map(|&si| {
            let p = cloud.points[si];
            let Ok(frame) = estimate_local_frame_indexed(cloud, &index, &p, params.frame_radius) else {
                return Vec::new();
            };
            let neighbors = index.within(&cloud.points, &p, reach);
            candidates_at_seed(cloud, hand, params, &frame, &neighbors)
        })
        .collect();
    Ok(per_seed.into_iter().flatten().collect())
}

fn candidates_at_seed(
    cloud: &PointCloud,
    hand: &HandGeometry,
    params: &CandidateParams,
    frame: &LocalFrame,
    neighbors: &[usize],
) -> Vec<GraspHypothesis> {
    let p = frame.origin;
    let base = Matrix3::from_columns(&[-frame.normal, frame.binormal, frame.curvature_axis]);
    let axis = match params.variant {
        Variant::CurvatureAxis => frame.curvature_axis,
        Variant::NormalAxis => frame.normal,
    };
    let hd = 0.5 * hand.finger_depth;
    let ha = 0.5 * hand.aperture;
    let outer = ha + hand.finger_width;
    let hh = 0.5 * hand.hand_height;
    let step = hand.finger_depth / (SLIDE_POSITIONS - 1) as f64;

    let mut out = Vec::new();
    let mut lane: Vec<(f64, bool)> = Vec::with_capacity(neighbors.len());
    for alpha in params.orientation_angles() {
        let rot = axis_angle_matrix(&axis, alpha) * base;
        // Points that can ever meet the hand while it slides along x, tagged
        // with whether they fall between the jaws.
        lane.clear();
        for &i in neighbors {
            let q = rot.tr_mul(&(cloud.points[i] - p));
            if q.z.abs() <= hh && q.y.abs() <= outer {
                lane.push((q.x, q.y.abs() <= ha));
            }
        }
        let mut best = None;
        for k in 0..SLIDE_POSITIONS {
            let s = -hd + k as f64 * step;
            let mut count = 0usize;
            let mut collides = false;
            for &(x, between) in &lane {
                let x = x - s;
                if x.abs() <= hd {
                    if between {
                        count += 1;
                    } else {
                        collides = true;
                        break;
                    }
                } else if x < -hd && x >= -hd - hand.base_depth() {
                    collides = true;
                    break;
                }
            }
            if collides {
                break;
            }
            if count >= params.min_points_in_closing_region {
                best = Some(s);
            }
        }
        let Some(s) = best else { continue };
        let pose = Pose::from_parts_unchecked(rot, p + rot.column(0) * s);
        let g = GraspHypothesis::new(pose);
        // Re-check with the public predicates so every emitted candidate
        // satisfies them exactly, rounding included.
        if !collides_subset(&g, cloud, hand, neighbors.iter().copied())
            && closing_region_subset(&g, cloud, hand, neighbors.iter().copied()).len()
                >= params.min_points_in_closing_region
        {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grasping::{check_hand_collision, closing_region_points};

    fn cylinder_side_cloud(r: f64) -> PointCloud {
        // Front half of a vertical cylinder seen from +x.
        let mut pts = Vec::new();
        let mut normals = Vec::new();
        for i in -30..=30 {
            let a = i as f64 * (std::f64::consts::FRAC_PI_2 * 0.95) / 30.0;
            for j in -25..=25 {
                pts.push(Vec3::new(r * a.cos(), r * a.sin(), j as f64 * 0.003));
                normals.push(Vec3::new(a.cos(), a.sin(), 0.0));
            }
        }
        PointCloud::new(pts, Vec3::new(0.4, 0.0, 0.0)).with_normals(normals).unwrap()
    }

    #[test]
    fn cylinder_side_yields_a_diameter_grasp() {
        let cloud = cylinder_side_cloud(0.03);
        let hand = HandGeometry {
            aperture: 0.08,
            ..Default::default()
        };
        let gs = generate_candidates(&cloud, &hand, &CandidateParams::default(), 3).unwrap();
        assert!(!gs.is_empty());
        let best = gs
            .iter()
            .map(|g| {
                let c = g.closing();
                // A diameter direction is horizontal, so the closing axis must
                // be nearly perpendicular to the cylinder axis.
                c.z.abs().min(1.0).asin().to_degrees()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 15.0, "closest closing axis is {best}° off the horizontal plane");
    }

    #[test]
    fn candidates_satisfy_constraints_and_are_deterministic() {
        let cloud = cylinder_side_cloud(0.025);
        let hand = HandGeometry::default();
        let params = CandidateParams {
            variant: Variant::NormalAxis,
            ..Default::default()
        };
        let a = generate_candidates(&cloud, &hand, &params, 11).unwrap();
        let b = generate_candidates(&cloud, &hand, &params, 11).unwrap();
        assert_eq!(a, b);
        for g in &a {
            assert!(!check_hand_collision(g, &cloud, &hand));
            assert!(closing_region_points(g, &cloud, &hand).len() >= params.min_points_in_closing_region);
            assert!(g.pose.is_valid(1e-9));
        }
    }

    #[test]
    fn orientation_angles_are_half_open() {
        let p = CandidateParams {
            orientation_steps: 4,
            ..Default::default()
        };
        let a = p.orientation_angles();
        assert_eq!(a.len(), 4);
        assert_eq!(a[0], -std::f64::consts::FRAC_PI_2);
        assert!(a[3] < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn empty_ball_gives_nothing() {
        let cloud = cylinder_side_cloud(0.03);
        let gs = generate_candidates_near(
            &cloud,
            &HandGeometry::default(),
            &CandidateParams::default(),
            1,
            &Vec3::new(5.0, 5.0, 5.0),
            0.08,
        )
        .unwrap();
        assert!(gs.is_empty());
    }
}
