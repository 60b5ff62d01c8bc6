use serde::{Deserialize, Serialize};

use super::{GraspError, GraspHypothesis};
use crate::geometry::{PointCloud, Vec3};

/// Two-finger parallel-jaw hand, dimensions in meters.
///
/// In the grasp frame the closing region is the box
/// `|x| <= finger_depth/2, |y| <= aperture/2, |z| <= hand_height/2`. Each
/// finger occupies `aperture/2 < |y| <= aperture/2 + finger_width` over the
/// same `x` and `z` span. The base sits behind the fingers,
/// `-finger_depth/2 - finger_width <= x < -finger_depth/2`, as wide as the
/// outer finger faces and as thick as a finger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandGeometry {
    pub aperture: f64,
    pub finger_depth: f64,
    pub finger_width: f64,
    pub hand_height: f64,
}

impl Default for HandGeometry {
    fn default() -> Self {
        Self {
            aperture: 0.085,
            finger_depth: 0.06,
            finger_width: 0.01,
            hand_height: 0.02,
        }
    }
}

/// Which part of the hand a grasp-frame point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandRegion {
    Closing,
    Finger,
    Base,
    Outside,
}

impl HandGeometry {
    pub fn validate(&self) -> Result<(), GraspError> {
        let dims = [self.aperture, self.finger_depth, self.finger_width, self.hand_height];
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(GraspError::InvalidHand("all dimensions must be positive".into()));
        }
        if self.aperture <= 2.0 * self.finger_width {
            return Err(GraspError::InvalidHand(
                "aperture must exceed twice the finger width".into(),
            ));
        }
        Ok(())
    }

    pub fn base_depth(&self) -> f64 {
        self.finger_width
    }

    /// Radius around the closing-region center that contains the whole hand.
    pub fn bounding_radius(&self) -> f64 {
        let x = 0.5 * self.finger_depth + self.base_depth();
        let y = 0.5 * self.aperture + self.finger_width;
        let z = 0.5 * self.hand_height;
        (x * x + y * y + z * z).sqrt()
    }

    pub fn classify(&self, p: &Vec3) -> HandRegion {
        let hd = 0.5 * self.finger_depth;
        let ha = 0.5 * self.aperture;
        let outer = ha + self.finger_width;
        if p.z.abs() > 0.5 * self.hand_height || p.y.abs() > outer {
            return HandRegion::Outside;
        }
        if p.x.abs() <= hd {
            if p.y.abs() <= ha {
                HandRegion::Closing
            } else {
                HandRegion::Finger
            }
        } else if p.x < -hd && p.x >= -hd - self.base_depth() {
            HandRegion::Base
        } else {
            HandRegion::Outside
        }
    }
}

/// Indices of cloud points inside the closing region of `g`.
pub fn closing_region_points(g: &GraspHypothesis, cloud: &PointCloud, hand: &HandGeometry) -> Vec<usize> {
    closing_region_subset(g, cloud, hand, 0..cloud.len())
}

pub(crate) fn closing_region_subset(
    g: &GraspHypothesis,
    cloud: &PointCloud,
    hand: &HandGeometry,
    indices: impl IntoIterator<Item = usize>,
) -> Vec<usize> {
    indices
        .into_iter()
        .filter(|&i| {
            hand.classify(&g.pose.inverse_transform_point(&cloud.points[i])) == HandRegion::Closing
        })
        .collect()
}

/// True iff any cloud point lies inside a finger or the base.
pub fn check_hand_collision(g: &GraspHypothesis, cloud: &PointCloud, hand: &HandGeometry) -> bool {
    collides_subset(g, cloud, hand, 0..cloud.len())
}

pub(crate) fn collides_subset(
    g: &GraspHypothesis,
    cloud: &PointCloud,
    hand: &HandGeometry,
    indices: impl IntoIterator<Item = usize>,
) -> bool {
    indices.into_iter().any(|i| {
        matches!(
            hand.classify(&g.pose.inverse_transform_point(&cloud.points[i])),
            HandRegion::Finger | HandRegion::Base
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    fn cloud(points: Vec<Vec3>) -> PointCloud {
        PointCloud::new(points, Vec3::new(0.0, 0.0, 1.0))
    }

    #[test]
    fn empty_cloud() {
        let g = GraspHypothesis::new(Pose::identity());
        let h = HandGeometry::default();
        assert!(closing_region_points(&g, &cloud(vec![]), &h).is_empty());
        assert!(!check_hand_collision(&g, &cloud(vec![]), &h));
    }

    #[test]
    fn origin_is_in_closing_region() {
        let g = GraspHypothesis::new(Pose::identity());
        let h = HandGeometry::default();
        assert_eq!(closing_region_points(&g, &cloud(vec![Vec3::zeros()]), &h), vec![0]);
    }

    #[test]
    fn finger_center_collides() {
        let h = HandGeometry::default();
        let g = GraspHypothesis::new(Pose::rot_z(0.4).with_translation(Vec3::new(0.1, 0.2, 0.3)));
        let local = Vec3::new(0.0, -(0.5 * h.aperture + 0.5 * h.finger_width), 0.0);
        let c = cloud(vec![g.pose.transform_point(&local)]);
        assert!(check_hand_collision(&g, &c, &h));
        assert!(closing_region_points(&g, &c, &h).is_empty());
    }

    #[test]
    fn base_collides_and_open_front_does_not() {
        let h = HandGeometry::default();
        let g = GraspHypothesis::new(Pose::identity());
        let base = Vec3::new(-0.5 * h.finger_depth - 0.5 * h.base_depth(), 0.0, 0.0);
        assert!(check_hand_collision(&g, &cloud(vec![base]), &h));
        let front = Vec3::new(0.5 * h.finger_depth + 1e-3, 0.0, 0.0);
        assert!(!check_hand_collision(&g, &cloud(vec![front]), &h));
    }

    #[test]
    fn validation() {
        assert!(HandGeometry::default().validate().is_ok());
        let bad = HandGeometry {
            aperture: 0.02,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
