//! Rigid transforms, point clouds, closed triangle meshes and surface-local
//! frames.

mod cloud;
mod frame;
mod mesh;
mod pose;

use std::path::Path;

use thiserror::Error;

pub use cloud::{PointCloud, PointIndex};
pub use frame::{
    estimate_local_frame, estimate_local_frame_indexed, LocalFrame, DEFAULT_FRAME_RADIUS,
    MIN_FRAME_NEIGHBORS,
};
pub use mesh::{ray_triangle, RayHit, ShapeClass, TriangleMesh};
pub use pose::{axis_angle_matrix, frame_from_xy, rotation_angle, Pose, ROTATION_TOLERANCE};

/// Column vector in meters (points) or unitless (directions).
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("mesh has no triangles or zero area")]
    EmptyMesh,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh is not watertight: {0}")]
    NotWatertight(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("only {found} neighbors in radius, need {required}")]
    InsufficientNeighbors { found: usize, required: usize },
    #[error("neighborhood covariance is rank deficient")]
    DegenerateNeighborhood,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl GeometryError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        GeometryError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Samples `n` area-uniform surface points with outward normals.
pub fn sample_mesh_surface(
    mesh: &TriangleMesh,
    n: usize,
    seed: u64,
) -> Result<Vec<(Vec3, Vec3)>, GeometryError> {
    mesh.sample_surface(n, seed)
}
