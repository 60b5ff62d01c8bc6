use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SymmetricEigen};

use super::{GeometryError, PointCloud, PointIndex, Vec3};

/// Minimum neighbor count for a local frame.
pub const MIN_FRAME_NEIGHBORS: usize = 8;

/// Default neighborhood radius for frame estimation, on the order of a finger width.
pub const DEFAULT_FRAME_RADIUS: f64 = 0.01;

/// Below this principal curvature magnitude (1/m) a patch counts as flat.
const FLAT_CURVATURE: f64 = 5.0;
/// Principal curvatures closer than this fraction count as umbilic.
const UMBILIC_RATIO: f64 = 0.15;

/// Surface-local frame: normal, minor principal curvature direction and
/// their cross product, forming a right-handed triad
/// `(normal, curvature_axis, binormal)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vec3,
    pub normal: Vec3,
    pub curvature_axis: Vec3,
    pub binormal: Vec3,
}

impl LocalFrame {
    /// Columns `(normal, curvature_axis, binormal)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.normal, self.curvature_axis, self.binormal])
    }
}

/// Estimates a frame from all cloud points within `radius` of `center`.
pub fn estimate_local_frame(
    cloud: &PointCloud,
    center: &Vec3,
    radius: f64,
) -> Result<LocalFrame, GeometryError> {
    let r2 = radius * radius;
    let neighbors: Vec<Vec3> = cloud
        .points
        .iter()
        .filter(|p| (*p - center).norm_squared() <= r2)
        .copied()
        .collect();
    frame_from_neighbors(&neighbors, center, &cloud.view_origin)
}

/// Same as [`estimate_local_frame`] but uses a prebuilt index over `cloud.points`.
pub fn estimate_local_frame_indexed(
    cloud: &PointCloud,
    index: &PointIndex,
    center: &Vec3,
    radius: f64,
) -> Result<LocalFrame, GeometryError> {
    let neighbors: Vec<Vec3> = index
        .within(&cloud.points, center, radius)
        .into_iter()
        .map(|i| cloud.points[i])
        .collect();
    frame_from_neighbors(&neighbors, center, &cloud.view_origin)
}

fn frame_from_neighbors(
    neighbors: &[Vec3],
    center: &Vec3,
    view_origin: &Vec3,
) -> Result<LocalFrame, GeometryError> {
    if neighbors.len() < MIN_FRAME_NEIGHBORS {
        return Err(GeometryError::InsufficientNeighbors {
            found: neighbors.len(),
            required: MIN_FRAME_NEIGHBORS,
        });
    }
    let n = neighbors.len() as f64;
    let mean = neighbors.iter().sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for p in neighbors {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (l_mid, l_max) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if !(l_max > 0.0) || l_mid <= 1e-10 * l_max {
        return Err(GeometryError::DegenerateNeighborhood);
    }
    let mut normal: Vec3 = eig.eigenvectors.column(order[0]).into_owned();
    if normal.dot(&(view_origin - center)) < 0.0 {
        normal = -normal;
    }
    let largest: Vec3 = eig.eigenvectors.column(order[2]).into_owned();
    let t1 = (largest - normal * normal.dot(&largest)).normalize();
    let t2 = normal.cross(&t1);

    let curvature_axis = minor_curvature_direction(neighbors, &mean, &normal, &t1, &t2)
        .unwrap_or_else(|| canonical_sign(t1));
    let curvature_axis = (curvature_axis - normal * normal.dot(&curvature_axis)).normalize();
    let binormal = normal.cross(&curvature_axis);
    Ok(LocalFrame {
        origin: *center,
        normal,
        curvature_axis,
        binormal,
    })
}

/// Fits `h(u, v) = a u² + b uv + c v² + d u + e v + f` in the tangent plane and
/// returns the principal direction of smaller absolute curvature, or `None`
/// for flat or umbilic patches.
fn minor_curvature_direction(
    neighbors: &[Vec3],
    mean: &Vec3,
    normal: &Vec3,
    t1: &Vec3,
    t2: &Vec3,
) -> Option<Vec3> {
    if neighbors.len() < 6 {
        return None;
    }
    let rows = neighbors.len();
    let mut a = DMatrix::<f64>::zeros(rows, 6);
    let mut h = DVector::<f64>::zeros(rows);
    for (i, p) in neighbors.iter().enumerate() {
        let d = p - mean;
        let (u, v) = (d.dot(t1), d.dot(t2));
        a.row_mut(i).copy_from_slice(&[u * u, u * v, v * v, u, v, 1.0]);
        h[i] = d.dot(normal);
    }
    let coef = a.svd(true, true).solve(&h, 1e-12).ok()?;
    let hess = Matrix2::new(2.0 * coef[0], coef[1], coef[1], 2.0 * coef[2]);
    let eig = SymmetricEigen::new(hess);
    let (k0, k1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let (kmin_abs, kmax_abs) = (k0.abs().min(k1.abs()), k0.abs().max(k1.abs()));
    if kmax_abs < FLAT_CURVATURE || kmax_abs - kmin_abs < UMBILIC_RATIO * kmax_abs {
        return None;
    }
    let col = if k0.abs() <= k1.abs() { 0 } else { 1 };
    let dir2 = eig.eigenvectors.column(col);
    Some(canonical_sign(t1 * dir2[0] + t2 * dir2[1]))
}

/// Flips `v` so that its first non-negligible component is positive.
fn canonical_sign(v: Vec3) -> Vec3 {
    for c in v.iter() {
        if c.abs() > 1e-12 {
            return if *c < 0.0 { -v } else { v };
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn triad_error(f: &LocalFrame) -> f64 {
        let m = f.matrix();
        let orth = (m.transpose() * m - Matrix3::identity()).amax();
        orth.max((m.determinant() - 1.0).abs())
    }

    #[test]
    fn planar_patch_normal_points_to_sensor() {
        let mut pts = Vec::new();
        for i in -5..=5 {
            for j in -5..=5 {
                pts.push(Vector3::new(i as f64 * 0.002, j as f64 * 0.0015, 0.0));
            }
        }
        let cloud = PointCloud::new(pts, Vector3::new(0.0, 0.0, 0.5));
        let f = estimate_local_frame(&cloud, &Vector3::zeros(), 0.01).unwrap();
        assert!((f.normal - Vector3::z()).norm() < 1e-9);
        assert!(f.curvature_axis.z.abs() < 1e-9);
        assert!(triad_error(&f) < 1e-6);
    }

    #[test]
    fn cylinder_curvature_axis_is_the_cylinder_axis() {
        let r = 0.04;
        let mut pts = Vec::new();
        for i in -12..=12 {
            for j in -12..=12 {
                let a = i as f64 * 0.0008 / r;
                pts.push(Vector3::new(r * a.cos(), r * a.sin(), j as f64 * 0.0008));
            }
        }
        let cloud = PointCloud::new(pts, Vector3::new(1.0, 0.0, 0.0));
        let f = estimate_local_frame(&cloud, &Vector3::new(r, 0.0, 0.0), 0.01).unwrap();
        let angle = f.curvature_axis.dot(&Vector3::z()).abs().min(1.0).acos();
        assert!(angle.to_degrees() < 5.0, "angle {}", angle.to_degrees());
        assert!((f.normal - Vector3::x()).norm() < 1e-3);
        assert!(triad_error(&f) < 1e-6);
    }

    #[test]
    fn too_few_points() {
        let pts = (0..5).map(|i| Vector3::new(i as f64 * 1e-3, 0.0, 0.0)).collect();
        let cloud = PointCloud::new(pts, Vector3::z());
        let err = estimate_local_frame(&cloud, &Vector3::zeros(), 0.01).unwrap_err();
        assert!(matches!(err, GeometryError::InsufficientNeighbors { found: 5, .. }));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = (0..12).map(|i| Vector3::new(i as f64 * 5e-4, 0.0, 0.0)).collect();
        let cloud = PointCloud::new(pts, Vector3::z());
        let err = estimate_local_frame(&cloud, &Vector3::zeros(), 0.01).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateNeighborhood));
    }
}
