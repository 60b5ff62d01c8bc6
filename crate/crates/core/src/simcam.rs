//! Simulated depth camera: renders self-occluded point clouds of posed meshes
//! and samples viewpoints on a sphere around a target.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ray_triangle, PointCloud, Pose, TriangleMesh, Vec3};
use crate::seeds::rng_from_seed;

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("optical axis is parallel to the up hint")]
    GimbalDegenerate,
    #[error("empty or inverted elevation range [{0}, {1}]")]
    EmptyRange(f64, f64),
    #[error("invalid camera model: {0}")]
    InvalidCamera(String),
    #[error("invalid viewpoint: {0}")]
    InvalidViewpoint(String),
}

/// Pinhole depth sensor. The optical axis is the camera frame's −z axis,
/// image x grows to the right (+x) and image rows grow downward (−y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    /// Focal length in pixels.
    pub focal_length: f64,
    pub min_depth: f64,
    pub max_depth: f64,
    /// Standard deviation of range noise along each pixel ray (m).
    pub noise_sigma: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            focal_length: 120.0,
            min_depth: 0.20,
            max_depth: 1.5,
            noise_sigma: 0.001,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), CameraError> {
        if self.width == 0 || self.height == 0 {
            return Err(CameraError::InvalidCamera("resolution must be nonzero".into()));
        }
        if !(self.focal_length > 0.0) {
            return Err(CameraError::InvalidCamera("focal_length must be positive".into()));
        }
        if !(0.0 < self.min_depth && self.min_depth < self.max_depth) {
            return Err(CameraError::InvalidCamera(
                "need 0 < min_depth < max_depth".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(CameraError::InvalidCamera("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// A camera placement on a sphere of `radius` around `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewpointSpec {
    pub azimuth: f64,
    pub elevation: f64,
    pub radius: f64,
    pub target: Vec3,
    pub up_hint: Vec3,
}

impl ViewpointSpec {
    pub fn new(azimuth: f64, elevation: f64, radius: f64, target: Vec3) -> Self {
        Self {
            azimuth,
            elevation,
            radius,
            target,
            up_hint: Vector3::z(),
        }
    }

    /// Unit vector from the target toward the camera.
    pub fn direction(&self) -> Vec3 {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Vector3::new(ce * ca, ce * sa, se)
    }

    pub fn position(&self) -> Vec3 {
        self.target + self.direction() * self.radius
    }

    /// Viewpoint placed at `position` looking at `target`; angles are derived.
    pub fn looking_at(position: &Vec3, target: &Vec3, up_hint: &Vec3) -> Self {
        let d = position - target;
        let radius = d.norm();
        let u = d / radius;
        let elevation = u.z.clamp(-1.0, 1.0).asin();
        let azimuth = if u.x.abs() < 1e-15 && u.y.abs() < 1e-15 {
            0.0
        } else {
            wrap_angle(u.y.atan2(u.x))
        };
        Self {
            azimuth,
            elevation,
            radius,
            target: *target,
            up_hint: *up_hint,
        }
    }

    pub fn validate(&self, cam: Option<&CameraModel>) -> Result<(), CameraError> {
        if !(self.azimuth > -PI && self.azimuth <= PI) {
            return Err(CameraError::InvalidViewpoint(format!(
                "azimuth {} outside (-pi, pi]",
                self.azimuth
            )));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&self.elevation) {
            return Err(CameraError::InvalidViewpoint(format!(
                "elevation {} outside [-pi/2, pi/2]",
                self.elevation
            )));
        }
        let min_r = cam.map_or(0.0, |c| c.min_depth);
        if !(self.radius > 0.0 && self.radius >= min_r) {
            return Err(CameraError::InvalidViewpoint(format!(
                "radius {} below {}",
                self.radius, min_r
            )));
        }
        Ok(())
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    if w <= -PI {
        w += TAU;
    }
    w
}

/// Camera-to-world pose for a viewpoint: the camera sits on the sphere,
/// its −z axis points at the target and its +y axis leans toward `up_hint`.
pub fn viewpoint_to_pose(v: &ViewpointSpec) -> Result<Pose, CameraError> {
    let back = v.direction();
    let optical = -back;
    let up = v
        .up_hint
        .try_normalize(1e-12)
        .ok_or(CameraError::GimbalDegenerate)?;
    if optical.dot(&up).abs() > 1.0 - 1e-6 {
        return Err(CameraError::GimbalDegenerate);
    }
    let z = back;
    let y = (up - z * z.dot(&up)).normalize();
    let x = y.cross(&z);
    Ok(Pose::from_parts_unchecked(
        Matrix3::from_columns(&[x, y, z]),
        v.position(),
    ))
}

/// One mesh placed in the world.
#[derive(Debug, Clone, Copy)]
pub struct SceneObject<'a> {
    pub mesh: &'a TriangleMesh,
    pub pose: Pose,
}

/// Ray-cast every pixel against the scene and return the visible surface
/// points (world frame) with normals estimated from the depth image.
pub fn render_cloud(
    scene: &[SceneObject<'_>],
    cam: &CameraModel,
    cam_pose: &Pose,
    seed: u64,
) -> PointCloud {
    let (w, h) = (cam.width as usize, cam.height as usize);
    let (cx, cy) = (cam.width as f64 / 2.0, cam.height as f64 / 2.0);
    let f = cam.focal_length;
    let to_cam = cam_pose.inverse();

    // depth buffer in camera frame: t is the depth because ray dirs have z = -1
    let mut depth = vec![f64::INFINITY; w * h];
    for obj in scene {
        let to_camera = to_cam.compose(&obj.pose);
        let verts: Vec<Vec3> = obj
            .mesh
            .vertices()
            .iter()
            .map(|v| to_camera.transform_point(v))
            .collect();
        for tri in obj.mesh.triangles() {
            let [a, b, c] = tri.map(|i| verts[i as usize]);
            let depths = [-a.z, -b.z, -c.z];
            if depths.iter().all(|&d| d <= 0.0) {
                continue;
            }
            let (i0, i1, j0, j1) = if depths.iter().all(|&d| d > 1e-9) {
                let mut umin = f64::INFINITY;
                let mut umax = f64::NEG_INFINITY;
                let mut vmin = f64::INFINITY;
                let mut vmax = f64::NEG_INFINITY;
                for p in [a, b, c] {
                    let u = cx + f * p.x / -p.z;
                    let v = cy - f * p.y / -p.z;
                    umin = umin.min(u);
                    umax = umax.max(u);
                    vmin = vmin.min(v);
                    vmax = vmax.max(v);
                }
                let clamp = |x: f64, hi: usize| x.max(0.0).min(hi as f64) as usize;
                (
                    clamp((umin - 1.0).floor(), w),
                    clamp((umax + 1.0).ceil(), w),
                    clamp((vmin - 1.0).floor(), h),
                    clamp((vmax + 1.0).ceil(), h),
                )
            } else {
                (0, w, 0, h)
            };
            for j in j0..j1 {
                for i in i0..i1 {
                    let dir = pixel_ray(i, j, cx, cy, f);
                    if let Some(t) = ray_triangle(&Vector3::zeros(), &dir, &a, &b, &c) {
                        let k = j * w + i;
                        if t > 0.0 && t < depth[k] {
                            depth[k] = t;
                        }
                    }
                }
            }
        }
    }

    let mut rng = rng_from_seed(seed);
    let noise = (cam.noise_sigma > 0.0).then(|| Normal::new(0.0, cam.noise_sigma).unwrap());
    let mut cam_points: Vec<Option<Vec3>> = vec![None; w * h];
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            let t = depth[k];
            if !t.is_finite() {
                continue;
            }
            let dir = pixel_ray(i, j, cx, cy, f);
            let len = dir.norm();
            let range = t * len + noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
            let p = dir * (range / len);
            let d = -p.z;
            if d >= cam.min_depth && d <= cam.max_depth {
                cam_points[k] = Some(p);
            }
        }
    }

    let mut points = Vec::new();
    let mut normals = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let Some(p) = cam_points[j * w + i] else { continue };
            let n = depth_image_normal(&cam_points, w, h, i, j, &p);
            points.push(cam_pose.transform_point(&p));
            normals.push(cam_pose.transform_vector(&n));
        }
    }
    let origin = *cam_pose.translation();
    PointCloud::new(points, origin)
        .with_normals(normals)
        .expect("one normal per point")
}

fn pixel_ray(i: usize, j: usize, cx: f64, cy: f64, f: f64) -> Vec3 {
    Vector3::new(
        (i as f64 + 0.5 - cx) / f,
        -(j as f64 + 0.5 - cy) / f,
        -1.0,
    )
}

/// Cross product of neighboring-pixel differences, oriented toward the camera.
/// Neighbors across a depth discontinuity are skipped.
fn depth_image_normal(
    pts: &[Option<Vec3>],
    w: usize,
    h: usize,
    i: usize,
    j: usize,
    p: &Vec3,
) -> Vec3 {
    let max_jump = 0.01_f64.max(0.05 * -p.z);
    let get = |ii: isize, jj: isize| -> Option<Vec3> {
        if ii < 0 || jj < 0 || ii >= w as isize || jj >= h as isize {
            return None;
        }
        pts[jj as usize * w + ii as usize].filter(|q| (q.z - p.z).abs() <= max_jump)
    };
    let (ii, jj) = (i as isize, j as isize);
    let horiz = get(ii + 1, jj).map(|q| q - p).or_else(|| get(ii - 1, jj).map(|q| p - q));
    let vert = get(ii, jj + 1).map(|q| p - q).or_else(|| get(ii, jj - 1).map(|q| q - p));
    let toward_cam = -p.normalize();
    let n = match (horiz, vert) {
        (Some(a), Some(b)) => a.cross(&b).try_normalize(1e-15).unwrap_or(toward_cam),
        _ => toward_cam,
    };
    if n.dot(&toward_cam) < 0.0 { -n } else { n }
}

/// Samples `n` viewpoints area-uniformly on the spherical band
/// `elevation_range` (azimuth uniform on (−π, π]).
pub fn sample_view_sphere(
    n: usize,
    elevation_range: (f64, f64),
    radius: f64,
    target: Vec3,
    seed: u64,
) -> Result<Vec<ViewpointSpec>, CameraError> {
    let (lo, hi) = elevation_range;
    if !(lo <= hi) || lo < -FRAC_PI_2 || hi > FRAC_PI_2 || n == 0 {
        return Err(CameraError::EmptyRange(lo, hi));
    }
    let mut rng = rng_from_seed(seed);
    let (slo, shi) = (lo.sin(), hi.sin());
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let azimuth = PI - TAU * u;
            let elevation = if lo == hi {
                lo
            } else {
                let s: f64 = rng.random_range(slo..=shi);
                s.asin().clamp(lo, hi)
            };
            ViewpointSpec::new(azimuth, elevation, radius, target)
        })
        .collect())
}
