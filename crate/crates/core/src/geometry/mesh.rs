use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use rand::Rng;
use rand::distr::{Distribution, weighted::WeightedIndex};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Pose, Vec3};
use crate::seeds::rng_from_seed;

/// Coarse object category used to group viewpoint maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    BoxLike,
    CylinderLike,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 2] = [ShapeClass::BoxLike, ShapeClass::CylinderLike];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeClass::BoxLike => "box",
            ShapeClass::CylinderLike => "cylinder",
        }
    }
}

impl std::fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ShapeClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "box" | "box_like" => Ok(ShapeClass::BoxLike),
            "cylinder" | "cylinder_like" => Ok(ShapeClass::CylinderLike),
            other => Err(format!("unknown shape class `{other}`")),
        }
    }
}

/// First intersection of a ray with a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub triangle: usize,
    pub point: Vec3,
}

/// Closed, consistently oriented triangle mesh with outward-facing normals.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    shape_class: ShapeClass,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
}

impl TriangleMesh {
    /// Validates indices and watertightness: every undirected edge must be
    /// shared by exactly two triangles that traverse it in opposite directions.
    pub fn new(
        vertices: Vec<Vec3>,
        triangles: Vec<[u32; 3]>,
        shape_class: ShapeClass,
    ) -> Result<Self, GeometryError> {
        if triangles.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let nv = vertices.len() as u32;
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(GeometryError::InvalidMesh(format!(
                    "triangle {i} references a missing vertex"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GeometryError::InvalidMesh(format!(
                    "triangle {i} is degenerate"
                )));
            }
        }
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &triangles {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 || directed.get(&(b, a)).copied() != Some(1) {
                return Err(GeometryError::NotWatertight(format!(
                    "edge ({a}, {b}) is not shared by exactly two opposed triangles"
                )));
            }
        }
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            let cr = (b - a).cross(&(c - a));
            let n = cr.norm();
            areas.push(0.5 * n);
            normals.push(if n > 0.0 { cr / n } else { Vector3::zeros() });
        }
        Ok(Self {
            vertices,
            triangles,
            shape_class,
            normals,
            areas,
        })
    }

    /// Axis-aligned box with the given full extents, centered on the origin.
    pub fn cuboid(dx: f64, dy: f64, dz: f64) -> Result<Self, GeometryError> {
        if !(dx > 0.0 && dy > 0.0 && dz > 0.0) {
            return Err(GeometryError::InvalidMesh("box extents must be positive".into()));
        }
        let (hx, hy, hz) = (dx / 2.0, dy / 2.0, dz / 2.0);
        let vertices = (0..8)
            .map(|i| {
                Vector3::new(
                    if i & 1 == 0 { -hx } else { hx },
                    if i & 2 == 0 { -hy } else { hy },
                    if i & 4 == 0 { -hz } else { hz },
                )
            })
            .collect();
        let triangles = vec![
            [0, 2, 1],
            [1, 2, 3], // -z
            [4, 5, 6],
            [5, 7, 6], // +z
            [0, 1, 4],
            [1, 5, 4], // -y
            [2, 6, 3],
            [3, 6, 7], // +y
            [0, 4, 2],
            [2, 4, 6], // -x
            [1, 3, 5],
            [3, 7, 5], // +x
        ];
        Self::new(vertices, triangles, ShapeClass::BoxLike)
    }

    /// Capped cylinder around the z-axis, centered on the origin.
    pub fn cylinder(radius: f64, height: f64, segments: usize) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && height > 0.0) || segments < 3 {
            return Err(GeometryError::InvalidMesh(
                "cylinder needs positive dimensions and at least 3 segments".into(),
            ));
        }
        let hz = height / 2.0;
        let n = segments as u32;
        let mut vertices = Vec::with_capacity(2 * segments + 2);
        for k in 0..segments {
            let a = std::f64::consts::TAU * k as f64 / segments as f64;
            let (s, c) = a.sin_cos();
            vertices.push(Vector3::new(radius * c, radius * s, -hz));
            vertices.push(Vector3::new(radius * c, radius * s, hz));
        }
        let bottom = 2 * n;
        let top = 2 * n + 1;
        vertices.push(Vector3::new(0.0, 0.0, -hz));
        vertices.push(Vector3::new(0.0, 0.0, hz));
        let mut triangles = Vec::with_capacity(4 * segments);
        for k in 0..n {
            let b0 = 2 * k;
            let t0 = 2 * k + 1;
            let b1 = 2 * ((k + 1) % n);
            let t1 = b1 + 1;
            triangles.push([b0, b1, t1]);
            triangles.push([b0, t1, t0]);
            triangles.push([bottom, b1, b0]);
            triangles.push([top, t0, t1]);
        }
        Self::new(vertices, triangles, ShapeClass::CylinderLike)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn shape_class(&self) -> ShapeClass {
        self.shape_class
    }

    /// Outward unit normal of triangle `i`.
    pub fn face_normal(&self, i: usize) -> Vec3 {
        self.normals[i]
    }

    pub fn triangle_vertices(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v as usize])
    }

    pub fn surface_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// A copy with every vertex moved by `pose`.
    pub fn transformed(&self, pose: &Pose) -> TriangleMesh {
        let vertices = self.vertices.iter().map(|v| pose.transform_point(v)).collect();
        let normals = self.normals.iter().map(|n| pose.transform_vector(n)).collect();
        TriangleMesh {
            vertices,
            triangles: self.triangles.clone(),
            shape_class: self.shape_class,
            normals,
            areas: self.areas.clone(),
        }
    }

    /// Closest intersection with parameter in `(t_min, t_max)`; both sides of
    /// every triangle are hit.
    pub fn intersect_ray(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        let mut limit = t_max;
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_vertices(i);
            if let Some(t) = ray_triangle(origin, dir, &a, &b, &c) {
                if t > t_min && t < limit {
                    limit = t;
                    best = Some(RayHit {
                        t,
                        triangle: i,
                        point: origin + dir * t,
                    });
                }
            }
        }
        best
    }

    /// Samples `n` surface points uniformly by area, paired with outward normals.
    pub fn sample_surface(&self, n: usize, seed: u64) -> Result<Vec<(Vec3, Vec3)>, GeometryError> {
        if n == 0 || self.surface_area() <= 0.0 {
            return Err(GeometryError::EmptyMesh);
        }
        let dist = WeightedIndex::new(&self.areas).map_err(|_| GeometryError::EmptyMesh)?;
        let mut rng = rng_from_seed(seed);
        Ok((0..n)
            .map(|_| {
                let i = dist.sample(&mut rng);
                let [a, b, c] = self.triangle_vertices(i);
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let s = r1.sqrt();
                let p = a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2);
                (p, self.normals[i])
            })
            .collect())
    }

    /// ASCII Wavefront OBJ (vertices and triangular faces only).
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# shape_class {}", self.shape_class);
        for v in &self.vertices {
            let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn from_obj(text: &str, default_class: ShapeClass) -> Result<Self, GeometryError> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut class = default_class;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let mut it = line.split_whitespace();
            let bad = |msg: &str| GeometryError::Parse(format!("line {}: {msg}", lineno + 1));
            match it.next() {
                Some("v") => {
                    let coords: Vec<f64> = it
                        .take(3)
                        .map(|s| s.parse::<f64>().map_err(|_| bad("bad vertex coordinate")))
                        .collect::<Result<_, _>>()?;
                    if coords.len() != 3 {
                        return Err(bad("vertex needs three coordinates"));
                    }
                    vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let idx: Vec<u32> = it
                        .map(|s| {
                            let first = s.split('/').next().unwrap_or("");
                            first
                                .parse::<u32>()
                                .ok()
                                .filter(|&i| i >= 1)
                                .map(|i| i - 1)
                                .ok_or_else(|| bad("bad face index"))
                        })
                        .collect::<Result<_, _>>()?;
                    if idx.len() != 3 {
                        return Err(bad("only triangular faces are supported"));
                    }
                    triangles.push([idx[0], idx[1], idx[2]]);
                }
                Some("#") => {
                    if it.next() == Some("shape_class") {
                        if let Some(c) = it.next().and_then(|c| c.parse().ok()) {
                            class = c;
                        }
                    }
                }
                _ => {}
            }
        }
        Self::new(vertices, triangles, class)
    }

    pub fn save_obj(&self, path: &Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_obj()).map_err(|e| GeometryError::io(path, e))
    }

    pub fn load_obj(path: &Path, default_class: ShapeClass) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|e| GeometryError::io(path, e))?;
        Self::from_obj(&text, default_class)
    }
}

/// Möller–Trumbore; returns the ray parameter of a hit on either side.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    const EPS: f64 = 1e-14;
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < EPS * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}
