use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::{GeometryError, Vec3};

/// A set of 3D points, optionally with unit normals, plus the sensor
/// position that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub view_origin: Vec3,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, view_origin: Vec3) -> Self {
        Self {
            points,
            normals: None,
            view_origin,
        }
    }

    /// Attaches normals, flipping each so it faces `view_origin`.
    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self, GeometryError> {
        if normals.len() != self.points.len() {
            return Err(GeometryError::InvalidCloud(format!(
                "{} normals for {} points",
                normals.len(),
                self.points.len()
            )));
        }
        let oriented = normals
            .into_iter()
            .zip(&self.points)
            .map(|(n, p)| {
                let n = n.try_normalize(1e-12).unwrap_or_else(|| {
                    (self.view_origin - p).try_normalize(1e-12).unwrap_or(Vector3::z())
                });
                if n.dot(&(self.view_origin - p)) < 0.0 { -n } else { n }
            })
            .collect();
        self.normals = Some(oriented);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Binary little-endian PLY with float32 `x y z` and, when present, `nx ny nz`.
    /// `comments` are written as header comment lines.
    pub fn write_ply<W: Write>(&self, mut w: W, comments: &[String]) -> Result<(), GeometryError> {
        let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
        for c in comments {
            header.push_str(&format!("comment {}\n", c.replace('\n', " ")));
        }
        let o = self.view_origin;
        header.push_str(&format!("comment view_origin {:?} {:?} {:?}\n", o.x, o.y, o.z));
        header.push_str(&format!("element vertex {}\n", self.points.len()));
        header.push_str("property float x\nproperty float y\nproperty float z\n");
        if self.normals.is_some() {
            header.push_str("property float nx\nproperty float ny\nproperty float nz\n");
        }
        header.push_str("end_header\n");
        let per = if self.normals.is_some() { 24 } else { 12 };
        let mut buf = Vec::with_capacity(header.len() + per * self.points.len());
        buf.extend_from_slice(header.as_bytes());
        for (i, p) in self.points.iter().enumerate() {
            for v in p.iter() {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
            if let Some(ns) = &self.normals {
                for v in ns[i].iter() {
                    buf.extend_from_slice(&(*v as f32).to_le_bytes());
                }
            }
        }
        w.write_all(&buf).map_err(|e| GeometryError::Parse(e.to_string()))
    }

    pub fn read_ply<R: Read>(r: R) -> Result<Self, GeometryError> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        let mut count = None;
        let mut props = Vec::new();
        let mut view_origin = Vector3::zeros();
        let mut binary_le = false;
        loop {
            line.clear();
            if r.read_line(&mut line).map_err(|e| GeometryError::Parse(e.to_string()))? == 0 {
                return Err(GeometryError::Parse("unexpected end of PLY header".into()));
            }
            let l = line.trim_end();
            let mut it = l.split_whitespace();
            match it.next() {
                Some("format") => binary_le = it.next() == Some("binary_little_endian"),
                Some("element") => {
                    if it.next() == Some("vertex") {
                        count = it.next().and_then(|s| s.parse::<usize>().ok());
                    }
                }
                Some("property") => {
                    let ty = it.next().unwrap_or("");
                    if ty != "float" {
                        return Err(GeometryError::Parse(format!("unsupported property type {ty}")));
                    }
                    props.push(it.next().unwrap_or("").to_string());
                }
                Some("comment") => {
                    if it.next() == Some("view_origin") {
                        let v: Vec<f64> = it.filter_map(|s| s.parse().ok()).collect();
                        if v.len() == 3 {
                            view_origin = Vector3::new(v[0], v[1], v[2]);
                        }
                    }
                }
                Some("end_header") => break,
                _ => {}
            }
        }
        if !binary_le {
            return Err(GeometryError::Parse("only binary_little_endian PLY is supported".into()));
        }
        let count = count.ok_or_else(|| GeometryError::Parse("missing vertex count".into()))?;
        let has_normals = match props.as_slice() {
            [x, y, z] if x == "x" && y == "y" && z == "z" => false,
            [x, y, z, a, b, c]
                if x == "x" && y == "y" && z == "z" && a == "nx" && b == "ny" && c == "nz" =>
            {
                true
            }
            _ => return Err(GeometryError::Parse(format!("unsupported properties {props:?}"))),
        };
        let mut points = Vec::with_capacity(count);
        let mut normals = Vec::with_capacity(if has_normals { count } else { 0 });
        let mut rec = vec![0u8; props.len() * 4];
        for _ in 0..count {
            r.read_exact(&mut rec).map_err(|e| GeometryError::Parse(e.to_string()))?;
            let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()) as f64;
            points.push(Vector3::new(f(0), f(1), f(2)));
            if has_normals {
                normals.push(Vector3::new(f(3), f(4), f(5)));
            }
        }
        Ok(PointCloud {
            points,
            normals: has_normals.then_some(normals),
            view_origin,
        })
    }

    pub fn save_ply(&self, path: &Path, comments: &[String]) -> Result<(), GeometryError> {
        let f = std::fs::File::create(path).map_err(|e| GeometryError::io(path, e))?;
        self.write_ply(std::io::BufWriter::new(f), comments)
    }

    pub fn load_ply(path: &Path) -> Result<Self, GeometryError> {
        let f = std::fs::File::open(path).map_err(|e| GeometryError::io(path, e))?;
        Self::read_ply(f)
    }
}

/// Uniform hash grid over a point set for fixed-radius neighbor queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    cell: f64,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl PointIndex {
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(cell, p)).or_default().push(i as u32);
        }
        Self { cell, cells }
    }

    fn key(cell: f64, p: &Vec3) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    /// Indices of points within `radius` of `center`, in ascending order.
    pub fn within(&self, points: &[Vec3], center: &Vec3, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        let lo = Self::key(self.cell, &(center - Vector3::repeat(radius)));
        let hi = Self::key(self.cell, &(center + Vector3::repeat(radius)));
        let mut out = Vec::new();
        for i in lo.0..=hi.0 {
            for j in lo.1..=hi.1 {
                for k in lo.2..=hi.2 {
                    if let Some(ids) = self.cells.get(&(i, j, k)) {
                        out.extend(
                            ids.iter()
                                .map(|&id| id as usize)
                                .filter(|&id| (points[id] - center).norm_squared() <= r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
