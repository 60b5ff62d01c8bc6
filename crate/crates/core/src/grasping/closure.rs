use super::{GraspError, GraspHypothesis, HandGeometry};
use crate::geometry::{Pose, TriangleMesh, Vec3};

/// Depth band (m) behind the first touching point that counts as the contact
/// patch. Stands in for a slightly compliant finger pad and makes the patch
/// normal independent of how finely the surface is tessellated.
pub const CONTACT_PATCH_DEPTH: f64 = 0.002;

/// First contact of one finger plate sweeping across the closing region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerContact {
    /// Travel from the finger's rest position to the first contact (m).
    pub depth: f64,
    /// Projected-area-weighted outward surface normal of the contact patch,
    /// in the grasp frame.
    pub normal: Vec3,
    /// Angle between `normal` and the direction facing this finger (rad).
    pub angle: f64,
}

/// Contacts of both fingers. `fingers[0]` sits on the `+y` side of the grasp
/// frame and closes along `-y`; `fingers[1]` is its mirror image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactReport {
    pub fingers: [FingerContact; 2],
    /// Distance between the two contact planes along the closing axis.
    pub separation: f64,
    /// Friction cone half-angle `atan(mu)`.
    pub cone_half_angle: f64,
    pub aperture: f64,
}

impl ContactReport {
    /// Both patch normals inside their friction cones and the contacts in
    /// jaw order, no wider than the aperture.
    pub fn is_force_closure(&self) -> bool {
        self.fingers.iter().all(|f| f.angle <= self.cone_half_angle)
            && self.separation >= 0.0
            && self.separation <= self.aperture
    }

    /// Smallest distance of either finger's angle to the cone boundary.
    pub fn boundary_margin(&self) -> f64 {
        self.fingers
            .iter()
            .map(|f| (f.angle - self.cone_half_angle).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ground-truth label: two-finger antipodal force closure of `g` on the mesh
/// placed at `object_pose`. A finger that touches nothing gives `false`.
pub fn evaluate_force_closure(
    mesh: &TriangleMesh,
    object_pose: &Pose,
    g: &GraspHypothesis,
    hand: &HandGeometry,
    mu: f64,
) -> bool {
    contact_analysis(mesh, object_pose, g, hand, mu).is_ok_and(|r| r.is_force_closure())
}

/// Closes both fingers along the closing axis and reports where and how
/// they first touch the mesh.
///
/// Each finger is a plate covering the closing region's `x` and `z` extent.
/// Every triangle is clipped to the region swept by the plate; the first
/// contact is the smallest travel over all clipped pieces. The patch normal
/// averages the normals of all surface within [`CONTACT_PATCH_DEPTH`] of that
/// contact, weighted by area projected onto the plate.
pub fn contact_analysis(
    mesh: &TriangleMesh,
    object_pose: &Pose,
    g: &GraspHypothesis,
    hand: &HandGeometry,
    mu: f64,
) -> Result<ContactReport, GraspError> {
    hand.validate()?;
    if !(mu > 0.0) {
        return Err(GraspError::InvalidParams("friction coefficient must be positive".into()));
    }
    let verts: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .map(|v| g.pose.inverse_transform_point(&object_pose.transform_point(v)))
        .collect();
    let to_grasp = g.pose.rotation().transpose() * object_pose.rotation();
    let normals: Vec<Vec3> = (0..mesh.triangles().len())
        .map(|i| to_grasp * mesh.face_normal(i))
        .collect();

    // The second finger is evaluated in a frame rotated 180° about x so both
    // fingers run through identical arithmetic; swapping fingers then maps
    // each computation onto the other one exactly.
    let mirror = |v: &Vec3| Vec3::new(v.x, -v.y, -v.z);
    let first = finger_contact(mesh, &verts, &normals, hand)?;
    let mverts: Vec<Vec3> = verts.iter().map(mirror).collect();
    let mnormals: Vec<Vec3> = normals.iter().map(mirror).collect();
    let mut second = finger_contact(mesh, &mverts, &mnormals, hand)?;
    second.normal = mirror(&second.normal);

    Ok(ContactReport {
        separation: hand.aperture - (first.depth + second.depth),
        fingers: [first, second],
        cone_half_angle: mu.atan(),
        aperture: hand.aperture,
    })
}

/// Contact of the finger on the `+y` side closing along `-y`. The returned
/// normal is in the same frame as `verts`.
fn finger_contact(
    mesh: &TriangleMesh,
    verts: &[Vec3],
    normals: &[Vec3],
    hand: &HandGeometry,
) -> Result<FingerContact, GraspError> {
    let hx = 0.5 * hand.finger_depth;
    let hy = 0.5 * hand.aperture;
    let hz = 0.5 * hand.hand_height;
    let inside_box = |poly: Vec<Vec3>| -> Vec<Vec3> {
        let poly = clip(poly, |p| p.x + hx);
        let poly = clip(poly, |p| hx - p.x);
        let poly = clip(poly, |p| p.z + hz);
        let poly = clip(poly, |p| hz - p.z);
        let poly = clip(poly, |p| hy - p.y);
        clip(poly, |p| p.y + hy)
    };

    let mut pieces: Vec<(usize, Vec<Vec3>)> = Vec::new();
    let mut top = f64::NEG_INFINITY;
    for (i, t) in mesh.triangles().iter().enumerate() {
        let tri = [verts[t[0] as usize], verts[t[1] as usize], verts[t[2] as usize]];
        let (lo, hi) = tri.iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), v| (lo.inf(v), hi.sup(v)),
        );
        if hi.x < -hx || lo.x > hx || hi.y < -hy || lo.y > hy || hi.z < -hz || lo.z > hz {
            continue;
        }
        let poly = inside_box(tri.to_vec());
        if poly.is_empty() {
            continue;
        }
        top = poly.iter().map(|p| p.y).fold(top, f64::max);
        pieces.push((i, poly));
    }
    if pieces.is_empty() {
        return Err(GraspError::NoContact);
    }
    let floor = top - CONTACT_PATCH_DEPTH;
    let mut weighted = Vec3::zeros();
    let mut plain = Vec3::zeros();
    for (i, poly) in pieces {
        let patch = clip(poly, |p| p.y - floor);
        if patch.is_empty() {
            continue;
        }
        weighted += normals[i] * projected_area(&patch);
        plain += normals[i];
    }
    let normal = weighted
        .try_normalize(1e-300)
        .or_else(|| plain.try_normalize(1e-300))
        .ok_or(GraspError::NoContact)?;
    let facing = Vec3::y();
    let angle = normal.cross(&facing).norm().atan2(normal.dot(&facing));
    Ok(FingerContact {
        depth: hy - top,
        normal,
        angle,
    })
}

/// Keeps the part of a convex polygon where `f >= 0` (`f` affine).
fn clip(poly: Vec<Vec3>, f: impl Fn(&Vec3) -> f64) -> Vec<Vec3> {
    if poly.is_empty() {
        return poly;
    }
    let vals: Vec<f64> = poly.iter().map(&f).collect();
    if vals.iter().all(|&v| v >= 0.0) {
        return poly;
    }
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        let (a, b) = (poly[i], poly[j]);
        let (fa, fb) = (vals[i], vals[j]);
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Area of the polygon's projection onto the `xz` plane.
fn projected_area(poly: &[Vec3]) -> f64 {
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        twice += poly[i].x * poly[j].z - poly[j].x * poly[i].z;
    }
    0.5 * twice.abs()
}
