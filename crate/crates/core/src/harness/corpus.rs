use rand::Rng as _;

use super::{CorpusSpec, HarnessError};
use crate::geometry::{ShapeClass, TriangleMesh};
use crate::seeds::{derive_seed, rng_from_seed};

/// One corpus mesh, centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusObject {
    pub id: usize,
    pub mesh: TriangleMesh,
}

impl CorpusObject {
    pub fn shape_class(&self) -> ShapeClass {
        self.mesh.shape_class()
    }
}

fn draw(rng: &mut crate::seeds::Rng, iv: &[f64; 2]) -> f64 {
    if iv[0] == iv[1] {
        iv[0]
    } else {
        rng.random_range(iv[0]..=iv[1])
    }
}

/// `n_box` boxes followed by `n_cylinder` capped cylinders, dimensions drawn
/// uniformly from the configured intervals. Object `i` uses its own random
/// stream, so adding objects never changes earlier ones.
pub fn build_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusObject>, HarnessError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.n_box + spec.n_cylinder);
    for id in 0..spec.n_box + spec.n_cylinder {
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[id as u64]));
        let mesh = if id < spec.n_box {
            let [x, y, z] = &spec.box_dims;
            TriangleMesh::cuboid(draw(&mut rng, x), draw(&mut rng, y), draw(&mut rng, z))?
        } else {
            let r = draw(&mut rng, &spec.cylinder_radius);
            let h = draw(&mut rng, &spec.cylinder_height);
            TriangleMesh::cylinder(r, h, spec.cylinder_segments)?
        };
        out.push(CorpusObject { id, mesh });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_sizes_and_determinism() {
        let spec = CorpusSpec::default();
        let a = build_corpus(&spec).unwrap();
        assert_eq!(a.len(), 39);
        assert_eq!(a.iter().filter(|o| o.shape_class() == ShapeClass::BoxLike).count(), 25);
        assert_eq!(a.iter().filter(|o| o.shape_class() == ShapeClass::CylinderLike).count(), 14);
        assert_eq!(a, build_corpus(&spec).unwrap());
    }

    #[test]
    fn degenerate_interval_is_exact() {
        let spec = CorpusSpec {
            n_box: 1,
            n_cylinder: 1,
            box_dims: [[0.05, 0.05]; 3],
            cylinder_radius: [0.05, 0.05],
            cylinder_height: [0.05, 0.05],
            ..Default::default()
        };
        let objs = build_corpus(&spec).unwrap();
        let (lo, hi) = objs[0].mesh.bounds();
        assert_eq!(hi - lo, crate::geometry::Vec3::repeat(0.05));
        let (lo, hi) = objs[1].mesh.bounds();
        assert_eq!(hi.z - lo.z, 0.05);
        assert_eq!(hi.x, 0.05);
    }
}
