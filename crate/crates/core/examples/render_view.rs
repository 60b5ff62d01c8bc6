//! Renders a box from a few viewpoints and writes each cloud as PLY.
//!
//! cargo run --release --example render_view -- [out_dir]

use std::path::PathBuf;

use viewgrasp::geometry::{Pose, TriangleMesh, Vec3};
use viewgrasp::simcam::{render_cloud, viewpoint_to_pose, CameraModel, SceneObject, ViewpointSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out)?;
    let mesh = TriangleMesh::cuboid(0.06, 0.10, 0.16)?;
    let scene = [SceneObject {
        mesh: &mesh,
        pose: Pose::identity(),
    }];
    let camera = CameraModel::default();
    for (k, (az, el)) in [(0.0, 0.3), (1.2, 0.6), (2.5, 1.2)].into_iter().enumerate() {
        let view = ViewpointSpec::new(az, el, 0.4, Vec3::zeros());
        let cloud = render_cloud(&scene, &camera, &viewpoint_to_pose(&view)?, k as u64);
        let path = out.join(format!("box_view_{k}.ply"));
        cloud.save_ply(&path, &[format!("azimuth {az} elevation {el}")])?;
        println!("azimuth {az:.1} elevation {el:.1}: {} points -> {}", cloud.len(), path.display());
    }
    Ok(())
}
