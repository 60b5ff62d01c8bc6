//! Generates grasp candidates on a rendered cylinder, labels them by
//! antipodal force closure, and shows how the label rate changes with the
//! friction coefficient.
//!
//! cargo run --release --example force_closure

use viewgrasp::geometry::{Pose, TriangleMesh, Vec3};
use viewgrasp::grasping::{evaluate_force_closure, generate_candidates, CandidateParams, HandGeometry};
use viewgrasp::simcam::{render_cloud, viewpoint_to_pose, CameraModel, SceneObject, ViewpointSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = TriangleMesh::cylinder(0.03, 0.14, 32)?;
    let scene = [SceneObject {
        mesh: &mesh,
        pose: Pose::identity(),
    }];
    let view = ViewpointSpec::new(0.4, 0.5, 0.4, Vec3::zeros());
    let cloud = render_cloud(&scene, &CameraModel::default(), &viewpoint_to_pose(&view)?, 1);
    let hand = HandGeometry::default();
    let cands = generate_candidates(&cloud, &hand, &CandidateParams::default(), 2)?;
    println!("{} points, {} candidates", cloud.len(), cands.len());
    for mu in [0.1, 0.3, 0.5, 1.0] {
        let positive = cands
            .iter()
            .filter(|g| evaluate_force_closure(&mesh, &Pose::identity(), g, &hand, mu))
            .count();
        println!("mu {mu:.1}: {positive}/{} force closure", cands.len());
    }
    Ok(())
}
