//! Builds a small map, then asks each strategy which of a ring of cameras
//! it would use to look at one grasp.
//!
//! cargo run --release --example select_view

use nalgebra::Matrix3;
use viewgrasp::geometry::{Pose, ShapeClass, Vec3};
use viewgrasp::grasping::GraspHypothesis;
use viewgrasp::harness::{build_map, ExperimentConfig};
use viewgrasp::selection::{select_viewpoint, StrategySpec};
use viewgrasp::simcam::ViewpointSpec;
use viewgrasp::viewmap::view_angles;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::default();
    config.corpus.n_box = 4;
    config.views_per_object = 20;
    let map = build_map(&config, ShapeClass::BoxLike)?;
    println!("map from {} samples", map.sample_count);

    // Approach straight down, fingers closing along world x.
    let axes = Matrix3::from_columns(&[-Vec3::z(), Vec3::x(), -Vec3::y()]);
    let target = GraspHypothesis::new(Pose::new(axes, Vec3::new(0.0, 0.0, 0.05))?);
    let ring: Vec<ViewpointSpec> = (0..36)
        .flat_map(|i| {
            [0.2, 0.6, 1.0, 1.4].map(|el| ViewpointSpec::new(i as f64 * 10f64.to_radians(), el, 0.4, Vec3::zeros()))
        })
        .collect();
    for (name, s) in [
        ("smart", StrategySpec::smart(&map)),
        ("head_on", StrategySpec::head_on()),
        ("random", StrategySpec::random(3)),
    ] {
        let v = select_viewpoint(&s, &target, &ring)?;
        let (az, el) = view_angles(&v.position(), &target.pose)?;
        println!("{name:<8} world ({:+.2}, {:+.2})  map ({az:+.2}, {el:+.2})", v.azimuth, v.elevation);
    }
    Ok(())
}
