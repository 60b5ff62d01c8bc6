//! Builds the viewpoint-quality map for one shape class and prints where the
//! best views lie.
//!
//! cargo run --release --example build_map -- [box|cylinder] [views_per_object] [n_objects]

use std::time::Instant;

use viewgrasp::geometry::ShapeClass;
use viewgrasp::harness::{build_map_detailed, ExperimentConfig};
use viewgrasp::viewmap::Channel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let class: ShapeClass = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(ShapeClass::BoxLike);
    let mut config = ExperimentConfig::default();
    if let Some(v) = args.get(2) {
        config.views_per_object = v.parse()?;
    }
    if let Some(n) = args.get(3) {
        let n: usize = n.parse()?;
        config.corpus.n_box = config.corpus.n_box.min(n);
        config.corpus.n_cylinder = config.corpus.n_cylinder.min(n);
    }

    let start = Instant::now();
    let build = build_map_detailed(&config, class)?;
    let c = build.counts;
    println!(
        "{class}: {} objects, {} samples in {:.1}s",
        build.per_object.len(),
        c.total(),
        start.elapsed().as_secs_f64()
    );
    println!(
        "tp {} fp {} tn {} fn {}  (accuracy {:.3}, force-closure rate {:.3})",
        c.tp,
        c.fp,
        c.tn,
        c.fn_,
        (c.tp + c.tn) as f64 / c.total().max(1) as f64,
        (c.tp + c.fn_) as f64 / c.total().max(1) as f64
    );

    let m = &build.map;
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for j in 0..m.dims() {
        for i in 0..m.dims() {
            let v = m.get(Channel::TpMinusFp, i, j);
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    let (v, i, j) = best;
    println!(
        "best TP-FP density {v:.2} at azimuth {:.2}, elevation {:.2}; head-on value {:.2}",
        m.azimuth(i),
        m.elevation(j),
        m.get(Channel::TpMinusFp, m.dims() / 2, m.dims() / 2)
    );
    for j in (0..m.dims()).rev().step_by(6) {
        let row: Vec<String> = (0..m.dims())
            .step_by(6)
            .map(|i| format!("{:7.2}", m.get(Channel::TpMinusFp, i, j)))
            .collect();
        println!("el {:+.2} | {}", m.elevation(j), row.join(" "));
    }
    Ok(())
}
