//! Runs the four viewing orders (first view only, plus the smart view,
//! plus the alignment view, or both) and prints their success rates.
//!
//! cargo run --release --example sequence_eval -- [trials]

use viewgrasp::geometry::ShapeClass;
use viewgrasp::harness::{build_map, run_sequence_orders, ClassMaps, ExperimentConfig, SequenceOrder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(60);
    let mut config = ExperimentConfig::default();
    config.views_per_object = 30;
    let maps = ClassMaps::single(build_map(&config, ShapeClass::BoxLike)?);
    for r in run_sequence_orders(&config, &maps, &SequenceOrder::ALL, trials)? {
        println!("{:<9} {:>4}/{} = {:.3}", r.order.as_str(), r.successes, r.trials, r.success_rate());
    }
    Ok(())
}
