//! Compares the smart, random and head-on strategies on a reduced corpus
//! and writes the report files.
//!
//! cargo run --release --example offline_eval -- [out_dir]

use std::path::PathBuf;

use viewgrasp::harness::{emit_report, run_offline_eval, ClassMaps, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "offline_report".into()));
    let mut config = ExperimentConfig::default();
    config.corpus.n_box = 8;
    config.corpus.n_cylinder = 5;
    config.views_per_object = 30;
    config.offline.trials_per_class = 15;
    config.per_class_maps = true;

    let maps = ClassMaps::build(&config)?;
    let report = run_offline_eval(&config, &maps, &config.offline.strategies)?;
    for r in &report.rows {
        println!(
            "{:<8} {:<13} positives {:>5}  accuracy {}",
            r.strategy.as_str(),
            r.shape_class.as_str(),
            r.positives,
            r.accuracy.map_or("-".into(), |a| format!("{a:.3}"))
        );
    }
    let files = emit_report(&report, Some(&maps.box_like), &out, &config.hash(), config.master_seed)?;
    println!("wrote {}", files.results.display());
    Ok(())
}
