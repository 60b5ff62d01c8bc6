//! Detects, labels and scores grasps on a small corpus with both surrogate
//! scorers and reports how often each one agrees with force closure.
//!
//! cargo run --release --example score_candidates -- [views_per_object]

use viewgrasp::geometry::ShapeClass;
use viewgrasp::grasping::ScorerSpec;
use viewgrasp::harness::{build_map_detailed, CorpusSpec, ExperimentConfig};
use viewgrasp::viewmap::Counts;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let views: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10);
    for scorer in [ScorerSpec::NoisyOracle, ScorerSpec::geometric()] {
        let config = ExperimentConfig {
            views_per_object: views,
            corpus: CorpusSpec {
                n_box: 10,
                n_cylinder: 10,
                ..Default::default()
            },
            scorer,
            ..Default::default()
        };
        let mut total = Counts::default();
        for class in ShapeClass::ALL {
            let c = build_map_detailed(&config, class)?.counts;
            println!(
                "{:12} {:9}: {:6} grasps, accuracy {:.3}, precision {:.3}, recall {:.3}",
                scorer.id(),
                class.as_str(),
                c.total(),
                accuracy(&c),
                c.tp as f64 / c.positives().max(1) as f64,
                c.tp as f64 / (c.tp + c.fn_).max(1) as f64
            );
            total.tp += c.tp;
            total.fp += c.fp;
            total.tn += c.tn;
            total.fn_ += c.fn_;
        }
        println!("{:12} overall accuracy {:.3}", scorer.id(), accuracy(&total));
    }
    Ok(())
}

fn accuracy(c: &Counts) -> f64 {
    (c.tp + c.tn) as f64 / c.total().max(1) as f64
}
