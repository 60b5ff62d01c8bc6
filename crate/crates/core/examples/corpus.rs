//! Lists the synthetic object corpus with each object's size.
//!
//! cargo run --example corpus

use viewgrasp::harness::{build_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = build_corpus(&CorpusSpec::default())?;
    for obj in &corpus {
        let (lo, hi) = obj.mesh.bounds();
        let d = hi - lo;
        println!(
            "{:>3} {:<8} {:.3} x {:.3} x {:.3} m, {} triangles",
            obj.id,
            obj.shape_class().as_str(),
            d.x,
            d.y,
            d.z,
            obj.mesh.triangles().len()
        );
    }
    Ok(())
}
