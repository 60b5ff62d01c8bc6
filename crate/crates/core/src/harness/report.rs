use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::offline::{OfflineReport, HISTOGRAM_BINS};
use super::sequence::SequenceResult;
use super::HarnessError;
use crate::viewmap::ViewMapGrid;

/// Comment line closing every report file.
pub fn footer_line(config_hash: &str, master_seed: u64) -> String {
    format!("# config_sha256={config_hash} master_seed={master_seed}\n")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub results: PathBuf,
    pub topn_curves: PathBuf,
    pub score_hist: PathBuf,
    pub trials: PathBuf,
    pub map_export: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Writes `results.csv`, `topn_curves.csv`, `score_hist.csv`,
/// `trials.jsonl` and, with a map, `map_export.csv` into `out_dir`. CSV files
/// end with [`footer_line`].
pub fn emit_report(
    report: &OfflineReport,
    map: Option<&ViewMapGrid>,
    out_dir: &Path,
    config_hash: &str,
    master_seed: u64,
) -> Result<ReportFiles, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let footer = footer_line(config_hash, master_seed);

    let mut results = String::from("strategy,shape_class,trials,positives,true_positives,accuracy\n");
    for r in &report.rows {
        let _ = writeln!(
            results,
            "{},{},{},{},{},{}",
            r.strategy.as_str(),
            r.shape_class.as_str(),
            r.trials,
            r.positives,
            r.true_positives,
            opt(r.accuracy)
        );
    }
    for (class, n) in &report.skipped {
        let _ = writeln!(results, "# skipped_trials shape_class={} count={n}", class.as_str());
    }
    results.push_str(&footer);

    let mut curves = String::from("strategy,shape_class,n,accuracy\n");
    for r in &report.rows {
        for (n, a) in &r.top_n_curve {
            let _ = writeln!(curves, "{},{},{n},{}", r.strategy.as_str(), r.shape_class.as_str(), opt(*a));
        }
    }
    curves.push_str(&footer);

    let mut hist = String::from("strategy,shape_class,bin_lo,bin_hi,count\n");
    for h in &report.histograms {
        for (b, c) in h.counts.iter().enumerate() {
            let lo = b as f64 / HISTOGRAM_BINS as f64;
            let hi = (b + 1) as f64 / HISTOGRAM_BINS as f64;
            let _ = writeln!(hist, "{},{},{lo:?},{hi:?},{c}", h.strategy.as_str(), h.shape_class.as_str());
        }
    }
    hist.push_str(&footer);

    let mut trials = String::new();
    for t in &report.trials {
        trials.push_str(&serde_json::to_string(t).expect("trial records serialize"));
        trials.push('\n');
    }

    let files = ReportFiles {
        results: out_dir.join("results.csv"),
        topn_curves: out_dir.join("topn_curves.csv"),
        score_hist: out_dir.join("score_hist.csv"),
        trials: out_dir.join("trials.jsonl"),
        map_export: map.map(|_| out_dir.join("map_export.csv")),
    };
    write(&files.results, &results)?;
    write(&files.topn_curves, &curves)?;
    write(&files.score_hist, &hist)?;
    write(&files.trials, &trials)?;
    if let (Some(m), Some(p)) = (map, &files.map_export) {
        write(p, &(m.to_csv() + &footer))?;
    }
    Ok(files)
}

/// Writes `sequence_results.csv` and `sequence_trials.jsonl`.
pub fn emit_sequence_report(
    results: &[SequenceResult],
    out_dir: &Path,
    config_hash: &str,
    master_seed: u64,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut csv = String::from("order,trials,successes,success_rate\n");
    let mut jsonl = String::new();
    for r in results {
        let _ = writeln!(csv, "{},{},{},{:?}", r.order.as_str(), r.trials, r.successes, r.success_rate());
        for t in &r.records {
            jsonl.push_str(&serde_json::to_string(t).expect("trial records serialize"));
            jsonl.push('\n');
        }
    }
    csv.push_str(&footer_line(config_hash, master_seed));
    let a = out_dir.join("sequence_results.csv");
    let b = out_dir.join("sequence_trials.jsonl");
    write(&a, &csv)?;
    write(&b, &jsonl)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_has_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let report = OfflineReport {
            rows: vec![],
            trials: vec![],
            histograms: vec![],
            skipped: vec![],
        };
        let f = emit_report(&report, None, dir.path(), "abc", 3).unwrap();
        let text = std::fs::read_to_string(&f.results).unwrap();
        assert_eq!(text, "strategy,shape_class,trials,positives,true_positives,accuracy\n# config_sha256=abc master_seed=3\n");
        assert!(f.map_export.is_none());
    }
}
