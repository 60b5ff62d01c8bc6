use log::warn;
use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{detect, render_view, ClassMaps, ObjectScene};
use super::{build_corpus, tags, CorpusObject, ExperimentConfig, HarnessError};
use crate::geometry::ShapeClass;
use crate::grasping::GraspHypothesis;
use crate::seeds::{derive_seed, rng_from_seed};
use crate::selection::{prune_to_neighborhood, select_viewpoint_index, top_n_accuracy, StrategyKind, StrategySpec};
use crate::simcam::{sample_view_sphere, ViewpointSpec};
use crate::viewmap::view_angles;

/// Number of equal-width score bins over `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 20;

/// One (class, trial, strategy) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub shape_class: ShapeClass,
    pub trial: usize,
    pub object: usize,
    pub strategy: StrategyKind,
    pub view_index: usize,
    /// Chosen view in the target's map angles.
    pub view_azimuth: f64,
    pub view_elevation: f64,
    pub detected: usize,
    pub pruned: usize,
    pub positives: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub top_n: Vec<(usize, Option<f64>)>,
    /// Scores of the predicted positives after pruning.
    pub positive_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub strategy: StrategyKind,
    pub shape_class: ShapeClass,
    pub trials: usize,
    pub positives: usize,
    pub true_positives: usize,
    /// Mean over trials with at least one positive of TP / positives.
    pub accuracy: Option<f64>,
    /// Mean over trials with at least one pruned candidate of top-n accuracy.
    pub top_n_curve: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreHistogram {
    pub strategy: StrategyKind,
    pub shape_class: ShapeClass,
    pub counts: [usize; HISTOGRAM_BINS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineReport {
    pub rows: Vec<ResultRow>,
    pub trials: Vec<TrialRecord>,
    pub histograms: Vec<ScoreHistogram>,
    /// Trials per class skipped because no force-closure target was found.
    pub skipped: Vec<(ShapeClass, usize)>,
}

impl OfflineReport {
    pub fn row(&self, strategy: StrategyKind, class: ShapeClass) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.shape_class == class)
    }
}

/// Finds a random force-closure grasp on the object from random views.
fn pick_target(
    scene: &ObjectScene,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Option<GraspHypothesis>, HarnessError> {
    let vs = &config.view_sphere;
    let views = sample_view_sphere(
        config.offline.target_attempts,
        (vs.elevation[0], vs.elevation[1]),
        vs.radius,
        scene.center(),
        derive_seed(seed, &[0]),
    )?;
    for (a, view) in views.iter().enumerate() {
        let s = derive_seed(seed, &[1, a as u64]);
        let cloud = render_view(scene, config, view, derive_seed(s, &[0]))?;
        let grasps = detect(&cloud, scene, config, derive_seed(s, &[1]), None)?;
        let positives: Vec<&GraspHypothesis> = grasps.iter().filter(|g| g.label == Some(true)).collect();
        if let Some(g) = positives.choose(&mut rng_from_seed(derive_seed(s, &[2]))) {
            return Ok(Some(**g));
        }
    }
    Ok(None)
}

struct TrialOutcome {
    class: ShapeClass,
    records: Vec<TrialRecord>,
    skipped: bool,
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    config: &ExperimentConfig,
    maps: &ClassMaps,
    strategies: &[StrategyKind],
    class: ShapeClass,
    trial: usize,
    object: &CorpusObject,
) -> Result<TrialOutcome, HarnessError> {
    let scene = ObjectScene::at_origin(object);
    let seed = derive_seed(config.master_seed, &[tags::OFFLINE, class as u64, trial as u64]);
    let Some(target) = pick_target(&scene, config, derive_seed(seed, &[0]))? else {
        warn!("{class} trial {trial}: no force-closure grasp found on object {}", object.id);
        return Ok(TrialOutcome {
            class,
            records: Vec::new(),
            skipped: true,
        });
    };
    let vs = &config.view_sphere;
    let pool: Vec<ViewpointSpec> = sample_view_sphere(
        config.offline.pool_size,
        (vs.elevation[0], vs.elevation[1]),
        vs.radius,
        scene.center(),
        derive_seed(seed, &[1]),
    )?;
    let map = maps.for_class(class);
    let mut records = Vec::with_capacity(strategies.len());
    for &kind in strategies {
        let spec = match kind {
            StrategyKind::Smart => StrategySpec::smart(map),
            StrategyKind::HeadOn => StrategySpec::head_on(),
            StrategyKind::Random => StrategySpec::random(derive_seed(seed, &[2])),
        };
        let vi = select_viewpoint_index(&spec, &target, &pool)?;
        let view = &pool[vi];
        // Seeds depend on the view only, so strategies that pick the same
        // view see the same cloud and detections.
        let vseed = derive_seed(seed, &[3, vi as u64]);
        let cloud = render_view(&scene, config, view, derive_seed(vseed, &[0]))?;
        let detected = detect(&cloud, &scene, config, derive_seed(vseed, &[1]), None)?;
        let pruned = prune_to_neighborhood(&detected, &target, &config.neighborhood);
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        let mut positive_scores = Vec::new();
        for g in &pruned {
            let pos = g.score >= config.threshold;
            match (pos, g.label == Some(true)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
            if pos {
                positive_scores.push(g.score);
            }
        }
        let top_n = config
            .n_values
            .iter()
            .map(|&n| Ok((n, top_n_accuracy(&pruned, n)?)))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let (az, el) = view_angles(&view.position(), &target.pose)?;
        records.push(TrialRecord {
            shape_class: class,
            trial,
            object: object.id,
            strategy: kind,
            view_index: vi,
            view_azimuth: az,
            view_elevation: el,
            detected: detected.len(),
            pruned: pruned.len(),
            positives: tp + fp,
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
            top_n,
            positive_scores,
        });
    }
    Ok(TrialOutcome {
        class,
        records,
        skipped: false,
    })
}

/// Offline comparison of viewpoint strategies.
///
/// For each shape class and trial, the objects of that class are visited
/// round-robin. A random force-closure grasp found from a random view is the
/// target. Every strategy then picks one view from a shared pool of sphere
/// views; the object is rendered and detected from it, and detections are
/// pruned to the target's neighborhood before counting.
pub fn run_offline_eval(
    config: &ExperimentConfig,
    maps: &ClassMaps,
    strategies: &[StrategyKind],
) -> Result<OfflineReport, HarnessError> {
    config.validate()?;
    if config.offline.trials_per_class == 0 {
        return Err(HarnessError::NoTrials);
    }
    let corpus = build_corpus(&config.corpus)?;
    let mut work = Vec::new();
    for class in ShapeClass::ALL {
        let objs: Vec<&CorpusObject> = corpus.iter().filter(|o| o.shape_class() == class).collect();
        if objs.is_empty() {
            continue;
        }
        for t in 0..config.offline.trials_per_class {
            work.push((class, t, objs[t % objs.len()]));
        }
    }
    let outcomes: Vec<TrialOutcome> = work
        .par_iter()
        .map(|&(class, t, obj)| run_trial(config, maps, strategies, class, t, obj))
        .collect::<Result<_, _>>()?;

    let mut trials = Vec::new();
    let mut skipped: Vec<(ShapeClass, usize)> = Vec::new();
    for o in outcomes {
        if o.skipped {
            match skipped.iter_mut().find(|(c, _)| *c == o.class) {
                Some((_, n)) => *n += 1,
                None => skipped.push((o.class, 1)),
            }
        }
        trials.extend(o.records);
    }
    let mut rows = Vec::new();
    let mut histograms = Vec::new();
    for class in ShapeClass::ALL {
        for &strategy in strategies {
            let recs: Vec<&TrialRecord> = trials
                .iter()
                .filter(|r| r.shape_class == class && r.strategy == strategy)
                .collect();
            if recs.is_empty() {
                continue;
            }
            let acc: Vec<f64> = recs
                .iter()
                .filter(|r| r.positives > 0)
                .map(|r| r.true_positives as f64 / r.positives as f64)
                .collect();
            let top_n_curve = config
                .n_values
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let vals: Vec<f64> = recs.iter().filter_map(|r| r.top_n[k].1).collect();
                    (n, mean(&vals))
                })
                .collect();
            rows.push(ResultRow {
                strategy,
                shape_class: class,
                trials: recs.len(),
                positives: recs.iter().map(|r| r.positives).sum(),
                true_positives: recs.iter().map(|r| r.true_positives).sum(),
                accuracy: mean(&acc),
                top_n_curve,
            });
            let mut counts = [0usize; HISTOGRAM_BINS];
            for s in recs.iter().flat_map(|r| &r.positive_scores) {
                counts[((s * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)] += 1;
            }
            histograms.push(ScoreHistogram {
                strategy,
                shape_class: class,
                counts,
            });
        }
    }
    Ok(OfflineReport {
        rows,
        trials,
        histograms,
        skipped,
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}
