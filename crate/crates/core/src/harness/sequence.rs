use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{detect, render_view, ClassMaps, ObjectScene};
use super::{build_corpus, tags, ExperimentConfig, HarnessError};
use crate::geometry::Vec3;
use crate::grasping::{evaluate_force_closure, generate_candidates_near, GraspHypothesis};
use crate::seeds::derive_seed;
use crate::selection::{closest_aligned, prune_to_neighborhood, rank_by_score, select_viewpoint_index, StrategySpec};
use crate::simcam::{sample_view_sphere, ViewpointSpec};

/// Which views a sequence uses: 1 random, 2 smart, 3 alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceOrder {
    V1,
    V1V2,
    V1V3,
    V1V2V3,
}

impl SequenceOrder {
    pub const ALL: [SequenceOrder; 4] = [
        SequenceOrder::V1,
        SequenceOrder::V1V2,
        SequenceOrder::V1V3,
        SequenceOrder::V1V2V3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SequenceOrder::V1 => "v1",
            SequenceOrder::V1V2 => "v1_v2",
            SequenceOrder::V1V3 => "v1_v3",
            SequenceOrder::V1V2V3 => "v1_v2_v3",
        }
    }

    fn uses_smart(self) -> bool {
        matches!(self, SequenceOrder::V1V2 | SequenceOrder::V1V2V3)
    }

    fn uses_alignment(self) -> bool {
        matches!(self, SequenceOrder::V1V3 | SequenceOrder::V1V2V3)
    }
}

impl std::str::FromStr for SequenceOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SequenceOrder::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown order {s:?}, expected one of v1, v1_v2, v1_v3, v1_v2_v3"))
    }
}

/// One view taken during a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub camera: [f64; 3],
    pub candidates: usize,
    /// Whether this view replaced the working grasp.
    pub updated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTrial {
    pub trial: usize,
    pub object: usize,
    pub order: SequenceOrder,
    pub views: Vec<StageRecord>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub order: SequenceOrder,
    pub trials: usize,
    pub successes: usize,
    pub records: Vec<SequenceTrial>,
}

impl SequenceResult {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Runs one viewing order; see [`run_sequence_orders`].
pub fn run_sequence_eval(
    config: &ExperimentConfig,
    maps: &ClassMaps,
    order: SequenceOrder,
    trials: usize,
) -> Result<SequenceResult, HarnessError> {
    Ok(run_sequence_orders(config, maps, &[order], trials)?.remove(0))
}

/// Simulated multi-view grasping on single-object scenes.
///
/// Trial `t` uses corpus object `t mod n`. View 1 is random from the sphere
/// pool and its best-scored detection becomes the working grasp. View 2 is
/// the smart choice for that grasp; detections seeded within the ball
/// around it are re-ranked and the best replaces it. View 3 sits on the
/// grasp's approach axis at the alignment distance and snaps to the
/// regenerated candidate best aligned with the working grasp, among those in
/// its neighborhood. A view that
/// finds nothing keeps the previous grasp; a trial whose first view finds
/// nothing fails. The final grasp succeeds iff it is force closure on the
/// mesh. Orders share their views, so results are paired across orders.
pub fn run_sequence_orders(
    config: &ExperimentConfig,
    maps: &ClassMaps,
    orders: &[SequenceOrder],
    trials: usize,
) -> Result<Vec<SequenceResult>, HarnessError> {
    config.validate()?;
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let corpus = build_corpus(&config.corpus)?;
    if corpus.is_empty() {
        return Err(HarnessError::Config("corpus is empty".into()));
    }
    let per_trial: Vec<Vec<SequenceTrial>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let obj = &corpus[t % corpus.len()];
            run_trial(config, maps, orders, t, &ObjectScene::at_origin(obj))
        })
        .collect::<Result<_, _>>()?;
    Ok(orders
        .iter()
        .enumerate()
        .map(|(k, &order)| {
            let records: Vec<SequenceTrial> = per_trial.iter().map(|r| r[k].clone()).collect();
            SequenceResult {
                order,
                trials,
                successes: records.iter().filter(|r| r.success).count(),
                records,
            }
        })
        .collect())
}

struct Stage {
    grasp: GraspHypothesis,
    record: StageRecord,
}

fn record(stage: &str, camera: &Vec3, candidates: usize, updated: bool) -> StageRecord {
    StageRecord {
        stage: stage.into(),
        camera: [camera.x, camera.y, camera.z],
        candidates,
        updated,
    }
}

fn smart_stage(
    config: &ExperimentConfig,
    maps: &ClassMaps,
    scene: &ObjectScene,
    pool: &[ViewpointSpec],
    prev: &GraspHypothesis,
    seed: u64,
) -> Result<Stage, HarnessError> {
    let map = maps.for_class(scene.object.shape_class());
    let vi = select_viewpoint_index(&StrategySpec::smart(map), prev, pool)?;
    let view = &pool[vi];
    let cloud = render_view(scene, config, view, derive_seed(seed, &[0]))?;
    let ball = Some((prev.position(), config.sequence.ball_radius));
    let grasps = detect(&cloud, scene, config, derive_seed(seed, &[1]), ball)?;
    let best = rank_by_score(&grasps).first().copied();
    Ok(Stage {
        grasp: best.unwrap_or(*prev),
        record: record("smart", &view.position(), grasps.len(), best.is_some()),
    })
}

fn alignment_stage(
    config: &ExperimentConfig,
    scene: &ObjectScene,
    prev: &GraspHypothesis,
    seed: u64,
) -> Result<Stage, HarnessError> {
    let camera = prev.position() - prev.approach() * config.sequence.alignment_distance;
    let view = ViewpointSpec::looking_at(&camera, &prev.position(), &Vec3::z());
    let cloud = render_view(scene, config, &view, derive_seed(seed, &[0]))?;
    let cands = generate_candidates_near(
        &cloud,
        &config.hand,
        &config.candidate_params,
        derive_seed(seed, &[1]),
        &prev.position(),
        config.sequence.ball_radius,
    )?;
    let near = prune_to_neighborhood(&cands, prev, &config.neighborhood);
    let found = closest_aligned(&near, prev);
    Ok(Stage {
        grasp: found.unwrap_or(*prev),
        record: record("alignment", &view.position(), cands.len(), found.is_some()),
    })
}

fn run_trial(
    config: &ExperimentConfig,
    maps: &ClassMaps,
    orders: &[SequenceOrder],
    trial: usize,
    scene: &ObjectScene,
) -> Result<Vec<SequenceTrial>, HarnessError> {
    let seed = derive_seed(config.master_seed, &[tags::SEQUENCE, trial as u64]);
    let vs = &config.view_sphere;
    let pool = sample_view_sphere(
        config.offline.pool_size,
        (vs.elevation[0], vs.elevation[1]),
        vs.radius,
        scene.center(),
        derive_seed(seed, &[0]),
    )?;
    let v1_index = derive_seed(seed, &[1]) as usize % pool.len();
    let v1_view = &pool[v1_index];
    let v1_seed = derive_seed(seed, &[2]);
    let cloud = render_view(scene, config, v1_view, derive_seed(v1_seed, &[0]))?;
    let grasps = detect(&cloud, scene, config, derive_seed(v1_seed, &[1]), None)?;
    let v1_record = record("random", &v1_view.position(), grasps.len(), !grasps.is_empty());
    let Some(v1) = rank_by_score(&grasps).first().copied() else {
        return Ok(orders
            .iter()
            .map(|&order| SequenceTrial {
                trial,
                object: scene.object.id,
                order,
                views: vec![v1_record.clone()],
                success: false,
            })
            .collect());
    };

    let needs_smart = orders.iter().any(|o| o.uses_smart());
    let smart = if needs_smart {
        Some(smart_stage(config, maps, scene, &pool, &v1, derive_seed(seed, &[3]))?)
    } else {
        None
    };
    let align_after_v1 = if orders.contains(&SequenceOrder::V1V3) {
        Some(alignment_stage(config, scene, &v1, derive_seed(seed, &[4]))?)
    } else {
        None
    };
    let align_after_v2 = match (&smart, orders.contains(&SequenceOrder::V1V2V3)) {
        (Some(s), true) => Some(alignment_stage(config, scene, &s.grasp, derive_seed(seed, &[5]))?),
        _ => None,
    };

    let judge = |g: &GraspHypothesis| {
        evaluate_force_closure(&scene.object.mesh, &scene.pose, g, &config.hand, config.mu)
    };
    Ok(orders
        .iter()
        .map(|&order| {
            let mut views = vec![v1_record.clone()];
            let mut final_grasp = v1;
            if order.uses_smart() {
                let s = smart.as_ref().expect("smart stage computed");
                views.push(s.record.clone());
                final_grasp = s.grasp;
            }
            if order.uses_alignment() {
                let a = if order.uses_smart() {
                    align_after_v2.as_ref()
                } else {
                    align_after_v1.as_ref()
                }
                .expect("alignment stage computed");
                views.push(a.record.clone());
                final_grasp = a.grasp;
            }
            SequenceTrial {
                trial,
                object: scene.object.id,
                order,
                views,
                success: judge(&final_grasp),
            }
        })
        .collect())
}
