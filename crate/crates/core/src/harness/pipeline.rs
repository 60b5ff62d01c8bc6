use log::debug;
use rayon::prelude::*;

use super::{build_corpus, tags, CorpusObject, ExperimentConfig, HarnessError};
use crate::geometry::{PointCloud, Pose, ShapeClass, Vec3};
use crate::grasping::{
    evaluate_force_closure, generate_candidates, generate_candidates_near, score_candidate, GraspHypothesis,
};
use crate::seeds::derive_seed;
use crate::simcam::{render_cloud, sample_view_sphere, viewpoint_to_pose, SceneObject, ViewpointSpec};
use crate::viewmap::{accumulate, samples_for_view, smooth, Counts, MapMeta, ViewMapGrid, ViewSample};

/// A corpus mesh placed in the world.
#[derive(Debug, Clone, Copy)]
pub struct ObjectScene<'a> {
    pub object: &'a CorpusObject,
    pub pose: Pose,
}

impl<'a> ObjectScene<'a> {
    /// The object at the world origin.
    pub fn at_origin(object: &'a CorpusObject) -> Self {
        Self {
            object,
            pose: Pose::identity(),
        }
    }

    pub fn center(&self) -> Vec3 {
        let (lo, hi) = self.object.mesh.bounds();
        self.pose.transform_point(&((lo + hi) * 0.5))
    }
}

/// Renders the object from `view`. A view looking straight along its up
/// hint falls back to the world x axis as up.
pub fn render_view(
    scene: &ObjectScene,
    config: &ExperimentConfig,
    view: &ViewpointSpec,
    seed: u64,
) -> Result<PointCloud, HarnessError> {
    let cam_pose = match viewpoint_to_pose(view) {
        Ok(p) => p,
        Err(_) => viewpoint_to_pose(&ViewpointSpec {
            up_hint: Vec3::x(),
            ..*view
        })?,
    };
    let objects = [SceneObject {
        mesh: &scene.object.mesh,
        pose: scene.pose,
    }];
    Ok(render_cloud(&objects, &config.camera, &cam_pose, seed))
}

/// Candidates from `cloud`, each labeled by force closure against the mesh
/// and then scored. With `ball`, seed points are restricted to that ball.
pub fn detect(
    cloud: &PointCloud,
    scene: &ObjectScene,
    config: &ExperimentConfig,
    seed: u64,
    ball: Option<(Vec3, f64)>,
) -> Result<Vec<GraspHypothesis>, HarnessError> {
    let gen_seed = derive_seed(seed, &[0]);
    let cands = match ball {
        None => generate_candidates(cloud, &config.hand, &config.candidate_params, gen_seed)?,
        Some((c, r)) => generate_candidates_near(cloud, &config.hand, &config.candidate_params, gen_seed, &c, r)?,
    };
    cands
        .into_par_iter()
        .enumerate()
        .map(|(k, mut g)| {
            g.label = Some(evaluate_force_closure(
                &scene.object.mesh,
                &scene.pose,
                &g,
                &config.hand,
                config.mu,
            ));
            g.score = score_candidate(&g, cloud, &config.hand, &config.scorer, derive_seed(seed, &[1, k as u64]))?;
            Ok(g)
        })
        .collect()
}

/// Map plus the detection counts that went into it.
#[derive(Debug, Clone)]
pub struct MapBuild {
    pub map: ViewMapGrid,
    pub counts: Counts,
    pub per_object: Vec<(usize, Counts)>,
}

/// Smoothed map for one shape class; see [`build_map_detailed`].
pub fn build_map(config: &ExperimentConfig, class: ShapeClass) -> Result<ViewMapGrid, HarnessError> {
    Ok(build_map_detailed(config, class)?.map)
}

/// For every object of `class`: sample views, render, detect, label and
/// score, express each view in the frame of every grasp detected from it,
/// and smooth. Per-object maps are then averaged with equal weight.
pub fn build_map_detailed(config: &ExperimentConfig, class: ShapeClass) -> Result<MapBuild, HarnessError> {
    config.validate()?;
    let corpus = build_corpus(&config.corpus)?;
    let objects: Vec<&CorpusObject> = corpus.iter().filter(|o| o.shape_class() == class).collect();
    if objects.is_empty() {
        return Err(HarnessError::NoObjectsOfClass(class));
    }
    let work: Vec<(usize, usize)> = (0..objects.len())
        .flat_map(|o| (0..config.views_per_object).map(move |v| (o, v)))
        .collect();
    let views: Vec<Vec<ViewpointSpec>> = objects
        .iter()
        .map(|o| {
            let scene = ObjectScene::at_origin(o);
            sample_view_sphere(
                config.views_per_object,
                (config.view_sphere.elevation[0], config.view_sphere.elevation[1]),
                config.view_sphere.radius,
                scene.center(),
                derive_seed(config.master_seed, &[tags::MAP, o.id as u64]),
            )
        })
        .collect::<Result<_, _>>()?;

    let per_view: Vec<Vec<ViewSample>> = work
        .par_iter()
        .map(|&(o, v)| {
            let obj = objects[o];
            let scene = ObjectScene::at_origin(obj);
            let view = &views[o][v];
            let seed = derive_seed(config.master_seed, &[tags::MAP, obj.id as u64, v as u64]);
            let cloud = render_view(&scene, config, view, derive_seed(seed, &[0]))
                .map_err(|e| HarnessError::at_view(obj.id, v, e))?;
            let grasps = detect(&cloud, &scene, config, derive_seed(seed, &[1]), None)
                .map_err(|e| HarnessError::at_view(obj.id, v, e))?;
            Ok(samples_for_view(&view.position(), &grasps))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut maps = Vec::with_capacity(objects.len());
    let mut per_object = Vec::with_capacity(objects.len());
    let mut total = Counts::default();
    for (o, obj) in objects.iter().enumerate() {
        let samples: Vec<ViewSample> = per_view[o * config.views_per_object..(o + 1) * config.views_per_object]
            .iter()
            .flatten()
            .copied()
            .collect();
        let raw = accumulate(samples, config.threshold);
        let c = raw.counts();
        debug!("object {} ({}): {} samples, {} tp, {} fp", obj.id, class, c.total(), c.tp, c.fp);
        total.tp += c.tp;
        total.fp += c.fp;
        total.tn += c.tn;
        total.fn_ += c.fn_;
        per_object.push((obj.id, c));
        let mut m = smooth(&raw, &config.smoothing)?;
        m.meta.objects = 1;
        maps.push(m);
    }
    let mut map = ViewMapGrid::average(&maps)?;
    map.meta = MapMeta {
        shape_class: Some(class.as_str().to_string()),
        variant: Some(config.candidate_params.variant.as_str().to_string()),
        scorer: Some(config.scorer.id().to_string()),
        seeds: vec![config.master_seed, config.corpus.seed],
        objects: objects.len(),
        config_hash: Some(config.hash()),
    };
    Ok(MapBuild {
        map,
        counts: total,
        per_object,
    })
}

/// Maps used by the selection strategies: one for box-like objects and
/// optionally one for cylinder-like objects. Without a cylinder map the box
/// map is used for every object.
#[derive(Debug, Clone)]
pub struct ClassMaps {
    pub box_like: ViewMapGrid,
    pub cylinder_like: Option<ViewMapGrid>,
}

impl ClassMaps {
    pub fn single(map: ViewMapGrid) -> Self {
        Self {
            box_like: map,
            cylinder_like: None,
        }
    }

    pub fn for_class(&self, class: ShapeClass) -> &ViewMapGrid {
        match class {
            ShapeClass::CylinderLike => self.cylinder_like.as_ref().unwrap_or(&self.box_like),
            ShapeClass::BoxLike => &self.box_like,
        }
    }

    /// Builds the box map, and the cylinder map when `config.per_class_maps` is set.
    pub fn build(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        let box_like = build_map(config, ShapeClass::BoxLike)?;
        let cylinder_like = if config.per_class_maps {
            Some(build_map(config, ShapeClass::CylinderLike)?)
        } else {
            None
        };
        Ok(Self {
            box_like,
            cylinder_like,
        })
    }
}
