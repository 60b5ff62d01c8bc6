//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viewgrasp::geometry::{estimate_local_frame, PointCloud, Pose, TriangleMesh, Vec3};
use viewgrasp::grasping::{
    contact_analysis, evaluate_force_closure, generate_candidates, CandidateParams, GraspError, GraspHypothesis,
    HandGeometry, DEFAULT_MU,
};
use viewgrasp::harness::{
    build_corpus, run_offline_eval, run_sequence_orders, ClassMaps, CorpusSpec, ExperimentConfig, SequenceOrder,
};
use viewgrasp::selection::{select_viewpoint_index, top_n_accuracy, StrategyKind, StrategySpec};
use viewgrasp::simcam::{render_cloud, sample_view_sphere, viewpoint_to_pose, CameraModel, SceneObject, ViewpointSpec};
use viewgrasp::viewmap::{
    accumulate, merge, read_map, smooth, view_angles, write_map, Channel, SmoothingParams, ViewMapGrid, ViewSample,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed.as_secs_f64() < limit_s as f64
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ));
    *q.to_rotation_matrix().matrix()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Plain Möller–Trumbore, two-sided.
fn hit(o: &Vec3, d: &Vec3, [a, b, c]: &[Vec3; 3]) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-15 {
        return None;
    }
    let s = o - a;
    let u = s.dot(&p) / det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) / det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) / det)
}

fn world_triangles(mesh: &TriangleMesh, pose: &Pose) -> Vec<[Vec3; 3]> {
    mesh.triangles()
        .iter()
        .map(|t| t.map(|k| pose.transform_point(&mesh.vertices()[k as usize])))
        .collect()
}

// 1 ------------------------------------------------------------------------

fn geometry_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut round_trip: f64 = 0.0;
    for _ in 0..1000 {
        let t = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let pose = Pose::new(random_rotation(&mut rng), t).unwrap();
        let p = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let back = pose.inverse().transform_point(&pose.transform_point(&p));
        let ident = pose.compose(&pose.inverse());
        let e = (back - p)
            .norm()
            .max((ident.rotation() - Matrix3::identity()).abs().max())
            .max(ident.translation().norm());
        round_trip = round_trip.max(e);
    }

    // Frames on noisy planar and spherical patches.
    let mut ortho: f64 = 0.0;
    for _ in 0..50 {
        let rot = random_rotation(&mut rng);
        let pts: Vec<Vec3> = (0..200)
            .map(|_| {
                let (u, v) = (rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01));
                rot * Vec3::new(u, v, 0.02 * (u * u + 3.0 * v * v) + rng.random_range(-1e-4..1e-4))
            })
            .collect();
        let cloud = PointCloud::new(pts, rot * Vec3::new(0.0, 0.0, 1.0));
        let f = estimate_local_frame(&cloud, &Vec3::zeros(), 0.01).unwrap();
        let m = f.matrix();
        ortho = ortho.max((m.transpose() * m - Matrix3::identity()).abs().max());
        ortho = ortho.max((m.determinant() - 1.0).abs());
    }

    // Curvature axis on an analytic cylinder of radius 3 cm along a random axis.
    let mut worst_axis: f64 = 0.0;
    for _ in 0..20 {
        let rot = random_rotation(&mut rng);
        let axis = rot * Vec3::z();
        let pts: Vec<Vec3> = (0..400)
            .map(|_| {
                let a = rng.random_range(-0.6..0.6f64);
                let h = rng.random_range(-0.015..0.015);
                rot * Vec3::new(0.03 * a.cos(), 0.03 * a.sin(), h)
            })
            .collect();
        let center = rot * Vec3::new(0.03, 0.0, 0.0);
        let cloud = PointCloud::new(pts, rot * Vec3::new(0.5, 0.0, 0.0));
        let f = estimate_local_frame(&cloud, &center, 0.012).unwrap();
        let ang = f.curvature_axis.dot(&axis).abs().min(1.0).acos();
        worst_axis = worst_axis.max(ang.to_degrees());
    }
    let elapsed = start.elapsed();
    let pass = round_trip <= 1e-9 && ortho <= 1e-6 && worst_axis <= 5.0 && within(elapsed, 10);
    outcome(
        pass,
        format!(
            "round-trip max {round_trip:.2e}, orthonormality max {ortho:.2e}, curvature axis worst {worst_axis:.2}°, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// 2 ------------------------------------------------------------------------

fn random_scene(rng: &mut ChaCha8Rng, k: usize) -> (TriangleMesh, Pose, ViewpointSpec) {
    let spec = CorpusSpec {
        n_box: 1,
        n_cylinder: 1,
        seed: rng.random(),
        ..Default::default()
    };
    let corpus = build_corpus(&spec).unwrap();
    let mesh = corpus[k % 2].mesh.clone();
    let t = Vec3::new(rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02));
    let pose = Pose::new(random_rotation(rng), t).unwrap();
    let view = sample_view_sphere(1, (-1.4, 1.4), rng.random_range(0.35..0.6), t, rng.random()).unwrap()[0];
    (mesh, pose, view)
}

fn rendering_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cam = CameraModel {
        noise_sigma: 0.0,
        ..Default::default()
    };
    let mut violations = 0;
    let mut points = 0;
    let mut identical = true;
    for k in 0..20 {
        let (mesh, pose, view) = random_scene(&mut rng, k);
        let cam_pose = viewpoint_to_pose(&view).unwrap();
        let scene = [SceneObject { mesh: &mesh, pose }];
        let cloud = render_cloud(&scene, &cam, &cam_pose, 5);
        let tris = world_triangles(&mesh, &pose);
        let c = *cam_pose.translation();
        for p in &cloud.points {
            let d = p - c;
            let len = d.norm();
            let dir = d / len;
            if tris.iter().any(|t| hit(&c, &dir, t).is_some_and(|s| s > 0.0 && s < len - 1e-6)) {
                violations += 1;
            }
        }
        points += cloud.len();

        let noisy = CameraModel::default();
        let bytes = |seed| {
            let mut buf = Vec::new();
            render_cloud(&scene, &noisy, &cam_pose, seed).write_ply(&mut buf, &[]).unwrap();
            buf
        };
        identical &= bytes(k as u64) == bytes(k as u64);
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && points > 0 && identical && within(elapsed, 60);
    outcome(
        pass,
        format!(
            "{violations} occlusion violations over {points} points in 20 scenes, repeat renders identical: {identical}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// 3 ------------------------------------------------------------------------

const RAYS_X: usize = 240;
const RAYS_Z: usize = 80;
/// Same compliance band as the library's contact patch.
const PATCH: f64 = 0.002;

enum RayContact {
    None,
    /// Ray origin inside the object: the finger plate intersects it.
    Inside,
    Touch { angle: f64 },
}

/// Closes the finger on side `s` (+1 or -1) along `-s·y` by casting a dense
/// grid of rays across the plate; grasp-frame triangles.
fn ray_grid_contact(tris: &[[Vec3; 3]], hand: &HandGeometry, s: f64) -> RayContact {
    let (hx, ha, hz) = (hand.finger_depth / 2.0, hand.aperture / 2.0, hand.hand_height / 2.0);
    let dir = Vec3::new(0.0, -s, 0.0);
    let normals: Vec<Vec3> = tris.iter().map(|[a, b, c]| (b - a).cross(&(c - a)).normalize()).collect();
    let mut hits: Vec<(f64, Vec3)> = Vec::new();
    for i in 0..RAYS_X {
        for k in 0..RAYS_Z {
            let x = -hx + (i as f64 + 0.5) * 2.0 * hx / RAYS_X as f64;
            let z = -hz + (k as f64 + 0.5) * 2.0 * hz / RAYS_Z as f64;
            let o = Vec3::new(x, s * ha, z);
            let mut best: Option<(f64, usize)> = None;
            for (ti, t) in tris.iter().enumerate() {
                if let Some(tt) = hit(&o, &dir, t) {
                    if tt >= 0.0 && tt <= hand.aperture && best.is_none_or(|(b, _)| tt < b) {
                        best = Some((tt, ti));
                    }
                }
            }
            if let Some((tt, ti)) = best {
                if normals[ti].dot(&dir) > 0.0 {
                    return RayContact::Inside;
                }
                hits.push((tt, normals[ti]));
            }
        }
    }
    let Some(first) = hits.iter().map(|h| h.0).min_by(f64::total_cmp) else {
        return RayContact::None;
    };
    let n: Vec3 = hits.iter().filter(|h| h.0 <= first + PATCH).map(|h| h.1).sum();
    let facing = Vec3::new(0.0, s, 0.0);
    let angle = n.normalize().dot(&facing).clamp(-1.0, 1.0).acos();
    RayContact::Touch { angle }
}

fn sample_grasp(rng: &mut ChaCha8Rng, mesh: &TriangleMesh, is_box: bool) -> Option<GraspHypothesis> {
    let (lo, hi) = mesh.bounds();
    let ext = hi - lo;
    let center = (lo + hi) / 2.0
        + Vec3::new(rng.random_range(-0.04..0.04), rng.random_range(-0.04..0.04), rng.random_range(-0.04..0.04));
    let base = if rng.random_bool(0.5) {
        random_unit(rng)
    } else if is_box {
        let narrow: Vec<usize> = (0..3).filter(|&k| ext[k] < 0.075).collect();
        if narrow.is_empty() {
            return None;
        }
        let k = narrow[rng.random_range(0..narrow.len())];
        Vec3::ith(k, 1.0)
    } else {
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        Vec3::new(a.cos(), a.sin(), 0.0)
    };
    let tilt_axis = base.cross(&random_unit(rng)).normalize();
    let tilt = rng.random_range(0.0..45f64.to_radians());
    let y = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(tilt_axis), tilt) * base;
    let x = y.cross(&random_unit(rng)).normalize();
    let z = x.cross(&y);
    Some(GraspHypothesis::new(Pose::new(Matrix3::from_columns(&[x, y, z]), center).unwrap()))
}

fn force_closure_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let hand = HandGeometry::default();
    let cone = DEFAULT_MU.atan();
    let margin = 0.5f64.to_radians();
    let corpus = build_corpus(&CorpusSpec::default()).unwrap();
    let (mut agree, mut compared, mut near_boundary, mut boundary_agree, mut positives) = (0, 0, 0, 0, 0);
    let mut disagreements = Vec::new();
    let mut accepted = 0;
    while accepted < 200 {
        let obj = &corpus[rng.random_range(0..corpus.len())];
        let is_box = obj.shape_class() == viewgrasp::geometry::ShapeClass::BoxLike;
        let Some(g) = sample_grasp(&mut rng, &obj.mesh, is_box) else {
            continue;
        };
        let local: Vec<[Vec3; 3]> = world_triangles(&obj.mesh, &Pose::identity())
            .into_iter()
            .map(|t| t.map(|v| g.pose.inverse_transform_point(&v)))
            .collect();
        let a = ray_grid_contact(&local, &hand, 1.0);
        let b = ray_grid_contact(&local, &hand, -1.0);
        if matches!(a, RayContact::Inside) || matches!(b, RayContact::Inside) {
            continue;
        }
        accepted += 1;
        let oracle_angles = match (&a, &b) {
            (RayContact::Touch { angle: p }, RayContact::Touch { angle: q }) => Some([*p, *q]),
            _ => None,
        };
        let oracle = oracle_angles.is_some_and(|[p, q]| p <= cone && q <= cone);
        let ours = evaluate_force_closure(&obj.mesh, &Pose::identity(), &g, &hand, DEFAULT_MU);
        let report = contact_analysis(&obj.mesh, &Pose::identity(), &g, &hand, DEFAULT_MU);
        let mut angles: Vec<f64> = oracle_angles.map(|a| a.to_vec()).unwrap_or_default();
        match &report {
            Ok(r) => angles.extend(r.fingers.iter().map(|f| f.angle)),
            Err(GraspError::NoContact) => {}
            Err(e) => panic!("contact analysis failed: {e}"),
        }
        positives += oracle as usize;
        if angles.iter().any(|t| (t - cone).abs() < margin) {
            near_boundary += 1;
            boundary_agree += (oracle == ours) as usize;
            continue;
        }
        compared += 1;
        if oracle == ours {
            agree += 1;
        } else {
            disagreements.push(format!("{:?} oracle {oracle} ours {ours} angles {angles:?}", g.pose.to_row_major()));
        }
    }
    for d in &disagreements {
        eprintln!("  force closure disagreement: {d}");
    }
    let elapsed = start.elapsed();
    let pass = agree == compared && within(elapsed, 60);
    outcome(
        pass,
        format!(
            "{agree}/{compared} agree ({positives} oracle positives); {near_boundary} within 0.5° of the cone excluded ({boundary_agree} of them agree), {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

// 4 ------------------------------------------------------------------------

fn candidate_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let hand = HandGeometry::default();
    let params = CandidateParams::default();
    let (hx, ha, hz) = (hand.finger_depth / 2.0, hand.aperture / 2.0, hand.hand_height / 2.0);
    let outer = ha + hand.finger_width;
    let base = hand.finger_width;
    let (mut total, mut bad) = (0, 0);
    for k in 0..10 {
        let (mesh, pose, view) = random_scene(&mut rng, k);
        let scene = [SceneObject { mesh: &mesh, pose }];
        let cloud = render_cloud(&scene, &CameraModel::default(), &viewpoint_to_pose(&view).unwrap(), k as u64);
        let cands = generate_candidates(&cloud, &hand, &params, k as u64).unwrap();
        for g in &cands {
            let (mut inside, mut collide) = (0, false);
            for p in &cloud.points {
                let q = g.pose.rotation().transpose() * (p - g.pose.translation());
                if q.z.abs() > hz {
                    continue;
                }
                let finger = q.x.abs() <= hx && q.y.abs() > ha && q.y.abs() <= outer;
                let palm = q.x < -hx && q.x >= -hx - base && q.y.abs() <= outer;
                collide |= finger || palm;
                inside += (q.x.abs() <= hx && q.y.abs() <= ha) as usize;
            }
            total += 1;
            bad += (collide || inside < params.min_points_in_closing_region) as usize;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad == 0 && total > 0,
        format!("{bad} of {total} candidates violate the hand constraints, {:.1}s", elapsed.as_secs_f64()),
    )
}

// 5 ------------------------------------------------------------------------

fn random_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<ViewSample> {
    (0..n)
        .map(|_| ViewSample {
            azimuth: rng.random_range(-3.1..3.1),
            elevation: rng.random_range(-1.2..1.2),
            score: rng.random(),
            label: rng.random_bool(0.5),
        })
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x.is_nan() && y.is_nan() { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

fn map_math() -> Outcome {
    let p = SmoothingParams::default();
    let kernel_err = (p.kernel(0.05) - (-0.0025f64 / 0.4).exp()).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let a = accumulate(random_samples(&mut rng, 150), 0.5);
    let b = accumulate(random_samples(&mut rng, 90), 0.5);
    let (ma, mb) = (smooth(&a, &p).unwrap(), smooth(&b, &p).unwrap());
    let ab = smooth(&merge(&a, &b).unwrap(), &p).unwrap();
    let ba = smooth(&merge(&b, &a).unwrap(), &p).unwrap();
    let mut linear: f64 = 0.0;
    for c in [Channel::CandidateDensity, Channel::TpDensity, Channel::FpDensity, Channel::TpMinusFp] {
        let sum: Vec<f64> = ma.channel(c).iter().zip(mb.channel(c)).map(|(x, y)| x + y).collect();
        linear = linear.max(max_diff(ab.channel(c), &sum));
    }
    let commute = Channel::ALL
        .iter()
        .map(|&c| max_diff(ab.channel(c), ba.channel(c)))
        .fold(0.0, f64::max);
    let n = ViewMapGrid::zeros(p, 0.5).unwrap().dims();
    let mut bytes = Vec::new();
    write_map(&ab, &mut bytes).unwrap();
    let back = read_map(&bytes).unwrap();
    let mut again = Vec::new();
    write_map(&back, &mut again).unwrap();
    let round_trip = back == ab && again == bytes;
    let pass = kernel_err <= 1e-12 && linear <= 1e-9 && commute <= 1e-9 && n == 43 && round_trip;
    outcome(
        pass,
        format!(
            "kernel error {kernel_err:.1e}, linearity {linear:.1e}, merge commutativity {commute:.1e}, grid {n}x{n}, round-trip exact: {round_trip}"
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn labeled(score: f64, label: bool) -> GraspHypothesis {
    GraspHypothesis {
        pose: Pose::identity(),
        score,
        label: Some(label),
    }
}

fn selection_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let target = GraspHypothesis::new(Pose::new(random_rotation(&mut rng), Vec3::new(0.1, -0.05, 0.02)).unwrap());
    let approach = target.approach();
    let mut pool = sample_view_sphere(60, (-1.4, 1.4), 0.4, target.position(), 3).unwrap();
    let behind = ViewpointSpec::looking_at(&(target.position() - approach * 0.4), &target.position(), &Vec3::z());
    pool.insert(17, behind);
    let pick = select_viewpoint_index(&StrategySpec::head_on(), &target, &pool).unwrap();
    let (az, el) = view_angles(&pool[pick].position(), &target.pose).unwrap();
    let head_on = pick == 17 && az.abs() < 1e-9 && el.abs() < 1e-9;

    let map = smooth(&accumulate(random_samples(&mut rng, 300), 0.5), &SmoothingParams::default()).unwrap();
    let base = select_viewpoint_index(&StrategySpec::smart(&map), &target, &pool).unwrap();
    let mut invariant = true;
    for c in [0.01, 0.5, 3.0, 1e4] {
        let mut scaled = map.clone();
        for ch in Channel::ALL {
            if ch != Channel::Accuracy {
                scaled.channel_mut(ch).iter_mut().for_each(|v| *v *= c);
            }
        }
        invariant &= select_viewpoint_index(&StrategySpec::smart(&scaled), &target, &pool).unwrap() == base;
    }

    let seq = [labeled(0.9, true), labeled(0.8, true), labeled(0.7, false), labeled(0.6, true)];
    let top = (top_n_accuracy(&seq, 2).unwrap(), top_n_accuracy(&seq, 4).unwrap());
    let top_ok = top == (Some(1.0), Some(0.75));
    outcome(
        head_on && invariant && top_ok,
        format!("head-on picks the (0,0) view: {head_on}, smart invariant under scaling: {invariant}, top-n (n=2, n=4) = {top:?}"),
    )
}

// 7 ------------------------------------------------------------------------

fn top_n_over_trials(report: &viewgrasp::harness::OfflineReport, s: StrategyKind, n: usize, class: Option<viewgrasp::geometry::ShapeClass>) -> f64 {
    let vals: Vec<f64> = report
        .trials
        .iter()
        .filter(|t| t.strategy == s && class.is_none_or(|c| t.shape_class == c))
        .filter_map(|t| t.top_n.iter().find(|(k, _)| *k == n).and_then(|(_, a)| *a))
        .collect();
    vals.iter().sum::<f64>() / vals.len().max(1) as f64
}

fn directional_end_to_end() -> Outcome {
    use viewgrasp::geometry::ShapeClass;
    let start = Instant::now();
    let strategies = [StrategyKind::Smart, StrategyKind::Random, StrategyKind::HeadOn];
    let (mut smart_pos, mut random_pos) = (0usize, 0usize);
    let mut wins = 0;
    let mut cyl_gap = Vec::new();
    let mut lines = Vec::new();
    for r in 0..5u64 {
        let config = ExperimentConfig {
            master_seed: 100 + r,
            per_class_maps: true,
            ..Default::default()
        };
        let maps = ClassMaps::build(&config).unwrap();
        let report = run_offline_eval(&config, &maps, &strategies).unwrap();
        let pos = |s| report.rows.iter().filter(|row| row.strategy == s).map(|row| row.positives).sum::<usize>();
        smart_pos += pos(StrategyKind::Smart);
        random_pos += pos(StrategyKind::Random);
        let (ts, tr) = (
            top_n_over_trials(&report, StrategyKind::Smart, 25, None),
            top_n_over_trials(&report, StrategyKind::Random, 25, None),
        );
        wins += (ts >= tr) as usize;
        let (hc, sc) = (
            top_n_over_trials(&report, StrategyKind::HeadOn, 10, Some(ShapeClass::CylinderLike)),
            top_n_over_trials(&report, StrategyKind::Smart, 10, Some(ShapeClass::CylinderLike)),
        );
        cyl_gap.push((hc - sc).abs());
        lines.push(format!(
            "    replication {r}: positives smart {} random {}, top-25 smart {ts:.3} random {tr:.3}, cylinder top-10 head-on {hc:.3} smart {sc:.3}",
            pos(StrategyKind::Smart),
            pos(StrategyKind::Random)
        ));
    }
    for l in &lines {
        println!("{l}");
    }
    let ratio = smart_pos as f64 / random_pos.max(1) as f64;
    let gap = cyl_gap.iter().sum::<f64>() / cyl_gap.len() as f64;
    let elapsed = start.elapsed();
    let a = ratio >= 1.5;
    let b = wins >= 4;
    let c = gap <= 0.15;
    outcome(
        a && b && c && within(elapsed, 1800),
        format!(
            "(a) positives smart/random = {smart_pos}/{random_pos} = {ratio:.2} (>= 1.5: {a}); (b) top-25 smart >= random in {wins}/5 (>= 80%: {b}); (c) cylinder top-10 |head-on - smart| mean {gap:.3} (<= 0.15: {c}); {:.0}s",
            elapsed.as_secs_f64()
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn sequence_ordering() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        master_seed: 200,
        ..Default::default()
    };
    let maps = ClassMaps::build(&config).unwrap();
    let results = run_sequence_orders(&config, &maps, &SequenceOrder::ALL, 500).unwrap();
    let rate = |o: SequenceOrder| results.iter().find(|r| r.order == o).unwrap().success_rate();
    let (v1, v12, v13, v123) = (
        rate(SequenceOrder::V1),
        rate(SequenceOrder::V1V2),
        rate(SequenceOrder::V1V3),
        rate(SequenceOrder::V1V2V3),
    );
    let elapsed = start.elapsed();
    outcome(
        v12 >= v1 && v123 >= v13 && within(elapsed, 1200),
        format!(
            "success over 500 trials: v1 {v1:.3}, v1_v2 {v12:.3}, v1_v3 {v13:.3}, v1_v2_v3 {v123:.3}; {:.0}s",
            elapsed.as_secs_f64()
        ),
    )
}

// 9 ------------------------------------------------------------------------

const CLI_CONFIG: &str = r#"
views_per_object = 6
per_class_maps = true

[corpus]
n_box = 2
n_cylinder = 2

[offline]
trials_per_class = 3
pool_size = 60

[sequence]
trials = 6
"#;

fn run_cli(config: &Path, out: &Path, jobs: usize, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_viewgrasp"))
        .arg("--config")
        .arg(config)
        .arg("--seed")
        .arg("9")
        .arg("--out")
        .arg(out)
        .arg("--jobs")
        .arg(jobs.to_string())
        .args(args)
        .output()
        .is_ok_and(|o| o.status.success())
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("exp.toml");
    std::fs::write(&config, CLI_CONFIG).unwrap();
    let mut trees = Vec::new();
    let mut ok = true;
    for (run, jobs) in [(0, 1), (1, 4), (2, 4)] {
        let out = tmp.path().join(format!("run{run}"));
        let map = out.join("map_box.gvmap");
        let map = map.to_str().unwrap();
        for args in [
            vec!["build-corpus"],
            vec!["build-map"],
            vec!["eval-offline"],
            vec!["eval-sequence"],
            vec!["render", "--object", "1", "--azimuth", "-0.7", "--elevation", "0.4"],
            vec!["export-map", "--map", map],
        ] {
            ok &= run_cli(&config, &out, jobs, &args);
        }
        trees.push(tree(&out));
    }
    let files = trees[0].len();
    let identical = trees.windows(2).all(|w| w[0] == w[1]);
    outcome(
        ok && identical && files >= 10,
        format!("all subcommands succeeded: {ok}; {files} files byte-identical across --jobs 1/4 and a rerun: {identical}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("geometry", geometry_suite),
        ("rendering", rendering_suite),
        ("force-closure oracle equivalence", force_closure_oracle),
        ("candidate soundness", candidate_soundness),
        ("map math", map_math),
        ("selection", selection_suite),
        ("directional end-to-end", directional_end_to_end),
        ("sequence ordering", sequence_ordering),
        ("reproducibility", reproducibility),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let o = f();
        failed += (!o.pass) as usize;
        println!("criterion {} {name}: {} | {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
