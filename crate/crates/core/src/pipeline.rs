//! End-to-end orchestration shared by the CLI and the test suites:
//! prediction files, evaluation reports, batch refinement and the
//! hand/no-hand/refinement ablation.
//!
//! Per-record stages fan out over a small worker pool (the pool size only
//! affects wall time, never results: work items are pure and results merge
//! in record order). Training stays single-threaded for bit-exact
//! reproducibility.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::datagen::{
    read_jsonl, MeshLibrary, SceneRecord, Split, SURFACE_SAMPLES, SURFACE_SEED,
};
use crate::error::{Error, Result};
use crate::geometry::{
    sample_surface_points, Pose, RotationMatrix, Vec3, VoxelGrid,
};
use crate::hand::fingertips;
use crate::learning::{
    embed_record, predict_pose, retrieve_nearest, train_pose_regressor, train_siamese,
    MeshFeatures, Mlp, OrientationResolve, PoseModel, SiameseModel, TrainConfig,
};
use crate::metrics::{
    accuracy_curve, add_metric, adds_metric, pose_mae, sym_aware_add, voxel_f1, AccuracyCurve,
    DEFAULT_CURVE_STEPS, DEFAULT_T_MAX,
};
use crate::refine::{refine_pose, RefineConstraints};
use crate::symmetry::{Category, ALL_CATEGORIES};

/// One pose/shape estimate for a dataset record. The interchange file is
/// JSONL with keys `record_index`, `mesh_id_retrieved`, `p`, `O`, so any
/// external predictor can be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub record_index: usize,
    pub mesh_id_retrieved: String,
    pub pose: Pose,
}

#[derive(Serialize, Deserialize)]
struct WirePrediction {
    record_index: usize,
    mesh_id_retrieved: String,
    p: [f64; 3],
    #[serde(rename = "O")]
    o: [f64; 9],
}

impl Serialize for Prediction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WirePrediction {
            record_index: self.record_index,
            mesh_id_retrieved: self.mesh_id_retrieved.clone(),
            p: self.pose.p.to_array(),
            o: self.pose.orientation.to_flat(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Prediction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WirePrediction::deserialize(d)?;
        Ok(Prediction {
            record_index: w.record_index,
            mesh_id_retrieved: w.mesh_id_retrieved,
            pose: Pose::new(
                Vec3::from_array(w.p),
                RotationMatrix::from_flat(w.o).map_err(serde::de::Error::custom)?,
            ),
        })
    }
}

pub fn write_predictions(preds: &[Prediction], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for p in preds {
        serde_json::to_writer(&mut out, p)?;
        out.push(b'\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let file = std::fs::File::open(path)?;
    let mut preds = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        preds.push(serde_json::from_str(&line)?);
    }
    Ok(preds)
}

/// CSV of one rotation per row, nine row-major values.
pub fn write_rotations(rotations: &[RotationMatrix], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for r in rotations {
        let f = r.to_flat();
        let row: Vec<String> = f.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_rotations(path: &Path) -> Result<Vec<RotationMatrix>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|p| p.parse().map_err(|_| Error::Parse(format!("bad rotation value {p:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 9 {
            return Err(Error::Parse("rotation rows need 9 values".into()));
        }
        let mut f = [0.0; 9];
        f.copy_from_slice(&vals);
        out.push(RotationMatrix::from_flat(f)?);
    }
    Ok(out)
}

/// Runs `f` over `0..n` on up to `workers` threads and returns the results
/// in index order. `f` must be pure; the pool size cannot change outputs.
pub fn run_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let counter = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, T)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let counter = &counter;
            let f = &f;
            scope.spawn(move || loop {
                let i = counter.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                if tx.send((i, f(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
        for (i, v) in rx {
            out[i] = Some(v);
        }
        out.into_iter().map(|v| v.expect("worker result")).collect()
    })
}

/// Worker-pool size: `HOPS_NUM_WORKERS` caps the available parallelism.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("HOPS_NUM_WORKERS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).map_or(available, |cap| cap.min(available.max(1))),
        Err(_) => available,
    }
}

/// Defaults used by the pose-head pipelines.
pub fn default_pose_train_config(seed: u64) -> TrainConfig {
    TrainConfig { epochs: 300, seed, ..TrainConfig::default() }
}

/// Defaults used by the embedding pipeline.
pub fn default_embed_train_config(seed: u64) -> TrainConfig {
    TrainConfig { epochs: 60, seed, ..TrainConfig::default() }
}

/// Body-frame surface samples per mesh, shared by refinement and metrics.
pub fn surface_cache(library: &MeshLibrary) -> Result<HashMap<String, Vec<Vec3>>> {
    let mut cache = HashMap::new();
    for e in library.entries() {
        cache.insert(
            e.mesh_id.clone(),
            sample_surface_points(&e.mesh, SURFACE_SAMPLES, SURFACE_SEED)?,
        );
    }
    Ok(cache)
}

/// Trained per-category pose heads plus the training-set rotations used for
/// nearest-rotation resolution.
pub struct CategoryPoseModels {
    pub models: BTreeMap<Category, PoseModel>,
    pub train_rotations: BTreeMap<Category, Vec<RotationMatrix>>,
}

/// Trains position/orientation heads for every category present in the
/// train split. Categories train in parallel (up to `workers`); each
/// category's run is single-threaded and seeded, so the pool size cannot
/// change the weights.
pub fn train_pose_all(
    records: &[SceneRecord],
    include_hand: bool,
    cfg: &TrainConfig,
    workers: usize,
) -> Result<CategoryPoseModels> {
    let train: Vec<SceneRecord> = records
        .iter()
        .filter(|r| r.split == Split::Train)
        .cloned()
        .collect();
    if train.is_empty() {
        return Err(Error::EmptyInput("train split"));
    }
    let present: Vec<Category> = ALL_CATEGORIES
        .into_iter()
        .filter(|c| train.iter().any(|r| r.category == *c))
        .collect();
    let trained: Vec<Result<PoseModel>> = run_indexed(present.len(), workers, |i| {
        train_pose_regressor(&train, present[i], include_hand, cfg)
    });
    let mut models = BTreeMap::new();
    let mut train_rotations = BTreeMap::new();
    for (c, model) in present.iter().zip(trained) {
        let rotations: Vec<RotationMatrix> = train
            .iter()
            .filter(|r| r.category == *c)
            .map(|r| r.pose.orientation)
            .collect();
        models.insert(*c, model?);
        train_rotations.insert(*c, rotations);
    }
    Ok(CategoryPoseModels { models, train_rotations })
}

/// Runs the pose heads on every test-split record, producing one
/// prediction per record. `mesh_id_retrieved` is filled from the retrieval
/// model when given, otherwise with the record's own mesh id.
pub fn predict_test_split(
    records: &[SceneRecord],
    pose_models: &CategoryPoseModels,
    siamese: Option<&SiameseModel>,
    resolve: OrientationResolve,
) -> Result<Vec<Prediction>> {
    let mut preds = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.split != Split::Test {
            continue;
        }
        let Some(model) = pose_models.models.get(&r.category) else {
            continue;
        };
        let rotations = &pose_models.train_rotations[&r.category];
        let pose = predict_pose(&model.pos_net, &model.orient_net, r, r.category, rotations, resolve)?;
        let mesh_id_retrieved = match siamese {
            Some(s) => retrieve_nearest(&s.index, &embed_record(&s.image_net, r)?)?,
            None => r.mesh_id.clone(),
        };
        preds.push(Prediction { record_index: i, mesh_id_retrieved, pose });
    }
    Ok(preds)
}

/// One `(category, metric, value)` row of the evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub category: String,
    pub metric: String,
    pub value: f64,
}

/// Per-category metric table plus the accuracy-threshold curves.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub rows: Vec<MetricRow>,
    pub curves: Vec<(Category, String, AccuracyCurve)>,
}

impl EvaluationReport {
    /// Stable column order: `category,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,metric,value\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.category, row.metric, row.value));
        }
        out
    }

    /// Writes `report.csv` plus one `curve_<metric>_<category>.csv` per
    /// curve.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        for (category, metric, curve) in &self.curves {
            let mut text = String::from("threshold,accuracy\n");
            for (t, a) in curve.thresholds.iter().zip(&curve.accuracies) {
                text.push_str(&format!("{t},{a}\n"));
            }
            std::fs::write(dir.join(format!("curve_{metric}_{category}.csv")), text)?;
        }
        Ok(())
    }

    pub fn value(&self, category: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.category == category && r.metric == metric)
            .map(|r| r.value)
    }
}

/// Evaluation knobs.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub orbit_steps: usize,
    pub resolution: usize,
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { orbit_steps: 360, resolution: 32, workers: 1 }
    }
}

/// Scores a prediction file against its dataset: ADD / ADD-S /
/// symmetry-aware ADD accuracy-threshold AUCs, position and orientation
/// MAE, and the voxel F1 between retrieved and true meshes.
pub fn evaluate_predictions(
    records: &[SceneRecord],
    preds: &[Prediction],
    library: &MeshLibrary,
    opts: &EvalOptions,
) -> Result<EvaluationReport> {
    if preds.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    for p in preds {
        if p.record_index >= records.len() {
            return Err(Error::validation(format!(
                "prediction references record {} of {}",
                p.record_index,
                records.len()
            )));
        }
    }
    let surfaces = surface_cache(library)?;
    let mut grids: HashMap<String, VoxelGrid> = HashMap::new();
    for e in library.entries() {
        grids.insert(e.mesh_id.clone(), crate::geometry::voxelize(&e.mesh, opts.resolution)?);
    }

    struct Scores {
        category: Category,
        add: f64,
        adds: f64,
        sym_add: f64,
        f1: Option<f64>,
        gt: Pose,
        est: Pose,
    }
    let per_pred: Vec<Result<Scores>> = run_indexed(preds.len(), opts.workers, |i| {
        let p = &preds[i];
        let r = &records[p.record_index];
        let surface = surfaces
            .get(&r.mesh_id)
            .ok_or_else(|| Error::validation(format!("record mesh {:?} not in library", r.mesh_id)))?;
        let add = add_metric(surface, &r.pose, &p.pose);
        let adds = adds_metric(surface, &r.pose, &p.pose);
        let sym_add = sym_aware_add(r.category, surface, &r.pose, &p.pose, opts.orbit_steps);
        let f1 = match grids.get(&p.mesh_id_retrieved) {
            Some(pred_grid) => Some(voxel_f1(pred_grid, &grids[&r.mesh_id])?),
            None => None,
        };
        Ok(Scores { category: r.category, add, adds, sym_add, f1, gt: r.pose, est: p.pose })
    });
    let per_pred: Vec<Scores> = per_pred.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let metric_names = ["add", "adds", "sym_add"];
    let mut avg: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for c in ALL_CATEGORIES {
        let scores: Vec<&Scores> = per_pred.iter().filter(|s| s.category == c).collect();
        if scores.is_empty() {
            continue;
        }
        let errors = [
            scores.iter().map(|s| s.add).collect::<Vec<f64>>(),
            scores.iter().map(|s| s.adds).collect(),
            scores.iter().map(|s| s.sym_add).collect(),
        ];
        for (name, errs) in metric_names.iter().zip(errors) {
            let curve = accuracy_curve(&errs, DEFAULT_T_MAX, DEFAULT_CURVE_STEPS)?;
            rows.push(MetricRow {
                category: c.to_string(),
                metric: format!("{name}_auc"),
                value: curve.auc,
            });
            avg.entry(name).or_default().push(curve.auc);
            curves.push((c, name.to_string(), curve));
        }
        let pairs: Vec<(Pose, Pose)> = scores.iter().map(|s| (s.gt, s.est)).collect();
        let (pos_mae, orient_mae) = pose_mae(&pairs, c)?;
        rows.push(MetricRow {
            category: c.to_string(),
            metric: "position_mae".into(),
            value: pos_mae,
        });
        rows.push(MetricRow {
            category: c.to_string(),
            metric: "orientation_mae".into(),
            value: orient_mae,
        });
        avg.entry("position_mae").or_default().push(pos_mae);
        avg.entry("orientation_mae").or_default().push(orient_mae);

        let mut f1s: Vec<f64> = scores.iter().filter_map(|s| s.f1).collect();
        if !f1s.is_empty() {
            let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
            f1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = f1s[f1s.len() / 2];
            rows.push(MetricRow { category: c.to_string(), metric: "f1_mean".into(), value: mean });
            rows.push(MetricRow {
                category: c.to_string(),
                metric: "f1_median".into(),
                value: median,
            });
            avg.entry("f1_mean").or_default().push(mean);
            avg.entry("f1_median").or_default().push(median);
        }
    }
    for name in [
        "add_auc",
        "adds_auc",
        "sym_add_auc",
        "position_mae",
        "orientation_mae",
        "f1_mean",
        "f1_median",
    ] {
        let key = name.trim_end_matches("_auc");
        let key = if name.ends_with("_auc") { key } else { name };
        if let Some(vals) = avg.get(key) {
            rows.push(MetricRow {
                category: "avg".into(),
                metric: name.into(),
                value: vals.iter().sum::<f64>() / vals.len() as f64,
            });
        }
    }
    Ok(EvaluationReport { rows, curves })
}

/// Refines every prediction against the retrieved mesh using the record's
/// stored (noisy) hand. Results merge in prediction order.
pub fn refine_predictions(
    records: &[SceneRecord],
    preds: &[Prediction],
    library: &MeshLibrary,
    cons: &RefineConstraints,
    seed: u64,
    workers: usize,
) -> Result<Vec<Prediction>> {
    let surfaces = surface_cache(library)?;
    let refined: Vec<Result<Prediction>> = run_indexed(preds.len(), workers, |i| {
        let p = &preds[i];
        let r = records.get(p.record_index).ok_or_else(|| {
            Error::validation(format!("prediction references record {}", p.record_index))
        })?;
        let surface = surfaces
            .get(&p.mesh_id_retrieved)
            .or_else(|| surfaces.get(&r.mesh_id))
            .ok_or_else(|| Error::validation(format!("no mesh for {:?}", p.mesh_id_retrieved)))?;
        let tips = fingertips(&r.hs);
        let result = refine_pose(&p.pose, &tips, surface, cons, seed ^ (i as u64))?;
        Ok(Prediction {
            record_index: p.record_index,
            mesh_id_retrieved: p.mesh_id_retrieved.clone(),
            pose: result.pose,
        })
    });
    refined.into_iter().collect()
}

/// One row of the ablation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub category: Category,
    pub case_name: String,
    pub orientation_mae: f64,
    pub sym_add_auc: f64,
    pub position_mae: f64,
}

/// Comparison table for the three training cases.
#[derive(Debug, Clone)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,case,orientation_mae,sym_add_auc,position_mae\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.category, r.case_name, r.orientation_mae, r.sym_add_auc, r.position_mae
            ));
        }
        out
    }

    pub fn value(&self, category: Category, case_name: &str) -> Option<&AblationRow> {
        self.rows
            .iter()
            .find(|r| r.category == category && r.case_name == case_name)
    }
}

/// Ablation knobs.
#[derive(Debug, Clone, Copy)]
pub struct AblateOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub orbit_steps: usize,
    pub workers: usize,
}

impl AblateOptions {
    pub fn new(seed: u64) -> Self {
        let cfg = default_pose_train_config(seed);
        AblateOptions {
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            seed,
            orbit_steps: 360,
            workers: 1,
        }
    }
}

/// Runs the three cases end to end on an already generated dataset:
/// pose heads trained without hand input, with hand input, and with hand
/// input plus fingertip refinement of the test predictions. Emits one row
/// per category and case.
pub fn run_ablation(
    records: &[SceneRecord],
    library: &MeshLibrary,
    opts: &AblateOptions,
) -> Result<AblationReport> {
    let surfaces = surface_cache(library)?;
    let eval = |preds: &[Prediction]| -> Result<BTreeMap<Category, (f64, f64, f64)>> {
        let mut out = BTreeMap::new();
        for c in ALL_CATEGORIES {
            let subset: Vec<&Prediction> = preds
                .iter()
                .filter(|p| records[p.record_index].category == c)
                .collect();
            if subset.is_empty() {
                continue;
            }
            let sym_errors: Vec<f64> = run_indexed(subset.len(), opts.workers, |i| {
                let p = subset[i];
                let r = &records[p.record_index];
                sym_aware_add(c, &surfaces[&r.mesh_id], &r.pose, &p.pose, opts.orbit_steps)
            });
            let auc = accuracy_curve(&sym_errors, DEFAULT_T_MAX, DEFAULT_CURVE_STEPS)?.auc;
            let pairs: Vec<(Pose, Pose)> = subset
                .iter()
                .map(|p| (records[p.record_index].pose, p.pose))
                .collect();
            let (pos_mae, orient_mae) = pose_mae(&pairs, c)?;
            out.insert(c, (orient_mae, auc, pos_mae));
        }
        Ok(out)
    };

    let mut rows = Vec::new();
    let mut hand_preds = None;
    for include_hand in [false, true] {
        let cfg = TrainConfig {
            epochs: opts.epochs,
            learning_rate: opts.learning_rate,
            seed: opts.seed,
            ..TrainConfig::default()
        };
        let models = train_pose_all(records, include_hand, &cfg, opts.workers)?;
        let preds =
            predict_test_split(records, &models, None, OrientationResolve::NearestTrainSet)?;
        let scores = eval(&preds)?;
        let case_name = if include_hand { "hand" } else { "no_hand" };
        for (c, (orient_mae, auc, pos_mae)) in &scores {
            rows.push(AblationRow {
                category: *c,
                case_name: case_name.into(),
                orientation_mae: *orient_mae,
                sym_add_auc: *auc,
                position_mae: *pos_mae,
            });
        }
        if include_hand {
            hand_preds = Some(preds);
        }
    }

    let refined = refine_predictions(
        records,
        hand_preds.as_ref().expect("hand case ran"),
        library,
        &RefineConstraints::default(),
        opts.seed,
        opts.workers,
    )?;
    for (c, (orient_mae, auc, pos_mae)) in eval(&refined)? {
        rows.push(AblationRow {
            category: c,
            case_name: "hand_refined".into(),
            orientation_mae: orient_mae,
            sym_add_auc: auc,
            position_mae: pos_mae,
        });
    }
    Ok(AblationReport { rows })
}

/// Loads a dataset and drops records whose mesh is unknown (reported as an
/// error instead when `strict`).
pub fn load_dataset(path: &Path, library: &MeshLibrary, strict: bool) -> Result<Vec<SceneRecord>> {
    let records = read_jsonl(path)?;
    if strict {
        for r in &records {
            if library.get(&r.mesh_id).is_none() {
                return Err(Error::validation(format!(
                    "dataset references unknown mesh {:?}",
                    r.mesh_id
                )));
            }
        }
        return Ok(records);
    }
    Ok(records
        .into_iter()
        .filter(|r| library.get(&r.mesh_id).is_some())
        .collect())
}

/// Trains the Siamese embedding from a dataset's train split and the mesh
/// library.
pub fn train_embedding(
    records: &[SceneRecord],
    library: &MeshLibrary,
    include_hand: bool,
    resolution: usize,
    cfg: &TrainConfig,
) -> Result<SiameseModel> {
    let train: Vec<SceneRecord> = records
        .iter()
        .filter(|r| r.split == Split::Train)
        .cloned()
        .collect();
    let mesh_feats: Vec<MeshFeatures> = library
        .entries()
        .iter()
        .map(|e| -> Result<MeshFeatures> {
            let grid = crate::geometry::voxelize(&e.mesh, resolution)?;
            Ok(MeshFeatures::from_grid(e.mesh_id.clone(), &grid))
        })
        .collect::<Result<_>>()?;
    train_siamese(&train, &mesh_feats, include_hand, cfg)
}

/// Saves the embedding model (twin checkpoints plus the index CSV).
pub fn save_embedding(model: &SiameseModel, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    model.image_net.save(&dir.join("image_net.json"))?;
    model.mesh_net.save(&dir.join("mesh_net.json"))?;
    model.index.save_csv(&dir.join("index.csv"))?;
    Ok(())
}

pub fn load_embedding(dir: &Path) -> Result<(Mlp, crate::learning::EmbeddingIndex)> {
    Ok((
        Mlp::load(&dir.join("image_net.json"))?,
        crate::learning::EmbeddingIndex::load_csv(&dir.join("index.csv"))?,
    ))
}

/// Saves per-category pose heads: `<dir>/<category>/{pos_net,orient_net}.json`
/// plus `rotations.csv`.
pub fn save_pose_models(models: &CategoryPoseModels, dir: &Path) -> Result<()> {
    for (c, model) in &models.models {
        let sub = dir.join(c.to_string());
        std::fs::create_dir_all(&sub)?;
        model.pos_net.save(&sub.join("pos_net.json"))?;
        model.orient_net.save(&sub.join("orient_net.json"))?;
        write_rotations(&models.train_rotations[c], &sub.join("rotations.csv"))?;
    }
    Ok(())
}

/// Loads whichever categories are present under `dir`.
pub fn load_pose_models(dir: &Path) -> Result<BTreeMap<Category, (Mlp, Mlp, Vec<RotationMatrix>)>> {
    let mut out = BTreeMap::new();
    for c in ALL_CATEGORIES {
        let sub = dir.join(c.to_string());
        if !sub.is_dir() {
            continue;
        }
        out.insert(
            c,
            (
                Mlp::load(&sub.join("pos_net.json"))?,
                Mlp::load(&sub.join("orient_net.json"))?,
                read_rotations(&sub.join("rotations.csv"))?,
            ),
        );
    }
    if out.is_empty() {
        return Err(Error::validation(format!("no pose models under {}", dir.display())));
    }
    Ok(out)
}
