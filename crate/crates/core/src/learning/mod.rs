//! Desk-scale learning stack: hand-crafted silhouette features, contrastive
//! Siamese shape embedding with nearest-neighbor retrieval, and pose
//! regression heads trained through the symmetry-invariant orientation
//! representation.
//!
//! Everything runs single-threaded on plain minibatch gradient descent with
//! seeded shuffling, so identical seeds reproduce identical weights
//! bit-for-bit.

mod mlp;

pub use mlp::{Mlp, MlpGradients, LEAKY_SLOPE};

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datagen::SceneRecord;
use crate::error::{Error, Result};
use crate::geometry::{orthogonalize_svd, Pose, RotationMatrix, Vec3, VoxelGrid};
use crate::symmetry::{
    nearest_rotation_from_set, orientation_loss, orientation_loss_gradient, Category,
};

/// Silhouette grid side; the flattened silhouette contributes
/// `SILHOUETTE_SIDE^2` feature values.
pub const SILHOUETTE_SIDE: usize = 16;
/// Silhouette bits plus normalized crop center and scale.
pub const BASE_FEATURE_DIM: usize = SILHOUETTE_SIDE * SILHOUETTE_SIDE + 3;
/// Wrist orientation (9) + wrist position (3) + 20 joint angles.
pub const CONFIG_FEATURE_DIM: usize = 32;
/// 20 joint positions.
pub const SHAPE_FEATURE_DIM: usize = 60;
/// Mesh-branch input: the voxel grid pooled to 8^3 blocks.
pub const MESH_FEATURE_DIM: usize = 512;

/// Hand coordinates enter the features in meters so every input stays O(1).
const HAND_COORD_SCALE: f64 = 0.01;

/// When hand terms are present the 256 silhouette bits are attenuated;
/// otherwise their sheer count lets the heads memorize silhouettes instead
/// of reading the (far more informative) hand geometry.
const SILHOUETTE_SCALE_WITH_HAND: f64 = 0.1;

/// A flat real feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn distance(&self, other: &FeatureVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Which hand information to append to the image features.
///
/// The orientation and shape heads consume the configuration (wrist pose +
/// joint angles); the position head consumes the joint positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandFeatureMode {
    None,
    Config,
    Shape,
}

impl HandFeatureMode {
    pub fn feature_dim(self) -> usize {
        BASE_FEATURE_DIM
            + match self {
                HandFeatureMode::None => 0,
                HandFeatureMode::Config => CONFIG_FEATURE_DIM,
                HandFeatureMode::Shape => SHAPE_FEATURE_DIM,
            }
    }
}

/// Features of one record: the 16x16 hand-occluded silhouette bits, the
/// normalized crop center and scale, and optionally the hand terms.
pub fn image_features(record: &SceneRecord, mode: HandFeatureMode) -> Result<FeatureVector> {
    if record.silhouette.iter().all(|&b| b == 0) {
        return Err(Error::validation("record has an empty silhouette"));
    }
    if record.silhouette.len() != SILHOUETTE_SIDE * SILHOUETTE_SIDE {
        return Err(Error::DimensionMismatch {
            expected: SILHOUETTE_SIDE * SILHOUETTE_SIDE,
            got: record.silhouette.len(),
            context: "silhouette bits",
        });
    }
    let sil_scale = if mode == HandFeatureMode::None {
        1.0
    } else {
        SILHOUETTE_SCALE_WITH_HAND
    };
    let mut v = Vec::with_capacity(mode.feature_dim());
    v.extend(record.silhouette.iter().map(|&b| if b != 0 { sil_scale } else { 0.0 }));
    v.push(record.crop.cx);
    v.push(record.crop.cy);
    v.push(record.crop.scale);
    match mode {
        HandFeatureMode::None => {}
        HandFeatureMode::Config => {
            v.extend(record.hp.wrist_orientation.to_flat());
            let p = record.hp.wrist_position;
            v.extend([
                p.x * HAND_COORD_SCALE,
                p.y * HAND_COORD_SCALE,
                p.z * HAND_COORD_SCALE,
            ]);
            v.extend(record.hp.angles_flat());
        }
        HandFeatureMode::Shape => {
            v.extend(record.hs.joints_flat().iter().map(|c| c * HAND_COORD_SCALE));
        }
    }
    Ok(FeatureVector::new(v))
}

/// Margin contrastive loss on an embedding distance `d`: same-object pairs
/// are attracted (`d^2 / 2`), different-object pairs are repelled up to the
/// margin (`max(0, m - d)^2 / 2`).
pub fn contrastive_loss(d: f64, same_object: bool, margin: f64) -> f64 {
    debug_assert!(d >= 0.0 && margin >= 0.0);
    if same_object {
        0.5 * d * d
    } else {
        let gap = (margin - d).max(0.0);
        0.5 * gap * gap
    }
}

/// Derivative of [`contrastive_loss`] with respect to `d`.
pub fn contrastive_loss_ddist(d: f64, same_object: bool, margin: f64) -> f64 {
    if same_object {
        d
    } else {
        -(margin - d).max(0.0)
    }
}

/// Mean squared component error.
pub fn position_loss(p_est: &[f64], p_gt: &[f64]) -> f64 {
    debug_assert_eq!(p_est.len(), p_gt.len());
    p_est
        .iter()
        .zip(p_gt)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / p_est.len() as f64
}

/// Unweighted sum of the three per-task losses.
pub fn total_loss(l_shape: f64, l_pos: f64, l_orient: f64) -> f64 {
    l_shape + l_pos + l_orient
}

/// Training hyperparameters shared by the embedding and the pose heads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub embed_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: 1.0,
            learning_rate: 1e-2,
            epochs: 50,
            batch_size: 16,
            seed: 0,
            embed_dim: 32,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0)
            || !(self.learning_rate > 0.0)
            || self.epochs == 0
            || self.batch_size == 0
            || self.embed_dim == 0
        {
            return Err(Error::validation("train config values must be positive"));
        }
        Ok(())
    }
}

/// Pooled voxel features of one mesh, keyed by its id.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFeatures {
    pub mesh_id: String,
    pub pooled: Vec<f64>,
}

impl MeshFeatures {
    pub fn from_grid(mesh_id: impl Into<String>, grid: &VoxelGrid) -> Self {
        MeshFeatures { mesh_id: mesh_id.into(), pooled: grid.pooled(8) }
    }
}

/// Precomputed mesh embeddings for nearest-neighbor shape retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    entries: Vec<(String, FeatureVector)>,
}

impl EmbeddingIndex {
    pub fn new(entries: Vec<(String, FeatureVector)>) -> Result<Self> {
        if let Some(first) = entries.first() {
            let dim = first.1.len();
            for (_, v) in &entries {
                if v.len() != dim {
                    return Err(Error::validation("index embeddings must share a dimension"));
                }
            }
        }
        let mut ids: Vec<&str> = entries.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("index mesh ids must be unique"));
        }
        Ok(EmbeddingIndex { entries })
    }

    pub fn entries(&self) -> &[(String, FeatureVector)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV layout: `mesh_id` followed by the embedding values.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for (id, v) in &self.entries {
            write!(out, "{id}")?;
            for x in &v.values {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let id = parts
                .next()
                .ok_or_else(|| Error::Parse("empty index row".into()))?
                .to_string();
            let values: Vec<f64> = parts
                .map(|p| {
                    p.parse()
                        .map_err(|_| Error::Parse(format!("bad embedding value {p:?}")))
                })
                .collect::<Result<_>>()?;
            entries.push((id, FeatureVector::new(values)));
        }
        Self::new(entries)
    }
}

/// Nearest index entry by Euclidean distance; ties break toward the lowest
/// index.
pub fn retrieve_nearest(index: &EmbeddingIndex, query: &FeatureVector) -> Result<String> {
    if index.is_empty() {
        return Err(Error::EmptyInput("embedding index"));
    }
    if index.entries[0].1.len() != query.len() {
        return Err(Error::DimensionMismatch {
            expected: index.entries[0].1.len(),
            got: query.len(),
            context: "query embedding",
        });
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, (_, v)) in index.entries.iter().enumerate() {
        let d = v.distance(query);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(index.entries[best].0.clone())
}

/// Trained Siamese embedding: twin image/mesh networks with shared final
/// layers, plus the index of training-mesh embeddings.
#[derive(Debug, Clone)]
pub struct SiameseModel {
    pub image_net: Mlp,
    pub mesh_net: Mlp,
    pub index: EmbeddingIndex,
    /// Mean contrastive loss per epoch.
    pub epoch_losses: Vec<f64>,
}

fn shuffled_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Trains the contrastive shape embedding.
///
/// Each training pair couples a record's image features with a mesh's
/// pooled voxel features; half the pairs use the record's own mesh, half a
/// random other mesh. The final linear layer is shared between the two
/// branch networks (its gradient accumulates from both sides and the update
/// keeps the copies identical), so both branches embed into one space.
pub fn train_siamese(
    records: &[SceneRecord],
    meshes: &[MeshFeatures],
    include_hand: bool,
    cfg: &TrainConfig,
) -> Result<SiameseModel> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::EmptyInput("training records"));
    }
    let mut distinct: Vec<&str> = records.iter().map(|r| r.mesh_id.as_str()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::validation(
            "siamese training needs at least two distinct mesh ids",
        ));
    }
    if meshes.len() < 2 {
        return Err(Error::validation("need at least two meshes"));
    }
    for m in meshes {
        if m.pooled.len() != MESH_FEATURE_DIM {
            return Err(Error::DimensionMismatch {
                expected: MESH_FEATURE_DIM,
                got: m.pooled.len(),
                context: "pooled mesh features",
            });
        }
    }
    let mesh_slot: std::collections::HashMap<&str, usize> =
        meshes.iter().enumerate().map(|(i, m)| (m.mesh_id.as_str(), i)).collect();
    for r in records {
        if !mesh_slot.contains_key(r.mesh_id.as_str()) {
            return Err(Error::validation(format!(
                "record references unknown mesh {:?}",
                r.mesh_id
            )));
        }
    }

    let mode = if include_hand { HandFeatureMode::Config } else { HandFeatureMode::None };
    let features: Vec<FeatureVector> = records
        .iter()
        .map(|r| image_features(r, mode))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let image_sizes = [mode.feature_dim(), 128, 64, cfg.embed_dim];
    let mesh_sizes = [MESH_FEATURE_DIM, 128, 64, cfg.embed_dim];
    let mut image_net = Mlp::xavier(&image_sizes, &mut rng)?;
    let mut mesh_net = Mlp::xavier(&mesh_sizes, &mut rng)?;
    // share the final layer: keep the two copies identical from here on
    let last = image_net.layer_count() - 1;
    mesh_net.weights[last] = image_net.weights[last].clone();
    mesh_net.biases[last] = image_net.biases[last].clone();

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let order = shuffled_indices(records.len(), &mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut g_img = MlpGradients::zeros_like(&image_net);
            let mut g_mesh = MlpGradients::zeros_like(&mesh_net);
            let scale = 1.0 / batch.len() as f64;
            for &ri in batch {
                let record = &records[ri];
                let same = rng.random::<f64>() < 0.5;
                let mi = if same {
                    mesh_slot[record.mesh_id.as_str()]
                } else {
                    // uniform over the other meshes
                    let own = mesh_slot[record.mesh_id.as_str()];
                    let pick = rng.random_range(0..meshes.len() - 1);
                    if pick >= own {
                        pick + 1
                    } else {
                        pick
                    }
                };
                let is_same = meshes[mi].mesh_id == record.mesh_id;

                let e_img = image_net.apply(&features[ri].values)?;
                let e_mesh = mesh_net.apply(&meshes[mi].pooled)?;
                let diff: Vec<f64> = e_img.iter().zip(&e_mesh).map(|(a, b)| a - b).collect();
                let d = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                epoch_loss += contrastive_loss(d, is_same, cfg.margin);

                let dl_dd = contrastive_loss_ddist(d, is_same, cfg.margin);
                if d > 1e-12 && dl_dd != 0.0 {
                    let up_img: Vec<f64> = diff.iter().map(|v| dl_dd * v / d).collect();
                    let up_mesh: Vec<f64> = up_img.iter().map(|v| -v).collect();
                    image_net.accumulate_gradients(&features[ri].values, &up_img, scale, &mut g_img)?;
                    mesh_net.accumulate_gradients(&meshes[mi].pooled, &up_mesh, scale, &mut g_mesh)?;
                }
            }
            // the shared layer sees the sum of both sides' gradients
            let mut shared_w = g_img.d_weights[last].clone();
            for (v, d) in shared_w.iter_mut().zip(&g_mesh.d_weights[last]) {
                *v += d;
            }
            let mut shared_b = g_img.d_biases[last].clone();
            for (v, d) in shared_b.iter_mut().zip(&g_mesh.d_biases[last]) {
                *v += d;
            }
            g_img.d_weights[last] = shared_w.clone();
            g_img.d_biases[last] = shared_b.clone();
            g_mesh.d_weights[last] = shared_w;
            g_mesh.d_biases[last] = shared_b;
            image_net.sgd_step(&g_img, cfg.learning_rate);
            mesh_net.sgd_step(&g_mesh, cfg.learning_rate);
        }
        epoch_losses.push(epoch_loss / records.len() as f64);
    }

    let mut entries = Vec::with_capacity(meshes.len());
    for m in meshes {
        let e = mesh_net.apply(&m.pooled)?;
        entries.push((m.mesh_id.clone(), FeatureVector::new(e)));
    }
    Ok(SiameseModel {
        image_net,
        mesh_net,
        index: EmbeddingIndex::new(entries)?,
        epoch_losses,
    })
}

/// Embeds a record with the trained image branch.
pub fn embed_record(
    model_image_net: &Mlp,
    record: &SceneRecord,
) -> Result<FeatureVector> {
    let mode = match model_image_net.input_dim() {
        d if d == BASE_FEATURE_DIM => HandFeatureMode::None,
        d if d == BASE_FEATURE_DIM + CONFIG_FEATURE_DIM => HandFeatureMode::Config,
        other => {
            return Err(Error::Validation(format!(
                "unexpected image-branch input dimension {other}"
            )))
        }
    };
    let f = image_features(record, mode)?;
    Ok(FeatureVector::new(model_image_net.apply(&f.values)?))
}

/// Trained per-category pose heads.
#[derive(Debug, Clone)]
pub struct PoseModel {
    pub pos_net: Mlp,
    pub orient_net: Mlp,
    /// Mean position loss per epoch.
    pub pos_losses: Vec<f64>,
    /// Mean orientation loss per epoch.
    pub orient_losses: Vec<f64>,
}

/// Geometric anchor for the position head: the head regresses the offset
/// from this point rather than the absolute camera-frame position. Coarse
/// localization comes from the anchor, the head learns the grasp-dependent
/// offset, and the contact refinement stage does the final alignment.
///
/// With hand input the anchor is the wrist position (the raw measured
/// quantity); without it, the crop center back-projected at the nominal
/// working distance of the default camera.
pub fn position_anchor(record: &SceneRecord, mode: HandFeatureMode) -> Vec3 {
    match mode {
        HandFeatureMode::Shape | HandFeatureMode::Config => record.hp.wrist_position,
        HandFeatureMode::None => {
            // default camera: focal 500 px, 256 px square, object box
            // centered 60 cm out
            let z0 = 60.0;
            let px = (record.crop.cx - 0.5) * 256.0;
            let py = (record.crop.cy - 0.5) * 256.0;
            Vec3::new(px * z0 / 500.0, py * z0 / 500.0, z0)
        }
    }
}

/// Trains the position and orientation regression heads on one category.
///
/// The position head regresses the three camera-frame coordinates with the
/// mean-squared position loss on silhouette + joint-position features. The
/// orientation head regresses the raw 3x3 matrix; its loss and gradients run
/// through the category's symmetry-invariant representation, so
/// representation-equivalent targets produce identical updates.
pub fn train_pose_regressor(
    records: &[SceneRecord],
    category: Category,
    include_hand: bool,
    cfg: &TrainConfig,
) -> Result<PoseModel> {
    cfg.validate()?;
    let subset: Vec<&SceneRecord> =
        records.iter().filter(|r| r.category == category).collect();
    if subset.is_empty() {
        return Err(Error::EmptyInput("category training records"));
    }

    let pos_mode = if include_hand { HandFeatureMode::Shape } else { HandFeatureMode::None };
    let orient_mode = if include_hand { HandFeatureMode::Config } else { HandFeatureMode::None };
    let pos_feats: Vec<FeatureVector> = subset
        .iter()
        .map(|r| image_features(r, pos_mode))
        .collect::<Result<_>>()?;
    let orient_feats: Vec<FeatureVector> = subset
        .iter()
        .map(|r| image_features(r, orient_mode))
        .collect::<Result<_>>()?;

    let n = subset.len() as f64;
    let pos_targets: Vec<[f64; 3]> = subset
        .iter()
        .map(|r| (r.pose.p - position_anchor(r, pos_mode)).to_array())
        .collect();
    let mean_p = pos_targets
        .iter()
        .fold(Vec3::ZERO, |acc, t| acc + Vec3::from_array(*t))
        .scale(1.0 / n);
    let mut mean_o = [0.0f64; 9];
    for r in subset.iter() {
        for (slot, v) in mean_o.iter_mut().zip(r.pose.orientation.to_flat()) {
            *slot += v / n;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pos_net = Mlp::xavier(&[pos_mode.feature_dim(), 64, 64, 64, 3], &mut rng)?;
    // the orientation target is piecewise in the grasp type, which takes
    // more width to fit than the position offset
    let mut orient_net =
        Mlp::xavier(&[orient_mode.feature_dim(), 128, 64, 64, 9], &mut rng)?;
    // start the output biases at the training means
    let last = pos_net.layer_count() - 1;
    pos_net.biases[last] = vec![mean_p.x, mean_p.y, mean_p.z];
    orient_net.biases[last] = mean_o.to_vec();

    let mut pos_losses = Vec::with_capacity(cfg.epochs);
    let mut orient_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let order = shuffled_indices(subset.len(), &mut rng);
        let mut pos_epoch = 0.0;
        let mut orient_epoch = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut g_pos = MlpGradients::zeros_like(&pos_net);
            let mut g_orient = MlpGradients::zeros_like(&orient_net);
            let scale = 1.0 / batch.len() as f64;
            for &ri in batch {
                let record = subset[ri];
                let target_p = pos_targets[ri];

                let y = pos_net.apply(&pos_feats[ri].values)?;
                pos_epoch += position_loss(&y, &target_p);
                let upstream: Vec<f64> = y
                    .iter()
                    .zip(target_p)
                    .map(|(a, b)| 2.0 * (a - b) / 3.0)
                    .collect();
                pos_net.accumulate_gradients(&pos_feats[ri].values, &upstream, scale, &mut g_pos)?;

                let raw = orient_net.apply(&orient_feats[ri].values)?;
                let raw_m = [
                    [raw[0], raw[1], raw[2]],
                    [raw[3], raw[4], raw[5]],
                    [raw[6], raw[7], raw[8]],
                ];
                orient_epoch += orientation_loss(category, &raw_m, &record.pose.orientation);
                let g = orientation_loss_gradient(category, &raw_m, &record.pose.orientation);
                orient_net.accumulate_gradients(&orient_feats[ri].values, &g, scale, &mut g_orient)?;
            }
            pos_net.sgd_step(&g_pos, cfg.learning_rate);
            orient_net.sgd_step(&g_orient, cfg.learning_rate);
        }
        pos_losses.push(pos_epoch / subset.len() as f64);
        orient_losses.push(orient_epoch / subset.len() as f64);
    }
    Ok(PoseModel { pos_net, orient_net, pos_losses, orient_losses })
}

/// How raw orientation output is resolved to SO(3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrientationResolve {
    /// Closest training-set rotation under the category representation.
    #[default]
    NearestTrainSet,
    /// Polar projection of the raw matrix.
    Svd,
}

/// Runs the trained heads on one record and resolves the raw orientation to
/// a proper rotation.
pub fn predict_pose(
    pos_net: &Mlp,
    orient_net: &Mlp,
    record: &SceneRecord,
    category: Category,
    train_rotations: &[RotationMatrix],
    resolve: OrientationResolve,
) -> Result<Pose> {
    let pos_mode = match pos_net.input_dim() {
        d if d == BASE_FEATURE_DIM => HandFeatureMode::None,
        d if d == BASE_FEATURE_DIM + SHAPE_FEATURE_DIM => HandFeatureMode::Shape,
        other => {
            return Err(Error::Validation(format!(
                "unexpected position-head input dimension {other}"
            )))
        }
    };
    let orient_mode = match orient_net.input_dim() {
        d if d == BASE_FEATURE_DIM => HandFeatureMode::None,
        d if d == BASE_FEATURE_DIM + CONFIG_FEATURE_DIM => HandFeatureMode::Config,
        other => {
            return Err(Error::Validation(format!(
                "unexpected orientation-head input dimension {other}"
            )))
        }
    };
    let offset = pos_net.apply(&image_features(record, pos_mode)?.values)?;
    let p = position_anchor(record, pos_mode) + Vec3::new(offset[0], offset[1], offset[2]);
    let raw = orient_net.apply(&image_features(record, orient_mode)?.values)?;
    let raw_m = [
        [raw[0], raw[1], raw[2]],
        [raw[3], raw[4], raw[5]],
        [raw[6], raw[7], raw[8]],
    ];
    let orientation = match resolve {
        OrientationResolve::NearestTrainSet => {
            nearest_rotation_from_set(&raw_m, train_rotations, category)?
        }
        OrientationResolve::Svd => orthogonalize_svd(raw_m)?,
    };
    Ok(Pose::new(p, orientation))
}
