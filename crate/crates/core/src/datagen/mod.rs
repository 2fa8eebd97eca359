//! Synthetic hand-object scene generation.
//!
//! Replaces a full rendering pipeline with the pieces the estimation
//! machinery actually consumes: procedural category meshes, weighted grasp
//! templates composed with the object pose, point-splat rasterization for
//! the hand-occlusion fraction and the 16x16 silhouette, a 50% occlusion
//! acceptance filter, and deterministic JSONL serialization with a 70:30
//! train/test split per category.

mod meshgen;
mod raster;

pub use meshgen::{default_grasp_priors, generate_library, mesh_family};
pub use raster::{occlusion_fraction, Camera, SceneRaster};

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    random_rotation, sample_surface_points, transform_points, Pose, RotationMatrix, TriangleMesh,
    Vec3,
};
use crate::hand::{
    forward_kinematics, perturb_config_with, HandConfig, HandModelSpec, HandShape, NoiseParams,
    JOINT_COUNT,
};
use crate::symmetry::{Category, ALL_CATEGORIES};

/// Number of body-frame surface samples used for occlusion, refinement and
/// the evaluation metrics.
pub const SURFACE_SAMPLES: usize = 512;
/// Seed for the shared per-mesh surface samples.
pub const SURFACE_SEED: u64 = 0;
/// Records with more than this fraction of the object hidden are rejected.
pub const MAX_OCCLUSION: f64 = 0.5;

/// Normalized crop bookkeeping: center and side length in units of the
/// image width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crop {
    pub cx: f64,
    pub cy: f64,
    pub scale: f64,
}

/// Train/test membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One annotated synthetic datum.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecord {
    pub mesh_id: String,
    pub category: Category,
    /// Object pose in the camera frame.
    pub pose: Pose,
    /// Noisy hand configuration in the camera frame.
    pub hp: HandConfig,
    /// Joint positions consistent with `hp`.
    pub hs: HandShape,
    /// Fraction of object pixels hidden by nearer hand pixels.
    pub occlusion: f64,
    /// 16x16 hand-occluded object silhouette, row-major bits.
    pub silhouette: Vec<u8>,
    pub crop: Crop,
    pub split: Split,
}

#[derive(Serialize, Deserialize)]
struct WireHand {
    wrist_p: [f64; 3],
    #[serde(rename = "wrist_O")]
    wrist_o: [f64; 9],
    angles: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WireRecord {
    mesh_id: String,
    category: Category,
    p: [f64; 3],
    #[serde(rename = "O")]
    o: [f64; 9],
    hp: WireHand,
    hs: Vec<f64>,
    occlusion: f64,
    silhouette: Vec<u8>,
    crop: Crop,
    split: Split,
}

impl From<&SceneRecord> for WireRecord {
    fn from(r: &SceneRecord) -> Self {
        WireRecord {
            mesh_id: r.mesh_id.clone(),
            category: r.category,
            p: r.pose.p.to_array(),
            o: r.pose.orientation.to_flat(),
            hp: WireHand {
                wrist_p: r.hp.wrist_position.to_array(),
                wrist_o: r.hp.wrist_orientation.to_flat(),
                angles: r.hp.angles_flat().to_vec(),
            },
            hs: r.hs.joints_flat().to_vec(),
            occlusion: r.occlusion,
            silhouette: r.silhouette.clone(),
            crop: r.crop,
            split: r.split,
        }
    }
}

impl TryFrom<WireRecord> for SceneRecord {
    type Error = Error;

    fn try_from(w: WireRecord) -> Result<Self> {
        if w.hp.angles.len() != JOINT_COUNT {
            return Err(Error::DimensionMismatch {
                expected: JOINT_COUNT,
                got: w.hp.angles.len(),
                context: "hand angles",
            });
        }
        let mut angles = [0.0; JOINT_COUNT];
        angles.copy_from_slice(&w.hp.angles);
        Ok(SceneRecord {
            mesh_id: w.mesh_id,
            category: w.category,
            pose: Pose::new(Vec3::from_array(w.p), RotationMatrix::from_flat(w.o)?),
            hp: HandConfig::from_flat_angles(
                Vec3::from_array(w.hp.wrist_p),
                RotationMatrix::from_flat(w.hp.wrist_o)?,
                &angles,
            ),
            hs: HandShape::from_flat(&w.hs)?,
            occlusion: w.occlusion,
            silhouette: w.silhouette,
            crop: w.crop,
            split: w.split,
        })
    }
}

impl Serialize for SceneRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SceneRecord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = WireRecord::deserialize(d)?;
        SceneRecord::try_from(wire).map_err(serde::de::Error::custom)
    }
}

impl SceneRecord {
    /// Re-checks every stored invariant: the occlusion bound, a non-empty
    /// silhouette, hand-shape consistency with the configuration, and
    /// orthogonality of the stored rotations.
    pub fn validate(&self, spec: &HandModelSpec) -> Result<()> {
        if !(0.0..=MAX_OCCLUSION).contains(&self.occlusion) {
            return Err(Error::validation(format!(
                "occlusion {} outside [0, {MAX_OCCLUSION}]",
                self.occlusion
            )));
        }
        if self.silhouette.len() != 256 || self.silhouette.iter().all(|&b| b == 0) {
            return Err(Error::validation("empty or malformed silhouette"));
        }
        if !(self.crop.scale > 0.0) {
            return Err(Error::validation("crop scale must be positive"));
        }
        RotationMatrix::from_rows(self.pose.orientation.rows())?;
        RotationMatrix::from_rows(self.hp.wrist_orientation.rows())?;
        let hs = forward_kinematics(spec, &self.hp)?;
        for (a, b) in hs.joints.iter().zip(&self.hs.joints) {
            if a.distance(*b) > 1e-6 {
                return Err(Error::validation(format!(
                    "stored hand shape disagrees with forward kinematics by {}",
                    a.distance(*b)
                )));
            }
        }
        Ok(())
    }
}

/// Writes one JSON object per line, in record order.
pub fn write_jsonl(records: &[SceneRecord], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<SceneRecord>> {
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// A named mesh with its category.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshEntry {
    pub mesh_id: String,
    pub category: Category,
    pub mesh: TriangleMesh,
}

/// Mesh collection backed by a directory of OFF files plus a manifest CSV
/// with columns `mesh_id,category,file`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshLibrary {
    entries: Vec<MeshEntry>,
}

impl MeshLibrary {
    pub fn new(entries: Vec<MeshEntry>) -> Result<Self> {
        let mut ids: Vec<&str> = entries.iter().map(|e| e.mesh_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("mesh ids must be unique"));
        }
        Ok(MeshLibrary { entries })
    }

    pub fn entries(&self) -> &[MeshEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, mesh_id: &str) -> Option<&MeshEntry> {
        self.entries.iter().find(|e| e.mesh_id == mesh_id)
    }

    pub fn by_category(&self, category: Category) -> Vec<&MeshEntry> {
        self.entries.iter().filter(|e| e.category == category).collect()
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Vec::new();
        writeln!(manifest, "mesh_id,category,file")?;
        for e in &self.entries {
            let file = format!("{}.off", e.mesh_id);
            e.mesh.save_off(&dir.join(&file))?;
            writeln!(manifest, "{},{},{}", e.mesh_id, e.category, file)?;
        }
        std::fs::write(dir.join("manifest.csv"), manifest)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.csv"))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("bad manifest row: {line:?}")));
            }
            entries.push(MeshEntry {
                mesh_id: parts[0].to_string(),
                category: parts[1].parse()?,
                mesh: TriangleMesh::load_off(&dir.join(parts[2]))?,
            });
        }
        Self::new(entries)
    }
}

/// A canonical grasp relative to the object body frame, with a sampling
/// weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspTemplate {
    pub config: HandConfig,
    pub weight: f64,
}

/// Weighted set of canonical grasps for one category.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspPrior {
    pub category: Category,
    pub templates: Vec<GraspTemplate>,
}

impl GraspPrior {
    pub fn new(category: Category, templates: Vec<GraspTemplate>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::validation("grasp prior needs at least one template"));
        }
        let sum: f64 = templates.iter().map(|t| t.weight).sum();
        if templates.iter().any(|t| !(t.weight > 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::validation("template weights must be positive and sum to 1"));
        }
        for t in &templates {
            t.config.validate()?;
        }
        Ok(GraspPrior { category, templates })
    }
}

/// Picks a template by weight, expresses it in the camera frame through the
/// object pose, and perturbs it. Deterministic for a fixed seed.
pub fn sample_grasp(
    prior: &GraspPrior,
    object_pose: &Pose,
    noise: NoiseParams,
    seed: u64,
) -> HandConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_grasp_with(prior, object_pose, noise, &mut rng)
}

/// [`sample_grasp`] driven by a caller-owned generator.
pub fn sample_grasp_with<R: Rng>(
    prior: &GraspPrior,
    object_pose: &Pose,
    noise: NoiseParams,
    rng: &mut R,
) -> HandConfig {
    let composed = pick_and_compose(prior, object_pose, rng);
    perturb_config_with(&composed, noise, rng)
}

fn pick_and_compose<R: Rng>(
    prior: &GraspPrior,
    object_pose: &Pose,
    rng: &mut R,
) -> HandConfig {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = &prior.templates[prior.templates.len() - 1];
    for t in &prior.templates {
        acc += t.weight;
        if r < acc {
            chosen = t;
            break;
        }
    }
    HandConfig {
        wrist_position: object_pose.apply(chosen.config.wrist_position),
        wrist_orientation: object_pose.orientation.mul(&chosen.config.wrist_orientation),
        angles: chosen.config.angles,
    }
}

/// Slides the composed grasp along the palm normal until the fingertips
/// rest on this record's actual surface, emulating the exact contact a
/// grasp planner would produce; templates are only calibrated against one
/// canonical mesh per category.
fn snap_to_contact(
    spec: &HandModelSpec,
    hp: &HandConfig,
    posed_surface: &[Vec3],
) -> HandConfig {
    let palm_normal = hp.wrist_orientation.column(2);
    let mut best = (f64::INFINITY, 0.0);
    let mut t = -3.0;
    while t <= 3.0 {
        let candidate = HandConfig {
            wrist_position: hp.wrist_position + palm_normal.scale(t),
            ..hp.clone()
        };
        if let Ok(hs) = forward_kinematics(spec, &candidate) {
            let tips = crate::hand::fingertips(&hs);
            let obj =
                crate::refine::fingertip_objective(&tips, posed_surface, &Pose::identity());
            if obj < best.0 {
                best = (obj, t);
            }
        }
        t += 0.1;
    }
    HandConfig {
        wrist_position: hp.wrist_position + palm_normal.scale(best.1),
        ..hp.clone()
    }
}

/// Everything `generate_dataset` needs besides the meshes and priors.
#[derive(Debug, Clone, Copy)]
pub struct GenerateConfig {
    pub camera: Camera,
    pub noise: NoiseParams,
    pub per_category: usize,
    pub seed: u64,
}

impl GenerateConfig {
    pub fn new(per_category: usize, seed: u64) -> Self {
        GenerateConfig {
            camera: Camera::default(),
            noise: NoiseParams::default(),
            per_category,
            seed,
        }
    }
}

/// Object positions are drawn uniformly from this box: 40 cm per side,
/// centered 60 cm in front of the camera.
pub const POSITION_BOX_CENTER: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 60.0 };
pub const POSITION_BOX_HALF: f64 = 20.0;

const MAX_ATTEMPTS_BEFORE_RATE_CHECK: usize = 100_000;

/// Generates `per_category` accepted records per category.
///
/// Each attempt samples a mesh, a pose (uniform position in the box,
/// Haar-uniform orientation), and a noisy grasp; the attempt is kept iff
/// the hand hides at most half of the object pixels and the visible
/// silhouette is non-empty. The first `round(0.7 n)` accepted records per
/// category form the train split. Deterministic per seed.
pub fn generate_dataset(
    library: &MeshLibrary,
    priors: &[GraspPrior],
    cfg: &GenerateConfig,
) -> Result<Vec<SceneRecord>> {
    if cfg.per_category == 0 {
        return Err(Error::validation("per_category must be >= 1"));
    }
    let hand_spec = HandModelSpec::default();
    let mut surface_cache: HashMap<String, Vec<Vec3>> = HashMap::new();
    for e in library.entries() {
        surface_cache.insert(
            e.mesh_id.clone(),
            sample_surface_points(&e.mesh, SURFACE_SAMPLES, SURFACE_SEED)?,
        );
    }

    let mut records = Vec::with_capacity(cfg.per_category * ALL_CATEGORIES.len());
    for (ci, category) in ALL_CATEGORIES.iter().enumerate() {
        let meshes = library.by_category(*category);
        if meshes.is_empty() {
            return Err(Error::Config(format!("library has no {category} meshes")));
        }
        let prior = priors
            .iter()
            .find(|p| p.category == *category)
            .ok_or_else(|| Error::Config(format!("no grasp prior for {category}")))?;

        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed ^ ((ci as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15)));
        let train_count = (0.7 * cfg.per_category as f64).round() as usize;
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < cfg.per_category {
            attempts += 1;
            if attempts >= MAX_ATTEMPTS_BEFORE_RATE_CHECK
                && (accepted as f64) < 0.01 * attempts as f64
            {
                return Err(Error::Config(format!(
                    "{category}: acceptance rate below 1% after {attempts} attempts"
                )));
            }
            let entry = meshes[rng.random_range(0..meshes.len())];
            let pose = Pose::new(
                POSITION_BOX_CENTER
                    + Vec3::new(
                        rng.random_range(-POSITION_BOX_HALF..POSITION_BOX_HALF),
                        rng.random_range(-POSITION_BOX_HALF..POSITION_BOX_HALF),
                        rng.random_range(-POSITION_BOX_HALF..POSITION_BOX_HALF),
                    ),
                random_rotation(&mut rng),
            );
            let posed = transform_points(&pose, &surface_cache[&entry.mesh_id]);
            if posed.iter().any(|p| p.z <= 1e-6) {
                continue;
            }
            // plant the grasp in contact with this instance, then noise it
            let composed = pick_and_compose(prior, &pose, &mut rng);
            let snapped = snap_to_contact(&hand_spec, &composed, &posed);
            let hp = perturb_config_with(&snapped, cfg.noise, &mut rng);
            let Ok(hs) = forward_kinematics(&hand_spec, &hp) else {
                continue;
            };
            let raster = SceneRaster::render(&cfg.camera, &posed, &hs);
            let Some(raster) = raster else {
                continue;
            };
            if raster.occlusion > MAX_OCCLUSION {
                continue;
            }
            let Some((silhouette, crop)) = raster.silhouette_and_crop() else {
                continue;
            };
            let split = if accepted < train_count { Split::Train } else { Split::Test };
            records.push(SceneRecord {
                mesh_id: entry.mesh_id.clone(),
                category: *category,
                pose,
                hp,
                hs,
                occlusion: raster.occlusion,
                silhouette,
                crop,
                split,
            });
            accepted += 1;
        }
    }
    Ok(records)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::FingerAngles;

    fn tiny_library() -> MeshLibrary {
        let mut entries = Vec::new();
        for c in ALL_CATEGORIES {
            for k in 0..2 {
                let scale = 6.0 + k as f64;
                entries.push(MeshEntry {
                    mesh_id: format!("{c}_{k:02}"),
                    category: c,
                    mesh: crate::geometry::test_meshes::unit_cube_surface_scaled(scale),
                });
            }
        }
        MeshLibrary::new(entries).unwrap()
    }

    fn simple_priors() -> Vec<GraspPrior> {
        ALL_CATEGORIES
            .iter()
            .map(|&c| {
                let mut config =
                    HandConfig::flat_hand(Vec3::new(0.0, -9.0, 6.0), RotationMatrix::rot_x(1.2));
                config.angles = [FingerAngles::new(0.0, 0.8, 0.6, 0.3); 5];
                GraspPrior::new(c, vec![GraspTemplate { config, weight: 1.0 }]).unwrap()
            })
            .collect()
    }

    #[test]
    fn grasp_prior_validates_weights() {
        let config = HandConfig::flat_hand(Vec3::ZERO, RotationMatrix::identity());
        assert!(GraspPrior::new(
            Category::Mug,
            vec![GraspTemplate { config: config.clone(), weight: 0.5 }],
        )
        .is_err());
        assert!(GraspPrior::new(Category::Mug, vec![]).is_err());
        assert!(GraspPrior::new(
            Category::Mug,
            vec![
                GraspTemplate { config: config.clone(), weight: 0.5 },
                GraspTemplate { config, weight: 0.5 },
            ],
        )
        .is_ok());
    }

    #[test]
    fn single_template_zero_noise_composes_exactly() {
        let mut config =
            HandConfig::flat_hand(Vec3::new(5.0, -2.0, 1.0), RotationMatrix::rot_y(0.7));
        config.angles[2] = FingerAngles::new(0.1, 0.5, 0.4, 0.2);
        let prior = GraspPrior::new(
            Category::Bottle,
            vec![GraspTemplate { config: config.clone(), weight: 1.0 }],
        )
        .unwrap();
        let pose = Pose::new(Vec3::new(1.0, 2.0, 50.0), RotationMatrix::rot_z(0.4));
        let hp = sample_grasp(&prior, &pose, NoiseParams::ZERO, 9);
        assert_eq!(hp.wrist_position, pose.apply(config.wrist_position));
        assert_eq!(
            hp.wrist_orientation,
            pose.orientation.mul(&config.wrist_orientation)
        );
        assert_eq!(hp.angles, config.angles);
    }

    #[test]
    fn grasp_sampling_is_deterministic_and_weighted() {
        let c1 = HandConfig::flat_hand(Vec3::new(10.0, 0.0, 0.0), RotationMatrix::identity());
        let c2 = HandConfig::flat_hand(Vec3::new(-10.0, 0.0, 0.0), RotationMatrix::identity());
        let prior = GraspPrior::new(
            Category::Mug,
            vec![
                GraspTemplate { config: c1, weight: 0.7 },
                GraspTemplate { config: c2, weight: 0.3 },
            ],
        )
        .unwrap();
        let pose = Pose::identity();
        assert_eq!(
            sample_grasp(&prior, &pose, NoiseParams::default(), 5),
            sample_grasp(&prior, &pose, NoiseParams::default(), 5)
        );

        let n = 10_000;
        let mut first = 0;
        for seed in 0..n {
            let hp = sample_grasp(&prior, &pose, NoiseParams::ZERO, seed);
            if hp.wrist_position.x > 0.0 {
                first += 1;
            }
        }
        let frac = first as f64 / n as f64;
        assert!((frac - 0.7).abs() <= 0.02, "template frequency {frac}");
    }

    #[test]
    fn generated_records_respect_the_acceptance_contract() {
        let library = tiny_library();
        let priors = simple_priors();
        let cfg = GenerateConfig::new(10, 0);
        let records = generate_dataset(&library, &priors, &cfg).unwrap();
        assert_eq!(records.len(), 40);
        let spec = HandModelSpec::default();
        for r in &records {
            assert!(r.occlusion <= MAX_OCCLUSION);
            r.validate(&spec).unwrap();
        }
        // split arithmetic per category
        for c in ALL_CATEGORIES {
            let train = records
                .iter()
                .filter(|r| r.category == c && r.split == Split::Train)
                .count();
            assert_eq!(train, 7);
        }
    }

    #[test]
    fn generation_is_byte_identical_across_runs() {
        let library = tiny_library();
        let priors = simple_priors();
        let cfg = GenerateConfig::new(5, 42);
        let a = generate_dataset(&library, &priors, &cfg).unwrap();
        let b = generate_dataset(&library, &priors, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let pa = dir.path().join("a.jsonl");
        let pb = dir.path().join("b.jsonl");
        write_jsonl(&a, &pa).unwrap();
        write_jsonl(&b, &pb).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());

        let back = read_jsonl(&pa).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn record_json_schema_is_stable() {
        let record = test_records::toy_record(Category::Knife, 1);
        let text = serde_json::to_string(&record).unwrap();
        // serialized key order is the documented schema order
        let expected = [
            "\"mesh_id\"",
            "\"category\"",
            "\"p\"",
            "\"O\"",
            "\"hp\"",
            "\"hs\"",
            "\"occlusion\"",
            "\"silhouette\"",
            "\"crop\"",
            "\"split\"",
        ];
        let mut last = 0;
        for key in expected {
            let at = text[last..]
                .find(key)
                .unwrap_or_else(|| panic!("missing or misordered key {key}"));
            last += at;
        }
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json["category"], "knife");
        assert_eq!(json["O"].as_array().unwrap().len(), 9);
        assert_eq!(json["hs"].as_array().unwrap().len(), 60);
        assert_eq!(json["silhouette"].as_array().unwrap().len(), 256);
        assert_eq!(json["hp"]["angles"].as_array().unwrap().len(), 20);
        assert_eq!(json["hp"]["wrist_O"].as_array().unwrap().len(), 9);
        assert_eq!(json["hp"]["wrist_p"].as_array().unwrap().len(), 3);
        for k in ["cx", "cy", "scale"] {
            assert!(json["crop"][k].is_number());
        }
        assert!(json["split"] == "train" || json["split"] == "test");
    }

    #[test]
    fn mesh_library_round_trip() {
        let library = tiny_library();
        let dir = tempfile::tempdir().unwrap();
        library.save_dir(dir.path()).unwrap();
        let back = MeshLibrary::load_dir(dir.path()).unwrap();
        assert_eq!(library, back);
        assert!(back.get("bottle_00").is_some());
        assert_eq!(back.by_category(Category::Mug).len(), 2);
    }

    #[test]
    fn mesh_library_rejects_duplicate_ids() {
        let mesh = crate::geometry::test_meshes::unit_cube_surface();
        let e = MeshEntry { mesh_id: "x".into(), category: Category::Bowl, mesh };
        assert!(MeshLibrary::new(vec![e.clone(), e]).is_err());
    }
}
