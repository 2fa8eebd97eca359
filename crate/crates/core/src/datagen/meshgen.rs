//! Procedural category meshes and default grasp priors.
//!
//! Each category comes in two proportion families ("a" and "b"), randomized
//! within a family regime, so retrieval has both coarse (family) and fine
//! (instance) structure to learn. Body-frame conventions match the symmetry
//! table: bottles, mugs and bowls stand along +z; the mug handle lies in
//! the xz-plane at +x (mirror normal = body y); the knife lies flat with
//! its blade along +x and thickness along z (mirror normal = body z).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraspPrior, GraspTemplate, MeshEntry, MeshLibrary};
use crate::error::Result;
use crate::geometry::{sample_surface_points, RotationMatrix, TriangleMesh, Vec3};
use crate::hand::{
    fingertips, forward_kinematics, FingerAngles, HandConfig, HandModelSpec,
};
use crate::refine::fingertip_objective;
use crate::symmetry::{Category, ALL_CATEGORIES};

const LATHE_SEGMENTS: usize = 24;

/// Revolves a (radius, z) profile polyline around the z-axis. Profile
/// points with radius ~0 become apex vertices.
fn lathe(profile: &[(f64, f64)], segments: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    const EPS: f64 = 1e-9;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    // per profile point: either a ring of `segments` vertices or one apex
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for &(r, z) in profile {
        if r.abs() <= EPS {
            vertices.push(Vec3::new(0.0, 0.0, z));
            rows.push(vec![vertices.len() - 1]);
        } else {
            let start = vertices.len();
            for s in 0..segments {
                let theta = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
                vertices.push(Vec3::new(r * theta.cos(), r * theta.sin(), z));
            }
            rows.push((start..start + segments).collect());
        }
    }
    for w in rows.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        match (lo.len(), hi.len()) {
            (1, 1) => {}
            (1, _) => {
                let apex = lo[0];
                for s in 0..segments {
                    let a = hi[s];
                    let b = hi[(s + 1) % segments];
                    triangles.push([apex, b, a]);
                }
            }
            (_, 1) => {
                let apex = hi[0];
                for s in 0..segments {
                    let a = lo[s];
                    let b = lo[(s + 1) % segments];
                    triangles.push([a, b, apex]);
                }
            }
            (_, _) => {
                for s in 0..segments {
                    let a0 = lo[s];
                    let a1 = lo[(s + 1) % segments];
                    let b0 = hi[s];
                    let b1 = hi[(s + 1) % segments];
                    triangles.push([a0, a1, b1]);
                    triangles.push([a0, b1, b0]);
                }
            }
        }
    }
    (vertices, triangles)
}

/// Axis-aligned box surface around `center` with the given half extents.
fn push_box(
    vertices: &mut Vec<Vec3>,
    triangles: &mut Vec<[usize; 3]>,
    center: Vec3,
    half: Vec3,
) {
    let base = vertices.len();
    for &z in &[-1.0, 1.0] {
        for &y in &[-1.0, 1.0] {
            for &x in &[-1.0, 1.0] {
                vertices.push(center + Vec3::new(x * half.x, y * half.y, z * half.z));
            }
        }
    }
    let quads = [
        [0, 1, 3, 2],
        [4, 6, 7, 5],
        [0, 4, 5, 1],
        [2, 3, 7, 6],
        [0, 2, 6, 4],
        [1, 5, 7, 3],
    ];
    for q in quads {
        triangles.push([base + q[0], base + q[1], base + q[2]]);
        triangles.push([base + q[0], base + q[2], base + q[3]]);
    }
}

/// Partial torus in the xz-plane (handle). The tube's y-extent is symmetric,
/// so the shape keeps the mug's mirror symmetry across the xz-plane.
fn push_handle(
    vertices: &mut Vec<Vec3>,
    triangles: &mut Vec<[usize; 3]>,
    center: Vec3,
    loop_radius: f64,
    tube_radius: f64,
) {
    let loop_steps = 8;
    let tube_steps = 8;
    let phi0 = -0.6 * std::f64::consts::PI;
    let phi1 = 0.6 * std::f64::consts::PI;
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for i in 0..=loop_steps {
        let phi = phi0 + (phi1 - phi0) * i as f64 / loop_steps as f64;
        let mut ring = Vec::with_capacity(tube_steps);
        for j in 0..tube_steps {
            let psi = 2.0 * std::f64::consts::PI * j as f64 / tube_steps as f64;
            let radial = loop_radius + tube_radius * psi.cos();
            let p = center
                + Vec3::new(radial * phi.cos(), tube_radius * psi.sin(), radial * phi.sin());
            ring.push(vertices.len());
            vertices.push(p);
        }
        rings.push(ring);
    }
    for w in rings.windows(2) {
        for j in 0..tube_steps {
            let a0 = w[0][j];
            let a1 = w[0][(j + 1) % tube_steps];
            let b0 = w[1][j];
            let b1 = w[1][(j + 1) % tube_steps];
            triangles.push([a0, a1, b1]);
            triangles.push([a0, b1, b0]);
        }
    }
}

fn bottle(rng: &mut ChaCha8Rng, family_a: bool) -> TriangleMesh {
    let (h, rb) = if family_a {
        (rng.random_range(22.0..28.0), rng.random_range(2.6..3.2))
    } else {
        (rng.random_range(14.0..18.0), rng.random_range(3.6..4.4))
    };
    let rn = rb * rng.random_range(0.35..0.45);
    let profile = [
        (0.0, 0.0),
        (rb, 0.0),
        (rb, 0.62 * h),
        (rn, 0.75 * h),
        (rn, h),
    ];
    let (v, t) = lathe(&profile, LATHE_SEGMENTS);
    TriangleMesh::new_centered(v, t).expect("bottle mesh valid")
}

fn mug(rng: &mut ChaCha8Rng, family_a: bool) -> TriangleMesh {
    let (h, rb) = if family_a {
        (rng.random_range(9.5..11.5), rng.random_range(3.0..3.6))
    } else {
        (rng.random_range(7.0..8.5), rng.random_range(4.0..4.8))
    };
    let profile = [(0.0, 0.0), (rb, 0.0), (rb, h)];
    let (mut v, mut t) = lathe(&profile, LATHE_SEGMENTS);
    push_handle(
        &mut v,
        &mut t,
        Vec3::new(rb - 0.2, 0.0, h / 2.0),
        0.26 * h,
        rng.random_range(0.4..0.5),
    );
    TriangleMesh::new_centered(v, t).expect("mug mesh valid")
}

fn knife(rng: &mut ChaCha8Rng, family_a: bool) -> TriangleMesh {
    let (blade_len, blade_half_h, handle_len) = if family_a {
        (
            rng.random_range(11.0..13.0),
            rng.random_range(0.9..1.1),
            rng.random_range(8.0..9.0),
        )
    } else {
        (
            rng.random_range(7.5..9.5),
            rng.random_range(1.6..2.0),
            rng.random_range(6.0..7.0),
        )
    };
    let mut v = Vec::new();
    let mut t = Vec::new();
    // blade: thin along z
    push_box(
        &mut v,
        &mut t,
        Vec3::new(blade_len / 2.0, 0.0, 0.0),
        Vec3::new(blade_len / 2.0, blade_half_h, 0.12),
    );
    // handle
    push_box(
        &mut v,
        &mut t,
        Vec3::new(-handle_len / 2.0, 0.0, 0.0),
        Vec3::new(handle_len / 2.0, 0.8, 0.45),
    );
    TriangleMesh::new_centered(v, t).expect("knife mesh valid")
}

fn bowl(rng: &mut ChaCha8Rng, family_a: bool) -> TriangleMesh {
    let (r, h) = if family_a {
        (rng.random_range(4.6..5.2), rng.random_range(3.4..4.2))
    } else {
        (rng.random_range(5.4..6.2), rng.random_range(5.2..6.4))
    };
    let profile = [
        (0.0, 0.0),
        (0.5 * r, 0.12 * h),
        (0.85 * r, 0.45 * h),
        (r, h),
    ];
    let (v, t) = lathe(&profile, LATHE_SEGMENTS);
    TriangleMesh::new_centered(v, t).expect("bowl mesh valid")
}

/// Procedural mesh library: `per_category` meshes per category, the first
/// half in family "a", the rest in family "b", proportions randomized per
/// mesh. Deterministic per seed.
pub fn generate_library(per_category: usize, seed: u64) -> Result<MeshLibrary> {
    let mut entries = Vec::new();
    for (ci, category) in ALL_CATEGORIES.iter().enumerate() {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ ((ci as u64 + 1).wrapping_mul(0xD1B54A32D192ED03)));
        let a_count = per_category.div_ceil(2);
        for k in 0..per_category {
            let family_a = k < a_count;
            let mesh = match category {
                Category::Bottle => bottle(&mut rng, family_a),
                Category::Mug => mug(&mut rng, family_a),
                Category::Knife => knife(&mut rng, family_a),
                Category::Bowl => bowl(&mut rng, family_a),
            };
            let family = if family_a { 'a' } else { 'b' };
            let idx = if family_a { k } else { k - a_count };
            entries.push(MeshEntry {
                mesh_id: format!("{category}_{family}{idx:02}"),
                category: *category,
                mesh,
            });
        }
    }
    MeshLibrary::new(entries)
}

/// Mesh-family tag: the category plus the proportion regime encoded in the
/// id (`bottle_a03` -> `bottle_a`).
pub fn mesh_family(mesh_id: &str) -> &str {
    match mesh_id.rfind(|c: char| c.is_ascii_alphabetic()) {
        Some(i) => &mesh_id[..=i],
        None => mesh_id,
    }
}

/// Builds a wrist frame from an outward approach direction and a finger
/// direction hint: the palm faces back along the approach, fingers run
/// along the projected hint.
fn wrist_frame(approach: Vec3, finger_hint: Vec3) -> (RotationMatrix, Vec3, Vec3) {
    let z = approach.normalized().expect("approach direction");
    let hint = finger_hint - z.scale(finger_hint.dot(z));
    let y = hint.normalized().expect("finger direction hint");
    let x = y.cross(z);
    let m = RotationMatrix::from_rows([
        [x.x, y.x, z.x],
        [x.y, y.y, z.y],
        [x.z, y.z, z.z],
    ])
    .expect("orthonormal wrist frame");
    (m, y, z)
}

struct TemplateSpec {
    approach: Vec3,
    finger_hint: Vec3,
    center_offset: Vec3,
    curl: FingerAngles,
    weight: f64,
}

/// Fans the abductions slightly so the fingers spread across the object.
fn spread_angles(curl: FingerAngles) -> [FingerAngles; 5] {
    let spread = [-0.16, -0.08, 0.0, 0.08, 0.16];
    spread.map(|a| FingerAngles { abduction: a, ..curl })
}

/// Places the wrist so the fingertips of the curled hand just reach the
/// canonical mesh surface: scans the approach distance, the back-off along
/// the finger direction, and a few curl presets, keeping the combination
/// with the smallest mean fingertip residual.
fn calibrate_template(
    spec: &HandModelSpec,
    surface: &[Vec3],
    t: &TemplateSpec,
) -> HandConfig {
    let (orientation, y, z) = wrist_frame(t.approach, t.finger_hint);
    // the curl stays as authored (it distinguishes the templates); only the
    // wrist placement is searched
    let angles = spread_angles(t.curl);
    let mut best = (f64::INFINITY, 6.0, -6.0);
    for back_idx in 0..=24 {
        let back = -12.0 + back_idx as f64 * 0.5;
        let mut d = 1.0;
        while d <= 20.0 {
            let wrist = t.center_offset + z.scale(d) + y.scale(back);
            let hp = HandConfig {
                wrist_position: wrist,
                wrist_orientation: orientation,
                angles,
            };
            if let Ok(hs) = forward_kinematics(spec, &hp) {
                let tips = fingertips(&hs);
                let obj =
                    fingertip_objective(&tips, surface, &crate::geometry::Pose::identity());
                if obj < best.0 {
                    best = (obj, d, back);
                }
            }
            d += 0.25;
        }
    }
    HandConfig {
        wrist_position: t.center_offset + z.scale(best.1) + y.scale(best.2),
        wrist_orientation: orientation,
        angles,
    }
}

/// Hand-authored canonical grasps per category, contact-calibrated against
/// the first library mesh of that category. Grasps follow everyday use:
/// bottles are wrapped at the body or neck, mugs are taken at the handle
/// side or from the top, knives at the handle, bowls at the rim.
pub fn default_grasp_priors(library: &MeshLibrary) -> Result<Vec<GraspPrior>> {
    let hand_spec = HandModelSpec::default();
    let mut priors = Vec::new();
    for category in ALL_CATEGORIES {
        let meshes = library.by_category(category);
        let canonical = meshes
            .first()
            .ok_or_else(|| crate::error::Error::Config(format!("no {category} meshes")))?;
        let surface = sample_surface_points(&canonical.mesh, 256, super::SURFACE_SEED)?;
        let (lo, hi) = canonical.mesh.bounding_box();
        let ext = hi - lo;
        // grips differ markedly per template so the joint angles identify
        // which canonical grasp produced a sample
        let grip = FingerAngles::new(0.0, 0.9, 0.8, 0.4);
        let softer = FingerAngles::new(0.0, 0.55, 0.45, 0.25);
        let cupped = FingerAngles::new(0.0, 0.35, 0.55, 0.45);
        // grasp sites sit at shape features (shoulders, rims, edges,
        // handles): contacts there pin the pose, where a smooth wall would
        // let the object slide through the fingers unnoticed. Each category
        // also mixes grasp styles the way people actually hold these
        // objects (carry vs pour, wrap vs pinch), so the hand narrows the
        // orientation down without fully determining it.
        let specs: Vec<TemplateSpec> = match category {
            Category::Bottle => {
                let side = |approach: Vec3, dz: f64, weight: f64| TemplateSpec {
                    approach,
                    finger_hint: Vec3::new(0.0, 0.0, 1.0),
                    center_offset: Vec3::new(0.0, 0.0, dz * ext.z),
                    curl: grip,
                    weight,
                };
                vec![
                    // upright carry grips: shoulder cone, bottom edge, mid wall
                    side(Vec3::new(1.0, 0.0, 0.0), 0.18, 0.3),
                    side(Vec3::new(1.0, 0.0, 0.0), -0.38, 0.15),
                    side(Vec3::new(1.0, 0.0, 0.0), 0.0, 0.15),
                    // tipped pour grip at the shoulder
                    side(Vec3::new(1.0, 0.0, 0.45), 0.15, 0.4),
                ]
            }
            Category::Mug => vec![
                // across the handle
                TemplateSpec {
                    approach: Vec3::new(1.0, 0.0, 0.0),
                    finger_hint: Vec3::new(0.0, 0.0, 1.0),
                    center_offset: Vec3::ZERO,
                    curl: grip,
                    weight: 0.5,
                },
                // near the bottom edge
                TemplateSpec {
                    approach: Vec3::new(1.0, 0.0, 0.0),
                    finger_hint: Vec3::new(0.0, 0.0, 1.0),
                    center_offset: Vec3::new(0.0, 0.0, -0.3 * ext.z),
                    curl: grip,
                    weight: 0.2,
                },
                // tilted overhead grip spanning the rim
                TemplateSpec {
                    approach: Vec3::new(0.5, 0.0, 0.87),
                    finger_hint: Vec3::new(1.0, 0.0, 0.0),
                    center_offset: Vec3::ZERO,
                    curl: softer,
                    weight: 0.3,
                },
            ],
            Category::Knife => {
                let hammer = |fx: f64, weight: f64| TemplateSpec {
                    approach: Vec3::new(0.0, 1.0, 0.0),
                    finger_hint: Vec3::new(0.0, 0.0, 1.0),
                    center_offset: Vec3::new(lo.x + fx * ext.x, 0.0, 0.0),
                    curl: grip,
                    weight,
                };
                vec![
                    hammer(0.15, 0.45),
                    hammer(0.3, 0.3),
                    // oblique pinch near the bolster
                    TemplateSpec {
                        approach: Vec3::new(0.0, 0.6, 0.8),
                        finger_hint: Vec3::new(1.0, 0.0, 0.0),
                        center_offset: Vec3::new(lo.x + 0.45 * ext.x, 0.0, 0.0),
                        curl: softer,
                        weight: 0.25,
                    },
                ]
            }
            Category::Bowl => {
                let rim = |dz: f64, weight: f64| TemplateSpec {
                    approach: Vec3::new(1.0, 0.0, 0.3),
                    finger_hint: Vec3::new(0.0, 0.0, 1.0),
                    center_offset: Vec3::new(0.0, 0.0, dz * ext.z),
                    curl: softer,
                    weight,
                };
                vec![
                    rim(0.28, 0.35),
                    rim(0.12, 0.3),
                    // cradle from below
                    TemplateSpec {
                        approach: Vec3::new(0.7, 0.0, -0.7),
                        finger_hint: Vec3::new(0.0, 0.0, 1.0),
                        center_offset: Vec3::ZERO,
                        curl: cupped,
                        weight: 0.35,
                    },
                ]
            }
        };
        let templates = specs
            .iter()
            .map(|s| GraspTemplate {
                config: calibrate_template(&hand_spec, &surface, s),
                weight: s.weight,
            })
            .collect();
        priors.push(GraspPrior::new(category, templates)?);
    }
    Ok(priors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::voxelize;

    #[test]
    fn library_has_two_families_per_category() {
        let lib = generate_library(6, 0).unwrap();
        assert_eq!(lib.len(), 24);
        for c in ALL_CATEGORIES {
            let ids: Vec<&str> = lib
                .by_category(c)
                .iter()
                .map(|e| e.mesh_id.as_str())
                .collect();
            assert_eq!(ids.len(), 6);
            let a = ids.iter().filter(|id| mesh_family(id).ends_with('a')).count();
            let b = ids.iter().filter(|id| mesh_family(id).ends_with('b')).count();
            assert_eq!((a, b), (3, 3), "{c}: {ids:?}");
        }
        // deterministic
        let again = generate_library(6, 0).unwrap();
        assert_eq!(lib, again);
        let other = generate_library(6, 1).unwrap();
        assert_ne!(lib, other);
    }

    #[test]
    fn meshes_are_valid_and_voxelizable() {
        let lib = generate_library(4, 7).unwrap();
        for e in lib.entries() {
            // constructor enforces centering; sampling and voxelization
            // must both succeed
            let pts = sample_surface_points(&e.mesh, 128, 0).unwrap();
            assert_eq!(pts.len(), 128);
            let grid = voxelize(&e.mesh, 32).unwrap();
            assert!(grid.occupied_count() > 0, "{}", e.mesh_id);
        }
    }

    #[test]
    fn mesh_family_strips_the_index() {
        assert_eq!(mesh_family("bottle_a03"), "bottle_a");
        assert_eq!(mesh_family("knife_b10"), "knife_b");
    }

    #[test]
    fn mug_is_mirror_symmetric_across_xz() {
        // flipping y maps the vertex set onto itself up to triangulation
        let lib = generate_library(2, 3).unwrap();
        let mug = &lib.by_category(Category::Mug)[0].mesh;
        for v in mug.vertices() {
            let mirrored = Vec3::new(v.x, -v.y, v.z);
            let nearest = mug
                .vertices()
                .iter()
                .map(|u| u.distance(mirrored))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-6, "vertex {v:?} has no mirror image");
        }
    }

    #[test]
    fn knife_is_mirror_symmetric_across_xy() {
        let lib = generate_library(2, 3).unwrap();
        let knife = &lib.by_category(Category::Knife)[0].mesh;
        for v in knife.vertices() {
            let mirrored = Vec3::new(v.x, v.y, -v.z);
            let nearest = knife
                .vertices()
                .iter()
                .map(|u| u.distance(mirrored))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-6);
        }
    }

    #[test]
    fn default_priors_touch_the_canonical_mesh() {
        let lib = generate_library(2, 0).unwrap();
        let priors = default_grasp_priors(&lib).unwrap();
        assert_eq!(priors.len(), 4);
        let spec = HandModelSpec::default();
        for prior in &priors {
            let canonical = &lib.by_category(prior.category)[0].mesh;
            let surface = sample_surface_points(canonical, 256, 0).unwrap();
            for t in &prior.templates {
                t.config.validate().unwrap();
                let hs = forward_kinematics(&spec, &t.config).unwrap();
                let tips = fingertips(&hs);
                let obj = fingertip_objective(
                    &tips,
                    &surface,
                    &crate::geometry::Pose::identity(),
                );
                // calibrated grasps end near contact
                assert!(obj < 2.0, "{}: residual {obj}", prior.category);
            }
        }
    }
}
