//! Pose and shape evaluation metrics.
//!
//! ADD averages the displacement of corresponding body-frame surface points
//! between the ground-truth and estimated poses; ADD-S replaces the
//! corresponding point with the nearest one; the symmetry-aware variant
//! takes the minimum ADD over the category's symmetry orbit. Sweeping a
//! correctness threshold from 0 to 10 cm gives the accuracy-threshold curve
//! and its normalized area.

use crate::error::{Error, Result};
use crate::geometry::{geodesic_angle, transform_points, Pose, Vec3, VoxelGrid};
use crate::symmetry::{symmetry_orbit, Category};

/// Default threshold sweep upper bound, cm.
pub const DEFAULT_T_MAX: f64 = 10.0;
/// Default number of sweep steps.
pub const DEFAULT_CURVE_STEPS: usize = 100;
/// Default orbit discretization for symmetry-aware metrics.
pub const DEFAULT_ORBIT_STEPS: usize = 360;

/// Fraction of correct poses as a function of the error threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub thresholds: Vec<f64>,
    pub accuracies: Vec<f64>,
    /// Trapezoidal area under the curve, normalized to [0, 1].
    pub auc: f64,
}

/// Mean displacement of corresponding posed points, cm.
pub fn add_metric(surface_pts: &[Vec3], gt: &Pose, est: &Pose) -> f64 {
    debug_assert!(!surface_pts.is_empty());
    let mut total = 0.0;
    for &x in surface_pts {
        total += gt.apply(x).distance(est.apply(x));
    }
    total / surface_pts.len() as f64
}

/// Mean nearest-point displacement between the two posed point sets, cm.
pub fn adds_metric(surface_pts: &[Vec3], gt: &Pose, est: &Pose) -> f64 {
    debug_assert!(!surface_pts.is_empty());
    let posed_est = transform_points(est, surface_pts);
    let mut total = 0.0;
    for &x in surface_pts {
        let p = gt.apply(x);
        let mut best = f64::INFINITY;
        for q in &posed_est {
            let dx = p.x - q.x;
            let dy = p.y - q.y;
            let dz = p.z - q.z;
            let d2 = dx * dx + dy * dy + dz * dz;
            if d2 < best {
                best = d2;
            }
        }
        total += best.sqrt();
    }
    total / surface_pts.len() as f64
}

/// Minimum ADD over the estimate's symmetry orbit.
pub fn sym_aware_add(
    category: Category,
    surface_pts: &[Vec3],
    gt: &Pose,
    est: &Pose,
    n_orbit: usize,
) -> f64 {
    symmetry_orbit(category, &est.orientation, n_orbit)
        .into_iter()
        .map(|q| add_metric(surface_pts, gt, &Pose::new(est.p, q)))
        .fold(f64::INFINITY, f64::min)
}

/// Sweeps a correctness threshold over `[0, t_max]` in `n_steps` uniform
/// steps and integrates the resulting curve.
pub fn accuracy_curve(errors: &[f64], t_max: f64, n_steps: usize) -> Result<AccuracyCurve> {
    if errors.is_empty() {
        return Err(Error::EmptyInput("error list"));
    }
    if !(t_max > 0.0) || n_steps == 0 {
        return Err(Error::validation("t_max and n_steps must be positive"));
    }
    let n = errors.len() as f64;
    let mut thresholds = Vec::with_capacity(n_steps + 1);
    let mut accuracies = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        let t = t_max * k as f64 / n_steps as f64;
        let correct = errors.iter().filter(|&&e| e <= t).count();
        thresholds.push(t);
        accuracies.push(correct as f64 / n);
    }
    let mut area = 0.0;
    for k in 0..n_steps {
        let dt = thresholds[k + 1] - thresholds[k];
        area += 0.5 * (accuracies[k] + accuracies[k + 1]) * dt;
    }
    Ok(AccuracyCurve { thresholds, accuracies, auc: area / t_max })
}

/// F1 score between two occupancy grids of equal resolution, treating `a`
/// as the prediction and `b` as the ground truth.
pub fn voxel_f1(a: &VoxelGrid, b: &VoxelGrid) -> Result<f64> {
    if a.resolution() != b.resolution() {
        return Err(Error::DimensionMismatch {
            expected: a.resolution(),
            got: b.resolution(),
            context: "voxel grid resolution",
        });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fneg = 0usize;
    for (&pa, &pb) in a.occupancy().iter().zip(b.occupancy()) {
        match (pa, pb) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp + fp + fneg == 0 {
        return Err(Error::degenerate("both voxel grids are empty"));
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fneg) as f64)
}

/// Mean position error (cm) and mean symmetry-aware orientation error
/// (degrees) over ground-truth/estimate pose pairs.
pub fn pose_mae(pairs: &[(Pose, Pose)], category: Category) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pose pairs"));
    }
    let mut pos = 0.0;
    let mut orient = 0.0;
    for (gt, est) in pairs {
        pos += gt.p.distance(est.p);
        let best = symmetry_orbit(category, &est.orientation, DEFAULT_ORBIT_STEPS)
            .into_iter()
            .map(|q| geodesic_angle(&gt.orientation, &q))
            .fold(f64::INFINITY, f64::min);
        orient += best.to_degrees();
    }
    let n = pairs.len() as f64;
    Ok((pos / n, orient / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{random_rotation, sample_surface_points, voxelize, RotationMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn antipodal_pair() -> Vec<Vec3> {
        vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)]
    }

    #[test]
    fn add_analytic_cases() {
        let pts = antipodal_pair();
        let gt = Pose::identity();
        assert_eq!(add_metric(&pts, &gt, &gt), 0.0);

        let shifted = Pose::new(Vec3::new(3.0, 4.0, 0.0), RotationMatrix::identity());
        assert!((add_metric(&pts, &gt, &shifted) - 5.0).abs() < 1e-12);

        let spun = Pose::new(Vec3::ZERO, RotationMatrix::rot_z(PI));
        assert!((add_metric(&pts, &gt, &spun) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adds_analytic_cases() {
        let pts = antipodal_pair();
        let gt = Pose::identity();
        assert_eq!(adds_metric(&pts, &gt, &gt), 0.0);
        // the point set is symmetric under the half turn
        let spun = Pose::new(Vec3::ZERO, RotationMatrix::rot_z(PI));
        assert!(adds_metric(&pts, &gt, &spun) < 1e-12);
    }

    #[test]
    fn adds_matches_double_loop_oracle_and_bounds_add() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mesh = crate::geometry::test_meshes::unit_cube_surface_scaled(6.0);
        let pts = sample_surface_points(&mesh, 64, 0).unwrap();
        for _ in 0..30 {
            let gt = Pose::new(
                Vec3::new(rng.random_range(-5.0..5.0), 0.0, 50.0),
                random_rotation(&mut rng),
            );
            let est = Pose::new(
                gt.p + Vec3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                ),
                random_rotation(&mut rng),
            );
            let adds = adds_metric(&pts, &gt, &est);
            let add = add_metric(&pts, &gt, &est);
            assert!(adds <= add + 1e-12);

            // O(m^2) oracle
            let pg = transform_points(&gt, &pts);
            let pe = transform_points(&est, &pts);
            let mut expect = 0.0;
            for a in &pg {
                let mut best = f64::INFINITY;
                for b in &pe {
                    best = best.min(a.distance(*b));
                }
                expect += best;
            }
            expect /= pts.len() as f64;
            assert!((adds - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn sym_aware_add_absorbs_axial_spin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mesh = crate::geometry::test_meshes::unit_cube_surface_scaled(4.0);
        let pts = sample_surface_points(&mesh, 128, 0).unwrap();
        for _ in 0..10 {
            let gt = Pose::new(Vec3::new(0.0, 0.0, 50.0), random_rotation(&mut rng));
            let theta = rng.random_range(0.0..2.0 * PI);
            let est = Pose::new(gt.p, gt.orientation.mul(&RotationMatrix::rot_z(theta)));
            let v = sym_aware_add(Category::Bottle, &pts, &gt, &est, 360);
            assert!(v < 0.05, "sym-aware ADD {v}");
            // and never exceeds plain ADD
            assert!(v <= add_metric(&pts, &gt, &est) + 1e-12);
        }
        // mug with est == gt
        let gt = Pose::new(Vec3::ZERO, random_rotation(&mut rng));
        assert_eq!(sym_aware_add(Category::Mug, &pts, &gt, &gt, 8), 0.0);
    }

    #[test]
    fn metrics_are_camera_frame_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mesh = crate::geometry::test_meshes::unit_cube_surface_scaled(5.0);
        let pts = sample_surface_points(&mesh, 64, 0).unwrap();
        for _ in 0..10 {
            let gt = Pose::new(Vec3::new(1.0, 2.0, 40.0), random_rotation(&mut rng));
            let est = Pose::new(
                gt.p + Vec3::new(0.5, -1.0, 2.0),
                random_rotation(&mut rng),
            );
            let rig = Pose::new(
                Vec3::new(
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                ),
                random_rotation(&mut rng),
            );
            let gt2 = rig.compose(&gt);
            let est2 = rig.compose(&est);
            assert!((add_metric(&pts, &gt, &est) - add_metric(&pts, &gt2, &est2)).abs() < 1e-6);
            assert!(
                (adds_metric(&pts, &gt, &est) - adds_metric(&pts, &gt2, &est2)).abs() < 1e-6
            );
            for c in [Category::Bottle, Category::Knife] {
                assert!(
                    (sym_aware_add(c, &pts, &gt, &est, 90)
                        - sym_aware_add(c, &pts, &gt2, &est2, 90))
                    .abs()
                        < 1e-6
                );
            }
        }
    }

    #[test]
    fn curve_analytic_cases() {
        let all_zero = accuracy_curve(&[0.0; 10], 10.0, 100).unwrap();
        assert_eq!(all_zero.auc, 1.0);

        let all_far = accuracy_curve(&[11.0, 20.0, 99.0], 10.0, 100).unwrap();
        assert_eq!(all_far.auc, 0.0);

        let mid = accuracy_curve(&[5.0], 10.0, 100).unwrap();
        assert!((mid.auc - 0.5).abs() <= 0.01 + 1e-12, "auc = {}", mid.auc);

        assert!(accuracy_curve(&[], 10.0, 100).is_err());
    }

    #[test]
    fn curve_is_monotone_and_matches_riemann_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let errors: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..15.0)).collect();
        let curve = accuracy_curve(&errors, 10.0, 100).unwrap();
        for w in curve.accuracies.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // left Riemann sum differs from the trapezoid by at most one step
        let mut riemann = 0.0;
        for k in 0..100 {
            riemann += curve.accuracies[k] * 0.1;
        }
        assert!((curve.auc - riemann / 10.0).abs() <= 0.01);
    }

    #[test]
    fn f1_analytic_cases() {
        let mesh = crate::geometry::test_meshes::unit_cube_surface();
        let g = voxelize(&mesh, 4).unwrap();
        assert!((voxel_f1(&g, &g).unwrap() - 1.0).abs() < 1e-15);

        // hand-built grids: 8 cells each, overlap 4 -> F1 = 0.5
        let blank = |bits: &[usize]| -> VoxelGrid {
            let mut occ = vec![false; 64];
            for &b in bits {
                occ[b] = true;
            }
            VoxelGrid::from_parts(4, occ, 1.0).unwrap()
        };
        let a = blank(&[0, 1, 2, 3, 4, 5, 6, 7]);
        let b = blank(&[4, 5, 6, 7, 8, 9, 10, 11]);
        assert!((voxel_f1(&a, &b).unwrap() - 0.5).abs() < 1e-15);

        let c = blank(&[20, 21]);
        assert_eq!(voxel_f1(&a, &c).unwrap(), 0.0);

        // confusion-matrix symmetry under swapping prediction and truth
        assert_eq!(voxel_f1(&a, &b).unwrap(), voxel_f1(&b, &a).unwrap());

        let small = VoxelGrid::from_parts(2, vec![false; 8], 1.0).unwrap();
        assert!(voxel_f1(&a, &small).is_err());
        assert!(voxel_f1(&blank(&[]), &blank(&[])).is_err());
    }

    #[test]
    fn pose_mae_analytic_cases() {
        let gt = Pose::new(Vec3::new(0.0, 0.0, 50.0), RotationMatrix::identity());
        let (p, o) = pose_mae(&[(gt, gt), (gt, gt)], Category::Knife).unwrap();
        assert_eq!((p, o), (0.0, 0.0));

        let est = Pose::new(gt.p + Vec3::new(3.0, 4.0, 0.0), gt.orientation);
        let (p, _) = pose_mae(&[(gt, est)], Category::Knife).unwrap();
        assert!((p - 5.0).abs() < 1e-12);

        // axial spin is absorbed for bottles
        let spun = Pose::new(gt.p, gt.orientation.mul(&RotationMatrix::rot_z(1.234)));
        let (_, o) = pose_mae(&[(gt, spun)], Category::Bottle).unwrap();
        assert!(o <= 0.5, "orientation MAE {o}");

        assert!(pose_mae(&[], Category::Bowl).is_err());
    }
}
