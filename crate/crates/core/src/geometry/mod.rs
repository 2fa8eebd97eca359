//! Rotations, rigid transforms, meshes, surface sampling and voxelization.
//!
//! Conventions used throughout the crate:
//!
//! - lengths are in centimeters,
//! - rotation matrices are row-major and act on column vectors (`y = R x`),
//! - object meshes live in a body frame with the vertex centroid at the
//!   origin,
//! - the camera sits at the origin looking along +z.

mod mesh;
mod voxel;

pub use mesh::{sample_surface_points, TriangleMesh};
pub use voxel::{voxelize, VoxelGrid};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the orthonormality / determinant checks on rotations.
pub const ROTATION_TOL: f64 = 1e-6;

/// A 3D point or direction. Centimeters for positions, unitless for
/// directions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3 { x: a[0], y: a[1], z: a[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3 { x: self.x * s, y: self.y * s, z: self.z * s }
    }

    /// Unit vector in the same direction. Errors on (near-)zero input.
    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n <= 1e-12 {
            return Err(Error::degenerate("cannot normalize near-zero vector"));
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A proper rotation in SO(3), stored as a row-major 3x3 matrix.
///
/// The validating constructors enforce `m^T m = I` and `det(m) = +1` to
/// [`ROTATION_TOL`]. Raw regressor output is *not* a `RotationMatrix`; keep
/// it as `[[f64; 3]; 3]` until resolved through
/// [`orthogonalize_svd`] or
/// [`nearest_rotation_from_set`](crate::symmetry::nearest_rotation_from_set).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix {
    m: [[f64; 3]; 3],
}

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Validating constructor from row-major entries.
    pub fn from_rows(m: [[f64; 3]; 3]) -> Result<Self> {
        let r = RotationMatrix { m };
        r.check()?;
        Ok(r)
    }

    /// Internal constructor for matrices that are rotations by construction
    /// (e.g. Rodrigues output). Debug builds still verify.
    pub(crate) fn from_rows_unchecked(m: [[f64; 3]; 3]) -> Self {
        let r = RotationMatrix { m };
        debug_assert!(r.check().is_ok(), "constructed invalid rotation: {m:?}");
        r
    }

    fn check(&self) -> Result<()> {
        for row in &self.m {
            for v in row {
                if !v.is_finite() {
                    return Err(Error::validation("rotation matrix has non-finite entries"));
                }
            }
        }
        let t = self.transpose();
        let should_be_i = mat_mul(&t.m, &self.m);
        for (i, row) in should_be_i.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (v - expect).abs() > ROTATION_TOL {
                    return Err(Error::validation(format!(
                        "matrix is not orthonormal: (m^T m)[{i}][{j}] = {v}"
                    )));
                }
            }
        }
        let d = det3(&self.m);
        if (d - 1.0).abs() > ROTATION_TOL {
            return Err(Error::validation(format!("matrix determinant {d} != +1")));
        }
        Ok(())
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Entries flattened row-major.
    pub fn to_flat(&self) -> [f64; 9] {
        let m = &self.m;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn from_flat(f: [f64; 9]) -> Result<Self> {
        Self::from_rows([[f[0], f[1], f[2]], [f[3], f[4], f[5]], [f[6], f[7], f[8]]])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        RotationMatrix {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul(&self, o: &RotationMatrix) -> RotationMatrix {
        RotationMatrix { m: mat_mul(&self.m, &o.m) }
    }

    /// Rotation about the x-axis.
    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix { m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]] }
    }

    /// Rotation about the y-axis.
    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix { m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]] }
    }

    /// Rotation about the z-axis.
    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix { m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Axis-angle vector (axis scaled by angle in radians) of this rotation.
    ///
    /// The angle is in `[0, pi]`; at exactly `pi` one of the two antipodal
    /// axes is returned.
    pub fn log(&self) -> Vec3 {
        let m = &self.m;
        let cos = (((m[0][0] + m[1][1] + m[2][2]) - 1.0) / 2.0).clamp(-1.0, 1.0);
        let angle = cos.acos();
        if angle < 1e-9 {
            // first-order: skew part / 2
            return Vec3::new(
                (m[2][1] - m[1][2]) / 2.0,
                (m[0][2] - m[2][0]) / 2.0,
                (m[1][0] - m[0][1]) / 2.0,
            );
        }
        if angle > std::f64::consts::PI - 1e-6 {
            // near pi the skew part vanishes; recover the axis from the
            // symmetric part (R + I) / 2 = aa^T + O(pi - angle)
            let xx = ((m[0][0] + 1.0) / 2.0).max(0.0).sqrt();
            let yy = ((m[1][1] + 1.0) / 2.0).max(0.0).sqrt();
            let zz = ((m[2][2] + 1.0) / 2.0).max(0.0).sqrt();
            let mut axis = if xx >= yy && xx >= zz {
                Vec3::new(xx, m[0][1] / (2.0 * xx.max(1e-12)), m[0][2] / (2.0 * xx.max(1e-12)))
            } else if yy >= zz {
                Vec3::new(m[0][1] / (2.0 * yy.max(1e-12)), yy, m[1][2] / (2.0 * yy.max(1e-12)))
            } else {
                Vec3::new(m[0][2] / (2.0 * zz.max(1e-12)), m[1][2] / (2.0 * zz.max(1e-12)), zz)
            };
            // pick the sign consistent with the (possibly tiny) skew part
            let skew = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
            if axis.dot(skew) < 0.0 {
                axis = -axis;
            }
            return axis.normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0)).scale(angle);
        }
        let k = angle / (2.0 * angle.sin());
        Vec3::new(
            (m[2][1] - m[1][2]) * k,
            (m[0][2] - m[2][0]) * k,
            (m[1][0] - m[0][1]) * k,
        )
    }
}

pub(crate) fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// A rigid pose in the camera frame: position in cm plus orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub p: Vec3,
    pub orientation: RotationMatrix,
}

impl Pose {
    pub fn new(p: Vec3, orientation: RotationMatrix) -> Self {
        Pose { p, orientation }
    }

    pub fn identity() -> Self {
        Pose { p: Vec3::ZERO, orientation: RotationMatrix::identity() }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.orientation.apply(v) + self.p
    }

    /// Composition: `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            p: self.orientation.apply(other.p) + self.p,
            orientation: self.orientation.mul(&other.orientation),
        }
    }
}

/// Rodrigues rotation about `axis` by `angle` radians.
///
/// Errors if the axis has (near-)zero length.
pub fn axis_angle_rotation(axis: Vec3, angle: f64) -> Result<RotationMatrix> {
    let n = axis.norm();
    if n <= 1e-9 {
        return Err(Error::degenerate(format!("rotation axis too short: |axis| = {n}")));
    }
    let u = axis.scale(1.0 / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let (x, y, z) = (u.x, u.y, u.z);
    Ok(RotationMatrix::from_rows_unchecked([
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]))
}

/// Nearest rotation to an arbitrary 3x3 matrix in the Frobenius sense.
///
/// Computed from the SVD `m = U S V^T` as `U V^T`; when `det(U V^T) < 0` the
/// column of `U` paired with the smallest singular value is sign-flipped,
/// which yields the closest *proper* rotation. Errors when `m` is
/// rank-deficient (smallest singular value below `1e-9`).
pub fn orthogonalize_svd(m: [[f64; 3]; 3]) -> Result<RotationMatrix> {
    for row in &m {
        for v in row {
            if !v.is_finite() {
                return Err(Error::degenerate("matrix has non-finite entries"));
            }
        }
    }
    let nm = nalgebra::Matrix3::new(
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
    );
    let svd = nm.svd(true, true);
    let (u, vt) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
    // nalgebra sorts singular values in decreasing order
    if svd.singular_values[2] < 1e-9 {
        return Err(Error::degenerate(format!(
            "rank-deficient matrix: smallest singular value {}",
            svd.singular_values[2]
        )));
    }
    let mut u = u;
    if (u * vt).determinant() < 0.0 {
        for i in 0..3 {
            u[(i, 2)] = -u[(i, 2)];
        }
    }
    let r = u * vt;
    let rows = [
        [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
        [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
        [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
    ];
    RotationMatrix::from_rows(rows)
}

/// Angle of the relative rotation `a^T b`, in radians, clamped to `[0, pi]`.
pub fn geodesic_angle(a: &RotationMatrix, b: &RotationMatrix) -> f64 {
    let rel = mat_mul(&a.transpose().m, &b.m);
    let tr = rel[0][0] + rel[1][1] + rel[2][2];
    (((tr - 1.0) / 2.0).clamp(-1.0, 1.0)).acos()
}

/// Applies `O x + p` to every point; the input order is preserved.
pub fn transform_points(pose: &Pose, pts: &[Vec3]) -> Vec<Vec3> {
    pts.iter().map(|&p| pose.apply(p)).collect()
}

/// Haar-uniform random rotation (uniform unit quaternion, Shoemake's method).
pub fn random_rotation<R: Rng>(rng: &mut R) -> RotationMatrix {
    use std::f64::consts::TAU;
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    let r3: f64 = rng.random();
    let a = (1.0 - r1).sqrt();
    let b = r1.sqrt();
    let w = a * (TAU * r2).cos();
    let x = a * (TAU * r2).sin();
    let y = b * (TAU * r3).cos();
    let z = b * (TAU * r3).sin();
    quaternion_to_matrix(w, x, y, z)
}

fn quaternion_to_matrix(w: f64, x: f64, y: f64, z: f64) -> RotationMatrix {
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    RotationMatrix::from_rows_unchecked([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}
