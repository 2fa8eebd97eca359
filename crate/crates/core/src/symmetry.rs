//! Category-specific symmetry-invariant orientation representations.
//!
//! Rotationally symmetric objects make the raw rotation matrix a bad
//! regression target: many matrices describe the same appearance. Each
//! category therefore gets a representation built from the columns of the
//! rotation that is constant across its indistinguishable orientations:
//!
//! - bottle, bowl (axial): the third column `u3` alone — any spin about the
//!   body z-axis leaves it unchanged;
//! - mug (mirror plane through the handle): `[u1; u3]` plus the outer
//!   product `u2 u2^T`, which drops the sign of `u2`;
//! - knife (mirror plane through the blade): `[u1; u2]` plus `u3 u3^T`.
//!
//! Extraction deliberately accepts raw, non-orthogonal matrices so it can be
//! applied to regressor output as well as to ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{det3, orthogonalize_svd, RotationMatrix};

/// The four object categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bottle,
    Mug,
    Knife,
    Bowl,
}

pub const ALL_CATEGORIES: [Category; 4] =
    [Category::Bottle, Category::Mug, Category::Knife, Category::Bowl];

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Bottle => "bottle",
            Category::Mug => "mug",
            Category::Knife => "knife",
            Category::Bowl => "bowl",
        }
    }

    /// Axially symmetric categories spin freely about their body z-axis.
    pub fn is_axial(self) -> bool {
        matches!(self, Category::Bottle | Category::Bowl)
    }

    /// Length of this category's orientation representation.
    pub fn repr_len(self) -> usize {
        if self.is_axial() {
            3
        } else {
            15
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottle" => Ok(Category::Bottle),
            "mug" => Ok(Category::Mug),
            "knife" => Ok(Category::Knife),
            "bowl" => Ok(Category::Bowl),
            other => Err(Error::Parse(format!("unknown category {other:?}"))),
        }
    }
}

/// Symmetry-invariant encoding of an orientation.
///
/// Layout (row-major flattening of the outer-product block):
/// - bottle/bowl: `[u3]` (3 values)
/// - mug: `[u1; u3; u2 u2^T]` (15 values)
/// - knife: `[u1; u2; u3 u3^T]` (15 values)
///
/// For orthonormal input the outer-product block is symmetric PSD with
/// trace 1; raw regressor input need not satisfy that.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationRepr {
    pub category: Category,
    pub values: Vec<f64>,
}

impl OrientationRepr {
    /// Squared Euclidean distance between two representations.
    pub fn distance_sq(&self, other: &OrientationRepr) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

fn column(m: &[[f64; 3]; 3], j: usize) -> [f64; 3] {
    [m[0][j], m[1][j], m[2][j]]
}

fn outer(u: [f64; 3]) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = u[i] * u[j];
        }
    }
    out
}

/// Extracts the category-specific representation from a (possibly raw,
/// non-orthogonal) 3x3 matrix.
pub fn orientation_repr(category: Category, m: &[[f64; 3]; 3]) -> OrientationRepr {
    let values = match category {
        Category::Bottle | Category::Bowl => column(m, 2).to_vec(),
        Category::Mug => {
            let mut v = Vec::with_capacity(15);
            v.extend_from_slice(&column(m, 0));
            v.extend_from_slice(&column(m, 2));
            v.extend_from_slice(&outer(column(m, 1)));
            v
        }
        Category::Knife => {
            let mut v = Vec::with_capacity(15);
            v.extend_from_slice(&column(m, 0));
            v.extend_from_slice(&column(m, 1));
            v.extend_from_slice(&outer(column(m, 2)));
            v
        }
    };
    OrientationRepr { category, values }
}

/// Mean squared error between the representations of an estimate (raw
/// matrix allowed) and a ground-truth rotation.
pub fn orientation_loss(category: Category, est: &[[f64; 3]; 3], gt: &RotationMatrix) -> f64 {
    let a = orientation_repr(category, est);
    let b = orientation_repr(category, &gt.rows());
    a.distance_sq(&b) / a.values.len() as f64
}

/// Gradient of [`orientation_loss`] with respect to the raw estimate,
/// flattened row-major. Exactness is checked against finite differences in
/// the test suite.
pub fn orientation_loss_gradient(
    category: Category,
    est: &[[f64; 3]; 3],
    gt: &RotationMatrix,
) -> [f64; 9] {
    let est_repr = orientation_repr(category, est);
    let gt_repr = orientation_repr(category, &gt.rows());
    let n = est_repr.values.len() as f64;
    let d: Vec<f64> = est_repr
        .values
        .iter()
        .zip(&gt_repr.values)
        .map(|(a, b)| 2.0 * (a - b) / n)
        .collect();

    // raw flat index of entry (row i, column j)
    let idx = |i: usize, j: usize| 3 * i + j;
    let mut g = [0.0; 9];
    match category {
        Category::Bottle | Category::Bowl => {
            for i in 0..3 {
                g[idx(i, 2)] = d[i];
            }
        }
        Category::Mug | Category::Knife => {
            // columns: (a, b) are fully observed, c enters via its outer
            // product
            let (ca, cb, cc) = match category {
                Category::Mug => (0usize, 2usize, 1usize),
                Category::Knife => (0, 1, 2),
                _ => unreachable!(),
            };
            for i in 0..3 {
                g[idx(i, ca)] = d[i];
                g[idx(i, cb)] = d[3 + i];
            }
            let u = column(est, cc);
            // d(u u^T)_{ab} / d u_c = delta_{ac} u_b + u_a delta_{bc}
            for c in 0..3 {
                let mut acc = 0.0;
                for b in 0..3 {
                    acc += d[6 + 3 * c + b] * u[b]; // a = c term
                }
                for a in 0..3 {
                    acc += d[6 + 3 * a + c] * u[a]; // b = c term
                }
                g[idx(c, cc)] = acc;
            }
        }
    }
    g
}

/// Rotations indistinguishable from `o` for this category.
///
/// Axial categories return the `n` body-frame spins `o * Rz(2 pi k / n)`.
/// Mirror-symmetric categories return `{o}`: flipping the sign of the
/// mirrored column produces an improper matrix, so the orbit gains the
/// re-orthogonalized flip only in the (never exactly realized) case where
/// the flip is itself a proper rotation.
pub fn symmetry_orbit(category: Category, o: &RotationMatrix, n: usize) -> Vec<RotationMatrix> {
    assert!(n >= 1, "orbit needs at least one member");
    match category {
        Category::Bottle | Category::Bowl => (0..n)
            .map(|k| o.mul(&RotationMatrix::rot_z(2.0 * std::f64::consts::PI * k as f64 / n as f64)))
            .collect(),
        Category::Mug | Category::Knife => {
            let flip_col = if category == Category::Mug { 1 } else { 2 };
            let mut flipped = o.rows();
            for row in &mut flipped {
                row[flip_col] = -row[flip_col];
            }
            let mut orbit = vec![*o];
            if det3(&flipped) > 0.0 {
                if let Ok(r) = orthogonalize_svd(flipped) {
                    orbit.push(r);
                }
            }
            orbit
        }
    }
}

/// Candidate whose representation is closest (Euclidean) to that of the raw
/// matrix; ties break toward the lowest index.
pub fn nearest_rotation_from_set(
    raw: &[[f64; 3]; 3],
    candidates: &[RotationMatrix],
    category: Category,
) -> Result<RotationMatrix> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidate rotation set"));
    }
    let target = orientation_repr(category, raw);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let d = orientation_repr(category, &c.rows()).distance_sq(&target);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(candidates[best])
}
