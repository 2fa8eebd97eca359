use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// Cubic binary occupancy grid of a mesh surface.
///
/// The grid spans the mesh's cubic bounding box (largest extent plus
/// a 5% margin); a cell is occupied iff some triangle intersects it.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    resolution: usize,
    occupancy: Vec<bool>,
    cell_size: f64,
}

impl VoxelGrid {
    /// Builds a grid from raw parts; `occupancy` must have `resolution^3`
    /// entries and `cell_size` must be positive.
    pub fn from_parts(resolution: usize, occupancy: Vec<bool>, cell_size: f64) -> Result<Self> {
        if occupancy.len() != resolution * resolution * resolution {
            return Err(Error::DimensionMismatch {
                expected: resolution * resolution * resolution,
                got: occupancy.len(),
                context: "voxel occupancy length",
            });
        }
        if !(cell_size > 0.0) {
            return Err(Error::validation("cell size must be positive"));
        }
        Ok(VoxelGrid { resolution, occupancy, cell_size })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn is_occupied(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy[self.index(x, y, z)]
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.resolution && y < self.resolution && z < self.resolution);
        x + self.resolution * (y + self.resolution * z)
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    /// Mean occupancy per block of an `out^3` downsampling of the grid.
    /// Used as the mesh-branch network input.
    pub fn pooled(&self, out: usize) -> Vec<f64> {
        assert!(out >= 1 && out <= self.resolution);
        let r = self.resolution;
        let mut pooled = vec![0.0f64; out * out * out];
        let mut counts = vec![0usize; out * out * out];
        for z in 0..r {
            let bz = z * out / r;
            for y in 0..r {
                let by = y * out / r;
                for x in 0..r {
                    let bx = x * out / r;
                    let bi = bx + out * (by + out * bz);
                    counts[bi] += 1;
                    if self.occupancy[self.index(x, y, z)] {
                        pooled[bi] += 1.0;
                    }
                }
            }
        }
        for (p, &c) in pooled.iter_mut().zip(&counts) {
            *p /= c as f64;
        }
        pooled
    }
}

/// Margin applied to the largest bounding-box extent.
const BBOX_MARGIN: f64 = 1.05;

/// Rasterizes the mesh surface into a cubic occupancy grid.
///
/// Surface occupancy (triangle/cell overlap), not solid fill, so
/// non-watertight meshes are handled. `resolution` is cells per axis.
pub fn voxelize(mesh: &TriangleMesh, resolution: usize) -> Result<VoxelGrid> {
    if resolution < 4 {
        return Err(Error::validation(format!(
            "voxel resolution must be >= 4, got {resolution}"
        )));
    }
    let (lo, hi) = mesh.bounding_box();
    let extent = hi - lo;
    let max_extent = extent.x.max(extent.y).max(extent.z);
    if max_extent <= 1e-9 {
        return Err(Error::degenerate("mesh bounding box is degenerate"));
    }
    let side = max_extent * BBOX_MARGIN;
    let center = (lo + hi).scale(0.5);
    let origin = center - Vec3::new(side, side, side).scale(0.5);
    let cell = side / resolution as f64;
    let half = cell / 2.0;

    let mut occupancy = vec![false; resolution * resolution * resolution];
    let clamp_cell = |v: f64| -> usize {
        let i = ((v - 0.0) / cell).floor() as isize;
        i.clamp(0, resolution as isize - 1) as usize
    };
    for t in 0..mesh.triangles().len() {
        let tri = mesh.triangle_vertices(t).map(|p| p - origin);
        let t_lo = Vec3::new(
            tri[0].x.min(tri[1].x).min(tri[2].x),
            tri[0].y.min(tri[1].y).min(tri[2].y),
            tri[0].z.min(tri[1].z).min(tri[2].z),
        );
        let t_hi = Vec3::new(
            tri[0].x.max(tri[1].x).max(tri[2].x),
            tri[0].y.max(tri[1].y).max(tri[2].y),
            tri[0].z.max(tri[1].z).max(tri[2].z),
        );
        let (x0, x1) = (clamp_cell(t_lo.x), clamp_cell(t_hi.x));
        let (y0, y1) = (clamp_cell(t_lo.y), clamp_cell(t_hi.y));
        let (z0, z1) = (clamp_cell(t_lo.z), clamp_cell(t_hi.z));
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let idx = x + resolution * (y + resolution * z);
                    if occupancy[idx] {
                        continue;
                    }
                    let c = Vec3::new(
                        (x as f64 + 0.5) * cell,
                        (y as f64 + 0.5) * cell,
                        (z as f64 + 0.5) * cell,
                    );
                    if triangle_box_overlap(c, half, &tri) {
                        occupancy[idx] = true;
                    }
                }
            }
        }
    }
    Ok(VoxelGrid { resolution, occupancy, cell_size: cell })
}

/// Separating-axis triangle / axis-aligned-cube overlap test
/// (Akenine-Moller). Touching counts as overlap.
fn triangle_box_overlap(center: Vec3, half: f64, tri: &[Vec3; 3]) -> bool {
    let v0 = tri[0] - center;
    let v1 = tri[1] - center;
    let v2 = tri[2] - center;
    let e0 = v1 - v0;
    let e1 = v2 - v1;
    let e2 = v0 - v2;

    // 9 cross-product axes
    let axes = [
        Vec3::new(0.0, -e0.z, e0.y),
        Vec3::new(0.0, -e1.z, e1.y),
        Vec3::new(0.0, -e2.z, e2.y),
        Vec3::new(e0.z, 0.0, -e0.x),
        Vec3::new(e1.z, 0.0, -e1.x),
        Vec3::new(e2.z, 0.0, -e2.x),
        Vec3::new(-e0.y, e0.x, 0.0),
        Vec3::new(-e1.y, e1.x, 0.0),
        Vec3::new(-e2.y, e2.x, 0.0),
    ];
    for a in axes {
        let p0 = v0.dot(a);
        let p1 = v1.dot(a);
        let p2 = v2.dot(a);
        let r = half * (a.x.abs() + a.y.abs() + a.z.abs());
        let lo = p0.min(p1).min(p2);
        let hi = p0.max(p1).max(p2);
        if lo > r || hi < -r {
            return false;
        }
    }

    // box face normals: triangle AABB vs box
    for (lo, hi) in [
        (v0.x.min(v1.x).min(v2.x), v0.x.max(v1.x).max(v2.x)),
        (v0.y.min(v1.y).min(v2.y), v0.y.max(v1.y).max(v2.y)),
        (v0.z.min(v1.z).min(v2.z), v0.z.max(v1.z).max(v2.z)),
    ] {
        if lo > half || hi < -half {
            return false;
        }
    }

    // triangle plane vs box
    let normal = e0.cross(e1);
    let d = normal.dot(v0);
    let r = half * (normal.x.abs() + normal.y.abs() + normal.z.abs());
    d.abs() <= r
}
