use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Vec3;
use crate::error::{Error, Result};

/// Maximum distance of the vertex centroid from the origin, in cm.
pub const CENTROID_TOL: f64 = 1e-3;

/// A triangle mesh in the object body frame (cm, vertex centroid at the
/// origin).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Validating constructor. The vertex centroid must already be at the
    /// origin (within [`CENTROID_TOL`]); use [`TriangleMesh::new_centered`]
    /// for raw geometry.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::validation(format!(
                "mesh needs at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        if triangles.is_empty() {
            return Err(Error::validation("mesh needs at least one triangle"));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("mesh has non-finite vertices"));
        }
        for t in &triangles {
            for &i in t {
                if i >= vertices.len() {
                    return Err(Error::validation(format!(
                        "triangle index {i} out of range (V = {})",
                        vertices.len()
                    )));
                }
            }
        }
        let c = centroid(&vertices);
        if c.norm() > CENTROID_TOL {
            return Err(Error::validation(format!(
                "vertex centroid {c:?} is not at the origin"
            )));
        }
        Ok(TriangleMesh { vertices, triangles })
    }

    /// Recenters the vertices on their centroid, then validates.
    pub fn new_centered(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let c = centroid(&vertices);
        let vertices = vertices.into_iter().map(|v| v - c).collect();
        Self::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        (b - a).cross(c - a).norm() / 2.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Uniformly scaled copy (still centered; the centroid is the origin).
    pub fn scaled(&self, s: f64) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| v.scale(s)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Vec3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
            hi = Vec3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
        }
        (lo, hi)
    }

    /// Reads the OFF text subset: a header line `OFF`, a counts line
    /// `V F 0`, `V` vertex lines and `F` triangle lines `3 i j k`.
    /// Non-triangle faces are rejected. The loaded mesh is recentered on its
    /// vertex centroid.
    pub fn read_off<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = next_content_line(&mut lines)?
            .ok_or_else(|| Error::Parse("empty OFF file".into()))?;
        if header.trim() != "OFF" {
            return Err(Error::Parse(format!("expected OFF header, got {header:?}")));
        }
        let counts = next_content_line(&mut lines)?
            .ok_or_else(|| Error::Parse("missing OFF counts line".into()))?;
        let counts: Vec<&str> = counts.split_whitespace().collect();
        if counts.len() != 3 {
            return Err(Error::Parse("counts line must be `V F 0`".into()));
        }
        let nv: usize = parse_num(counts[0], "vertex count")?;
        let nf: usize = parse_num(counts[1], "face count")?;
        let ne: usize = parse_num(counts[2], "edge count")?;
        if ne != 0 {
            return Err(Error::Parse("edge count must be 0".into()));
        }
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next_content_line(&mut lines)?
                .ok_or_else(|| Error::Parse("unexpected end of vertex list".into()))?;
            let xyz: Vec<&str> = line.split_whitespace().collect();
            if xyz.len() != 3 {
                return Err(Error::Parse(format!("bad vertex line: {line:?}")));
            }
            vertices.push(Vec3::new(
                parse_num(xyz[0], "vertex x")?,
                parse_num(xyz[1], "vertex y")?,
                parse_num(xyz[2], "vertex z")?,
            ));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let line = next_content_line(&mut lines)?
                .ok_or_else(|| Error::Parse("unexpected end of face list".into()))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "3" {
                return Err(Error::Parse(format!("only triangle faces supported: {line:?}")));
            }
            triangles.push([
                parse_num(f[1], "face index")?,
                parse_num(f[2], "face index")?,
                parse_num(f[3], "face index")?,
            ]);
        }
        Self::new_centered(vertices, triangles)
    }

    pub fn load_off(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_off(BufReader::new(file))
    }

    pub fn write_off<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {} {}", v.x, v.y, v.z)?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn save_off(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_off(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }
}

fn centroid(vertices: &[Vec3]) -> Vec3 {
    if vertices.is_empty() {
        return Vec3::ZERO;
    }
    let mut c = Vec3::ZERO;
    for v in vertices {
        c = c + *v;
    }
    c.scale(1.0 / vertices.len() as f64)
}

fn next_content_line(
    lines: &mut std::io::Lines<impl BufRead>,
) -> Result<Option<String>> {
    for line in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        return Ok(Some(line));
    }
    Ok(None)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("cannot parse {what} from {s:?}")))
}

/// Draws `n` points area-weighted uniformly over the mesh surface.
/// Deterministic for a fixed seed.
pub fn sample_surface_points(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if n == 0 {
        return Err(Error::validation("sample count must be >= 1"));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles().len());
    let mut total = 0.0;
    for t in 0..mesh.triangles().len() {
        total += mesh.triangle_area(t);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::degenerate("mesh has zero surface area"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random::<f64>() * total;
        let t = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
        let [a, b, c] = mesh.triangle_vertices(t);
        // square-root warp gives the uniform density on the triangle
        let su = rng.random::<f64>().sqrt();
        let v = rng.random::<f64>();
        let p = a.scale(1.0 - su) + b.scale(su * (1.0 - v)) + c.scale(su * v);
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    use super::super::test_meshes::unit_cube_surface;

    fn single_triangle_mesh() -> TriangleMesh {
        // a fourth vertex is required but can stay unreferenced
        TriangleMesh::new_centered(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(3.0, 0.0, 0.0),
                Vec3::new(0.0, 3.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn constructor_validates() {
        assert!(TriangleMesh::new(vec![Vec3::ZERO; 3], vec![[0, 1, 2]]).is_err());
        assert!(TriangleMesh::new(
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::ZERO],
            vec![]
        )
        .is_err());
        // out-of-range index
        assert!(TriangleMesh::new_centered(
            vec![
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0)
            ],
            vec![[0, 1, 9]]
        )
        .is_err());
        // off-center
        assert!(TriangleMesh::new(
            vec![
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(2.0, 1.0, 1.0),
                Vec3::new(1.0, 2.0, 1.0),
                Vec3::new(1.0, 1.0, 2.0)
            ],
            vec![[0, 1, 2]]
        )
        .is_err());
    }

    #[test]
    fn sampled_points_stay_on_triangle_plane() {
        let mesh = single_triangle_mesh();
        let [a, b, c] = mesh.triangle_vertices(0);
        let normal = (b - a).cross(c - a).normalized().unwrap();
        let pts = sample_surface_points(&mesh, 100, 1).unwrap();
        assert_eq!(pts.len(), 100);
        for p in pts {
            assert!(normal.dot(p - a).abs() < 1e-9);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let mesh = unit_cube_surface();
        let a = sample_surface_points(&mesh, 512, 42).unwrap();
        let b = sample_surface_points(&mesh, 512, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_surface_points(&mesh, 512, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_respects_area_ratio() {
        // two triangles with area ratio 9:1, separated along z
        let mesh = TriangleMesh::new_centered(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(9.0, 0.0, 0.0),
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::new(0.0, 0.0, 5.0),
                Vec3::new(1.0, 0.0, 5.0),
                Vec3::new(0.0, 2.0, 5.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let n = 100_000;
        let pts = sample_surface_points(&mesh, n, 0).unwrap();
        let lo_z = mesh.vertices()[0].z;
        let big = pts.iter().filter(|p| (p.z - lo_z).abs() < 1e-6).count();
        let frac = big as f64 / n as f64;
        assert!((frac - 0.9).abs() <= 0.02, "big-triangle fraction {frac}");
    }

    #[test]
    fn sampling_chi_square_matches_area_fractions() {
        // four triangles in distinct z planes with distinct areas
        let tri = |w: f64, z: f64, base: usize| -> (Vec<Vec3>, [usize; 3]) {
            (
                vec![
                    Vec3::new(0.0, 0.0, z),
                    Vec3::new(w, 0.0, z),
                    Vec3::new(0.0, 2.0, z),
                ],
                [base, base + 1, base + 2],
            )
        };
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let widths = [1.0, 2.0, 3.0, 6.0];
        for (i, &w) in widths.iter().enumerate() {
            let (vs, t) = tri(w, i as f64 * 4.0, vertices.len());
            vertices.extend(vs);
            triangles.push(t);
        }
        let mesh = TriangleMesh::new_centered(vertices, triangles).unwrap();

        let n = 100_000;
        let pts = sample_surface_points(&mesh, n, 0).unwrap();
        let z_levels: Vec<f64> = (0..4)
            .map(|i| mesh.vertices()[3 * i].z)
            .collect();
        let mut counts = [0usize; 4];
        for p in &pts {
            let k = z_levels
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - p.z).abs().partial_cmp(&(b.1 - p.z).abs()).unwrap())
                .unwrap()
                .0;
            counts[k] += 1;
        }
        let total_area: f64 = widths.iter().sum();
        let mut chi2 = 0.0;
        for (k, &w) in widths.iter().enumerate() {
            let expected = n as f64 * w / total_area;
            let d = counts[k] as f64 - expected;
            chi2 += d * d / expected;
        }
        // chi-square critical value at p = 0.01 with 3 degrees of freedom
        assert!(chi2 < 11.345, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn off_round_trip() {
        let mesh = unit_cube_surface();
        let mut buf = Vec::new();
        mesh.write_off(&mut buf).unwrap();
        let back = TriangleMesh::read_off(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(mesh, back);
    }

    #[test]
    fn off_rejects_non_triangle_faces() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n";
        assert!(matches!(
            TriangleMesh::read_off(std::io::Cursor::new(text)),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn off_rejects_bad_header() {
        let text = "PLY\n4 1 0\n";
        assert!(TriangleMesh::read_off(std::io::Cursor::new(text)).is_err());
    }

    #[test]
    fn off_load_recenters() {
        let text = "OFF\n4 1 0\n10 10 10\n11 10 10\n10 11 10\n10 10 11\n3 0 1 2\n";
        let mesh = TriangleMesh::read_off(std::io::Cursor::new(text)).unwrap();
        let c: Vec3 = mesh
            .vertices()
            .iter()
            .fold(Vec3::ZERO, |acc, v| acc + *v)
            .scale(0.25);
        assert!(c.norm() < 1e-9);
    }
}
