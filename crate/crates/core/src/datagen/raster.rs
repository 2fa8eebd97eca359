//! Point-splat rasterization for occlusion and silhouettes.
//!
//! The object is splatted as its surface samples, the hand as capsules
//! around each bone segment; both land in per-pixel min-depth buffers. An
//! object pixel counts as occluded when a hand pixel sits in front of it.
//! This is a visibility proxy, not a renderer, but it preserves the
//! "at most half the object hidden" semantics the dataset filter needs.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::hand::{HandShape, FINGER_COUNT, JOINTS_PER_FINGER};

/// Pinhole camera at the origin looking along +z, principal point at the
/// image center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    /// Focal length in pixels.
    pub focal: f64,
    /// Square image side in pixels.
    pub image_size: usize,
}

impl Default for Camera {
    fn default() -> Self {
        Camera { focal: 500.0, image_size: 256 }
    }
}

impl Camera {
    /// Pixel coordinates of a camera-frame point; `None` behind the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        let c = self.image_size as f64 / 2.0;
        Some((self.focal * p.x / p.z + c, self.focal * p.y / p.z + c))
    }
}

/// Radius of the capsules around hand bones, cm.
const CAPSULE_RADIUS: f64 = 0.8;
/// Sampling step along each bone, cm.
const BONE_STEP: f64 = 0.05;

#[derive(Debug, Clone)]
struct DepthBuffer {
    size: usize,
    depth: Vec<f64>,
}

impl DepthBuffer {
    fn new(size: usize) -> Self {
        DepthBuffer { size, depth: vec![f64::INFINITY; size * size] }
    }

    fn splat(&mut self, u: f64, v: f64, z: f64) {
        let (ui, vi) = (u.round() as i64, v.round() as i64);
        if ui < 0 || vi < 0 || ui >= self.size as i64 || vi >= self.size as i64 {
            return;
        }
        let idx = vi as usize * self.size + ui as usize;
        if z < self.depth[idx] {
            self.depth[idx] = z;
        }
    }

    fn splat_disc(&mut self, u: f64, v: f64, radius_px: f64, z: f64) {
        let r = radius_px.max(0.5);
        let (u0, u1) = ((u - r).floor() as i64, (u + r).ceil() as i64);
        let (v0, v1) = ((v - r).floor() as i64, (v + r).ceil() as i64);
        for vi in v0..=v1 {
            if vi < 0 || vi >= self.size as i64 {
                continue;
            }
            for ui in u0..=u1 {
                if ui < 0 || ui >= self.size as i64 {
                    continue;
                }
                let du = ui as f64 - u;
                let dv = vi as f64 - v;
                if du * du + dv * dv > r * r {
                    continue;
                }
                let idx = vi as usize * self.size + ui as usize;
                if z < self.depth[idx] {
                    self.depth[idx] = z;
                }
            }
        }
    }

    fn get(&self, idx: usize) -> f64 {
        self.depth[idx]
    }
}

/// Rasterized scene: object and hand depth buffers plus the derived
/// occlusion fraction.
#[derive(Debug, Clone)]
pub struct SceneRaster {
    size: usize,
    object: DepthBuffer,
    hand: DepthBuffer,
    /// Fraction of object pixels covered by a nearer hand pixel.
    pub occlusion: f64,
}

impl SceneRaster {
    /// Splats the posed object points and the hand capsules.
    /// Returns `None` when no object point lands inside the image.
    pub fn render(cam: &Camera, posed_object_pts: &[Vec3], hand: &HandShape) -> Option<SceneRaster> {
        let mut object = DepthBuffer::new(cam.image_size);
        for &p in posed_object_pts {
            if let Some((u, v)) = cam.project(p) {
                object.splat(u, v, p.z);
            }
        }
        let mut hand_buf = DepthBuffer::new(cam.image_size);
        for f in 0..FINGER_COUNT {
            for b in 1..JOINTS_PER_FINGER {
                let a = hand.joints[JOINTS_PER_FINGER * f + b - 1];
                let c = hand.joints[JOINTS_PER_FINGER * f + b];
                let len = a.distance(c);
                let steps = (len / BONE_STEP).ceil().max(1.0) as usize;
                for s in 0..=steps {
                    let t = s as f64 / steps as f64;
                    let p = a + (c - a).scale(t);
                    if p.z <= 0.0 {
                        continue;
                    }
                    if let Some((u, v)) = cam.project(p) {
                        let radius_px = cam.focal * CAPSULE_RADIUS / p.z;
                        hand_buf.splat_disc(u, v, radius_px, p.z - CAPSULE_RADIUS);
                    }
                }
            }
        }

        let mut object_px = 0usize;
        let mut occluded = 0usize;
        for idx in 0..object.depth.len() {
            let oz = object.get(idx);
            if oz.is_finite() {
                object_px += 1;
                let hz = hand_buf.get(idx);
                if hz < oz {
                    occluded += 1;
                }
            }
        }
        if object_px == 0 {
            return None;
        }
        Some(SceneRaster {
            size: cam.image_size,
            object,
            hand: hand_buf,
            occlusion: occluded as f64 / object_px as f64,
        })
    }

    /// Visible (non-occluded) object pixels as `(u, v, depth)` triples.
    pub fn visible_object_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.size {
            for u in 0..self.size {
                let idx = v * self.size + u;
                let oz = self.object.get(idx);
                if oz.is_finite() && !(self.hand.get(idx) < oz) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// 16x16 silhouette bits of the visible object over its minimal square
    /// crop, plus the normalized crop. `None` when the hand hides
    /// everything.
    pub fn silhouette_and_crop(&self) -> Option<(Vec<u8>, super::Crop)> {
        let visible = self.visible_object_pixels();
        if visible.is_empty() {
            return None;
        }
        let (mut u0, mut v0, mut u1, mut v1) = (usize::MAX, usize::MAX, 0usize, 0usize);
        for &(u, v) in &visible {
            u0 = u0.min(u);
            v0 = v0.min(v);
            u1 = u1.max(u);
            v1 = v1.max(v);
        }
        let side = (u1 - u0 + 1).max(v1 - v0 + 1) as f64;
        let cx = (u0 + u1) as f64 / 2.0;
        let cy = (v0 + v1) as f64 / 2.0;
        let origin_u = cx - side / 2.0;
        let origin_v = cy - side / 2.0;
        let grid = crate::learning::SILHOUETTE_SIDE;
        let mut bits = vec![0u8; grid * grid];
        for &(u, v) in &visible {
            let gx = (((u as f64 - origin_u) * grid as f64 / side) as isize)
                .clamp(0, grid as isize - 1) as usize;
            let gy = (((v as f64 - origin_v) * grid as f64 / side) as isize)
                .clamp(0, grid as isize - 1) as usize;
            bits[gy * grid + gx] = 1;
        }
        let s = self.size as f64;
        Some((bits, super::Crop { cx: cx / s, cy: cy / s, scale: side / s }))
    }
}

/// Fraction of the object's projected pixels covered by nearer hand pixels.
///
/// Errors when any posed object point sits behind the camera or the object
/// does not land in the image at all.
pub fn occlusion_fraction(
    cam: &Camera,
    posed_object_pts: &[Vec3],
    hand: &HandShape,
) -> Result<f64> {
    if posed_object_pts.is_empty() {
        return Err(Error::EmptyInput("posed object points"));
    }
    if posed_object_pts.iter().any(|p| p.z <= 0.0) {
        return Err(Error::validation("object point behind the camera"));
    }
    let raster = SceneRaster::render(cam, posed_object_pts, hand)
        .ok_or_else(|| Error::validation("object does not project into the image"))?;
    Ok(raster.occlusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{transform_points, Pose, RotationMatrix};
    use crate::hand::{forward_kinematics, HandConfig, HandModelSpec};

    fn object_points_at(z: f64) -> Vec<Vec3> {
        // a small grid of points spanning ~4 cm
        let mut pts = Vec::new();
        for i in -5..=5 {
            for j in -5..=5 {
                pts.push(Vec3::new(i as f64 * 0.4, j as f64 * 0.4, z));
            }
        }
        pts
    }

    fn hand_at(position: Vec3) -> HandShape {
        let spec = HandModelSpec::default();
        let hp = HandConfig::flat_hand(position, RotationMatrix::identity());
        forward_kinematics(&spec, &hp).unwrap()
    }

    #[test]
    fn far_away_hand_occludes_nothing() {
        let cam = Camera::default();
        let pts = object_points_at(60.0);
        let hand = hand_at(Vec3::new(1000.0, 0.0, 60.0));
        assert_eq!(occlusion_fraction(&cam, &pts, &hand).unwrap(), 0.0);
    }

    #[test]
    fn hand_behind_the_object_occludes_nothing() {
        let cam = Camera::default();
        let pts = object_points_at(60.0);
        let hand = hand_at(Vec3::new(0.0, -5.0, 80.0));
        assert_eq!(occlusion_fraction(&cam, &pts, &hand).unwrap(), 0.0);
    }

    #[test]
    fn hand_covering_everything_occludes_fully() {
        let cam = Camera::default();
        // a small object patch directly behind the middle finger
        let pts: Vec<Vec3> = (0..9)
            .map(|i| Vec3::new(-0.8 + 0.2 * i as f64, 13.0, 60.0))
            .collect();
        // the flat hand's fingers at z = 52 project over the patch
        let hand = hand_at(Vec3::new(0.0, 0.0, 52.0));
        let occ = occlusion_fraction(&cam, &pts, &hand).unwrap();
        assert_eq!(occ, 1.0);
    }

    #[test]
    fn behind_camera_points_are_rejected() {
        let cam = Camera::default();
        let pts = vec![Vec3::new(0.0, 0.0, -5.0)];
        let hand = hand_at(Vec3::new(0.0, 0.0, 50.0));
        assert!(occlusion_fraction(&cam, &pts, &hand).is_err());
    }

    #[test]
    fn half_cover_matches_pixel_count_oracle() {
        let cam = Camera::default();
        // two strips: one behind the finger region, one far below it
        let mut pts = Vec::new();
        for i in -10..=10 {
            for j in 0..=10 {
                pts.push(Vec3::new(i as f64 * 0.3, 12.0 + j as f64 * 0.3, 60.0));
                pts.push(Vec3::new(i as f64 * 0.3, -5.0 - j as f64 * 0.3, 60.0));
            }
        }
        let hand = hand_at(Vec3::new(0.0, 0.0, 50.0));
        let got = occlusion_fraction(&cam, &pts, &hand).unwrap();

        // independent rasterization oracle: object pixels from scratch,
        // hand coverage re-derived from densely sampled capsules
        let c = cam.image_size as f64 / 2.0;
        let mut object: std::collections::HashMap<(i64, i64), f64> = Default::default();
        for &p in &pts {
            let u = (cam.focal * p.x / p.z + c).round() as i64;
            let v = (cam.focal * p.y / p.z + c).round() as i64;
            let e = object.entry((u, v)).or_insert(f64::INFINITY);
            *e = e.min(p.z);
        }
        let mut bone_samples = Vec::new();
        for f in 0..FINGER_COUNT {
            for b in 1..JOINTS_PER_FINGER {
                let a = hand.joints[JOINTS_PER_FINGER * f + b - 1];
                let d = hand.joints[JOINTS_PER_FINGER * f + b];
                let len = a.distance(d);
                let steps = (len / 0.05).ceil() as usize;
                for s in 0..=steps {
                    bone_samples.push(a + (d - a).scale(s as f64 / steps as f64));
                }
            }
        }
        let mut occluded = 0usize;
        for (&(u, v), &oz) in &object {
            let covered = bone_samples.iter().any(|p| {
                if p.z <= 0.0 || p.z - 0.8 >= oz {
                    return false;
                }
                let pu = cam.focal * p.x / p.z + c;
                let pv = cam.focal * p.y / p.z + c;
                let r = (cam.focal * 0.8 / p.z).max(0.5);
                let du = u as f64 - pu;
                let dv = v as f64 - pv;
                du * du + dv * dv <= r * r
            });
            if covered {
                occluded += 1;
            }
        }
        let expect = occluded as f64 / object.len() as f64;
        assert!((got - expect).abs() <= 0.02, "{got} vs {expect}");
        assert!(got > 0.05 && got < 0.95, "layout should be partial: {got}");
    }

    #[test]
    fn silhouette_and_crop_cover_the_visible_pixels() {
        let cam = Camera::default();
        let pose = Pose::new(Vec3::new(3.0, -2.0, 55.0), RotationMatrix::rot_x(0.4));
        let mesh = crate::geometry::test_meshes::unit_cube_surface_scaled(6.0);
        let pts = crate::geometry::sample_surface_points(&mesh, 512, 0).unwrap();
        let posed = transform_points(&pose, &pts);
        let hand = hand_at(Vec3::new(2.0, -10.0, 50.0));
        let raster = SceneRaster::render(&cam, &posed, &hand).unwrap();
        let (bits, crop) = raster.silhouette_and_crop().unwrap();
        assert_eq!(bits.len(), 256);
        assert!(bits.iter().any(|&b| b == 1));
        assert!(crop.scale > 0.0 && crop.scale <= 1.0);
        assert!((0.0..=1.0).contains(&crop.cx));
        assert!((0.0..=1.0).contains(&crop.cy));
    }
}
