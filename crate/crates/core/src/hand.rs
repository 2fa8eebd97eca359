//! Simplified 20-DOF human hand.
//!
//! Wrist frame convention: `x` spans the palm laterally, `y` points along
//! the extended fingers and `z` is the palm normal. Each finger is a chain
//! of four bones; abduction rotates the whole chain about the palm normal,
//! the three flexions curl it about the (local) lateral axis toward `-z`.
//!
//! A configuration (`HandConfig`) is the wrist pose in the camera frame plus
//! the 20 joint angles; the corresponding shape (`HandShape`) holds the 20
//! joint positions obtained through forward kinematics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{axis_angle_rotation, RotationMatrix, Vec3};

pub const FINGER_COUNT: usize = 5;
pub const JOINTS_PER_FINGER: usize = 4;
pub const JOINT_COUNT: usize = FINGER_COUNT * JOINTS_PER_FINGER;

/// Length of the fingertip pad beyond the last joint, in cm.
pub const TIP_LENGTH: f64 = 1.0;

pub const ABDUCTION_RANGE: (f64, f64) = (-std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_6);
pub const FLEXION_RANGE: (f64, f64) = (0.0, std::f64::consts::FRAC_PI_2);

/// Geometry of one finger chain: where it leaves the palm and its four bone
/// lengths (base-to-knuckle first), in cm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerSpec {
    pub base_offset: Vec3,
    pub bone_lengths: [f64; 4],
}

/// Fixed geometry of the whole hand, thumb through pinky.
#[derive(Debug, Clone, PartialEq)]
pub struct HandModelSpec {
    pub fingers: [FingerSpec; FINGER_COUNT],
}

impl HandModelSpec {
    pub fn new(fingers: [FingerSpec; FINGER_COUNT]) -> Result<Self> {
        for f in &fingers {
            if f.bone_lengths.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::validation("bone lengths must be positive"));
            }
            if !f.base_offset.is_finite() {
                return Err(Error::validation("base offset must be finite"));
            }
        }
        Ok(HandModelSpec { fingers })
    }
}

impl Default for HandModelSpec {
    /// Anthropometrically plausible adult hand, base offsets fanned across
    /// an 8 cm palm.
    fn default() -> Self {
        let f = |x: f64, y: f64, bones: [f64; 4]| FingerSpec {
            base_offset: Vec3::new(x, y, 0.0),
            bone_lengths: bones,
        };
        HandModelSpec {
            fingers: [
                f(-4.0, 0.5, [4.0, 3.0, 2.5, 2.0]),  // thumb
                f(-2.0, 1.5, [8.0, 4.5, 2.5, 2.0]),  // index
                f(0.0, 1.6, [8.2, 5.0, 3.0, 2.0]),   // middle
                f(2.0, 1.5, [7.8, 4.5, 2.8, 2.0]),   // ring
                f(4.0, 1.2, [7.2, 3.5, 2.2, 1.8]),   // pinky
            ],
        }
    }
}

/// Per-finger joint angles, in chain order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerAngles {
    pub abduction: f64,
    pub mcp_flex: f64,
    pub pip_flex: f64,
    pub dip_flex: f64,
}

impl FingerAngles {
    pub const ZERO: FingerAngles =
        FingerAngles { abduction: 0.0, mcp_flex: 0.0, pip_flex: 0.0, dip_flex: 0.0 };

    pub fn new(abduction: f64, mcp_flex: f64, pip_flex: f64, dip_flex: f64) -> Self {
        FingerAngles { abduction, mcp_flex, pip_flex, dip_flex }
    }

    fn to_array(self) -> [f64; 4] {
        [self.abduction, self.mcp_flex, self.pip_flex, self.dip_flex]
    }

    fn validate(&self) -> Result<()> {
        if self.abduction < ABDUCTION_RANGE.0 || self.abduction > ABDUCTION_RANGE.1 {
            return Err(Error::validation(format!(
                "abduction {} outside [{}, {}]",
                self.abduction, ABDUCTION_RANGE.0, ABDUCTION_RANGE.1
            )));
        }
        for flex in [self.mcp_flex, self.pip_flex, self.dip_flex] {
            if flex < FLEXION_RANGE.0 || flex > FLEXION_RANGE.1 {
                return Err(Error::validation(format!(
                    "flexion {} outside [{}, {}]",
                    flex, FLEXION_RANGE.0, FLEXION_RANGE.1
                )));
            }
        }
        Ok(())
    }

    fn clamped(self) -> FingerAngles {
        FingerAngles {
            abduction: self.abduction.clamp(ABDUCTION_RANGE.0, ABDUCTION_RANGE.1),
            mcp_flex: self.mcp_flex.clamp(FLEXION_RANGE.0, FLEXION_RANGE.1),
            pip_flex: self.pip_flex.clamp(FLEXION_RANGE.0, FLEXION_RANGE.1),
            dip_flex: self.dip_flex.clamp(FLEXION_RANGE.0, FLEXION_RANGE.1),
        }
    }
}

/// Wrist pose in the camera frame plus the 20 joint angles (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandConfig {
    pub wrist_position: Vec3,
    pub wrist_orientation: RotationMatrix,
    pub angles: [FingerAngles; FINGER_COUNT],
}

impl HandConfig {
    pub fn flat_hand(wrist_position: Vec3, wrist_orientation: RotationMatrix) -> Self {
        HandConfig { wrist_position, wrist_orientation, angles: [FingerAngles::ZERO; 5] }
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.angles {
            a.validate()?;
        }
        Ok(())
    }

    /// Angles flattened `[finger][joint]` with joints
    /// (abduction, mcp, pip, dip).
    pub fn angles_flat(&self) -> [f64; JOINT_COUNT] {
        let mut out = [0.0; JOINT_COUNT];
        for (f, a) in self.angles.iter().enumerate() {
            out[4 * f..4 * f + 4].copy_from_slice(&a.to_array());
        }
        out
    }

    pub fn from_flat_angles(
        wrist_position: Vec3,
        wrist_orientation: RotationMatrix,
        flat: &[f64; JOINT_COUNT],
    ) -> Self {
        let mut angles = [FingerAngles::ZERO; FINGER_COUNT];
        for (f, a) in angles.iter_mut().enumerate() {
            *a = FingerAngles::new(flat[4 * f], flat[4 * f + 1], flat[4 * f + 2], flat[4 * f + 3]);
        }
        HandConfig { wrist_position, wrist_orientation, angles }
    }
}

/// The 20 joint positions in the camera frame, `[finger][joint]` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandShape {
    pub joints: [Vec3; JOINT_COUNT],
}

impl HandShape {
    pub fn joint(&self, finger: usize, joint: usize) -> Vec3 {
        self.joints[JOINTS_PER_FINGER * finger + joint]
    }

    pub fn joints_flat(&self) -> [f64; JOINT_COUNT * 3] {
        let mut out = [0.0; JOINT_COUNT * 3];
        for (i, j) in self.joints.iter().enumerate() {
            out[3 * i] = j.x;
            out[3 * i + 1] = j.y;
            out[3 * i + 2] = j.z;
        }
        out
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() != JOINT_COUNT * 3 {
            return Err(Error::DimensionMismatch {
                expected: JOINT_COUNT * 3,
                got: flat.len(),
                context: "hand shape coordinates",
            });
        }
        let mut joints = [Vec3::ZERO; JOINT_COUNT];
        for (i, j) in joints.iter_mut().enumerate() {
            *j = Vec3::new(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
        }
        Ok(HandShape { joints })
    }
}

/// Joint positions from a configuration.
///
/// Per finger: start at the base offset, rotate by the abduction about the
/// palm normal, then alternate a bone-length translation along the chain
/// direction with the next flexion about the local lateral axis. The wrist
/// pose finally maps everything to the camera frame.
pub fn forward_kinematics(spec: &HandModelSpec, hp: &HandConfig) -> Result<HandShape> {
    hp.validate()?;
    let mut joints = [Vec3::ZERO; JOINT_COUNT];
    for (f, finger) in spec.fingers.iter().enumerate() {
        let a = &hp.angles[f];
        let mut frame = RotationMatrix::rot_z(a.abduction);
        let mut pos = finger.base_offset;
        let flexions = [a.mcp_flex, a.pip_flex, a.dip_flex];
        for (b, &len) in finger.bone_lengths.iter().enumerate() {
            pos = pos + frame.apply(Vec3::new(0.0, len, 0.0));
            joints[JOINTS_PER_FINGER * f + b] = pos;
            if b < 3 {
                // flexion curls the chain direction from +y toward -z
                frame = frame.mul(&RotationMatrix::rot_x(-flexions[b]));
            }
        }
    }
    for j in &mut joints {
        *j = hp.wrist_orientation.apply(*j) + hp.wrist_position;
    }
    Ok(HandShape { joints })
}

/// Fingertip positions: the last joint of each chain extended by
/// [`TIP_LENGTH`] along the last bone direction.
pub fn fingertips(hs: &HandShape) -> [Vec3; FINGER_COUNT] {
    let mut tips = [Vec3::ZERO; FINGER_COUNT];
    for (f, tip) in tips.iter_mut().enumerate() {
        let last = hs.joint(f, 3);
        let prev = hs.joint(f, 2);
        let dir = (last - prev)
            .normalized()
            .unwrap_or(Vec3::new(0.0, 1.0, 0.0));
        *tip = last + dir.scale(TIP_LENGTH);
    }
    tips
}

/// Gaussian noise parameters for hand augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Std of the per-axis wrist position noise, cm.
    pub sigma_pos: f64,
    /// Std of the wrist orientation noise angle, radians.
    pub sigma_rot: f64,
    /// Std of the per-joint angle noise, radians.
    pub sigma_angle: f64,
}

impl NoiseParams {
    pub const ZERO: NoiseParams = NoiseParams { sigma_pos: 0.0, sigma_rot: 0.0, sigma_angle: 0.0 };
}

impl Default for NoiseParams {
    /// Emulates noisy upstream hand estimates: 1 cm position noise,
    /// 5 degrees on the wrist orientation and on each joint angle.
    fn default() -> Self {
        NoiseParams {
            sigma_pos: 1.0,
            sigma_rot: 5.0_f64.to_radians(),
            sigma_angle: 5.0_f64.to_radians(),
        }
    }
}

/// Adds Gaussian noise to every parameter of the configuration.
///
/// Wrist position gets independent per-axis noise; the wrist orientation is
/// left-multiplied by a rotation about a uniformly random axis with angle
/// `|N(0, sigma_rot^2)|`; joint angles are perturbed and clamped back into
/// their ranges. Deterministic for a fixed seed.
pub fn perturb_config(hp: &HandConfig, noise: NoiseParams, seed: u64) -> HandConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_config_with(hp, noise, &mut rng)
}

/// [`perturb_config`] driven by a caller-owned generator, for pipelines that
/// thread one RNG through several draws.
pub fn perturb_config_with<R: Rng>(hp: &HandConfig, noise: NoiseParams, rng: &mut R) -> HandConfig {
    let normal = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
    let wrist_position = hp.wrist_position
        + Vec3::new(
            noise.sigma_pos * normal(rng),
            noise.sigma_pos * normal(rng),
            noise.sigma_pos * normal(rng),
        );

    // uniformly random axis from a normalized Gaussian triple
    let axis = loop {
        let v = Vec3::new(normal(rng), normal(rng), normal(rng));
        if let Ok(u) = v.normalized() {
            break u;
        }
    };
    let angle = (noise.sigma_rot * normal(rng)).abs();
    let wrist_orientation = if angle > 0.0 {
        axis_angle_rotation(axis, angle)
            .expect("unit axis")
            .mul(&hp.wrist_orientation)
    } else {
        hp.wrist_orientation
    };

    let mut angles = hp.angles;
    for finger in &mut angles {
        *finger = FingerAngles {
            abduction: finger.abduction + noise.sigma_angle * normal(rng),
            mcp_flex: finger.mcp_flex + noise.sigma_angle * normal(rng),
            pip_flex: finger.pip_flex + noise.sigma_angle * normal(rng),
            dip_flex: finger.dip_flex + noise.sigma_angle * normal(rng),
        }
        .clamped();
    }
    HandConfig { wrist_position, wrist_orientation, angles }
}
