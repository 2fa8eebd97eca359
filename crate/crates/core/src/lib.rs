//! Core library for hand-held object pose and shape estimation.
//!
//! The crate is organized around the stages of the estimation problem:
//!
//! - [`geometry`]: rotations, rigid transforms, triangle meshes, surface
//!   sampling and voxel occupancy grids.
//! - [`symmetry`]: category-specific symmetry-invariant orientation
//!   representations, the orientation loss, symmetry orbits and nearest
//!   rotation recovery.
//! - [`hand`]: a simplified 20-DOF hand model with forward kinematics,
//!   fingertip extraction and Gaussian noise augmentation.
//! - [`refine`]: constrained local pose refinement that snaps an object pose
//!   onto the hand's fingertips.
//! - [`metrics`]: ADD / ADD-S / symmetry-aware ADD, accuracy-threshold
//!   curves with AUC, voxel F1 and pose MAE.
//! - [`learning`]: silhouette features, a small fully-connected network with
//!   exact backpropagation, the Siamese contrastive shape embedding, pose
//!   regression heads and nearest-neighbor retrieval.
//! - [`datagen`]: procedural category meshes, grasp priors, camera projection
//!   with hand-occlusion computation, and the synthetic dataset generator.
//! - [`pipeline`]: end-to-end orchestration (training, inference, evaluation
//!   and the hand/no-hand ablation) shared by the CLI and the test suites.
//!
//! All values are immutable after construction and every operation is a pure
//! function of its inputs plus an explicit seed, so pipelines are
//! reproducible bit-for-bit.

pub mod datagen;
mod error;
pub mod geometry;
pub mod hand;
pub mod learning;
pub mod metrics;
pub mod pipeline;
pub mod refine;
pub mod symmetry;

pub use error::{Error, Result};
pub use geometry::{Pose, RotationMatrix, TriangleMesh, Vec3, VoxelGrid};
pub use symmetry::Category;
