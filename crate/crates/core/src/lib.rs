//! Toolkit for generating labeled actionable-grasp datasets on articulated
//! objects, densifying sparse grasp labels into per-point heatmaps, training
//! a grasp-likelihood scorer with Siamese contrastive pretraining, and
//! proposing ranked 6-DoF grasps from partial point clouds.
//!
//! Module layout mirrors the pipeline stages:
//!
//! - [`geom`] — point-cloud primitives (neighbor queries, FPS, normals).
//! - [`object`] — articulated objects, forward kinematics, procedural assets.
//! - [`render`] — viewpoint sampling, ray-cast partial clouds, correspondences.
//! - [`sampler`] — semantic- and geometry-aware grasp candidate sampling.
//! - [`sim`] — quasi-static grasp-episode simulator that labels candidates.
//! - [`heatmap`] — sparse label to dense pseudo-ground-truth densification.
//! - [`learn`] — per-point encoder, losses, optimizer, two-stage training.
//! - [`propose`] — score ranking plus orientation transfer into final grasps.
//! - [`pipeline`] — dataset manifests and the end-to-end commands behind the CLI.

pub mod error;
pub mod geom;
pub mod heatmap;
pub mod learn;
pub mod object;
pub mod pipeline;
pub mod propose;
pub mod render;
pub mod sampler;
pub mod sim;

pub use error::{Error, Result};
