//! Reconstruction of 3D myocardial infarct geometry on 4D cardiac surface meshes.
//!
//! The crate covers the downstream half of a cine-MRI based infarct
//! reconstruction pipeline. It consumes point-correspondent biventricular
//! surface meshes (one surface snapshot per cardiac phase, produced by an
//! upstream mesh-fitting stage), and provides:
//!
//! - [`mesh`] — the 4D mesh data model, manifest I/O and labeled-surface export;
//! - [`scar`] — ground-truth generation: Gaussian Z-densification of sparse
//!   scar points and k-nearest-vertex projection onto the LV endocardium;
//! - [`features`] — explicit per-vertex, per-phase input features: position,
//!   first-order inter-phase motion, and wall thickness;
//! - [`network`] — CMotion2Infarct-Net: per-phase graph message passing, a
//!   two-layer LSTM over the cardiac cycle, multi-head temporal attention,
//!   global spatial pooling and a per-vertex segmentation head, with exact
//!   reverse-mode gradients;
//! - [`training`] — the composite weighted-BCE + Tversky loss, Adam with a
//!   stepped learning-rate schedule, and the training loop;
//! - [`metrics`] — Dice, Recall, average surface distance and Generalized
//!   Dice, with dataset-level aggregation;
//! - [`synth`] — a synthetic 4D-heart generator (contracting two-shell
//!   ellipsoids with hypokinetic, non-thickening patches) for desk-scale
//!   training runs and analytic geometry tests.
//!
//! All numerics are `f64`; every operation is deterministic for a fixed seed.

pub mod error;
pub mod features;
pub mod kdtree;
pub mod mesh;
pub mod metrics;
pub mod network;
pub mod scar;
pub mod synth;
pub mod training;

pub(crate) mod vec3;

pub use error::{Error, Result};
