//! Procedural forest simulator and evaluation engine for tree detection datasets.
//!
//! The crate is organised bottom-up:
//!
//! * [`terrain`]: seeded fractal heightfields with moss/roots/mud ground classes.
//! * [`forest`]: spawn-rule tree placement, understorey props, tree meshes and
//!   the five felling keypoints.
//! * [`render`]: a deterministic software rasterizer producing RGB, metric depth
//!   and instance-id buffers under time-of-day and weather presets.
//! * [`annotate`]: boxes, run-length masks and keypoints for trees near the camera.
//! * [`dataset`]: COCO documents, scene-atomic splits and prediction files.
//! * [`eval`]: COCO-style AP for boxes, masks and keypoints plus keypoint
//!   pixel-error statistics.
//! * [`pipeline`]: the end-to-end dataset generator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotate;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forest;
pub mod geom;
pub mod pipeline;
pub mod render;
pub mod seed;
pub mod terrain;

pub use annotate::{Annotation, Keypoint, Rle};
pub use dataset::{CocoDocument, DatasetManifest, DetectionResult, Split};
pub use error::{Error, Result};
pub use eval::{EvalReport, Task};
pub use forest::{PropInstance, SpawnRules, SpeciesTable, TreeInstance};
pub use geom::Vec3;
pub use pipeline::GenerateConfig;
pub use render::{CameraPose, Conditions, FrameBundle, Scene};
pub use terrain::TerrainGrid;

/// Version string recorded in dataset manifests.
pub const GENERATOR_VERSION: &str = concat!("sylvangen ", env!("CARGO_PKG_VERSION"));
