//! Zero-shot peg insertion over a synthetic world.
//!
//! The pipeline mirrors a robot workcell: candidate holes are detected from a
//! depth image and instance masks, a pluggable matcher backend judges
//! peg-hole compatibility with yes/no verdicts and generation probabilities,
//! the hole's SE(2) pose is estimated by canonicalizing the hole image and
//! classifying among four 90-degree rotations, and an Archimedean spiral
//! search absorbs the residual pose error during insertion.
//!
//! Start with the runnable examples (`cargo run --example closed_loop`) or
//! the `pegmate` CLI; the modules below expose each stage individually.
//!
//! - [`geometry`]: rigid transforms, deprojection, polygons, and the
//!   brute-force insertability oracle.
//! - [`worldgen`]: synthetic peg/hole boards with ground truth, rendered to
//!   the scene directory format.
//! - [`detection`]: scene loading, mask-to-cloud lifting, centroid and
//!   height filtering.
//! - [`matcher`]: prompt construction, response parsing, confidence ranking,
//!   and the oracle/remote backends.
//! - [`pose`]: yaw canonicalization, four-rotation classification, and
//!   centroid localization.
//! - [`insertion`]: spiral waypoint generation and compliant-contact
//!   simulation.
//! - [`pipeline`]: the closed-loop orchestrator, experiment harnesses, and
//!   report emission.
//!
//! Supporting modules: [`scene`] (the on-disk scene contract), [`raster`]
//! and [`pgm`] (image buffers and codec), [`config`] (key-value text
//! configuration for the CLI).

pub mod config;
pub mod detection;
pub mod geometry;
pub mod insertion;
pub mod matcher;
pub mod pgm;
pub mod pipeline;
pub mod pose;
pub mod raster;
pub mod scene;
pub mod worldgen;
