//! Detection and localization of UI display issues in app screenshots.
//!
//! The pipeline has five pieces, each usable on its own:
//!
//! - [`synth`] parses view hierarchies and injects five categories of display
//!   issues (component occlusion, text overlap, missing image, null value,
//!   blurred screen) into clean screenshots, producing labeled datasets.
//! - [`nn`] is a small dense numeric core: conv / batchnorm / relu / maxpool /
//!   fully-connected layers with hand-derived gradients, all verified against
//!   a finite-difference oracle.
//! - [`model`] assembles those layers into a binary screenshot classifier,
//!   trains it, evaluates precision/recall/F1, and round-trips checkpoints.
//! - [`localize`] produces Grad-CAM heatmaps, bug bounding boxes, and overlay
//!   renderings from a trained model.
//! - [`explore`] walks simulated app screen-graphs (DFS / BFS / random) to
//!   collect screenshots, and [`report`] turns batch detection runs into JSON
//!   and HTML reports.
//!
//! Start with the runnable programs under `examples/` — there is one per
//! capability — or the `owleyes` binary for the same flows as subcommands.
//! Everything stochastic is seeded; identical inputs and seeds give
//! byte-identical outputs.

pub mod demo;
pub mod error;
pub mod explore;
pub mod geom;
pub mod localize;
pub mod model;
pub mod nn;
pub mod raster;
pub mod report;
pub mod rng;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use geom::Rect;
pub use tensor::{Scalar, Tensor4};

/// Version string stamped into manifests, checkpoints and reports.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Worker-thread cap from the `OWLEYES_THREADS` environment variable
/// (unset or `0` = automatic).
pub fn configured_threads() -> usize {
    std::env::var("OWLEYES_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0)
}
