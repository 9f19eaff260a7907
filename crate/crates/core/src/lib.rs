//! Harmonize heterogeneously labelled indoor point clouds under one 20-class
//! public-safety schema, write them as SemanticKITTI sequences, and measure
//! them: label distributions, scene geometry and segmentation metrics.
//!
//! Module map:
//! - [`model`]: points, class ids, sequence ids, the unified class table
//! - [`io`]: source parsers and the SemanticKITTI binary pair
//! - [`remap`]: per-source label tables
//! - [`dataset`]: folder layout, split configurations, distributions, training manifest
//! - [`geometry`]: k-d tree and per-scene geometric metrics
//! - [`eval`]: confusion matrix, IoU and accuracy
//!
//! Inner loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise; results are identical either way.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod model;
pub mod par;
pub mod remap;
pub mod synth;

pub use error::{Error, ErrorFamily, Result};
pub use model::{
    unified_schema, ClassId, LabelSchema, LabeledCloud, Point3, SequenceId, CLASS_NAMES,
    NUM_CLASSES,
};
