//! Scene geometry: point density, nearest-neighbour spacing, height and
//! surface-variation curvature, plus pooled histograms across sequences.

mod eigen;
mod histogram;
mod kdtree;
mod metrics;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use eigen::{covariance, det3, surface_variation, symmetric_eigenvalues, Sym3};
pub use histogram::{Bin, Histogram};
pub use kdtree::{dist2, KdTree, Neighbor, LEAF_SIZE};
pub use metrics::{
    build_index, mean_curvature, mean_nn_distance, nn_distances, point_curvatures, point_density,
    scene_height, summarize_cloud, GeometricSummary, SpatialIndex, AREA_DEFINITION,
    CURVATURE_DEFINITION, DEFAULT_K,
};

use crate::dataset::list_frames;
use crate::error::Result;
use crate::io::{read_skitti_scan_with, LabelPolicy};
use crate::model::{LabeledCloud, SequenceId};
use crate::par;

pub const DEFAULT_BINS: usize = 50;

pub const METRICS: [&str; 4] = [
    "density",
    "mean_nn_distance",
    "scene_height",
    "mean_curvature",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceGeometry {
    pub sequence: SequenceId,
    #[serde(flatten)]
    pub summary: GeometricSummary,
}

impl SequenceGeometry {
    /// One JSON object, as written to the per-sequence report.
    pub fn to_json(&self) -> serde_json::Value {
        let s = &self.summary;
        serde_json::json!({
            "sequence": self.sequence,
            "points": s.points,
            "density": s.density,
            "mean_nn_distance": s.mean_nn_distance,
            "scene_height": s.scene_height,
            "mean_curvature": s.mean_curvature,
            "k": s.k,
            "area_definition": AREA_DEFINITION,
            "curvature_definition": CURVATURE_DEFINITION,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub sequences: Vec<SequenceGeometry>,
    /// One pooled histogram per entry of [`METRICS`], in that order.
    pub histograms: Vec<(String, Histogram)>,
}

impl GeometryReport {
    pub fn histogram(&self, metric: &str) -> Option<&Histogram> {
        self.histograms
            .iter()
            .find(|(m, _)| m == metric)
            .map(|(_, h)| h)
    }

    /// Per-sequence JSON lines.
    pub fn to_jsonl(&self) -> String {
        self.sequences
            .iter()
            .map(|s| s.to_json().to_string() + "\n")
            .collect()
    }
}

/// All frames of `seq`, concatenated in frame order.
pub fn load_sequence_cloud(
    root: &Path,
    seq: SequenceId,
    policy: LabelPolicy,
) -> Result<LabeledCloud> {
    let mut cloud = LabeledCloud::default();
    for f in list_frames(root, seq)? {
        cloud.extend(read_skitti_scan_with(&f.scan, &f.label, policy)?.cloud);
    }
    Ok(cloud)
}

pub fn summarize_geometry(
    root: &Path,
    seqs: impl IntoIterator<Item = SequenceId>,
    bins: usize,
    k: usize,
    policy: LabelPolicy,
) -> Result<GeometryReport> {
    let seqs: Vec<SequenceId> = seqs
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let per_seq = par::map(&seqs, |&seq| -> Result<SequenceGeometry> {
        let cloud = load_sequence_cloud(root, seq, policy)?;
        Ok(SequenceGeometry {
            sequence: seq,
            summary: summarize_cloud(&cloud, k)?,
        })
    });
    let sequences = per_seq.into_iter().collect::<Result<Vec<_>>>()?;

    let column = |f: fn(&GeometricSummary) -> Option<f64>| -> Vec<f64> {
        sequences.iter().filter_map(|s| f(&s.summary)).collect()
    };
    let columns: [Vec<f64>; 4] = [
        column(|s| s.density),
        column(|s| s.mean_nn_distance),
        column(|s| Some(s.scene_height)),
        column(|s| s.mean_curvature),
    ];
    let histograms = METRICS
        .iter()
        .zip(columns)
        .map(|(m, v)| (m.to_string(), Histogram::equal_width(&v, bins)))
        .collect();

    Ok(GeometryReport {
        sequences,
        histograms,
    })
}
