use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LabeledCloud;
use crate::par;

use super::eigen::{covariance, surface_variation};
use super::kdtree::KdTree;

pub const DEFAULT_K: usize = 16;
pub const AREA_DEFINITION: &str = "xy-bounding-box";
pub const CURVATURE_DEFINITION: &str = "surface-variation";

/// Exact spatial index over a cloud's coordinates.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    tree: KdTree,
}

impl SpatialIndex {
    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }
}

pub fn build_index(cloud: &LabeledCloud) -> Result<SpatialIndex> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(SpatialIndex {
        tree: KdTree::new(cloud.points().iter().map(|p| p.xyz_f64()).collect()),
    })
}

fn bounds(cloud: &LabeledCloud) -> Option<([f64; 3], [f64; 3])> {
    let mut it = cloud.points().iter().map(|p| p.xyz_f64());
    let first = it.next()?;
    Some(it.fold((first, first), |(mut lo, mut hi), p| {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
        (lo, hi)
    }))
}

/// Points per square meter of the XY bounding box.
pub fn point_density(cloud: &LabeledCloud) -> Result<f64> {
    let (lo, hi) = bounds(cloud).ok_or(Error::EmptyCloud)?;
    let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    if area <= 0.0 {
        return Err(Error::DegenerateFootprint);
    }
    Ok(cloud.len() as f64 / area)
}

/// `max z - min z`; zero for an empty cloud.
pub fn scene_height(cloud: &LabeledCloud) -> f64 {
    bounds(cloud).map_or(0.0, |(lo, hi)| hi[2] - lo[2])
}

/// Distance from each point to its nearest other point, in point order.
pub fn nn_distances(index: &SpatialIndex) -> Result<Vec<f64>> {
    let n = index.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            actual: n,
        });
    }
    let tree = &index.tree;
    Ok(par::map_range(n, |i| tree.knn_of(i, 1)[0].distance))
}

pub fn mean_nn_distance(index: &SpatialIndex) -> Result<f64> {
    let d = nn_distances(index)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Per-point surface variation over each point and its `k` nearest other points.
pub fn point_curvatures(index: &SpatialIndex, k: usize) -> Result<Vec<f64>> {
    let n = index.len();
    if n < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            actual: n,
        });
    }
    let tree = &index.tree;
    let pts = tree.points();
    let k = k.min(n - 1);
    Ok(par::map_range(n, |i| {
        let nbrs = tree.knn_of(i, k);
        let hood = std::iter::once(pts[i]).chain(nbrs.iter().map(|nb| pts[nb.index]));
        surface_variation(&covariance(hood))
    }))
}

pub fn mean_curvature(index: &SpatialIndex, k: usize) -> Result<f64> {
    let c = point_curvatures(index, k)?;
    Ok(c.iter().sum::<f64>() / c.len() as f64)
}

/// Scene-level geometry of one cloud. Metrics that are undefined for the
/// cloud (degenerate footprint, too few points) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub points: usize,
    pub density: Option<f64>,
    pub mean_nn_distance: Option<f64>,
    pub scene_height: f64,
    pub mean_curvature: Option<f64>,
    pub k: usize,
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateFootprint | Error::TooFewPoints { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn summarize_cloud(cloud: &LabeledCloud, k: usize) -> Result<GeometricSummary> {
    let index = build_index(cloud)?;
    Ok(GeometricSummary {
        points: cloud.len(),
        density: defined(point_density(cloud))?,
        mean_nn_distance: defined(mean_nn_distance(&index))?,
        scene_height: scene_height(cloud),
        mean_curvature: defined(mean_curvature(&index, k))?,
        k,
    })
}
