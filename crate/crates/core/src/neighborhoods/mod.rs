//! k-nearest neighbourhoods on the sensor manifold.

mod graph;
mod knn;
mod metric;

pub(crate) use knn::RadialIndex;
pub use graph::{build_metric_graph, build_metric_graph_with, MetricGraph};
pub use knn::{coverage, knn, knn_geodesic, knn_with, min_covering_k, CoveringResult, NeighborhoodSet};
pub use metric::{local_manifold_distance, local_manifold_distance_with, Metric};

/// Minimum covering k for 64 patch centres over the 3976-point input grid at
/// `a = 2.79`, 16° field of view. Each input point lands in 1.8 patches on
/// average.
pub const PATCH_K_2_79_64: usize = 112;
