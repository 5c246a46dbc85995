use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;

use super::knn::RadialIndex;
use super::metric::{point_distance, Metric};
use crate::sampler::{Layout, SensorGrid};

/// Symmetric weighted graph over the points of a grid, used to compute
/// shortest-path distances on the manifold.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    pub adjacency: Vec<Vec<(u32, f64)>>,
    /// Every pair of points closer than this is joined by an edge.
    pub reach: f64,
    pub metric: Metric,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Graph joining ring neighbours, the nearest points on adjacent rings and
/// all pairs within `2 Δw`.
pub fn build_metric_graph(grid: &SensorGrid) -> MetricGraph {
    build_metric_graph_with(grid, 2.0, Metric::Chord)
}

/// As [`build_metric_graph`], with the all-pairs reach set to
/// `reach_factor · Δw`.
pub fn build_metric_graph_with(grid: &SensorGrid, reach_factor: f64, metric: Metric) -> MetricGraph {
    let reach = reach_factor * grid.delta_w;
    let params = &grid.params;
    let dist = |i: usize, j: usize| point_distance(params, metric, &grid.points[i], &grid.points[j]);
    let mut edges: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut add = |i: usize, j: usize, d: f64| {
        if i != j {
            let key = if i < j { (i as u32, j as u32) } else { (j as u32, i as u32) };
            edges.insert(key, d);
        }
    };

    if grid.layout == Layout::Rings {
        let rings = grid.ring_total();
        for ring in 0..rings {
            let (start, end) = (grid.ring_starts[ring], grid.ring_starts[ring + 1]);
            let count = end - start;
            if count >= 2 {
                for t in 0..count {
                    let (i, j) = (start + t, start + (t + 1) % count);
                    add(i, j, dist(i, j));
                }
            }
            for other in [ring.checked_sub(1), (ring + 1 < rings).then_some(ring + 1)].into_iter().flatten() {
                let (os, oe) = (grid.ring_starts[other], grid.ring_starts[other + 1]);
                for i in start..end {
                    let (j, d) = (os..oe)
                        .map(|j| (j, dist(i, j)))
                        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                        .expect("rings are never empty");
                    add(i, j, d);
                }
            }
        }
    }

    let index = RadialIndex::new(grid);
    let near: Vec<Vec<(u32, f64)>> = grid
        .points
        .par_iter()
        .map(|q| index.within(q, reach, metric))
        .collect();
    for (i, row) in near.into_iter().enumerate() {
        for (j, d) in row {
            add(i, j as usize, d);
        }
    }

    let mut adjacency = vec![Vec::new(); grid.len()];
    for ((i, j), d) in edges {
        adjacency[i as usize].push((j, d));
        adjacency[j as usize].push((i, d));
    }
    MetricGraph {
        adjacency,
        reach,
        metric,
    }
}

impl MetricGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Multi-source Dijkstra; returns the first `limit` settled nodes with
    /// their distances, in settling order.
    pub fn settle_from(&self, seeds: &[(u32, f64)], limit: usize) -> Vec<(u32, f64)> {
        let mut best = vec![f64::INFINITY; self.len()];
        let mut done = vec![false; self.len()];
        let mut heap = BinaryHeap::new();
        for &(i, d) in seeds {
            if d < best[i as usize] {
                best[i as usize] = d;
                heap.push(Reverse(Entry(d, i)));
            }
        }
        let mut out = Vec::with_capacity(limit);
        while let Some(Reverse(Entry(d, i))) = heap.pop() {
            if done[i as usize] {
                continue;
            }
            done[i as usize] = true;
            out.push((i, d));
            if out.len() == limit {
                break;
            }
            for &(j, w) in &self.adjacency[i as usize] {
                let nd = d + w;
                if nd < best[j as usize] {
                    best[j as usize] = nd;
                    heap.push(Reverse(Entry(nd, j)));
                }
            }
        }
        out
    }

    /// Shortest-path distance between two nodes.
    pub fn geodesic(&self, from: usize, to: usize) -> f64 {
        let mut best = vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        best[from] = 0.0;
        heap.push(Reverse(Entry(0.0, from as u32)));
        while let Some(Reverse(Entry(d, i))) = heap.pop() {
            if i as usize == to {
                return d;
            }
            if d > best[i as usize] {
                continue;
            }
            for &(j, w) in &self.adjacency[i as usize] {
                let nd = d + w;
                if nd < best[j as usize] {
                    best[j as usize] = nd;
                    heap.push(Reverse(Entry(nd, j)));
                }
            }
        }
        f64::INFINITY
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.settle_from(&[(0, 0.0)], self.len()).len() == self.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(i, row)| {
            row.iter().all(|&(j, d)| {
                self.adjacency[j as usize]
                    .iter()
                    .any(|&(back, e)| back as usize == i && e.to_bits() == d.to_bits())
            })
        })
    }
}
