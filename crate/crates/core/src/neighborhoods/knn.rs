use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::MetricGraph;
use super::metric::{point_distance, Metric};
use crate::error::{Error, Result};
use crate::sampler::{SensorGrid, SensorPoint};

/// Per-output-unit neighbourhoods, stored row-major (`n_out × k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSet {
    pub input_id: String,
    pub output_id: String,
    pub n_out: usize,
    pub k: usize,
    pub indices: Vec<u32>,
    /// Manifold distance of each neighbour from its output unit.
    pub dists: Vec<f32>,
    /// Visual polar angle of each neighbour about its output unit, `(-π, π]`.
    pub thetas: Vec<f32>,
}

impl NeighborhoodSet {
    pub fn row(&self, j: usize) -> &[u32] {
        &self.indices[j * self.k..(j + 1) * self.k]
    }

    pub fn row_dists(&self, j: usize) -> &[f32] {
        &self.dists[j * self.k..(j + 1) * self.k]
    }

    pub fn row_thetas(&self, j: usize) -> &[f32] {
        &self.thetas[j * self.k..(j + 1) * self.k]
    }

    /// Keep only the first `k` slots of every row.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k {
            return Err(Error::invalid(format!("cannot truncate k={} to {k}", self.k)));
        }
        Ok(Self {
            input_id: self.input_id.clone(),
            output_id: self.output_id.clone(),
            n_out: self.n_out,
            k,
            indices: prefix_rows(&self.indices, self.n_out, self.k, k),
            dists: prefix_rows(&self.dists, self.n_out, self.k, k),
            thetas: prefix_rows(&self.thetas, self.n_out, self.k, k),
        })
    }
}

fn prefix_rows<T: Copy>(v: &[T], rows: usize, width: usize, keep: usize) -> Vec<T> {
    (0..rows)
        .flat_map(|j| v[j * width..j * width + keep].iter().copied())
        .collect()
}

/// Candidate ordered by `(distance, ring, index)`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f64,
    ring: u32,
    index: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.ring.cmp(&other.ring))
            .then(self.index.cmp(&other.index))
    }
}

/// Input points sorted by cortical radius. Every metric here is bounded below
/// by `|Δw|`, so a query can stop scanning once that bound exceeds its
/// current k-th distance.
pub(crate) struct RadialIndex<'a> {
    grid: &'a SensorGrid,
    order: Vec<u32>,
    ws: Vec<f64>,
}

impl<'a> RadialIndex<'a> {
    pub(crate) fn new(grid: &'a SensorGrid) -> Self {
        let mut order: Vec<u32> = (0..grid.len() as u32).collect();
        order.sort_by(|&i, &j| {
            grid.points[i as usize]
                .w
                .total_cmp(&grid.points[j as usize].w)
                .then(i.cmp(&j))
        });
        let ws = order.iter().map(|&i| grid.points[i as usize].w).collect();
        Self { grid, order, ws }
    }

    /// The `k` nearest input points to `q`, sorted.
    fn nearest(&self, q: &SensorPoint, k: usize, metric: Metric) -> Vec<Candidate> {
        let params = &self.grid.params;
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let start = self.ws.partition_point(|&w| w < q.w);
        let (mut left, mut right) = (start, start);
        loop {
            let gap_l = if left > 0 { q.w - self.ws[left - 1] } else { f64::INFINITY };
            let gap_r = if right < self.ws.len() { self.ws[right] - q.w } else { f64::INFINITY };
            let (gap, pos) = if gap_l <= gap_r {
                if gap_l.is_infinite() {
                    break;
                }
                left -= 1;
                (gap_l, left)
            } else {
                right += 1;
                (gap_r, right - 1)
            };
            if heap.len() == k && gap > heap.peek().map_or(f64::INFINITY, |c| c.dist) {
                break;
            }
            let index = self.order[pos];
            let p = &self.grid.points[index as usize];
            let cand = Candidate {
                dist: point_distance(params, metric, q, p),
                ring: p.ring,
                index,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if cand < *heap.peek().unwrap() {
                heap.pop();
                heap.push(cand);
            }
        }
        heap.into_sorted_vec()
    }

    /// Indices of the `k` nearest points to `q`, nearest first.
    pub(crate) fn nearest_indices(&self, q: &SensorPoint, k: usize, metric: Metric) -> Vec<u32> {
        self.nearest(q, k, metric).into_iter().map(|c| c.index).collect()
    }

    /// Every input point within `radius` of `q`, unsorted.
    pub(crate) fn within(&self, q: &SensorPoint, radius: f64, metric: Metric) -> Vec<(u32, f64)> {
        let params = &self.grid.params;
        let lo = self.ws.partition_point(|&w| w < q.w - radius);
        let hi = self.ws.partition_point(|&w| w <= q.w + radius);
        (lo..hi)
            .filter_map(|pos| {
                let index = self.order[pos];
                let d = point_distance(params, metric, q, &self.grid.points[index as usize]);
                (d <= radius).then_some((index, d))
            })
            .collect()
    }
}

fn check_compatible(input: &SensorGrid, output: &SensorGrid, k: usize) -> Result<()> {
    let (a, b) = (&input.params, &output.params);
    if a.a.to_bits() != b.a.to_bits() || a.r_max.to_bits() != b.r_max.to_bits() {
        return Err(Error::invalid(format!(
            "input (a={}, r_max={}) and output (a={}, r_max={}) grids differ",
            a.a, a.r_max, b.a, b.r_max
        )));
    }
    if k == 0 || k > input.len() {
        return Err(Error::invalid(format!("k={k} must lie in [1, {}]", input.len())));
    }
    Ok(())
}

fn assemble(input: &SensorGrid, output: &SensorGrid, k: usize, rows: Vec<Vec<Candidate>>) -> NeighborhoodSet {
    let n_out = output.len();
    let mut indices = Vec::with_capacity(n_out * k);
    let mut dists = Vec::with_capacity(n_out * k);
    let mut thetas = Vec::with_capacity(n_out * k);
    for (q, row) in output.points.iter().zip(rows) {
        for c in row {
            let p = &input.points[c.index as usize];
            indices.push(c.index);
            dists.push(c.dist as f32);
            thetas.push((p.y - q.y).atan2(p.x - q.x) as f32);
        }
    }
    NeighborhoodSet {
        input_id: input.fingerprint(),
        output_id: output.fingerprint(),
        n_out,
        k,
        indices,
        dists,
        thetas,
    }
}

/// The `k` nearest input points of every output unit under the default metric.
pub fn knn(input: &SensorGrid, output: &SensorGrid, k: usize) -> Result<NeighborhoodSet> {
    knn_with(input, output, k, Metric::Chord)
}

pub fn knn_with(input: &SensorGrid, output: &SensorGrid, k: usize, metric: Metric) -> Result<NeighborhoodSet> {
    check_compatible(input, output, k)?;
    let index = RadialIndex::new(input);
    let rows: Vec<Vec<Candidate>> = output
        .points
        .par_iter()
        .map(|q| index.nearest(q, k, metric))
        .collect();
    Ok(assemble(input, output, k, rows))
}

/// kNN by shortest paths on `graph` (built over `input`). Each output unit is
/// attached to the input points within `graph.reach` of it.
pub fn knn_geodesic(input: &SensorGrid, graph: &MetricGraph, output: &SensorGrid, k: usize) -> Result<NeighborhoodSet> {
    check_compatible(input, output, k)?;
    if graph.len() != input.len() {
        return Err(Error::shape(format!(
            "graph has {} nodes, input grid {} points",
            graph.len(),
            input.len()
        )));
    }
    let index = RadialIndex::new(input);
    let rows: Vec<Vec<Candidate>> = output
        .points
        .par_iter()
        .map(|q| {
            let mut seeds = index.within(q, graph.reach, graph.metric);
            if seeds.is_empty() {
                seeds = index
                    .nearest(q, 1, graph.metric)
                    .into_iter()
                    .map(|c| (c.index, c.dist))
                    .collect();
            }
            graph
                .settle_from(&seeds, k)
                .into_iter()
                .map(|(i, d)| Candidate {
                    dist: d,
                    ring: input.points[i as usize].ring,
                    index: i,
                })
                .collect::<Vec<_>>()
        })
        .map(|mut row: Vec<Candidate>| {
            row.sort();
            row
        })
        .collect();
    Ok(assemble(input, output, k, rows))
}

/// Fraction of non-padding input points that appear in at least one row.
pub fn coverage(input: &SensorGrid, nbhd: &NeighborhoodSet) -> f64 {
    let mut seen = vec![false; input.len()];
    for &i in &nbhd.indices {
        seen[i as usize] = true;
    }
    let covered = input.active_indices().filter(|&i| seen[i]).count();
    covered as f64 / input.n_active.max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub k: usize,
    /// `n_out · k / n_active`: how many times each input point is used on average.
    pub overlap: f64,
    /// Coverage at `k - 1` (1.0 only when `k == 1`).
    pub coverage_below: f64,
}

/// Smallest `k` for which the union of the output kNNs contains every
/// non-padding input point. Doubling search, then bisection on row prefixes.
pub fn min_covering_k(input: &SensorGrid, output: &SensorGrid) -> Result<CoveringResult> {
    check_compatible(input, output, 1)?;
    let covers = |nb: &NeighborhoodSet, k: usize| -> bool {
        let mut seen = vec![false; input.len()];
        for j in 0..nb.n_out {
            for &i in &nb.row(j)[..k] {
                seen[i as usize] = true;
            }
        }
        input.active_indices().all(|i| seen[i])
    };
    let mut hi = 1;
    let full = loop {
        let nb = knn(input, output, hi)?;
        if covers(&nb, hi) {
            break nb;
        }
        if hi == input.len() {
            return Err(Error::domain("output grid cannot cover the input at any k"));
        }
        hi = (hi * 2).min(input.len());
    };
    let mut lo = hi / 2; // known not to cover (or zero)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if covers(&full, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let coverage_below = if hi == 1 { 1.0 } else { coverage(input, &full.truncate(hi - 1)?) };
    Ok(CoveringResult {
        k: hi,
        overlap: (output.len() * hi) as f64 / input.n_active as f64,
        coverage_below,
    })
}
