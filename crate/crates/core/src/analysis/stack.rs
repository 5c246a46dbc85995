use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmf::CmfParams;
use crate::error::{Error, Result};
use crate::neighborhoods::{knn, NeighborhoodSet};
use crate::sampler::{default_pad_rings, search_resolution, GridOptions, IsotropyRule, SensorGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum LayerOp {
    Conv { k: usize, stride: usize },
    Pool { k: usize, stride: usize },
}

impl LayerOp {
    pub fn k(&self) -> usize {
        match *self {
            Self::Conv { k, .. } | Self::Pool { k, .. } => k,
        }
    }

    pub fn stride(&self) -> usize {
        match *self {
            Self::Conv { stride, .. } | Self::Pool { stride, .. } => stride,
        }
    }
}

/// One processing layer: its output grid and the neighbourhoods each of its
/// units reads from the layer below.
#[derive(Debug, Clone)]
pub struct Layer {
    pub op: LayerOp,
    pub grid: SensorGrid,
    pub nbhd: NeighborhoodSet,
}

/// Input grid plus processing layers, bottom to top. Layer index 0 is the
/// input, layer `ℓ ≥ 1` is `layers[ℓ - 1]`.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub input: SensorGrid,
    pub layers: Vec<Layer>,
}

impl LayerStack {
    /// Layer `ℓ` targets `round(n_{ℓ-1} / stride²)` active points with the
    /// same foveation. Every grid carries padding deep enough for the layer
    /// that reads it.
    pub fn build(params: CmfParams, n_input: usize, ops: &[LayerOp]) -> Result<Self> {
        if ops.iter().any(|op| op.k() == 0 || op.stride() == 0) {
            return Err(Error::invalid("layer k and stride must be positive"));
        }
        let rule = IsotropyRule::FiniteDifference;
        let grid_with = |target: usize, reader_k: Option<usize>| -> Result<SensorGrid> {
            let n_r = search_resolution(&params, target, rule)?.n_r;
            let opts = GridOptions {
                pad_rings: reader_k.map_or(0, default_pad_rings),
                ..Default::default()
            };
            SensorGrid::build(params, n_r, opts)
        };
        let input = grid_with(n_input, ops.first().map(LayerOp::k))?;
        let mut layers: Vec<Layer> = Vec::with_capacity(ops.len());
        for (i, op) in ops.iter().enumerate() {
            let below = layers.last().map_or(&input, |l| &l.grid);
            let target = (below.n_active as f64 / (op.stride() * op.stride()) as f64).round() as usize;
            let grid = grid_with(target, ops.get(i + 1).map(LayerOp::k))?;
            let nbhd = knn(below, &grid, op.k())?;
            layers.push(Layer { op: *op, grid, nbhd });
        }
        Self::from_parts(input, layers)
    }

    /// Assemble a stack from precomputed layers, checking that every
    /// neighbourhood set joins the grids it sits between.
    pub fn from_parts(input: SensorGrid, layers: Vec<Layer>) -> Result<Self> {
        let mut below = input.fingerprint();
        for (i, layer) in layers.iter().enumerate() {
            let out = layer.grid.fingerprint();
            if layer.nbhd.input_id != below || layer.nbhd.output_id != out || layer.nbhd.n_out != layer.grid.len() {
                return Err(Error::invalid(format!("layer {} neighbourhoods do not join its grids", i + 1)));
            }
            below = out;
        }
        Ok(Self { input, layers })
    }

    /// Number of layers including the input.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn grid(&self, layer: usize) -> &SensorGrid {
        if layer == 0 {
            &self.input
        } else {
            &self.layers[layer - 1].grid
        }
    }
}

/// Input points feeding one unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfTrace {
    /// Sorted, padding excluded.
    pub points: Vec<u32>,
    /// Whether any padding unit was met on the way down.
    pub touches_padding: bool,
}

/// Back-project unit `unit` of layer `layer` to the input. Padding units are
/// recorded when reached but not expanded further, since their activation
/// is always zero.
pub fn rf_backproject(stack: &LayerStack, layer: usize, unit: usize) -> Result<RfTrace> {
    if layer >= stack.depth() {
        return Err(Error::invalid(format!("layer {layer} out of range (depth {})", stack.depth())));
    }
    let grid = stack.grid(layer);
    if unit >= grid.len() {
        return Err(Error::invalid(format!("unit {unit} out of range for layer {layer}")));
    }
    let mut frontier = vec![unit as u32];
    let mut touches_padding = grid.points[unit].is_padding;
    for l in (1..=layer).rev() {
        let above = stack.grid(l);
        let below = stack.grid(l - 1);
        let nbhd = &stack.layers[l - 1].nbhd;
        let mut mark = vec![false; below.len()];
        for &u in &frontier {
            if above.points[u as usize].is_padding {
                continue;
            }
            for &i in nbhd.row(u as usize) {
                mark[i as usize] = true;
            }
        }
        frontier = mark.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i as u32).collect();
        touches_padding |= frontier.iter().any(|&i| below.points[i as usize].is_padding);
    }
    frontier.retain(|&i| !stack.input.points[i as usize].is_padding);
    Ok(RfTrace {
        points: frontier,
        touches_padding,
    })
}

/// Reachability of every unit of layer `to` into layer `from < to`, padding
/// units not expanded. Row `u` is sorted.
pub fn reachability(stack: &LayerStack, from: usize, to: usize) -> Result<Vec<Vec<u32>>> {
    if from >= to || to >= stack.depth() {
        return Err(Error::invalid(format!("need from < to < {}, got {from}..{to}", stack.depth())));
    }
    let top = stack.grid(to);
    (0..top.len())
        .into_par_iter()
        .map(|u| {
            let mut frontier = vec![u as u32];
            for l in (from + 1..=to).rev() {
                let above = stack.grid(l);
                let nbhd = &stack.layers[l - 1].nbhd;
                let mut next: Vec<u32> = frontier
                    .iter()
                    .filter(|&&v| !above.points[v as usize].is_padding)
                    .flat_map(|&v| nbhd.row(v as usize).iter().copied())
                    .collect();
                next.sort_unstable();
                next.dedup();
                frontier = next;
            }
            Ok(frontier)
        })
        .collect()
}
