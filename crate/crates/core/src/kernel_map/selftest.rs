use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::conv::{apply_knn_conv, KernelBank};
use super::table::{build_kernel_map, KernelMapTable, ReferenceKernelSpec};
use crate::cmf::CmfParams;
use crate::error::{Error, Result};
use crate::neighborhoods::{knn, NeighborhoodSet};
use crate::sampler::{Layout, SensorGrid};

/// Foveation parameter of the near-uniform lattice.
pub const UNIFORM_A: f64 = 1e6;
/// Half-width of the lattice in degrees. Kept small so that `r / a`, the
/// residual non-uniformity of the magnification, stays near 1e-8.
pub const UNIFORM_HALF_WIDTH: f64 = 0.01;

/// Input lattice (with one padding row on each side), output lattice, and
/// the 3×3 tables between them.
pub struct LatticeBundle {
    pub input: SensorGrid,
    pub output: SensorGrid,
    pub nbhd: NeighborhoodSet,
    pub spec: ReferenceKernelSpec,
    pub table: KernelMapTable,
}

pub fn lattice_bundle(side: usize) -> Result<LatticeBundle> {
    let params = CmfParams::new(UNIFORM_A, UNIFORM_HALF_WIDTH)?;
    let input = SensorGrid::lattice(params, side, 1)?;
    let output = SensorGrid::lattice(params, side, 0)?;
    let nbhd = knn(&input, &output, 9)?;
    let spec = ReferenceKernelSpec::new(9, 1, input.delta_w)?;
    let table = build_kernel_map(&nbhd, &spec)?;
    Ok(LatticeBundle {
        input,
        output,
        nbhd,
        spec,
        table,
    })
}

/// Plain zero-padded 3×3 cross-correlation of a `side × side × c_in` image
/// stored row-major from the bottom row. Kernel row index grows with y.
pub fn dense_conv3x3(img: &[f64], side: usize, bank: &KernelBank, bias: &[f64]) -> Vec<f64> {
    let (c_in, c_out) = (bank.c_in, bank.c_out);
    let mut out = vec![0.0; side * side * c_out];
    for row in 0..side {
        for col in 0..side {
            for co in 0..c_out {
                let mut acc = bias[co];
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (r, c) = (row as i64 + dy, col as i64 + dx);
                        if r < 0 || c < 0 || r >= side as i64 || c >= side as i64 {
                            continue;
                        }
                        let tap = ((1 + dy) * 3 + (1 + dx)) as usize;
                        for ci in 0..c_in {
                            let k = bank.values[(co * c_in + ci) * 9 + tap];
                            acc += k * img[(r as usize * side + c as usize) * c_in + ci];
                        }
                    }
                }
                out[(row * side + col) * c_out + co] = acc;
            }
        }
    }
    out
}

/// Scatter a `side × side × c` image onto a padded lattice input grid.
pub fn lattice_signal(input: &SensorGrid, img: &[f64], c: usize) -> Result<Vec<f64>> {
    let Layout::Lattice { side, pad } = input.layout else {
        return Err(Error::invalid("lattice signal needs a lattice grid"));
    };
    let full = side + 2 * pad;
    let mut x = vec![0.0; input.len() * c];
    for row in 0..side {
        for col in 0..side {
            let n = (row + pad) * full + col + pad;
            x[n * c..(n + 1) * c].copy_from_slice(&img[(row * side + col) * c..(row * side + col + 1) * c]);
        }
    }
    Ok(x)
}

/// Largest absolute difference between the kNN convolution on the uniform
/// lattice and a dense 3×3 convolution over `trials` random inputs.
pub fn dense_equivalence(side: usize, c_in: usize, c_out: usize, trials: usize, seed: u64) -> Result<f64> {
    let b = lattice_bundle(side)?;
    lattice_dense_deviation(&b.input, &b.nbhd, &b.table, c_in, c_out, trials, seed)
}

/// Same comparison for precomputed tables over a lattice input grid whose
/// output units are the `side × side` active lattice positions in order.
pub fn lattice_dense_deviation(
    input: &SensorGrid,
    nbhd: &NeighborhoodSet,
    table: &KernelMapTable,
    c_in: usize,
    c_out: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let Layout::Lattice { side, .. } = input.layout else {
        return Err(Error::invalid("dense comparison needs a lattice input grid"));
    };
    if table.s != 3 || nbhd.n_out != side * side {
        return Err(Error::shape(format!(
            "dense comparison needs a 3×3 kernel and {} output units, got s={} and {}",
            side * side,
            table.s,
            nbhd.n_out
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let img: Vec<f64> = (0..side * side * c_in).map(|_| rng.random_range(-1.0..1.0)).collect();
        let kern: Vec<f64> = (0..c_out * c_in * 9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bias: Vec<f64> = (0..c_out).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bank = KernelBank::new(c_out, c_in, 3, kern)?;
        let x = lattice_signal(input, &img, c_in)?;
        let got = apply_knn_conv(table, nbhd, &x, input.len(), c_in, &bank, &bias)?;
        let want = dense_conv3x3(&img, side, &bank, &bias);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    Ok(worst)
}
