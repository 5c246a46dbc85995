use rayon::prelude::*;

use super::table::KernelMapTable;
use crate::error::{Error, Result};
use crate::neighborhoods::NeighborhoodSet;

/// Reference kernels for every output/input channel pair, `c_out × c_in × s × s`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBank {
    pub c_out: usize,
    pub c_in: usize,
    pub s: usize,
    pub values: Vec<f64>,
}

impl KernelBank {
    pub fn new(c_out: usize, c_in: usize, s: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != c_out * c_in * s * s {
            return Err(Error::shape(format!(
                "kernel bank has {} values, expected {c_out}×{c_in}×{s}×{s}",
                values.len()
            )));
        }
        Ok(Self { c_out, c_in, s, values })
    }

    fn kernel(&self, co: usize, ci: usize) -> &[f64] {
        let n = self.s * self.s;
        let o = (co * self.c_in + ci) * n;
        &self.values[o..o + n]
    }
}

fn check_shapes(table: &KernelMapTable, nbhd: &NeighborhoodSet, n_in: usize, c_in: usize, x: &[f64], bank: &KernelBank, bias: &[f64]) -> Result<()> {
    if table.n_out != nbhd.n_out || table.k != nbhd.k {
        return Err(Error::shape(format!(
            "table is {}×{} but neighbourhoods are {}×{}",
            table.n_out, table.k, nbhd.n_out, nbhd.k
        )));
    }
    if bank.s != table.s || bank.c_in != c_in {
        return Err(Error::shape(format!(
            "kernel bank is {}×{}×{s}×{s}, table needs s={} and c_in={c_in}",
            bank.c_out,
            bank.c_in,
            table.s,
            s = bank.s
        )));
    }
    if x.len() != n_in * c_in {
        return Err(Error::shape(format!("input has {} values, expected {n_in}×{c_in}", x.len())));
    }
    if bias.len() != bank.c_out {
        return Err(Error::shape(format!("bias has {} values, expected {}", bias.len(), bank.c_out)));
    }
    if let Some(&bad) = nbhd.indices.iter().find(|&&i| i as usize >= n_in) {
        return Err(Error::shape(format!("neighbour index {bad} exceeds input size {n_in}")));
    }
    Ok(())
}

/// Mapped weights `W[j, i, co, ci]`: each reference kernel gathered through
/// the table, laid out `n_out × k × c_out × c_in`.
pub fn mapped_weights(table: &KernelMapTable, bank: &KernelBank) -> Vec<f64> {
    let per_slot = bank.c_out * bank.c_in;
    let mut out = vec![0.0; table.n_out * table.k * per_slot];
    out.par_chunks_mut(table.k * per_slot).enumerate().for_each(|(j, row)| {
        for i in 0..table.k {
            let (idx, w) = table.slot(j, i);
            for co in 0..bank.c_out {
                for ci in 0..bank.c_in {
                    let kern = bank.kernel(co, ci);
                    row[i * per_slot + co * bank.c_in + ci] =
                        idx.iter().zip(w).map(|(&q, &w)| w as f64 * kern[q as usize]).sum();
                }
            }
        }
    });
    out
}

/// kNN convolution: `out[j, co] = bias[co] + Σ_i Σ_ci W[j, i, co, ci] x[n(j, i), ci]`.
///
/// `x` holds `n_in × c_in` values; padding inputs must already be zero.
/// Returns `n_out × c_out` values.
pub fn apply_knn_conv(table: &KernelMapTable, nbhd: &NeighborhoodSet, x: &[f64], n_in: usize, c_in: usize, bank: &KernelBank, bias: &[f64]) -> Result<Vec<f64>> {
    check_shapes(table, nbhd, n_in, c_in, x, bank, bias)?;
    let c_out = bank.c_out;
    let mut out = vec![0.0; table.n_out * c_out];
    out.par_chunks_mut(c_out).enumerate().for_each(|(j, o)| {
        o.copy_from_slice(bias);
        for (i, &n) in nbhd.row(j).iter().enumerate() {
            let (idx, w) = table.slot(j, i);
            let xs = &x[n as usize * c_in..(n as usize + 1) * c_in];
            for (co, acc) in o.iter_mut().enumerate() {
                for (ci, &xv) in xs.iter().enumerate() {
                    let kern = bank.kernel(co, ci);
                    let wv: f64 = idx.iter().zip(w).map(|(&q, &w)| w as f64 * kern[q as usize]).sum();
                    *acc += wv * xv;
                }
            }
        }
    });
    Ok(out)
}
