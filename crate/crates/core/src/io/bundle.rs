//! Kernel-table bundles and the reference forward-pass outputs exported
//! alongside them.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::artifacts::{check_header, grid_from_manifest, grid_manifest, read_json, write_json, GridManifest, FORMAT_VERSION};
use super::blob::{decode_f32, decode_u32, encode_f32, encode_u32, read_blob, sha256_hex, write_blob, BlobRef, Dtype};
use crate::cmf::CmfParams;
use crate::error::{Error, Result};
use crate::kernel_map::{apply_knn_conv, KernelBank, KernelMapTable, ReferenceKernelSpec};
use crate::neighborhoods::{CoveringResult, Metric, NeighborhoodSet};
use crate::sampler::SensorGrid;

pub const BUNDLE_FORMAT: &str = "foveakit-bundle";
pub const REFERENCE_FORMAT: &str = "foveakit-reference";
pub const BUNDLE_MANIFEST: &str = "manifest.json";
pub const REFERENCE_MANIFEST: &str = "reference.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodBlobs {
    pub input_id: String,
    pub output_id: String,
    pub n_out: usize,
    pub k: usize,
    /// `u32 [n_out, k]`
    pub indices: BlobRef,
    /// `f32 [n_out, k]`
    pub dists: BlobRef,
    /// `f32 [n_out, k]`
    pub thetas: BlobRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableBlobs {
    pub s: usize,
    /// `u32 [n_out, k, 4]`
    pub indices: BlobRef,
    /// `f32 [n_out, k, 4]`
    pub weights: BlobRef,
    /// `u8 [n_out, k]`
    pub out_of_extent: BlobRef,
}

/// How a bundle was produced. Carries no timestamps so that re-running the
/// same command reproduces the manifest byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub metric: Metric,
    pub covering: Option<CoveringResult>,
    pub seed: Option<u64>,
    pub created_by: String,
}

impl Default for BundleMeta {
    fn default() -> Self {
        Self {
            metric: Metric::default(),
            covering: None,
            seed: None,
            created_by: format!("foveakit {}", env!("CARGO_PKG_VERSION")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format: String,
    pub version: u32,
    pub params: CmfParams,
    pub input: GridManifest,
    pub output: GridManifest,
    pub kernel: ReferenceKernelSpec,
    pub neighborhoods: NeighborhoodBlobs,
    pub table: TableBlobs,
    #[serde(flatten)]
    pub meta: BundleMeta,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub manifest: BundleManifest,
    /// SHA-256 of the manifest file as stored.
    pub manifest_sha256: String,
    pub input: SensorGrid,
    pub output: SensorGrid,
    pub nbhd: NeighborhoodSet,
    pub table: KernelMapTable,
}

fn check_join(input: &SensorGrid, output: &SensorGrid, nbhd: &NeighborhoodSet, spec: &ReferenceKernelSpec, table: &KernelMapTable) -> Result<()> {
    if nbhd.input_id != input.fingerprint() || nbhd.output_id != output.fingerprint() {
        return Err(Error::invalid("neighbourhoods were not computed between these grids"));
    }
    if nbhd.n_out != output.len() || table.n_out != nbhd.n_out || table.k != nbhd.k || table.s != spec.s || spec.k != nbhd.k {
        return Err(Error::shape(format!(
            "bundle parts disagree: nbhd {}×{}, table {}×{} s={}, kernel k={} s={}",
            nbhd.n_out, nbhd.k, table.n_out, table.k, table.s, spec.k, spec.s
        )));
    }
    Ok(())
}

/// Write a bundle directory: `manifest.json` plus one blob per array.
pub fn write_bundle(
    dir: &Path,
    input: &SensorGrid,
    output: &SensorGrid,
    nbhd: &NeighborhoodSet,
    spec: &ReferenceKernelSpec,
    table: &KernelMapTable,
    meta: BundleMeta,
) -> Result<PathBuf> {
    check_join(input, output, nbhd, spec, table)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (n, k) = (nbhd.n_out, nbhd.k);
    let neighborhoods = NeighborhoodBlobs {
        input_id: nbhd.input_id.clone(),
        output_id: nbhd.output_id.clone(),
        n_out: n,
        k,
        indices: write_blob(dir, "nbhd.indices.bin", Dtype::U32, vec![n, k], &encode_u32(&nbhd.indices))?,
        dists: write_blob(dir, "nbhd.dists.bin", Dtype::F32, vec![n, k], &encode_f32(&nbhd.dists))?,
        thetas: write_blob(dir, "nbhd.thetas.bin", Dtype::F32, vec![n, k], &encode_f32(&nbhd.thetas))?,
    };
    let table_blobs = TableBlobs {
        s: table.s,
        indices: write_blob(dir, "table.indices.bin", Dtype::U32, vec![n, k, 4], &encode_u32(&table.indices))?,
        weights: write_blob(dir, "table.weights.bin", Dtype::F32, vec![n, k, 4], &encode_f32(&table.weights))?,
        out_of_extent: write_blob(dir, "table.out_of_extent.bin", Dtype::U8, vec![n, k], &table.out_of_extent)?,
    };
    let manifest = BundleManifest {
        format: BUNDLE_FORMAT.into(),
        version: FORMAT_VERSION,
        params: input.params,
        input: grid_manifest(input, dir, "input")?,
        output: grid_manifest(output, dir, "output")?,
        kernel: *spec,
        neighborhoods,
        table: table_blobs,
        meta,
    };
    let path = dir.join(BUNDLE_MANIFEST);
    write_json(&path, &manifest)?;
    Ok(path)
}

fn expect_shape(dir: &Path, blob: &BlobRef, shape: &[usize]) -> Result<()> {
    if blob.shape != shape {
        return Err(Error::Integrity {
            path: dir.join(&blob.file),
            reason: format!("shape {:?}, expected {shape:?}", blob.shape),
        });
    }
    Ok(())
}

/// Load and fully verify a bundle directory: every blob hash, the grid
/// recipes, the neighbourhood grid identities and all index ranges.
pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let path = dir.join(BUNDLE_MANIFEST);
    let raw = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let manifest_sha256 = sha256_hex(&raw);
    let m: BundleManifest = read_json(&path)?;
    check_header(&path, &m.format, m.version, BUNDLE_FORMAT)?;
    let input = grid_from_manifest(&m.input, dir, &path)?;
    let output = grid_from_manifest(&m.output, dir, &path)?;
    let integrity = |reason: String| Error::Integrity { path: path.clone(), reason };

    let nb = &m.neighborhoods;
    if nb.input_id != input.fingerprint() || nb.output_id != output.fingerprint() {
        return Err(integrity("neighbourhood grid identities do not match the stored grids".into()));
    }
    if nb.n_out != output.len() {
        return Err(integrity(format!("n_out {} but output grid has {} points", nb.n_out, output.len())));
    }
    let (n, k) = (nb.n_out, nb.k);
    for b in [&nb.indices, &nb.dists, &nb.thetas] {
        expect_shape(dir, b, &[n, k])?;
    }
    let indices = decode_u32(&read_blob(dir, &nb.indices, Dtype::U32)?);
    if indices.iter().any(|&i| i as usize >= input.len()) {
        return Err(integrity("neighbour index out of range".into()));
    }
    let nbhd = NeighborhoodSet {
        input_id: nb.input_id.clone(),
        output_id: nb.output_id.clone(),
        n_out: n,
        k,
        indices,
        dists: decode_f32(&read_blob(dir, &nb.dists, Dtype::F32)?),
        thetas: decode_f32(&read_blob(dir, &nb.thetas, Dtype::F32)?),
    };

    let t = &m.table;
    if t.s != m.kernel.s || m.kernel.k != k {
        return Err(integrity(format!("table s={} k={k}, kernel s={} k={}", t.s, m.kernel.s, m.kernel.k)));
    }
    expect_shape(dir, &t.indices, &[n, k, 4])?;
    expect_shape(dir, &t.weights, &[n, k, 4])?;
    expect_shape(dir, &t.out_of_extent, &[n, k])?;
    let t_indices = decode_u32(&read_blob(dir, &t.indices, Dtype::U32)?);
    if t_indices.iter().any(|&i| i as usize >= t.s * t.s) {
        return Err(integrity("kernel index out of range".into()));
    }
    let table = KernelMapTable {
        n_out: n,
        k,
        s: t.s,
        indices: t_indices,
        weights: decode_f32(&read_blob(dir, &t.weights, Dtype::F32)?),
        out_of_extent: read_blob(dir, &t.out_of_extent, Dtype::U8)?,
    };
    Ok(Bundle {
        manifest: m,
        manifest_sha256,
        input,
        output,
        nbhd,
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceManifest {
    pub format: String,
    pub version: u32,
    /// Hash of the bundle manifest these outputs were computed from.
    pub bundle_manifest_sha256: String,
    pub seed: u64,
    pub cases: usize,
    pub n_in: usize,
    pub n_out: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub s: usize,
    /// `f32 [cases, n_in, c_in]`, zero on padding points.
    pub signals: BlobRef,
    /// `f32 [cases, c_out, c_in, s, s]`
    pub kernels: BlobRef,
    /// `f32 [cases, c_out]`
    pub bias: BlobRef,
    /// `f32 [cases, n_out, c_out]`
    pub outputs: BlobRef,
}

/// Random forward-pass cases with their outputs, all stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCases {
    pub manifest: ReferenceManifest,
    pub signals: Vec<f32>,
    pub kernels: Vec<f32>,
    pub bias: Vec<f32>,
    pub outputs: Vec<f32>,
}

impl ReferenceCases {
    /// Recompute case `i` through `bundle` in double precision.
    pub fn recompute(&self, bundle: &Bundle, i: usize) -> Result<Vec<f64>> {
        let m = &self.manifest;
        if i >= m.cases {
            return Err(Error::invalid(format!("case {i} of {}", m.cases)));
        }
        let ns = m.n_in * m.c_in;
        let nk = m.c_out * m.c_in * m.s * m.s;
        let x: Vec<f64> = self.signals[i * ns..(i + 1) * ns].iter().map(|&v| v as f64).collect();
        let w: Vec<f64> = self.kernels[i * nk..(i + 1) * nk].iter().map(|&v| v as f64).collect();
        let b: Vec<f64> = self.bias[i * m.c_out..(i + 1) * m.c_out].iter().map(|&v| v as f64).collect();
        let bank = KernelBank::new(m.c_out, m.c_in, m.s, w)?;
        apply_knn_conv(&bundle.table, &bundle.nbhd, &x, m.n_in, m.c_in, &bank, &b)
    }

    pub fn output(&self, i: usize) -> &[f32] {
        let n = self.manifest.n_out * self.manifest.c_out;
        &self.outputs[i * n..(i + 1) * n]
    }
}

/// Generate `cases` seeded random signals, kernel banks and biases for the
/// bundle in `bundle_dir`, run them through the kNN convolution and write
/// everything to `out_dir`. Inputs are drawn in `f32` so the stored values
/// are exactly the ones used.
pub fn write_reference(bundle_dir: &Path, out_dir: &Path, cases: usize, c_in: usize, c_out: usize, seed: u64) -> Result<PathBuf> {
    if cases == 0 || c_in == 0 || c_out == 0 {
        return Err(Error::invalid("cases, c_in and c_out must be positive"));
    }
    let bundle = load_bundle(bundle_dir)?;
    let (n_in, n_out, s) = (bundle.input.len(), bundle.output.len(), bundle.table.s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut signals, mut kernels, mut bias, mut outputs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..cases {
        let x: Vec<f32> = bundle
            .input
            .points
            .iter()
            .flat_map(|p| {
                let pad = p.is_padding;
                (0..c_in).map(|_| rng.random_range(-1.0f32..1.0)).map(move |v| if pad { 0.0 } else { v }).collect::<Vec<_>>()
            })
            .collect();
        let w: Vec<f32> = (0..c_out * c_in * s * s).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let b: Vec<f32> = (0..c_out).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let bank = KernelBank::new(c_out, c_in, s, w.iter().map(|&v| v as f64).collect())?;
        let x64: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let b64: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let y = apply_knn_conv(&bundle.table, &bundle.nbhd, &x64, n_in, c_in, &bank, &b64)?;
        outputs.extend(y.iter().map(|&v| v as f32));
        signals.extend(x);
        kernels.extend(w);
        bias.extend(b);
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest = ReferenceManifest {
        format: REFERENCE_FORMAT.into(),
        version: FORMAT_VERSION,
        bundle_manifest_sha256: bundle.manifest_sha256,
        seed,
        cases,
        n_in,
        n_out,
        c_in,
        c_out,
        s,
        signals: write_blob(out_dir, "ref.signals.bin", Dtype::F32, vec![cases, n_in, c_in], &encode_f32(&signals))?,
        kernels: write_blob(out_dir, "ref.kernels.bin", Dtype::F32, vec![cases, c_out, c_in, s, s], &encode_f32(&kernels))?,
        bias: write_blob(out_dir, "ref.bias.bin", Dtype::F32, vec![cases, c_out], &encode_f32(&bias))?,
        outputs: write_blob(out_dir, "ref.outputs.bin", Dtype::F32, vec![cases, n_out, c_out], &encode_f32(&outputs))?,
    };
    let path = out_dir.join(REFERENCE_MANIFEST);
    write_json(&path, &manifest)?;
    Ok(path)
}

pub fn load_reference(manifest_path: &Path) -> Result<ReferenceCases> {
    let m: ReferenceManifest = read_json(manifest_path)?;
    check_header(manifest_path, &m.format, m.version, REFERENCE_FORMAT)?;
    let dir = super::artifacts::parent_dir(manifest_path);
    expect_shape(&dir, &m.signals, &[m.cases, m.n_in, m.c_in])?;
    expect_shape(&dir, &m.kernels, &[m.cases, m.c_out, m.c_in, m.s, m.s])?;
    expect_shape(&dir, &m.bias, &[m.cases, m.c_out])?;
    expect_shape(&dir, &m.outputs, &[m.cases, m.n_out, m.c_out])?;
    Ok(ReferenceCases {
        signals: decode_f32(&read_blob(&dir, &m.signals, Dtype::F32)?),
        kernels: decode_f32(&read_blob(&dir, &m.kernels, Dtype::F32)?),
        bias: decode_f32(&read_blob(&dir, &m.bias, Dtype::F32)?),
        outputs: decode_f32(&read_blob(&dir, &m.outputs, Dtype::F32)?),
        manifest: m,
    })
}
