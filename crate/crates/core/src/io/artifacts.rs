//! Grid, signal and baseline artifacts: a JSON manifest next to one or more
//! little-endian blobs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::blob::{decode_f32, decode_f64, encode_f32, encode_f64, read_blob, write_blob, BlobRef, Dtype};
use crate::baselines::{BaselineGrid, BaselineKind};
use crate::cmf::CmfParams;
use crate::error::{Error, Result};
use crate::resampler::{FixationSpec, FoveatedSignal};
use crate::sampler::{GridOptions, Layout, SensorGrid};

pub const FORMAT_VERSION: u32 = 1;
pub const GRID_FORMAT: &str = "foveakit-grid";
pub const SIGNAL_FORMAT: &str = "foveakit-signal";
pub const BASELINE_FORMAT: &str = "foveakit-baseline";

pub(crate) fn check_header(path: &Path, format: &str, version: u32, expect: &str) -> Result<()> {
    if format != expect {
        return Err(Error::Format(format!("{}: format {format:?}, expected {expect:?}", path.display())));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{}: {format} version {version}, this build reads version {FORMAT_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Integrity {
        path: path.to_path_buf(),
        reason: format!("malformed manifest: {e}"),
    })
}

pub(crate) fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

/// Everything needed to rebuild a [`SensorGrid`], plus a summary and the
/// hash of its point records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub format: String,
    pub version: u32,
    pub params: CmfParams,
    pub layout: Layout,
    /// Rings inside the field of view (ring layouts).
    pub n_r: Option<usize>,
    pub options: GridOptions,
    pub n_points: usize,
    pub n_active: usize,
    pub delta_w: f64,
    pub ring_counts: Vec<u32>,
    /// Ring radii in degrees, padding rings included (ring layouts).
    pub radii: Vec<f64>,
    pub fingerprint: String,
    pub points: BlobRef,
}

impl GridManifest {
    fn rebuild(&self) -> Result<SensorGrid> {
        let params = CmfParams::new(self.params.a, self.params.r_max)?;
        match self.layout {
            Layout::Rings => {
                let n_r = self.n_r.ok_or_else(|| Error::Format("ring grid manifest without n_r".into()))?;
                SensorGrid::build(params, n_r, self.options)
            }
            Layout::Lattice { side, pad } => SensorGrid::lattice(params, side, pad),
        }
    }
}

/// Write `points` records to `dir/<stem>.points.bin` and return the manifest
/// describing them. The manifest itself is not written.
pub(crate) fn grid_manifest(grid: &SensorGrid, dir: &Path, stem: &str) -> Result<GridManifest> {
    let bytes = grid.record_bytes();
    let points = write_blob(dir, &format!("{stem}.points.bin"), Dtype::PointRecord, vec![grid.len()], &bytes)?;
    Ok(GridManifest {
        format: GRID_FORMAT.into(),
        version: FORMAT_VERSION,
        params: grid.params,
        layout: grid.layout,
        n_r: grid.scheme.as_ref().map(|s| s.n_r),
        options: grid.options,
        n_points: grid.len(),
        n_active: grid.n_active,
        delta_w: grid.delta_w,
        ring_counts: grid.ring_counts.clone(),
        radii: grid.scheme.as_ref().map_or_else(Vec::new, |s| s.radii.clone()),
        fingerprint: points.sha256.clone(),
        points,
    })
}

/// Verify the blob, rebuild the grid from the recipe and require the rebuilt
/// records to match the stored ones byte for byte.
pub(crate) fn grid_from_manifest(m: &GridManifest, dir: &Path, manifest_path: &Path) -> Result<SensorGrid> {
    check_header(manifest_path, &m.format, m.version, GRID_FORMAT)?;
    let bytes = read_blob(dir, &m.points, Dtype::PointRecord)?;
    let mismatch = |reason: String| Error::Integrity { path: dir.join(&m.points.file), reason };
    if m.fingerprint != m.points.sha256 {
        return Err(mismatch("manifest fingerprint differs from blob hash".into()));
    }
    let grid = m.rebuild()?;
    if grid.record_bytes() != bytes {
        return Err(mismatch("point records do not match the grid recipe".into()));
    }
    if grid.n_active != m.n_active || grid.ring_counts != m.ring_counts {
        return Err(mismatch("manifest summary disagrees with the grid recipe".into()));
    }
    Ok(grid)
}

/// Writes `dir/<stem>.json` and `dir/<stem>.points.bin`; returns the manifest path.
pub fn save_grid(grid: &SensorGrid, dir: &Path, stem: &str) -> Result<PathBuf> {
    let manifest = grid_manifest(grid, dir, stem)?;
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &manifest)?;
    Ok(path)
}

pub fn load_grid(manifest_path: &Path) -> Result<SensorGrid> {
    let m: GridManifest = read_json(manifest_path)?;
    grid_from_manifest(&m, &parent_dir(manifest_path), manifest_path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalManifest {
    pub format: String,
    pub version: u32,
    pub grid_id: String,
    pub fixation: FixationSpec,
    pub n: usize,
    pub channels: usize,
    pub source_width: usize,
    pub source_height: usize,
    /// `f32`, shape `[n, channels]`.
    pub values: BlobRef,
}

pub fn save_signal(signal: &FoveatedSignal, dir: &Path, stem: &str) -> Result<PathBuf> {
    let values = write_blob(
        dir,
        &format!("{stem}.values.bin"),
        Dtype::F32,
        vec![signal.n, signal.channels],
        &encode_f32(&signal.values),
    )?;
    let manifest = SignalManifest {
        format: SIGNAL_FORMAT.into(),
        version: FORMAT_VERSION,
        grid_id: signal.grid_id.clone(),
        fixation: signal.fixation,
        n: signal.n,
        channels: signal.channels,
        source_width: signal.source_width,
        source_height: signal.source_height,
        values,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &manifest)?;
    Ok(path)
}

pub fn load_signal(manifest_path: &Path) -> Result<FoveatedSignal> {
    let m: SignalManifest = read_json(manifest_path)?;
    check_header(manifest_path, &m.format, m.version, SIGNAL_FORMAT)?;
    let dir = parent_dir(manifest_path);
    if m.values.shape != [m.n, m.channels] {
        return Err(Error::Integrity {
            path: manifest_path.to_path_buf(),
            reason: format!("values shape {:?} disagrees with n={} channels={}", m.values.shape, m.n, m.channels),
        });
    }
    let values = decode_f32(&read_blob(&dir, &m.values, Dtype::F32)?);
    Ok(FoveatedSignal {
        grid_id: m.grid_id,
        fixation: m.fixation,
        n: m.n,
        channels: m.channels,
        source_width: m.source_width,
        source_height: m.source_height,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineManifest {
    pub format: String,
    pub version: u32,
    pub kind: BaselineKind,
    pub rows: usize,
    pub cols: usize,
    pub r_max: f64,
    pub a: Option<f64>,
    /// `f64`, shape `[n, 4]`: visual x, y, then the two sensor coordinates.
    pub elements: BlobRef,
}

pub fn save_baseline(grid: &BaselineGrid, dir: &Path, stem: &str) -> Result<PathBuf> {
    let flat: Vec<f64> = grid
        .points
        .iter()
        .zip(&grid.sensor)
        .flat_map(|(p, s)| [p[0], p[1], s[0], s[1]])
        .collect();
    let elements = write_blob(dir, &format!("{stem}.elements.bin"), Dtype::F64, vec![grid.len(), 4], &encode_f64(&flat))?;
    let manifest = BaselineManifest {
        format: BASELINE_FORMAT.into(),
        version: FORMAT_VERSION,
        kind: grid.kind,
        rows: grid.rows,
        cols: grid.cols,
        r_max: grid.r_max,
        a: grid.a,
        elements,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &manifest)?;
    Ok(path)
}

pub fn load_baseline(manifest_path: &Path) -> Result<BaselineGrid> {
    let m: BaselineManifest = read_json(manifest_path)?;
    check_header(manifest_path, &m.format, m.version, BASELINE_FORMAT)?;
    let n = m.rows * m.cols;
    if m.elements.shape != [n, 4] {
        return Err(Error::Integrity {
            path: manifest_path.to_path_buf(),
            reason: format!("elements shape {:?}, expected [{n}, 4]", m.elements.shape),
        });
    }
    let flat = decode_f64(&read_blob(&parent_dir(manifest_path), &m.elements, Dtype::F64)?);
    Ok(BaselineGrid {
        kind: m.kind,
        rows: m.rows,
        cols: m.cols,
        r_max: m.r_max,
        a: m.a,
        points: flat.chunks_exact(4).map(|c| [c[0], c[1]]).collect(),
        sensor: flat.chunks_exact(4).map(|c| [c[2], c[3]]).collect(),
    })
}
