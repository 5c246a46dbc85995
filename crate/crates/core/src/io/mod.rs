//! On-disk artifacts. Every binary blob is little-endian, uncompressed and
//! referenced from a JSON manifest by SHA-256; loaders verify the hash and
//! shape before decoding. See `docs/FORMATS.md` for the byte layouts.

mod artifacts;
mod blob;
mod bundle;
mod image_io;
mod plot;

pub use artifacts::{
    load_baseline, load_grid, load_signal, save_baseline, save_grid, save_signal, BaselineManifest, GridManifest,
    SignalManifest, BASELINE_FORMAT, FORMAT_VERSION, GRID_FORMAT, SIGNAL_FORMAT,
};
pub use blob::{decode_f32, decode_f64, decode_u32, encode_f32, encode_f64, encode_u32, sha256_hex, BlobRef, Dtype};
pub use bundle::{
    load_bundle, load_reference, write_bundle, write_reference, Bundle, BundleManifest, BundleMeta, NeighborhoodBlobs,
    ReferenceCases, ReferenceManifest, TableBlobs, BUNDLE_FORMAT, BUNDLE_MANIFEST, REFERENCE_FORMAT, REFERENCE_MANIFEST,
};
pub use image_io::{read_image, read_png, read_pnm, write_image, write_png, write_pnm};
pub use plot::{render_plot, Bounds, Series, SeriesStyle};

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Write `rows` as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        r: f64,
        n: usize,
        tag: &'static str,
    }

    #[test]
    fn csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &[Row { r: 0.5, n: 3, tag: "a" }, Row { r: 1.0, n: 4, tag: "b,c" }]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "r,n,tag\n0.5,3,a\n1.0,4,\"b,c\"\n");
    }
}
