use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampler::POINT_RECORD_BYTES;

/// Element type of a binary blob. All multi-byte values are little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dtype {
    U8,
    U32,
    F32,
    F64,
    /// Fixed-width sensor point record, see the format notes.
    PointRecord,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Self::U8 => 1,
            Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
            Self::PointRecord => POINT_RECORD_BYTES,
        }
    }
}

/// Reference from a manifest to a blob file in the same directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlobRef {
    pub file: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub sha256: String,
}

impl BlobRef {
    pub fn byte_len(&self) -> usize {
        self.shape.iter().product::<usize>() * self.dtype.size()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn check_file_name(dir: &Path, file: &str) -> Result<()> {
    let plain = !file.is_empty() && !file.contains(['/', '\\']) && file != "." && file != "..";
    if !plain {
        return Err(Error::Integrity {
            path: dir.to_path_buf(),
            reason: format!("blob name {file:?} is not a plain file name"),
        });
    }
    Ok(())
}

pub(crate) fn write_blob(dir: &Path, file: &str, dtype: Dtype, shape: Vec<usize>, bytes: &[u8]) -> Result<BlobRef> {
    check_file_name(dir, file)?;
    let blob = BlobRef {
        file: file.to_string(),
        dtype,
        shape,
        sha256: sha256_hex(bytes),
    };
    if blob.byte_len() != bytes.len() {
        return Err(Error::shape(format!("blob {file}: {} bytes for shape {:?}", bytes.len(), blob.shape)));
    }
    let path = dir.join(file);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(blob)
}

/// Read a blob and verify its length, declared type and hash.
pub(crate) fn read_blob(dir: &Path, blob: &BlobRef, expect: Dtype) -> Result<Vec<u8>> {
    check_file_name(dir, &blob.file)?;
    let path = dir.join(&blob.file);
    let integrity = |reason: String| Error::Integrity { path: path.clone(), reason };
    if blob.dtype != expect {
        return Err(integrity(format!("declared type {:?}, expected {expect:?}", blob.dtype)));
    }
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    if bytes.len() != blob.byte_len() {
        return Err(integrity(format!("{} bytes, shape {:?} needs {}", bytes.len(), blob.shape, blob.byte_len())));
    }
    let got = sha256_hex(&bytes);
    if got != blob.sha256 {
        return Err(integrity(format!("sha256 {got} does not match manifest {}", blob.sha256)));
    }
    Ok(bytes)
}

macro_rules! le_codec {
    ($enc:ident, $dec:ident, $t:ty, $n:expr) => {
        pub fn $enc(values: &[$t]) -> Vec<u8> {
            values.iter().flat_map(|v| v.to_le_bytes()).collect()
        }

        pub fn $dec(bytes: &[u8]) -> Vec<$t> {
            bytes
                .chunks_exact($n)
                .map(|c| <$t>::from_le_bytes(c.try_into().expect("chunk width")))
                .collect()
        }
    };
}

le_codec!(encode_u32, decode_u32, u32, 4);
le_codec!(encode_f32, decode_f32, f32, 4);
le_codec!(encode_f64, decode_f64, f64, 8);
