//! Field container: a UTF-8 JSON manifest, one NUL byte, then raw
//! little-endian binary64 payload with the components concatenated in
//! manifest order.
//!
//! Tensor fields carry `n²` values per component. Pressure fields are
//! node-registered and carry `points_per_side² = (n+1)²` values; the extra
//! manifest keys `registration` and `points_per_side` say so.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridShape, PressureField, TensorField};

pub const FORMAT_VERSION: u32 = 1;
pub const TENSOR_COMPONENTS: [&str; 3] = ["a_xx", "a_xy", "a_yy"];
pub const PRESSURE_COMPONENTS: [&str; 1] = ["phi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub n: usize,
    pub components: Vec<String>,
    pub dtype: String,
    pub layout: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_side: Option<usize>,
}

impl Manifest {
    fn tensor(n: usize) -> Self {
        Manifest {
            format_version: FORMAT_VERSION,
            n,
            components: TENSOR_COMPONENTS.iter().map(|s| s.to_string()).collect(),
            dtype: "f64le".into(),
            layout: "row-major".into(),
            registration: None,
            points_per_side: None,
        }
    }

    fn pressure(n: usize) -> Self {
        Manifest {
            components: PRESSURE_COMPONENTS.iter().map(|s| s.to_string()).collect(),
            registration: Some("node".into()),
            points_per_side: Some(n + 1),
            ..Manifest::tensor(n)
        }
    }

    fn values_per_component(&self) -> usize {
        let side = self.points_per_side.unwrap_or(self.n);
        side * side
    }
}

/// Serializes manifest + payload into a byte buffer.
pub fn encode(manifest: &Manifest, components: &[&[f64]]) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(manifest)?;
    let total: usize = components.iter().map(|c| c.len()).sum();
    let mut out = Vec::with_capacity(header.len() + 1 + 8 * total);
    out.extend_from_slice(&header);
    out.push(0);
    for c in components {
        for v in c.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Splits a buffer into its manifest and per-component payload arrays.
pub fn decode(bytes: &[u8], path: &Path) -> Result<(Manifest, Vec<Vec<f64>>)> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let nul = bytes
        .iter()
        .position(|&b| b == 0)
        .ok_or_else(|| bad("missing NUL separator after manifest".into()))?;
    let manifest: Manifest = serde_json::from_slice(&bytes[..nul])
        .map_err(|e| bad(format!("malformed manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(bad(format!(
            "unsupported format_version {}",
            manifest.format_version
        )));
    }
    if manifest.dtype != "f64le" {
        return Err(bad(format!("unsupported dtype {:?}", manifest.dtype)));
    }
    if manifest.layout != "row-major" {
        return Err(bad(format!("unsupported layout {:?}", manifest.layout)));
    }
    GridShape::new(manifest.n)?;
    let per = manifest.values_per_component();
    let payload = &bytes[nul + 1..];
    let expected = 8 * per * manifest.components.len();
    if payload.len() != expected {
        return Err(bad(format!(
            "payload length mismatch: {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let components = payload
        .chunks_exact(8 * per)
        .map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect()
        })
        .collect();
    Ok((manifest, components))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_field(field: &TensorField, path: impl AsRef<Path>) -> Result<()> {
    field.validate()?;
    let bytes = encode(
        &Manifest::tensor(field.n()),
        &[field.a_xx(), field.a_xy(), field.a_yy()],
    )?;
    write_atomic(path.as_ref(), &bytes)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<TensorField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (manifest, comps) = decode(&bytes, path)?;
    if manifest.components != TENSOR_COMPONENTS || manifest.points_per_side.is_some() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!(
                "expected tensor components {TENSOR_COMPONENTS:?}, found {:?}",
                manifest.components
            ),
        });
    }
    let mut it = comps.into_iter();
    let (xx, xy, yy) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    TensorField::new(GridShape::new(manifest.n)?, xx, xy, yy)
}

pub fn write_pressure(phi: &PressureField, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(&Manifest::pressure(phi.shape().n()), &[phi.values()])?;
    write_atomic(path.as_ref(), &bytes)
}

pub fn read_pressure(path: impl AsRef<Path>) -> Result<PressureField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (manifest, mut comps) = decode(&bytes, path)?;
    if manifest.components != PRESSURE_COMPONENTS
        || manifest.points_per_side != Some(manifest.n + 1)
    {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: "expected a node-registered `phi` component".into(),
        });
    }
    PressureField::new(GridShape::new(manifest.n)?, comps.remove(0))
}
