//! Weight files.
//!
//! Layout: ASCII `GFW1`, a little-endian `u64` header length, a UTF-8 JSON
//! header, then every tensor as little-endian `f32` values in header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{LayerParams, Parameters};
use super::spec::{LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub const WEIGHTS_MAGIC: &[u8; 4] = b"GFW1";
const FORMAT_VERSION: u32 = 1;
const PREFIX_LEN: usize = 12;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    input_shape: [usize; 3],
    classes: usize,
    layers: Vec<LayerSpec>,
    value_type: String,
    tensors: Vec<TensorEntry>,
}

pub fn encode_weights<T: Scalar>(spec: &NetworkSpec, params: &Parameters<T>) -> Result<Vec<u8>> {
    spec.validate()?;
    params.check(spec)?;
    let named = params.named_tensors();
    let header = Header {
        version: FORMAT_VERSION,
        input_shape: spec.input_shape,
        classes: spec.classes,
        layers: spec.layers.clone(),
        value_type: "f32".into(),
        tensors: named
            .iter()
            .map(|(name, t)| TensorEntry {
                name: name.clone(),
                shape: t.shape().to_vec(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(PREFIX_LEN + json.len() + 4 * params.scalar_count());
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, t) in named {
        for &v in t.data() {
            out.extend_from_slice(&(v.to_f64_lossless() as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_weights<T: Scalar>(bytes: &[u8]) -> Result<(NetworkSpec, Parameters<T>)> {
    if bytes.len() < 4 || &bytes[..4] != WEIGHTS_MAGIC {
        return Err(Error::format(0, "bad magic, expected GFW1"));
    }
    let len_bytes: [u8; 8] = bytes
        .get(4..PREFIX_LEN)
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| Error::format(4, "truncated header length"))?;
    let header_len = u64::from_le_bytes(len_bytes);
    let header_end = (PREFIX_LEN as u64)
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len() as u64)
        .ok_or_else(|| {
            Error::format(
                bytes.len(),
                format!("header length {header_len} exceeds file size"),
            )
        })? as usize;
    let header: Header = serde_json::from_slice(&bytes[PREFIX_LEN..header_end])
        .map_err(|e| Error::format(PREFIX_LEN + e.column().saturating_sub(1), e.to_string()))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::format(
            PREFIX_LEN,
            format!("unsupported version {}", header.version),
        ));
    }
    if header.value_type != "f32" {
        return Err(Error::format(
            PREFIX_LEN,
            format!("unsupported value type {}", header.value_type),
        ));
    }
    let spec = NetworkSpec::new(header.input_shape, header.layers, header.classes)
        .map_err(|e| Error::format(PREFIX_LEN, e.to_string()))?;
    let expected = spec.param_shapes()?;
    if header.tensors.len() != 2 * expected.len() {
        return Err(Error::format(
            PREFIX_LEN,
            format!(
                "header lists {} tensors, spec needs {}",
                header.tensors.len(),
                2 * expected.len()
            ),
        ));
    }
    let total: usize = header
        .tensors
        .iter()
        .map(|t| t.shape.iter().product::<usize>())
        .sum();
    let payload = &bytes[header_end..];
    if payload.len() != 4 * total {
        return Err(Error::format(
            header_end + payload.len().min(4 * total),
            format!(
                "expected {} bytes of tensor data, found {}",
                4 * total,
                payload.len()
            ),
        ));
    }
    let mut cursor = 0;
    let mut read = |entry: &TensorEntry, want: &[usize]| -> Result<Tensor<T>> {
        if entry.shape != want {
            return Err(Error::format(
                PREFIX_LEN,
                format!("tensor {} has shape {:?}, expected {want:?}", entry.name, entry.shape),
            ));
        }
        let n: usize = want.iter().product();
        let data = payload[cursor..cursor + 4 * n]
            .chunks_exact(4)
            .map(|c| T::of(f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes")))))
            .collect();
        cursor += 4 * n;
        Tensor::new(want.to_vec(), data)
    };
    let mut layers = Vec::with_capacity(expected.len());
    for (i, (w, b)) in expected.iter().enumerate() {
        let weights = read(&header.tensors[2 * i], w)?;
        let bias = read(&header.tensors[2 * i + 1], b)?;
        layers.push(LayerParams { weights, bias });
    }
    Ok((spec, Parameters { layers }))
}

pub fn save_weights<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let bytes = encode_weights(spec, params)?;
    let path = path.as_ref();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_weights<T: Scalar>(path: impl AsRef<Path>) -> Result<(NetworkSpec, Parameters<T>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes).map_err(|e| e.at_path(path))
}
