//! Feature tensor files: raw little-endian float32 in C order plus a JSON
//! sidecar describing shape and provenance.
//!
//! A tensor named `foo` is stored as `foo.bin` (the data) and `foo.json`
//! (the sidecar). Complex tensors append a trailing axis of length 2
//! holding re/im.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3, ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sidecar schema: `{"shape": [...], "kind": "...", "frame_len": 640, "hop": 320}`
/// plus optional pair list and DRR mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSidecar {
    pub shape: Vec<usize>,
    pub kind: String,
    pub frame_len: usize,
    pub hop: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl TensorSidecar {
    pub fn new(shape: Vec<usize>, kind: &str) -> Self {
        Self {
            shape,
            kind: kind.to_string(),
            frame_len: super::FRAME_LEN,
            hop: super::HOP,
            pairs: None,
            mode: None,
        }
    }

    pub fn with_pairs(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.pairs = Some(pairs);
        self
    }

    pub fn with_mode(mut self, mode: &str) -> Self {
        self.mode = Some(mode.to_string());
        self
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Write a tensor (any rank) with its sidecar. `stem` carries no extension.
pub fn write_tensor(stem: impl AsRef<Path>, data: &ArrayD<f64>, sidecar: &TensorSidecar) -> Result<()> {
    if sidecar.shape != data.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", sidecar.shape),
            got: format!("{:?}", data.shape()),
        });
    }
    let (bin, json) = paths(stem.as_ref());
    let mut bytes = Vec::with_capacity(data.len() * 4);
    // standard (C) iteration order
    for v in data.iter() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::File::create(&bin)?.write_all(&bytes)?;
    let mut f = fs::File::create(&json)?;
    f.write_all(serde_json::to_string_pretty(sidecar)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Convenience for `(channels, frames, bands/bins)` tensors.
pub fn write_tensor3(stem: impl AsRef<Path>, data: &Array3<f64>, sidecar: &TensorSidecar) -> Result<()> {
    write_tensor(stem, &data.clone().into_dyn(), sidecar)
}

/// Read a tensor and its sidecar back.
pub fn read_tensor(stem: impl AsRef<Path>) -> Result<(ArrayD<f64>, TensorSidecar)> {
    let (bin, json) = paths(stem.as_ref());
    let sidecar: TensorSidecar = serde_json::from_reader(fs::File::open(&json)?)?;
    let expected: usize = sidecar.shape.iter().product();
    let mut bytes = Vec::new();
    fs::File::open(&bin)?.read_to_end(&mut bytes)?;
    if bytes.len() != expected * 4 {
        return Err(Error::ShapeMismatch {
            expected: format!("{} f32 values", expected),
            got: format!("{} bytes", bytes.len()),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let data = ArrayD::from_shape_vec(IxDyn(&sidecar.shape), values)
        .map_err(|e| Error::ShapeMismatch {
            expected: format!("{:?}", sidecar.shape),
            got: e.to_string(),
        })?;
    Ok((data, sidecar))
}

/// Read a tensor expected to be rank 2, e.g. a mask.
pub fn read_tensor2(stem: impl AsRef<Path>) -> Result<(Array2<f64>, TensorSidecar)> {
    let (data, sidecar) = read_tensor(stem)?;
    let shape = data.shape().to_vec();
    let arr = data
        .into_dimensionality::<ndarray::Ix2>()
        .map_err(|_| Error::ShapeMismatch {
            expected: "rank-2 tensor".into(),
            got: format!("{shape:?}"),
        })?;
    Ok((arr, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn tensor_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("feat");
        let data = Array3::from_shape_fn((3, 4, 5), |(a, b, c)| (a * 20 + b * 5 + c) as f64);
        let sidecar = TensorSidecar::new(vec![3, 4, 5], "fbank")
            .with_pairs(vec![(0, 1), (0, 2)]);
        write_tensor3(&stem, &data, &sidecar).unwrap();

        let (back, side) = read_tensor(&stem).unwrap();
        assert_eq!(side, sidecar);
        assert_eq!(side.frame_len, 640);
        assert_eq!(side.hop, 320);
        for (a, b) in data.iter().zip(back.iter()) {
            assert_eq!(*a, *b);
        }
    }

    #[test]
    fn truncated_bin_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("feat");
        let data = Array3::zeros((2, 2, 2));
        let sidecar = TensorSidecar::new(vec![2, 2, 2], "mask");
        write_tensor3(&stem, &data, &sidecar).unwrap();
        std::fs::write(stem.with_extension("bin"), [0u8; 7]).unwrap();
        assert!(read_tensor(&stem).is_err());
    }
}
