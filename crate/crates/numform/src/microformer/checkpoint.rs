//! Self-describing checkpoint container.
//!
//! Layout, version 1:
//!
//! ```text
//! bytes 0..8    magic "NUMFMCK1"
//! bytes 8..12   u32 little-endian header length H
//! bytes 12..12+H UTF-8 JSON header:
//!   {
//!     "version": 1,
//!     "precision": "f32" | "f64",
//!     "config": <ModelConfig, including vocabulary and orthography>,
//!     "epoch": <best epoch>,
//!     "dev_accuracy": <best dev accuracy>,
//!     "optimizer": { "steps", "learning_rate", "beta1", "beta2", "eps" },
//!     "tensors": [ { "name", "rows", "cols" }, ... ]
//!   }
//! then, for each tensor in listed order, three row-major little-endian
//! blocks of rows*cols scalars each: value, then the Adam first moment,
//! then the Adam second moment.
//! ```
//!
//! Reloading a checkpoint and running a forward pass reproduces the
//! saved model's logits bit for bit: scalars round-trip through their
//! exact byte representation.

use super::model::Microformer;
use super::{ModelConfig, ModelError, Real};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"NUMFMCK1";
const VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct OptimizerState {
    pub steps: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl OptimizerState {
    pub fn adam(steps: u64, learning_rate: f64) -> Self {
        OptimizerState { steps, learning_rate, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub epoch: usize,
    pub dev_accuracy: f64,
    pub optimizer: OptimizerState,
}

#[derive(Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    precision: String,
    config: ModelConfig,
    epoch: usize,
    dev_accuracy: f64,
    optimizer: OptimizerState,
    tensors: Vec<TensorInfo>,
}

pub fn save_checkpoint<A: Real>(
    model: &mut Microformer<A>,
    meta: &CheckpointMeta,
    path: &Path,
) -> Result<(), ModelError> {
    let mut tensors = Vec::new();
    let mut blob: Vec<u8> = Vec::new();
    model.for_each_param(&mut |name, p| {
        let (rows, cols) = p.value.dim();
        tensors.push(TensorInfo { name: name.to_owned(), rows, cols });
        for array in [&p.value, &p.m, &p.v] {
            for &x in array.iter() {
                x.write_le(&mut blob);
            }
        }
    });

    let header = Header {
        version: VERSION,
        precision: A::NAME.to_owned(),
        config: model.config.clone(),
        epoch: meta.epoch,
        dev_accuracy: meta.dev_accuracy,
        optimizer: meta.optimizer,
        tensors,
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| ModelError::CheckpointFormat(e.to_string()))?;

    let mut out = Vec::with_capacity(12 + header_json.len() + blob.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    out.extend_from_slice(&blob);
    fs::write(path, out)?;
    Ok(())
}

pub fn load_checkpoint<A: Real>(path: &Path) -> Result<(Microformer<A>, CheckpointMeta), ModelError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(ModelError::CheckpointFormat("bad magic".into()));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body_start = 12 + header_len;
    if bytes.len() < body_start {
        return Err(ModelError::CheckpointFormat("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&bytes[12..body_start])
        .map_err(|e| ModelError::CheckpointFormat(e.to_string()))?;
    if header.version != VERSION {
        return Err(ModelError::CheckpointFormat(format!(
            "unsupported version {}",
            header.version
        )));
    }
    if header.precision != A::NAME {
        return Err(ModelError::CheckpointFormat(format!(
            "checkpoint is {}, loader is {}",
            header.precision,
            A::NAME
        )));
    }

    let mut model: Microformer<A> = Microformer::new(header.config, 0)?;
    let mut offset = body_start;
    let mut tensor_iter = header.tensors.iter();
    let mut failure: Option<ModelError> = None;
    model.for_each_param(&mut |name, p| {
        if failure.is_some() {
            return;
        }
        let info = match tensor_iter.next() {
            Some(i) => i,
            None => {
                failure = Some(ModelError::CheckpointFormat("missing tensors".into()));
                return;
            }
        };
        let (rows, cols) = p.value.dim();
        if info.name != name || info.rows != rows || info.cols != cols {
            failure = Some(ModelError::CheckpointFormat(format!(
                "tensor mismatch: checkpoint has {}({}x{}), model expects {}({rows}x{cols})",
                info.name, info.rows, info.cols, name
            )));
            return;
        }
        let count = rows * cols;
        for array in [&mut p.value, &mut p.m, &mut p.v] {
            if bytes.len() < offset + count * A::BYTES {
                failure = Some(ModelError::CheckpointFormat("truncated tensor data".into()));
                return;
            }
            for x in array.iter_mut() {
                *x = A::read_le(&bytes[offset..]);
                offset += A::BYTES;
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if tensor_iter.next().is_some() {
        return Err(ModelError::CheckpointFormat("extra tensors in header".into()));
    }
    if offset != bytes.len() {
        return Err(ModelError::CheckpointFormat("trailing bytes".into()));
    }

    let meta = CheckpointMeta {
        epoch: header.epoch,
        dev_accuracy: header.dev_accuracy,
        optimizer: header.optimizer,
    };
    Ok((model, meta))
}
