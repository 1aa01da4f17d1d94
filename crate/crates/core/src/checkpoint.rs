//! Versioned binary checkpoints.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        4 bytes  "HQCK"
//! version      u32      1
//! n_qubits     u32
//! depth        u32
//! mode         u8       0 = quantum, 1 = classical
//! dropout      f64
//! n_tensors    u32
//! per tensor:
//!   name_len   u16, name (UTF-8)
//!   ndim       u8, dims (u32 each)
//!   values     f64 × product(dims)
//! sha256       32 bytes over everything above
//! ```
//!
//! Tensors appear in parameter-namespace order and must match the layout
//! the header's configuration implies.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{HeadMode, HybridModel, ModelConfig};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HQCK";
pub const CHECKPOINT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

pub fn to_bytes(model: &HybridModel) -> Vec<u8> {
    let cfg = model.config();
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(cfg.n_qubits as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.depth as u32).to_le_bytes());
    out.push(match cfg.mode {
        HeadMode::Quantum => 0,
        HeadMode::Classical => 1,
    });
    out.extend_from_slice(&cfg.dropout.to_le_bytes());
    let layout = model.layout();
    out.extend_from_slice(&(layout.len() as u32).to_le_bytes());
    for (spec, values) in layout.iter().zip(model.params()) {
        out.extend_from_slice(&(spec.name.len() as u16).to_le_bytes());
        out.extend_from_slice(spec.name.as_bytes());
        out.push(spec.shape.len() as u8);
        for d in &spec.shape {
            out.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format("checkpoint truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice of length N"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<HybridModel> {
    if bytes.len() < CHECKPOINT_MAGIC.len() + DIGEST_LEN || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a checkpoint file".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Format("checkpoint checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 4 };
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let n_qubits = r.u32()? as usize;
    let depth = r.u32()? as usize;
    let mode = match r.u8()? {
        0 => HeadMode::Quantum,
        1 => HeadMode::Classical,
        other => return Err(Error::Format(format!("unknown head mode tag {other}"))),
    };
    let dropout = r.f64()?;
    let config = ModelConfig {
        n_qubits,
        depth,
        mode,
        dropout,
    };
    config.validate().map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;

    // Layout of a model with this configuration; its values are overwritten.
    let template = HybridModel::new(config, &mut rand::rngs::mock::StepRng::new(0, 0))?;
    let layout = template.layout();
    let count = r.u32()? as usize;
    if count != layout.len() {
        return Err(Error::Format(format!("{count} tensors, expected {}", layout.len())));
    }
    let mut flat = Vec::with_capacity(template.num_params());
    for spec in &layout {
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?).map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
        let ndim = r.u8()? as usize;
        let shape = (0..ndim).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if name != spec.name || shape != spec.shape {
            return Err(Error::Format(format!(
                "tensor {name:?} {shape:?} where {:?} {:?} was expected",
                spec.name, spec.shape
            )));
        }
        for _ in 0..spec.len() {
            flat.push(r.f64()?);
        }
    }
    if r.pos != body.len() {
        return Err(Error::Format("trailing bytes after the last tensor".into()));
    }
    HybridModel::from_flat(config, &flat)
}

pub fn save_checkpoint(model: &HybridModel, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<HybridModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
