//! Binary checkpoint format.
//!
//! Layout: magic `"OWLE"` (4 bytes), format version (u32 LE), metadata length
//! (u32 LE), UTF-8 JSON metadata (config, init seed, layer ordering), then
//! raw little-endian `f32` values for every array in declared order. Per
//! block: kernels, conv bias, gamma, beta, running mean, running variance;
//! then per FC layer: weights, bias.

use super::{build_model, Model, ModelConfig};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"OWLE";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    config: ModelConfig,
    seed: u64,
    layers: Vec<LayerEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerEntry {
    name: String,
    len: usize,
}

/// Arrays in serialization order with their names.
fn serialized_arrays(model: &Model<f32>) -> Vec<(String, &[f32])> {
    let mut out = Vec::new();
    for (i, b) in model.blocks.iter().enumerate() {
        out.push((format!("conv{i}.kernels"), b.conv.kernels.as_slice()));
        out.push((format!("conv{i}.bias"), b.conv.bias.as_slice()));
        out.push((format!("bn{i}.gamma"), b.bn.gamma.as_slice()));
        out.push((format!("bn{i}.beta"), b.bn.beta.as_slice()));
        out.push((format!("bn{i}.running_mean"), b.bn.running_mean.as_slice()));
        out.push((format!("bn{i}.running_var"), b.bn.running_var.as_slice()));
    }
    for (j, f) in model.fcs.iter().enumerate() {
        out.push((format!("fc{j}.weights"), f.weights.as_slice()));
        out.push((format!("fc{j}.bias"), f.bias.as_slice()));
    }
    out
}

fn serialized_arrays_mut(model: &mut Model<f32>) -> Vec<&mut Vec<f32>> {
    let mut out = Vec::new();
    for b in &mut model.blocks {
        out.push(&mut b.conv.kernels);
        out.push(&mut b.conv.bias);
        out.push(&mut b.bn.gamma);
        out.push(&mut b.bn.beta);
        out.push(&mut b.bn.running_mean);
        out.push(&mut b.bn.running_var);
    }
    for f in &mut model.fcs {
        out.push(&mut f.weights);
        out.push(&mut f.bias);
    }
    out
}

pub fn save_checkpoint(model: &Model<f32>, path: &Path) -> Result<()> {
    let arrays = serialized_arrays(model);
    let meta = Metadata {
        config: model.config.clone(),
        seed: model.seed,
        layers: arrays.iter().map(|(name, a)| LayerEntry { name: name.clone(), len: a.len() }).collect(),
    };
    let meta_json = serde_json::to_vec(&meta)
        .map_err(|e| Error::CheckpointMetadata(format!("serialize: {e}")))?;

    let total: usize = arrays.iter().map(|(_, a)| a.len()).sum();
    let mut bytes = Vec::with_capacity(12 + meta_json.len() + 4 * total);
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&meta_json);
    for (_, array) in &arrays {
        for v in *array {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 {
        return Err(Error::CheckpointTruncated(format!(
            "{} bytes is shorter than the 12-byte header",
            bytes.len()
        )));
    }
    if bytes[0..4] != MAGIC {
        let mut found = [0u8; 4];
        found.copy_from_slice(&bytes[0..4]);
        return Err(Error::CheckpointMagic { found });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::CheckpointVersion { found: version, expected: FORMAT_VERSION });
    }
    let meta_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = 12 + meta_len;
    if bytes.len() < body {
        return Err(Error::CheckpointTruncated(format!(
            "metadata claims {meta_len} bytes but only {} remain",
            bytes.len() - 12
        )));
    }
    let meta: Metadata = serde_json::from_slice(&bytes[12..body])
        .map_err(|e| Error::CheckpointMetadata(format!("parse: {e}")))?;
    meta.config.validate()?;

    let mut model = build_model::<f32>(&meta.config, meta.seed)?;
    let arrays = serialized_arrays_mut(&mut model);
    if meta.layers.len() != arrays.len() {
        return Err(Error::CheckpointMetadata(format!(
            "metadata lists {} arrays, model has {}",
            meta.layers.len(),
            arrays.len()
        )));
    }
    let mut offset = body;
    for (entry, array) in meta.layers.iter().zip(arrays) {
        if entry.len != array.len() {
            return Err(Error::CheckpointMetadata(format!(
                "array {} has length {} in metadata but {} in the declared config",
                entry.name,
                entry.len,
                array.len()
            )));
        }
        let end = offset + 4 * entry.len;
        if bytes.len() < end {
            return Err(Error::CheckpointTruncated(format!(
                "array {} needs bytes {offset}..{end} but the file holds {}",
                entry.name,
                bytes.len()
            )));
        }
        for (i, v) in array.iter_mut().enumerate() {
            let at = offset + 4 * i;
            *v = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        }
        offset = end;
    }
    if offset != bytes.len() {
        return Err(Error::CheckpointMetadata(format!(
            "{} trailing bytes after the declared arrays",
            bytes.len() - offset
        )));
    }
    Ok(model)
}

/// Stable identifier for a checkpoint file: first 16 hex chars of its SHA-256.
pub fn checkpoint_id(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_model() -> Model<f32> {
        build_model(&ModelConfig::desk(), 2024).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let model = desk_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.owl");
        save_checkpoint(&model, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn file_size_is_header_plus_metadata_plus_payload() {
        let model = desk_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.owl");
        save_checkpoint(&model, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let meta_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let total: usize = serialized_arrays(&model).iter().map(|(_, a)| a.len()).sum();
        assert_eq!(bytes.len(), 12 + meta_len + 4 * total);
    }

    #[test]
    fn corrupted_magic_is_detected() {
        let model = desk_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.owl");
        save_checkpoint(&model, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, bytes).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::CheckpointMagic { .. })));
    }

    #[test]
    fn wrong_version_is_detected() {
        let model = desk_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.owl");
        save_checkpoint(&model, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[4] = 9;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(Error::CheckpointVersion { found: 9, .. })
        ));
    }

    #[test]
    fn truncation_is_detected() {
        let model = desk_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.owl");
        save_checkpoint(&model, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::CheckpointTruncated(_))));
    }

    #[test]
    fn checkpoint_id_is_stable() {
        let model = desk_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.owl");
        save_checkpoint(&model, &path).unwrap();
        let a = checkpoint_id(&path).unwrap();
        let b = checkpoint_id(&path).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
    }
}
