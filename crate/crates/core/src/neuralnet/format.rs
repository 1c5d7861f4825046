//! Binary model container. Layout, all integers little-endian:
//!
//! ```text
//! "DFIX"  u32 version
//! u32 len, config JSON
//! [32] SHA-256 of the vocabulary JSON
//! u32 count, u64 training keys
//! u32 count, then per tensor: u32 len, name, u32 ndims, u64 dims, f64 values (row-major)
//! ```

use std::path::{Path, PathBuf};

use super::config::ModelConfig;
use super::model::{Model, Params};
use super::train::TrainedModel;
use crate::error::NetError;
use crate::tokencode::Vocabulary;

pub const MAGIC: &[u8; 4] = b"DFIX";
pub const FORMAT_VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

pub fn to_bytes(trained: &TrainedModel) -> Vec<u8> {
    let model = &trained.model;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let config = serde_json::to_vec(&model.config).expect("config serializes");
    put_u32(&mut out, config.len());
    out.extend_from_slice(&config);
    out.extend_from_slice(&trained.vocab_digest);
    put_u32(&mut out, trained.train_keys.len());
    for k in &trained.train_keys {
        out.extend_from_slice(&k.to_le_bytes());
    }
    let tensors = model.params.named();
    put_u32(&mut out, tensors.len());
    for (name, t) in tensors {
        put_u32(&mut out, name.len());
        out.extend_from_slice(name.as_bytes());
        put_u32(&mut out, 2);
        for d in t.dims() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NetError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, NetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<u64, NetError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, NetError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<TrainedModel, NetError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(NetError::Format("bad magic".into()));
    }
    let version = r.u32()? as u32;
    if version != FORMAT_VERSION {
        return Err(NetError::Format(format!("unsupported version {version}")));
    }
    let len = r.u32()?;
    let config: ModelConfig =
        serde_json::from_slice(r.take(len)?).map_err(|e| NetError::Format(format!("config block: {e}")))?;
    config.validate()?;
    let vocab_digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    let n_keys = r.u32()?;
    let train_keys = (0..n_keys).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let n_tensors = r.u32()?;
    let mut tensors = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let len = r.u32()?;
        let name = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| NetError::Format("tensor name is not UTF-8".into()))?;
        let ndims = r.u32()?;
        if ndims != 2 {
            return Err(NetError::Format(format!("tensor {name} has {ndims} dims")));
        }
        let dims = [r.u64()? as usize, r.u64()? as usize];
        let count = dims[0]
            .checked_mul(dims[1])
            .filter(|&c| c <= bytes.len() / 8)
            .ok_or_else(|| NetError::Format(format!("tensor {name} is too large")))?;
        let values = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        tensors.push((name, dims, values));
    }
    if r.pos != bytes.len() {
        return Err(NetError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let vocab_size = tensors
        .first()
        .filter(|(name, _, _)| name == "embedding")
        .map(|(_, dims, _)| dims[1])
        .ok_or_else(|| NetError::Format("first tensor must be the embedding".into()))?;
    let mut params = Params::zeros(&config, vocab_size);
    let expected: Vec<(String, [usize; 2])> = params.named().into_iter().map(|(n, t)| (n, t.dims())).collect();
    if expected.len() != tensors.len() {
        return Err(NetError::Format(format!("{} tensors, expected {}", tensors.len(), expected.len())));
    }
    for ((slot, (name, dims)), (got_name, got_dims, values)) in params.tensors_mut().into_iter().zip(expected).zip(tensors) {
        if name != got_name || dims != got_dims {
            return Err(NetError::Format(format!(
                "tensor {got_name} {got_dims:?} where {name} {dims:?} was expected"
            )));
        }
        slot.data = values;
    }
    Ok(TrainedModel {
        model: Model {
            config,
            vocab_size,
            params,
        },
        train_keys,
        vocab_digest,
    })
}

/// Vocabulary sidecar path: `<model>.vocab.json`.
pub fn vocab_path(model_path: &Path) -> PathBuf {
    let mut name = model_path.as_os_str().to_owned();
    name.push(".vocab.json");
    PathBuf::from(name)
}

pub fn save(path: &Path, trained: &TrainedModel, vocab: &Vocabulary) -> Result<(), NetError> {
    std::fs::write(path, to_bytes(trained))?;
    std::fs::write(vocab_path(path), vocab.to_json())?;
    Ok(())
}

/// Loads a model and its vocabulary sidecar, checking the recorded digest.
pub fn load(path: &Path) -> Result<(TrainedModel, Vocabulary), NetError> {
    let trained = from_bytes(&std::fs::read(path)?)?;
    let text = std::fs::read_to_string(vocab_path(path))?;
    let vocab = Vocabulary::from_json(&text).map_err(|e| NetError::Format(format!("vocabulary: {e}")))?;
    if vocab.digest() != trained.vocab_digest {
        return Err(NetError::Format("vocabulary does not match the model".into()));
    }
    if vocab.len() != trained.model.vocab_size {
        return Err(NetError::Format("vocabulary size does not match the model".into()));
    }
    Ok((trained, vocab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::parse_source;
    use crate::neuralnet::train::train;
    use crate::tokencode::build_vocabulary;

    fn trained() -> (TrainedModel, Vocabulary) {
        let src = parse_source("int main(){int a; a=1; b=a; return 0;}", "m.c").unwrap();
        let vocab = build_vocabulary(&[src]).unwrap();
        let config = ModelConfig {
            embedding_dim: 4,
            hidden_units: 5,
            epochs: 2,
            ..ModelConfig::default()
        };
        (train(&config, &vocab).unwrap().trained, vocab)
    }

    #[test]
    fn bytes_round_trip() {
        let (t, _) = trained();
        let bytes = to_bytes(&t);
        assert_eq!(&bytes[..4], b"DFIX");
        assert_eq!(from_bytes(&bytes).unwrap(), t);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let (t, _) = trained();
        let bytes = to_bytes(&t);
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(from_bytes(&extra).is_err());
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(from_bytes(&magic).is_err());
    }

    #[test]
    fn sidecar_digest_is_checked() {
        let (t, vocab) = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.dfix");
        save(&path, &t, &vocab).unwrap();
        let (loaded, v) = load(&path).unwrap();
        assert_eq!(loaded, t);
        assert_eq!(v, vocab);
        let mut other = vocab.clone();
        other.pairs.pop();
        std::fs::write(vocab_path(&path), other.to_json()).unwrap();
        assert!(matches!(load(&path), Err(NetError::Format(_))));
    }
}
