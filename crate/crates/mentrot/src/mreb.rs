//! Binary embedding files.
//!
//! ```text
//! "MREB" | version: u32 LE | header_len: u32 LE | header: UTF-8 JSON | count×dim f32 LE
//! ```
//!
//! The header holds `model_id`, `layer`, `dim`, `count` and `pooling`.
//! Any further keys (preprocessing descriptors and the like) are kept
//! verbatim in [`MrebHeader::extra`].

use std::fs;
use std::path::{Path, PathBuf};

use mentrot_core::embed::{EmbedError, EmbeddingSet, Pooling};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{write_atomic, Error, Result};

pub const MAGIC: [u8; 4] = *b"MREB";
pub const VERSION: u32 = 1;
/// Headers beyond this size are rejected before allocating.
pub const MAX_HEADER_LEN: u32 = 16 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrebHeader {
    pub model_id: String,
    pub layer: u32,
    pub dim: usize,
    pub count: usize,
    pub pooling: Pooling,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum MrebError {
    #[error("bad magic {0:?}, expected \"MREB\"")]
    BadMagic([u8; 4]),
    #[error("format version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("file ends inside the header ({got} of {needed} bytes)")]
    TruncatedHeader { needed: u64, got: u64 },
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("payload has {got} bytes, header promises {expected}")]
    TruncatedPayload { expected: u64, got: u64 },
    #[error("{0} bytes after the payload")]
    TrailingBytes(u64),
    #[error("non-finite value at vector {vector}, component {component}")]
    NonFiniteValue { vector: usize, component: usize },
    #[error(transparent)]
    Embed(EmbedError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrebFile {
    pub header: MrebHeader,
    pub set: EmbeddingSet,
}

impl MrebHeader {
    pub fn for_set(set: &EmbeddingSet) -> Self {
        Self {
            model_id: set.model_id.clone(),
            layer: set.layer,
            dim: set.dim(),
            count: set.count(),
            pooling: set.pooling,
            extra: Map::new(),
        }
    }
}

pub fn encode(set: &EmbeddingSet, extra: &Map<String, Value>) -> Vec<u8> {
    let header = MrebHeader {
        extra: extra.clone(),
        ..MrebHeader::for_set(set)
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + set.data().len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for v in set.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Parses the fixed prefix and JSON header; returns the header and the
/// payload offset.
pub fn decode_header(bytes: &[u8]) -> Result<(MrebHeader, usize), MrebError> {
    if bytes.len() < 12 {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(MrebError::BadMagic(bytes[..4].try_into().unwrap()));
        }
        return Err(MrebError::TruncatedHeader {
            needed: 12,
            got: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(MrebError::BadMagic(magic));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(MrebError::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    let len = u32_at(bytes, 8);
    if len > MAX_HEADER_LEN {
        return Err(MrebError::BadHeader(format!("header length {len} exceeds {MAX_HEADER_LEN}")));
    }
    let end = 12 + len as usize;
    if bytes.len() < end {
        return Err(MrebError::TruncatedHeader {
            needed: end as u64,
            got: bytes.len() as u64,
        });
    }
    let header: MrebHeader = serde_json::from_slice(&bytes[12..end]).map_err(|e| MrebError::BadHeader(e.to_string()))?;
    if header.dim == 0 {
        return Err(MrebError::BadHeader("dim is 0".into()));
    }
    Ok((header, end))
}

pub fn decode(bytes: &[u8]) -> Result<MrebFile, MrebError> {
    let (header, start) = decode_header(bytes)?;
    let expected = (header.count as u64)
        .checked_mul(header.dim as u64)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| MrebError::BadHeader("count × dim overflows".into()))?;
    let got = (bytes.len() - start) as u64;
    if got < expected {
        return Err(MrebError::TruncatedPayload { expected, got });
    }
    if got > expected {
        return Err(MrebError::TrailingBytes(got - expected));
    }
    let data: Vec<f32> = bytes[start..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(MrebError::NonFiniteValue {
            vector: i / header.dim,
            component: i % header.dim,
        });
    }
    let set = EmbeddingSet::new(header.model_id.clone(), header.layer, header.pooling, header.dim, data)
        .map_err(MrebError::Embed)?;
    Ok(MrebFile { header, set })
}

pub fn read(path: &Path) -> Result<MrebFile> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode(&bytes).map_err(|source| Error::Mreb {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads only the fixed prefix and JSON header.
pub fn read_header(path: &Path) -> Result<MrebHeader> {
    use std::io::Read;
    let wrap = |source| Error::Mreb {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::open(path).map_err(Error::io(path))?;
    let mut buf = Vec::new();
    f.by_ref().take(12).read_to_end(&mut buf).map_err(Error::io(path))?;
    if buf.len() == 12 {
        let len = u32_at(&buf, 8).min(MAX_HEADER_LEN + 1);
        f.take(len as u64).read_to_end(&mut buf).map_err(Error::io(path))?;
    }
    decode_header(&buf).map(|(h, _)| h).map_err(wrap)
}

pub fn write(path: &Path, set: &EmbeddingSet, extra: &Map<String, Value>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    write_atomic(path, &encode(set, extra))
}

/// `{root}/{variant}/{model_id}/layer_{k}.mreb`
pub fn layer_path(root: &Path, variant: &str, model_id: &str, layer: u32) -> PathBuf {
    root.join(variant).join(model_id).join(format!("layer_{layer}.mreb"))
}

/// `layer_{k}.mreb` files of a directory, ordered by layer.
pub fn discover_layers(dir: &Path) -> Result<Vec<(u32, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(Error::io(dir))? {
        let path = entry.map_err(Error::io(dir))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(k) = name
            .strip_prefix("layer_")
            .and_then(|r| r.strip_suffix(".mreb"))
            .and_then(|k| k.parse::<u32>().ok())
        {
            out.push((k, path));
        }
    }
    out.sort();
    Ok(out)
}
